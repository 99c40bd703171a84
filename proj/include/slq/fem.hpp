#pragma once

#include <Eigen/Dense>
#include <functional>

namespace slq {

struct Mesh1D {
  double a = 0.0;
  double b = 1.0;
  int n_elements = 2;
  double h = 0.5;
};

/// P1 finite elements on a uniform mesh of (a,b) with homogeneous Dirichlet
/// conditions. Canonical coordinates are spectral: columns of `eigenvectors`
/// solve K phi = lambda M phi and are M-orthonormal, so L2 inner products of
/// coefficient vectors are plain dot products and the discrete Laplacian acts
/// diagonally as -lambda_i.
struct FemSpace {
  Mesh1D mesh;
  int dim = 0;  // interior node count
  Eigen::MatrixXd mass;
  Eigen::MatrixXd stiffness;
  Eigen::VectorXd eigenvalues;   // ascending, all positive
  Eigen::MatrixXd eigenvectors;  // Phi, Phi^T M Phi = I
};

FemSpace assemble_space(double a, double b, int n_elements);

/// A member of the FE space, stored by spectral coefficients.
struct FemFunction {
  const FemSpace* space = nullptr;
  Eigen::VectorXd coeffs;
};

FemFunction zero_function(const FemSpace& space);
FemFunction from_spectral(const FemSpace& space, const Eigen::VectorXd& coeffs);
FemFunction from_nodal(const FemSpace& space, const Eigen::VectorXd& nodal);

/// L2 projection Pi_h f. Load vector by composite 3-point Gauss-Legendre
/// quadrature per element, then c_hat = Phi^T b.
FemFunction project_l2(const std::function<double(double)>& f, const FemSpace& space);

/// sqrt(sum_i lambda_i^gamma chat_i^2); gamma = 0 is the L2 norm.
double norm_gamma(const FemFunction& v, int gamma);

double l2_norm(const FemFunction& v);
double inner(const FemFunction& u, const FemFunction& v);

/// Values at interior nodes, c = Phi c_hat.
Eigen::VectorXd nodal_values(const FemFunction& v);

/// Piecewise-linear evaluation of interior nodal values at x (zero boundary).
double eval_nodal(const FemSpace& space, const Eigen::VectorXd& nodal, double x);

/// Nodal values on `fine` of the piecewise-linear function given by nodal
/// values on `coarse`. Exact when the meshes are nested.
Eigen::VectorXd prolong_nodal(const FemSpace& coarse, const Eigen::VectorXd& coarse_nodal,
                              const FemSpace& fine);

/// L2 norm of the function with the given interior nodal values,
/// sqrt(v^T M v) via the tridiagonal mass stencil.
double l2_norm_nodal(const FemSpace& space, const Eigen::VectorXd& nodal);

}  // namespace slq
