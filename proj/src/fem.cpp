#include "slq/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace slq {

FemSpace assemble_space(double a, double b, int n_elements) {
  if (!(a < b)) throw std::invalid_argument("assemble_space: need a < b");
  if (n_elements < 2) throw std::invalid_argument("assemble_space: need n_elements >= 2");

  FemSpace s;
  s.mesh = Mesh1D{a, b, n_elements, (b - a) / n_elements};
  s.dim = n_elements - 1;
  const double h = s.mesh.h;

  s.mass = Eigen::MatrixXd::Zero(s.dim, s.dim);
  s.stiffness = Eigen::MatrixXd::Zero(s.dim, s.dim);
  for (int i = 0; i < s.dim; ++i) {
    s.mass(i, i) = 4.0 * h / 6.0;
    s.stiffness(i, i) = 2.0 / h;
    if (i + 1 < s.dim) {
      s.mass(i, i + 1) = h / 6.0;
      s.mass(i + 1, i) = h / 6.0;
      s.stiffness(i, i + 1) = -1.0 / h;
      s.stiffness(i + 1, i) = -1.0 / h;
    }
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s.stiffness, s.mass);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("assemble_space: generalized eigensolver failed");
  s.eigenvalues = es.eigenvalues();
  s.eigenvectors = es.eigenvectors();  // M-orthonormal, eigenvalues ascending
  return s;
}

FemFunction zero_function(const FemSpace& space) {
  return FemFunction{&space, Eigen::VectorXd::Zero(space.dim)};
}

FemFunction from_spectral(const FemSpace& space, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != space.dim)
    throw std::invalid_argument("from_spectral: coefficient length mismatch");
  return FemFunction{&space, coeffs};
}

FemFunction from_nodal(const FemSpace& space, const Eigen::VectorXd& nodal) {
  if (nodal.size() != space.dim)
    throw std::invalid_argument("from_nodal: nodal length mismatch");
  return FemFunction{&space, space.eigenvectors.transpose() * (space.mass * nodal)};
}

FemFunction project_l2(const std::function<double(double)>& f, const FemSpace& space) {
  const double h = space.mesh.h;
  const double a = space.mesh.a;
  // 3-point Gauss-Legendre on [-1,1]
  static const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.dim);
  for (int e = 0; e < space.mesh.n_elements; ++e) {
    const double xl = a + e * h;
    for (int q = 0; q < 3; ++q) {
      const double x = xl + 0.5 * h * (gx[q] + 1.0);
      const double fx = f(x);
      if (!std::isfinite(fx))
        throw std::invalid_argument("project_l2: f is not finite inside the domain");
      const double w = 0.5 * h * gw[q];
      const double tloc = (x - xl) / h;  // in (0,1)
      // hat function of left node (interior index e-1) decreasing, right node (e) increasing
      if (e > 0) load(e - 1) += w * fx * (1.0 - tloc);
      if (e < space.mesh.n_elements - 1) load(e) += w * fx * tloc;
    }
  }
  // c_hat = Phi^T M (M^{-1} load) = Phi^T load
  return FemFunction{&space, space.eigenvectors.transpose() * load};
}

double norm_gamma(const FemFunction& v, int gamma) {
  const FemSpace& s = *v.space;
  double acc = 0.0;
  for (int i = 0; i < s.dim; ++i)
    acc += std::pow(s.eigenvalues(i), gamma) * v.coeffs(i) * v.coeffs(i);
  return std::sqrt(acc);
}

double l2_norm(const FemFunction& v) { return v.coeffs.norm(); }

double inner(const FemFunction& u, const FemFunction& v) { return u.coeffs.dot(v.coeffs); }

Eigen::VectorXd nodal_values(const FemFunction& v) { return v.space->eigenvectors * v.coeffs; }

double eval_nodal(const FemSpace& space, const Eigen::VectorXd& nodal, double x) {
  const double a = space.mesh.a, b = space.mesh.b, h = space.mesh.h;
  if (x <= a || x >= b) return 0.0;
  int e = static_cast<int>((x - a) / h);
  if (e >= space.mesh.n_elements) e = space.mesh.n_elements - 1;
  const double xl = a + e * h;
  const double t = (x - xl) / h;
  const double vl = (e > 0) ? nodal(e - 1) : 0.0;
  const double vr = (e < space.mesh.n_elements - 1) ? nodal(e) : 0.0;
  return vl * (1.0 - t) + vr * t;
}

Eigen::VectorXd prolong_nodal(const FemSpace& coarse, const Eigen::VectorXd& coarse_nodal,
                              const FemSpace& fine) {
  Eigen::VectorXd out(fine.dim);
  for (int j = 0; j < fine.dim; ++j) {
    const double x = fine.mesh.a + (j + 1) * fine.mesh.h;
    out(j) = eval_nodal(coarse, coarse_nodal, x);
  }
  return out;
}

double l2_norm_nodal(const FemSpace& space, const Eigen::VectorXd& nodal) {
  const double h = space.mesh.h;
  const int d = space.dim;
  double acc = 0.0;
  for (int i = 0; i < d; ++i) {
    const double left = (i > 0) ? nodal(i - 1) : 0.0;
    const double right = (i + 1 < d) ? nodal(i + 1) : 0.0;
    acc += nodal(i) * (h / 6.0) * (left + 4.0 * nodal(i) + right);
  }
  return std::sqrt(acc);
}

}  // namespace slq
