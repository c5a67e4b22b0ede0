#include "advsvm/numerics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace advsvm {

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw ConstructionError("SymMatrix requires a square matrix");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zero(Eigen::Index n) {
  return SymMatrix(Eigen::MatrixXd::Zero(n, n));
}

SymMatrix SymMatrix::identity(Eigen::Index n) {
  return SymMatrix(Eigen::MatrixXd::Identity(n, n));
}

double erf(double x) { return std::erf(x); }

double erf_inv(double p) {
  if (!(p > -1.0 && p < 1.0)) {
    throw std::domain_error("erf_inv requires p in (-1, 1)");
  }
  if (p == 0.0) return 0.0;

  // Winitzki's approximation as the seed.
  const double a = 0.147;
  const double l = std::log(1.0 - p * p);
  const double t = 2.0 / (std::numbers::pi * a) + 0.5 * l;
  double x = std::copysign(std::sqrt(std::sqrt(t * t - l / a) - t), p);

  const double two_over_sqrt_pi = 2.0 / std::sqrt(std::numbers::pi);
  for (int i = 0; i < 8; ++i) {
    const double err = std::erf(x) - p;
    const double deriv = two_over_sqrt_pi * std::exp(-x * x);
    if (deriv == 0.0) break;
    const double step = err / deriv;
    x -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(x))) break;
  }
  return x;
}

Eigen::MatrixXd cholesky_lower(const SymMatrix& m) {
  const Eigen::Index n = m.order();
  const Eigen::MatrixXd& a = m.mat();
  const double tol = 1e-12 * std::max(a.diagonal().maxCoeff(), 0.0);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > tol)) {
      throw NotPdError("matrix is not positive definite (pivot " +
                       std::to_string(d) + " at index " + std::to_string(j) +
                       ")");
    }
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

double min_eigenvalue(const SymMatrix& m) {
  if (m.order() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat(),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd psd_sqrt(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat());
  const Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace advsvm
