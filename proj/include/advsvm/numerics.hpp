#pragma once

#include <Eigen/Dense>

#include "advsvm/errors.hpp"

namespace advsvm {

// Dense symmetric matrix. Construction averages the input with its transpose,
// which makes entries(i,j) == entries(j,i) hold exactly in floating point.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Eigen::MatrixXd& m);

  static SymMatrix zero(Eigen::Index n);
  static SymMatrix identity(Eigen::Index n);

  Eigen::Index order() const { return m_.rows(); }
  const Eigen::MatrixXd& mat() const { return m_; }
  operator const Eigen::MatrixXd&() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }

 private:
  Eigen::MatrixXd m_;
};

// Error function, accurate to 1e-14 absolute on finite reals.
double erf(double x);

// Inverse of erf on (-1, 1): rational seed refined by Newton iterations
// until erf(erf_inv(p)) = p to 1e-12 absolute. Throws std::domain_error
// outside the open interval.
double erf_inv(double p);

// Lower Cholesky factor with strictly positive diagonal. A pivot at or below
// 1e-12 times the largest diagonal entry of the input raises NotPdError.
Eigen::MatrixXd cholesky_lower(const SymMatrix& m);

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const SymMatrix& m);

// Symmetric square root with negative eigenvalues clamped to zero, so it is
// total on nearly-PSD inputs produced by solvers.
Eigen::MatrixXd psd_sqrt(const SymMatrix& m);

}  // namespace advsvm
