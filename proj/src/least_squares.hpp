#pragma once

// Small dense OLS helper shared by the marginal fits and the residual
// variance refit. Internal to the library.

#include "chima/types.hpp"

#include <Eigen/QR>

#include <string>

namespace chima::detail {

// [X, C] plus a trailing column of ones when `intercept`.
Matrix exposure_design(const Dataset& data, bool intercept);

class LeastSquares {
 public:
  // NumericalError (tagged with `module`) if `design` is rank deficient or
  // has no residual degrees of freedom.
  LeastSquares(Matrix design, const std::string& module);

  Vector coefficients(const Eigen::Ref<const Vector>& y) const { return qr_.solve(y); }
  Vector residuals(const Eigen::Ref<const Vector>& y) const { return y - design_ * coefficients(y); }
  Index residual_df() const { return design_.rows() - design_.cols(); }
  // Diagonal entry i of (D^T D)^{-1}.
  double inverse_gram_diagonal(Index i) const { return inverse_gram_(i, i); }
  const Matrix& design() const { return design_; }

 private:
  Matrix design_;
  Eigen::ColPivHouseholderQR<Matrix> qr_;
  Matrix inverse_gram_;
};

}  // namespace chima::detail
