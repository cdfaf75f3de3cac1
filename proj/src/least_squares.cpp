#include "least_squares.hpp"

#include "chima/errors.hpp"

namespace chima::detail {

Matrix exposure_design(const Dataset& data, bool intercept) {
  const Index n = data.n();
  Matrix d(n, 1 + data.q() + (intercept ? 1 : 0));
  d.col(0) = data.exposure;
  if (data.q() > 0) d.middleCols(1, data.q()) = data.covariates;
  if (intercept) d.col(d.cols() - 1).setOnes();
  return d;
}

LeastSquares::LeastSquares(Matrix design, const std::string& module)
    : design_(std::move(design)), qr_(design_) {
  if (qr_.rank() < design_.cols()) {
    throw NumericalError(module, "rank-deficient regression design (" + std::to_string(qr_.rank()) +
                                     " of " + std::to_string(design_.cols()) + " columns independent)");
  }
  if (residual_df() <= 0) {
    throw NumericalError(module, "no residual degrees of freedom (" + std::to_string(design_.rows()) +
                                     " rows, " + std::to_string(design_.cols()) + " columns)");
  }
  const Matrix gram = design_.transpose() * design_;
  inverse_gram_ = gram.llt().solve(Matrix::Identity(gram.rows(), gram.cols()));
}

}  // namespace chima::detail
