#include "chima/screening.hpp"

#include "chima/errors.hpp"
#include "chima/parallel.hpp"
#include "least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace chima {

namespace {

constexpr const char* kModule = "screening";

// Below this reciprocal condition estimate the k = 0 Gram matrix is treated
// as singular.
constexpr double kSingularRcond = 1e-12;

}  // namespace

Index default_screen_size(Index n) {
  return static_cast<Index>(std::ceil(static_cast<double>(n) / std::log(static_cast<double>(n))));
}

Index baseline_screen_size(Index n) {
  return static_cast<Index>(std::ceil(2.0 * static_cast<double>(n) / std::log(static_cast<double>(n))));
}

Matrix gram_matrix(const Dataset& data) {
  const Index n = data.n();
  Matrix gram = Matrix::Zero(n, n);
  auto lower = gram.selfadjointView<Eigen::Lower>();
  lower.rankUpdate(data.mediators);
  lower.rankUpdate(data.exposure);
  if (data.q() > 0) lower.rankUpdate(data.covariates);
  return Matrix(lower);
}

Vector rholp_estimates(const Dataset& data, double k) {
  return rholp_estimates(data, k, gram_matrix(data));
}

Vector rholp_estimates(const Dataset& data, double k, const Matrix& gram) {
  const Index n = data.n();
  const Index p = data.p();
  const Index q = data.q();
  if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError(kModule, "ridge constant k must be >= 0");
  if (gram.rows() != n || gram.cols() != n) throw std::invalid_argument("Gram matrix has wrong shape");
  if (k == 0.0 && p + 1 + q < n) {
    throw NumericalError(kModule, "singular Gram matrix at k = 0: p + 1 + q < n");
  }

  Matrix shifted = gram;
  shifted.diagonal().array() += k;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success || (k == 0.0 && llt.rcond() < kSingularRcond)) {
    throw NumericalError(kModule, "singular Gram matrix (Z Z^T + kI not positive definite); use k > 0");
  }
  const Vector weights = llt.solve(data.outcome);

  Vector coef(p + 1 + q);
  coef.head(p).noalias() = data.mediators.transpose() * weights;
  coef(p) = data.exposure.dot(weights);
  if (q > 0) coef.tail(q).noalias() = data.covariates.transpose() * weights;
  if (!coef.allFinite()) throw NumericalError(kModule, "non-finite RHOLP estimate (ill-conditioned design)");
  return coef;
}

MarginalAlphaFit marginal_alpha_fit(const Dataset& data, bool intercept, int threads) {
  const detail::LeastSquares ls(detail::exposure_design(data, intercept), kModule);
  const Index p = data.p();
  const double df = static_cast<double>(ls.residual_df());
  const double inv_xx = ls.inverse_gram_diagonal(0);

  MarginalAlphaFit fit;
  fit.alpha_hat.resize(p);
  fit.se_alpha.resize(p);
  fit.sigma_u2.resize(p);
  parallel_for(p, threads, [&](std::int64_t j) {
    const Vector coef = ls.coefficients(data.mediators.col(j));
    const double rss = (data.mediators.col(j) - ls.design() * coef).squaredNorm();
    fit.alpha_hat(j) = coef(0);
    fit.sigma_u2(j) = rss / df;
    fit.se_alpha(j) = std::sqrt(inv_xx * fit.sigma_u2(j));
  });
  return fit;
}

Vector marginal_outcome_coefficients(const Dataset& data, bool intercept, int threads) {
  // Frisch-Waugh: the M_j coefficient in Y ~ [M_j, D] equals the slope of the
  // D-residualised Y on the D-residualised M_j.
  const detail::LeastSquares ls(detail::exposure_design(data, intercept), kModule);
  const Vector y_resid = ls.residuals(data.outcome);
  const Index p = data.p();
  Vector out(p);
  parallel_for(p, threads, [&](std::int64_t j) {
    const Vector m_resid = ls.residuals(data.mediators.col(j));
    const double ss = m_resid.squaredNorm();
    if (ss <= 1e-12 * std::max(1.0, data.mediators.col(j).squaredNorm())) {
      throw NumericalError(kModule, "rank-deficient marginal outcome design for mediator " +
                                        data.mediator_names[static_cast<std::size_t>(j)]);
    }
    out(j) = m_resid.dot(y_resid) / ss;
  });
  return out;
}

namespace {

CandidateSet top_by_score(const Vector& scores, Index d) {
  const Index p = scores.size();
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  for (Index j = 0; j < p; ++j) {
    if (std::isnan(scores(j))) throw std::invalid_argument("NaN screening score");
  }
  const Index keep = std::min(d, p);
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + keep, order.end(), [&](Index a, Index b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  });
  order.resize(static_cast<std::size_t>(keep));
  std::vector<double> kept;
  kept.reserve(order.size());
  for (Index j : order) kept.push_back(scores(j));
  return CandidateSet(std::move(order), std::move(kept), d, p);
}

}  // namespace

CandidateSet select_candidates(const Vector& alpha_hat, const Vector& beta_tilde, Index d) {
  if (alpha_hat.size() != beta_tilde.size()) throw std::invalid_argument("alpha_hat and beta_tilde differ in length");
  return top_by_score((alpha_hat.array() * beta_tilde.array()).abs().matrix(), d);
}

CandidateSet baseline_screen(const Dataset& data, BaselineStrategy strategy, Index d, bool intercept,
                             int threads) {
  const MarginalAlphaFit fit = marginal_alpha_fit(data, intercept, threads);
  switch (strategy) {
    case BaselineStrategy::alpha_sis:
      return top_by_score(fit.alpha_hat.cwiseAbs(), d);
    case BaselineStrategy::product_sis: {
      const Vector beta_check = marginal_outcome_coefficients(data, intercept, threads);
      return top_by_score((fit.alpha_hat.array() * beta_check.array()).abs().matrix(), d);
    }
  }
  throw std::invalid_argument("unknown baseline strategy");
}

Dataset center_columns(const Dataset& data) {
  Dataset out = data;
  out.exposure.array() -= out.exposure.mean();
  out.outcome.array() -= out.outcome.mean();
  out.mediators.rowwise() -= out.mediators.colwise().mean();
  if (out.q() > 0) out.covariates.rowwise() -= out.covariates.colwise().mean();
  return out;
}

Dataset standardize_columns(const Dataset& data) {
  const double denom = static_cast<double>(data.n() - 1);
  auto scale = [&](auto&& col, const std::string& what) {
    const double sd = std::sqrt((col.array() - col.mean()).square().sum() / denom);
    if (!(sd > 0.0)) throw DataError(kModule, "cannot standardize constant column " + what);
    col /= sd;
  };
  Dataset out = data;
  scale(out.exposure, "exposure");
  for (Index j = 0; j < out.p(); ++j) scale(out.mediators.col(j), out.mediator_names[static_cast<std::size_t>(j)]);
  for (Index c = 0; c < out.q(); ++c) scale(out.covariates.col(c), "covariate " + std::to_string(c));
  return out;
}

}  // namespace chima
