#include "chima/ao_inference.hpp"

#include "chima/errors.hpp"
#include "chima/screening.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace chima {

namespace {

constexpr const char* kModule = "ao_inference";
constexpr double kDowndateFloor = 1e-12;
constexpr double kDegenerateProjection = 1e-12;

Dataset row_subset(const Dataset& data, Index parity) {
  std::vector<Index> rows;
  for (Index i = parity; i < data.n(); i += 2) rows.push_back(i);
  const auto m = static_cast<Index>(rows.size());
  Dataset half;
  half.exposure.resize(m);
  half.outcome.resize(m);
  half.mediators.resize(m, data.p());
  half.covariates.resize(m, data.q());
  for (Index r = 0; r < m; ++r) {
    const Index i = rows[static_cast<std::size_t>(r)];
    half.exposure(r) = data.exposure(i);
    half.outcome(r) = data.outcome(i);
    half.mediators.row(r) = data.mediators.row(i);
    if (data.q() > 0) half.covariates.row(r) = data.covariates.row(i);
  }
  half.mediator_names = data.mediator_names;
  return half;
}

}  // namespace

std::string ao_design_name(AoDesign design) {
  return design == AoDesign::all_mediators ? "all" : "candidates";
}

AoDesign parse_ao_design(const std::string& name) {
  if (name == "candidates") return AoDesign::candidates;
  if (name == "all") return AoDesign::all_mediators;
  throw ConfigError(kModule, "unknown projection design '" + name + "' (candidates, all)");
}

std::string sigma_eps_method_name(SigmaEpsMethod method) {
  return method == SigmaEpsMethod::refit_on_candidates ? "refit" : "rcv";
}

SigmaEpsMethod parse_sigma_eps_method(const std::string& name) {
  if (name == "rcv") return SigmaEpsMethod::refitted_cross_validation;
  if (name == "refit") return SigmaEpsMethod::refit_on_candidates;
  throw ConfigError(kModule, "unknown residual variance method '" + name + "' (rcv, refit)");
}

SigmaEpsFit estimate_sigma_eps2_rcv(const Dataset& data, double k, bool intercept) {
  const std::array<Dataset, 2> halves{row_subset(data, 0), row_subset(data, 1)};
  const Index fixed_cols = 1 + data.q() + (intercept ? 1 : 0);
  std::array<CandidateSet, 2> screens;
  for (std::size_t h = 0; h < 2; ++h) {
    const Index m = halves[h].n();
    const Index d = std::min({default_screen_size(m), m - fixed_cols - 1, data.p()});
    if (d < 1) {
      throw NumericalError(kModule, "cross-validation half of " + std::to_string(m) + " rows is too small for the refit");
    }
    const Vector beta_tilde = rholp_estimates(halves[h], k).head(data.p());
    screens[h] = select_candidates(Vector::Ones(data.p()), beta_tilde, d);
  }

  SigmaEpsFit fit;
  for (std::size_t h = 0; h < 2; ++h) {
    const SigmaEpsFit part = estimate_sigma_eps2(halves[1 - h], screens[h], intercept);
    fit.sigma2 += 0.5 * part.sigma2;
    fit.df += part.df;
    fit.dropped_mediators.insert(fit.dropped_mediators.end(), part.dropped_mediators.begin(),
                                 part.dropped_mediators.end());
    fit.dropped_other = std::max(fit.dropped_other, part.dropped_other);
  }
  std::sort(fit.dropped_mediators.begin(), fit.dropped_mediators.end());
  fit.dropped_mediators.erase(std::unique(fit.dropped_mediators.begin(), fit.dropped_mediators.end()),
                              fit.dropped_mediators.end());
  return fit;
}

SigmaEpsFit estimate_sigma_eps2(const Dataset& data, const CandidateSet& candidates, bool intercept) {
  const Index n = data.n();
  const Index s = static_cast<Index>(candidates.size());
  const Index cols = s + 1 + data.q() + (intercept ? 1 : 0);
  if (cols >= n) {
    throw NumericalError(kModule, "residual variance refit needs fewer than n = " + std::to_string(n) +
                                      " columns, got " + std::to_string(cols));
  }

  Matrix design(n, cols);
  for (Index c = 0; c < s; ++c) design.col(c) = data.mediators.col(candidates.indices()[static_cast<std::size_t>(c)]);
  design.col(s) = data.exposure;
  if (data.q() > 0) design.middleCols(s + 1, data.q()) = data.covariates;
  if (intercept) design.col(cols - 1).setOnes();

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  const Index rank = qr.rank();

  SigmaEpsFit fit;
  Matrix kept_design = design;
  if (rank < cols) {
    // Columns past the rank in pivot order are the collinear ones.
    std::vector<Index> keep;
    const auto& perm = qr.colsPermutation().indices();
    for (Index r = 0; r < cols; ++r) {
      const Index col = perm(r);
      if (r < rank) {
        keep.push_back(col);
      } else if (col < s) {
        fit.dropped_mediators.push_back(candidates.indices()[static_cast<std::size_t>(col)]);
      } else {
        ++fit.dropped_other;
      }
    }
    std::sort(keep.begin(), keep.end());
    std::sort(fit.dropped_mediators.begin(), fit.dropped_mediators.end());
    kept_design.resize(n, static_cast<Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) kept_design.col(static_cast<Index>(c)) = design.col(keep[c]);
  }

  const Vector coef = kept_design.colPivHouseholderQr().solve(data.outcome);
  const double rss = (data.outcome - kept_design * coef).squaredNorm();
  fit.df = n - kept_design.cols();
  fit.sigma2 = rss / static_cast<double>(fit.df);
  return fit;
}

AoContext AoContext::build(const Dataset& data, const CandidateSet& candidates, const AoConfig& config,
                           const Matrix* gram) {
  if (!(config.delta > 0.0) || !std::isfinite(config.delta)) throw ConfigError(kModule, "delta must be > 0");
  AoContext ctx;
  ctx.data_ = &data;
  ctx.candidates_ = candidates;
  ctx.delta_ = config.delta;
  ctx.design_ = config.design;
  if (config.design == AoDesign::all_mediators) {
    ctx.shifted_gram_ = gram ? *gram : gram_matrix(data);
  } else {
    Matrix selected(data.n(), static_cast<Index>(candidates.size()));
    for (Index c = 0; c < selected.cols(); ++c) {
      selected.col(c) = data.mediators.col(candidates.indices()[static_cast<std::size_t>(c)]);
    }
    Matrix lower = Matrix::Zero(data.n(), data.n());
    auto view = lower.selfadjointView<Eigen::Lower>();
    view.rankUpdate(selected);
    view.rankUpdate(data.exposure);
    if (data.q() > 0) view.rankUpdate(data.covariates);
    ctx.shifted_gram_ = Matrix(view);
  }
  if (ctx.shifted_gram_.rows() != data.n() || ctx.shifted_gram_.cols() != data.n()) {
    throw std::invalid_argument("Gram matrix has wrong shape");
  }
  ctx.shifted_gram_.diagonal().array() += config.delta;
  ctx.llt_.compute(ctx.shifted_gram_);
  if (ctx.llt_.info() != Eigen::Success) {
    throw NumericalError(kModule, "Z Z^T + delta I is not numerically positive definite; increase delta");
  }
  ctx.sigma_ = config.sigma_eps_method == SigmaEpsMethod::refit_on_candidates
                   ? estimate_sigma_eps2(data, candidates, config.intercept)
                   : estimate_sigma_eps2_rcv(data, config.screen_k, config.intercept);
  return ctx;
}

AoProjection ao_projection(const AoContext& context, Index j) {
  const Dataset& data = context.dataset();
  if (j < 0 || j >= data.p()) throw std::out_of_range("mediator index out of range");
  const auto m = data.mediators.col(j);

  AoProjection out;
  const Vector g_inv_m = context.solve(m);
  if (!context.in_design(j)) {
    out.v = context.delta() * g_inv_m;
    return out;
  }
  const double denom = 1.0 - m.dot(g_inv_m);
  if (std::abs(denom) > kDowndateFloor) {
    out.v = (context.delta() / denom) * g_inv_m;
    return out;
  }

  Matrix direct = context.factor_source();
  direct.selfadjointView<Eigen::Lower>().rankUpdate(Vector(m), -1.0);
  direct = Matrix(direct.selfadjointView<Eigen::Lower>());
  Eigen::LLT<Matrix> llt(direct);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(kModule, "downdated system for mediator " +
                                      data.mediator_names[static_cast<std::size_t>(j)] +
                                      " is not positive definite; increase delta");
  }
  out.v = context.delta() * llt.solve(Vector(m));
  out.used_fallback = true;
  return out;
}

BetaTest ao_beta_test(const AoContext& context, Index j, const Vector& v) {
  const Dataset& data = context.dataset();
  const auto m = data.mediators.col(j);
  const double vm = v.dot(m);
  if (!(std::abs(vm) > kDegenerateProjection * v.norm() * m.norm())) {
    throw NumericalError(kModule, "degenerate projection v^T M_j for mediator " +
                                      data.mediator_names[static_cast<std::size_t>(j)]);
  }
  return beta_test_from_products(vm, v.dot(data.outcome), v.squaredNorm(), context.sigma_eps2());
}

BetaTest beta_test_from_products(double v_dot_m, double v_dot_y, double v_dot_v, double sigma_eps2) {
  BetaTest t;
  t.beta_hat = v_dot_y / v_dot_m;
  t.se_beta = std::sqrt(v_dot_v * sigma_eps2) / std::abs(v_dot_m);
  if (t.se_beta > 0.0) {
    t.p_beta = two_sided_p(t.beta_hat / t.se_beta);
  } else {
    t.p_beta = t.beta_hat == 0.0 ? 1.0 : 0.0;
  }
  return t;
}

double two_sided_p(double z) {
  if (std::isnan(z)) throw std::invalid_argument("two_sided_p: z is NaN");
  return std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0, 1.0);
}

double ao_bias(const Dataset& data, const ModelTruth& truth, Index j, const Vector& v) {
  if (truth.beta.size() != data.p()) throw std::invalid_argument("truth does not match dataset");
  Vector nuisance = truth.gamma * data.exposure;
  for (Index k = 0; k < data.p(); ++k) {
    if (k != j && truth.beta(k) != 0.0) nuisance += truth.beta(k) * data.mediators.col(k);
  }
  return v.dot(nuisance) / v.dot(data.mediators.col(j));
}

}  // namespace chima
