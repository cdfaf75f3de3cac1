#include "chima/pipeline.hpp"

#include "chima/ao_inference.hpp"
#include "chima/errors.hpp"
#include "chima/parallel.hpp"
#include "chima/screening.hpp"

#include <optional>

namespace chima {

namespace {

// Residual variances at rounding level relative to the response scale count
// as exact fits.
bool negligible_variance(double var, const Eigen::Ref<const Vector>& response) {
  const double scale = response.squaredNorm() / static_cast<double>(response.size());
  return !(var > 1e-24 * scale);
}

}  // namespace

ChimaResult run_chima(const Dataset& data, const ChimaConfig& config, const ProjectionObserver& observer) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ConfigError("pipeline", "alpha must lie in (0, 1)");
  const Index d = config.d > 0 ? config.d : default_screen_size(data.n());
  if (d > data.p()) {
    throw ConfigError("pipeline", "d = " + std::to_string(d) + " exceeds p = " + std::to_string(data.p()));
  }

  // Centring is the intercept for the Gram-based steps; the OLS fits add an
  // explicit intercept column on top (harmless on centred data, and it keeps
  // the degrees of freedom right).
  std::optional<Dataset> centered;
  if (config.intercept) centered = center_columns(data);
  const Dataset& work = centered ? *centered : data;

  const Matrix gram = gram_matrix(work);
  ChimaResult result;
  if (config.standardize) {
    const Dataset scaled = standardize_columns(work);
    result.beta_tilde = rholp_estimates(scaled, config.k).head(data.p());
  } else {
    result.beta_tilde = rholp_estimates(work, config.k, gram).head(data.p());
  }

  const MarginalAlphaFit alpha_fit = marginal_alpha_fit(work, config.intercept, config.threads);
  result.candidates = select_candidates(alpha_fit.alpha_hat, result.beta_tilde, d);

  AoConfig ao_config;
  ao_config.delta = config.delta;
  ao_config.intercept = config.intercept;
  ao_config.design = config.ao_design;
  ao_config.sigma_eps_method = config.sigma_eps_method;
  ao_config.screen_k = config.k;
  const AoContext context = AoContext::build(work, result.candidates, ao_config, &gram);
  result.sigma_eps2 = context.sigma_eps2();
  result.dropped_from_refit = context.sigma_eps_fit().dropped_mediators;

  const auto& idx = result.candidates.indices();
  const auto count = static_cast<std::int64_t>(idx.size());
  result.tests.resize(idx.size());
  std::vector<char> fallback(idx.size(), 0);
  parallel_for(count, config.threads, [&](std::int64_t c) {
    const Index j = idx[static_cast<std::size_t>(c)];
    const AoProjection proj = ao_projection(context, j);
    if (observer) observer(j, proj.v);
    const BetaTest bt = ao_beta_test(context, j, proj.v);
    const double a = alpha_fit.alpha_hat(j);
    const double se_a = alpha_fit.se_alpha(j);
    if (negligible_variance(alpha_fit.sigma_u2(j), work.mediators.col(j)) ||
        negligible_variance(context.sigma_eps2(), work.outcome) || !(se_a > 0.0) || !(bt.se_beta > 0.0)) {
      throw NumericalError("pipeline", "zero standard error for mediator " +
                                           data.mediator_names[static_cast<std::size_t>(j)] +
                                           " (exact fit)");
    }
    result.tests[static_cast<std::size_t>(c)] =
        TestRecord::make(j, a, se_a, two_sided_p(a / se_a), bt.beta_hat, bt.se_beta, bt.p_beta);
    fallback[static_cast<std::size_t>(c)] = proj.used_fallback ? 1 : 0;
  });
  for (char f : fallback) result.projection_fallbacks += f;

  const PairedPValues pairs = PairedPValues::from_records(result.tests);
  result.fdr = fit_fdr_model(pairs, config.lambda, config.alpha);
  result.discoveries = discover(pairs, result.fdr.t_hat);
  return result;
}

}  // namespace chima
