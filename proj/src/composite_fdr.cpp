#include "chima/composite_fdr.hpp"

#include "chima/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chima {

namespace {

constexpr const char* kModule = "composite_fdr";

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

PairedPValues::PairedPValues(std::vector<PValuePair> pairs) : pairs_(std::move(pairs)) {
  for (auto& pr : pairs_) {
    if (!in_unit(pr.p_alpha) || !in_unit(pr.p_beta)) throw std::invalid_argument("p-values must lie in [0, 1]");
    pr.p_max = std::max(pr.p_alpha, pr.p_beta);
  }
  std::sort(pairs_.begin(), pairs_.end(), [](const PValuePair& a, const PValuePair& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < pairs_.size(); ++i) {
    if (pairs_[i].index == pairs_[i - 1].index) throw std::invalid_argument("repeated index in p-value pairs");
  }
  sorted_p_max_.reserve(pairs_.size());
  for (const auto& pr : pairs_) sorted_p_max_.push_back(pr.p_max);
  std::sort(sorted_p_max_.begin(), sorted_p_max_.end());
}

PairedPValues PairedPValues::from_records(const std::vector<TestRecord>& records) {
  std::vector<PValuePair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) pairs.push_back({r.index, r.p_alpha, r.p_beta, r.p_max});
  return PairedPValues(std::move(pairs));
}

PairedPValues PairedPValues::from_values(const std::vector<std::pair<double, double>>& pa_pb) {
  std::vector<PValuePair> pairs;
  pairs.reserve(pa_pb.size());
  Index i = 0;
  for (const auto& [pa, pb] : pa_pb) pairs.push_back({i++, pa, pb, 0.0});
  return PairedPValues(std::move(pairs));
}

NullProportions estimate_null_proportions(const PairedPValues& pairs, double lambda) {
  if (pairs.empty()) throw DataError(kModule, "cannot estimate null proportions from an empty pair set");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError(kModule, "lambda must lie in (0, 1)");

  double both = 0, alpha_null = 0, beta_null = 0;
  for (const auto& pr : pairs.pairs()) {
    const bool a = pr.p_alpha > lambda;
    const bool b = pr.p_beta > lambda;
    both += (a && b) ? 1 : 0;
    alpha_null += a ? 1 : 0;
    beta_null += b ? 1 : 0;
  }
  const double s = static_cast<double>(pairs.size());
  const double tail = 1.0 - lambda;
  auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };

  const double pi00 = unit(both / (tail * tail * s));
  const double pi0_plus = unit(alpha_null / (tail * s));
  const double pi_plus0 = unit(beta_null / (tail * s));

  NullProportions out;
  out.pi00 = pi00;
  out.pi01 = std::max(pi0_plus - pi00, 0.0);
  out.pi10 = std::max(pi_plus0 - pi00, 0.0);
  const double total = out.pi00 + out.pi01 + out.pi10;
  if (total > 1.0) {
    out.pi00 /= total;
    out.pi01 /= total;
    out.pi10 /= total;
  }
  return out;
}

Index rejection_count(const PairedPValues& pairs, double t) {
  const auto& sorted = pairs.sorted_p_max();
  return static_cast<Index>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

double fdr_hat(const PairedPValues& pairs, const NullProportions& props, double t) {
  const double numerator = (props.pi01 + props.pi10) * t + props.pi00 * t * t;
  const double rejections = std::max<double>(1.0, static_cast<double>(rejection_count(pairs, t)));
  return numerator / (rejections / static_cast<double>(pairs.size()));
}

double find_threshold(const PairedPValues& pairs, const NullProportions& props, double alpha) {
  if (pairs.empty()) throw DataError(kModule, "cannot search a threshold over an empty pair set");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError(kModule, "alpha must lie in (0, 1)");
  const double linear = props.pi01 + props.pi10;
  const double quadratic = props.pi00;
  if (linear == 0.0 && quadratic == 0.0) return 1.0;

  // Left ends of the pieces on which R(t) is constant.
  std::vector<double> left{0.0};
  for (double v : pairs.sorted_p_max()) {
    if (v > left.back()) left.push_back(v);
  }
  const double s = static_cast<double>(pairs.size());

  for (std::size_t k = left.size(); k-- > 0;) {
    const double lo = left[k];
    if (fdr_hat(pairs, props, lo) > alpha) continue;

    const double hi = k + 1 < left.size() ? left[k + 1] : 1.0;
    const double budget = alpha * std::max<double>(1.0, static_cast<double>(rejection_count(pairs, lo))) / s;
    // Largest root of quadratic t^2 + linear t = budget, in the stable form.
    const double root = quadratic > 0.0 ? 2.0 * budget / (linear + std::sqrt(linear * linear + 4.0 * quadratic * budget))
                                        : budget / linear;
    double t = std::clamp(root, lo, hi);
    if (k + 1 < left.size() && t >= hi) t = std::nextafter(hi, lo);
    while (t > lo && fdr_hat(pairs, props, t) > alpha) t = std::nextafter(t, lo);
    return t;
  }
  return 0.0;
}

std::vector<Index> discover(const PairedPValues& pairs, double t_hat) {
  std::vector<Index> out;
  for (const auto& pr : pairs.pairs()) {
    if (pr.p_max <= t_hat) out.push_back(pr.index);
  }
  return out;
}

FdrModel fit_fdr_model(const PairedPValues& pairs, double lambda, double alpha) {
  const NullProportions props = estimate_null_proportions(pairs, lambda);
  FdrModel model;
  model.pi00 = props.pi00;
  model.pi01 = props.pi01;
  model.pi10 = props.pi10;
  model.lambda = lambda;
  model.alpha_level = alpha;
  model.t_hat = find_threshold(pairs, props, alpha);
  return model;
}

}  // namespace chima
