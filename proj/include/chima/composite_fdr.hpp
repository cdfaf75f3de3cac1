#pragma once

// Composite-null FDR control for H0: alpha_j beta_j = 0.
//
// The null is the union of H00 (both zero), H01 (alpha zero, beta nonzero)
// and H10 (alpha nonzero, beta zero). With lambda in (0, 1) and |S| pairs:
//   pi00 = #{p_alpha > lambda, p_beta > lambda} / ((1 - lambda)^2 |S|)
//   pi0+ = #{p_alpha > lambda} / ((1 - lambda) |S|)
//   pi+0 = #{p_beta > lambda} / ((1 - lambda) |S|)
//   pi01 = pi0+ - pi00,  pi10 = pi+0 - pi00
// and FDR(t) = (pi01 t + pi10 t + pi00 t^2) / (max(1, R(t)) / |S|) with
// R(t) = #{p_max <= t}.

#include "chima/types.hpp"

#include <vector>

namespace chima {

struct PValuePair {
  Index index = 0;
  double p_alpha = 1.0;
  double p_beta = 1.0;
  double p_max = 1.0;
};

// Validated list of p-value pairs over the candidate set. Stored sorted by
// index, so construction order does not matter.
class PairedPValues {
 public:
  PairedPValues() = default;
  // Throws std::invalid_argument on values outside [0, 1] or repeated indices.
  explicit PairedPValues(std::vector<PValuePair> pairs);
  static PairedPValues from_records(const std::vector<TestRecord>& records);
  // Convenience for tests: indices 0..k-1, p_max filled in.
  static PairedPValues from_values(const std::vector<std::pair<double, double>>& pa_pb);

  const std::vector<PValuePair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  // Sorted p_max values.
  const std::vector<double>& sorted_p_max() const { return sorted_p_max_; }

 private:
  std::vector<PValuePair> pairs_;
  std::vector<double> sorted_p_max_;
};

struct NullProportions {
  double pi00 = 0.0;
  double pi01 = 0.0;
  double pi10 = 0.0;
};

// Counting estimates above, then clamped: pi00, pi0+ and pi+0 are capped to
// [0, 1] before the differences are taken, the differences are floored at 0,
// and the triple is rescaled proportionally if its sum exceeds 1.
NullProportions estimate_null_proportions(const PairedPValues& pairs, double lambda);

// R(t)
Index rejection_count(const PairedPValues& pairs, double t);

double fdr_hat(const PairedPValues& pairs, const NullProportions& props, double t);

// sup { t in [0, 1] : fdr_hat(t) <= alpha }, exact: R(t) is piecewise constant
// between observed p_max values and FDR is increasing inside each piece, so
// the sup is the root of the quadratic numerator condition on the last piece
// whose left end passes. Returns 0 when no t > 0 qualifies.
double find_threshold(const PairedPValues& pairs, const NullProportions& props, double alpha);

// Indices with p_max <= t_hat, ascending.
std::vector<Index> discover(const PairedPValues& pairs, double t_hat);

// estimate_null_proportions + find_threshold.
FdrModel fit_fdr_model(const PairedPValues& pairs, double lambda, double alpha);

}  // namespace chima
