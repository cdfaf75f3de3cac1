#include "chima/types.hpp"

#include "chima/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace chima {

namespace {

void require_finite(const Matrix& m, const char* block) {
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      if (!std::isfinite(m(r, c))) {
        std::ostringstream os;
        os << "non-finite value in " << block << " at (" << r << ", " << c << ")";
        throw DataError("core_model", os.str());
      }
    }
  }
}

void require_finite(const Vector& v, const char* block) {
  for (Index r = 0; r < v.size(); ++r) {
    if (!std::isfinite(v(r))) {
      std::ostringstream os;
      os << "non-finite value in " << block << " at row " << r;
      throw DataError("core_model", os.str());
    }
  }
}

}  // namespace

bool operator==(const Dataset& a, const Dataset& b) {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  return same(a.exposure, b.exposure) && same(a.mediators, b.mediators) &&
         same(a.outcome, b.outcome) && same(a.covariates, b.covariates) &&
         a.mediator_names == b.mediator_names;
}

Dataset validate_dataset(Dataset raw) {
  const Index n = raw.outcome.size();
  auto mismatch = [n](const char* block, Index rows) {
    std::ostringstream os;
    os << "dimension mismatch: outcome has " << n << " rows but " << block << " has " << rows;
    throw DataError("core_model", os.str());
  };
  if (raw.exposure.size() != n) mismatch("exposure", raw.exposure.size());
  if (raw.mediators.rows() != n) mismatch("mediators", raw.mediators.rows());
  if (raw.covariates.size() == 0) {
    raw.covariates.resize(n, 0);
  } else if (raw.covariates.rows() != n) {
    mismatch("covariates", raw.covariates.rows());
  }
  if (n < 4) throw DataError("core_model", "need at least 4 observations, got " + std::to_string(n));
  if (raw.mediators.cols() < 1) throw DataError("core_model", "need at least one mediator");
  if (static_cast<Index>(raw.mediator_names.size()) != raw.mediators.cols()) {
    std::ostringstream os;
    os << "dimension mismatch: " << raw.mediators.cols() << " mediator columns but "
       << raw.mediator_names.size() << " names";
    throw DataError("core_model", os.str());
  }

  require_finite(raw.exposure, "exposure");
  require_finite(raw.mediators, "mediators");
  require_finite(raw.outcome, "outcome");
  require_finite(raw.covariates, "covariates");

  std::unordered_set<std::string> seen;
  for (const auto& name : raw.mediator_names) {
    if (!seen.insert(name).second) throw DataError("core_model", "duplicate mediator name '" + name + "'");
  }
  return raw;
}

std::vector<std::string> synthetic_mediator_names(Index p) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  char buf[32];
  for (Index j = 0; j < p; ++j) {
    std::snprintf(buf, sizeof buf, "M%04lld", static_cast<long long>(j + 1));
    names.emplace_back(buf);
  }
  return names;
}

ModelTruth ModelTruth::from_coefficients(Vector alpha, Vector beta, double gamma) {
  if (alpha.size() != beta.size()) throw std::invalid_argument("alpha and beta differ in length");
  ModelTruth t;
  t.alpha = std::move(alpha);
  t.beta = std::move(beta);
  t.gamma = gamma;
  for (Index j = 0; j < t.alpha.size(); ++j) {
    if (t.alpha(j) != 0.0 && t.beta(j) != 0.0) t.active_set.push_back(j);
  }
  return t;
}

CandidateSet::CandidateSet(std::vector<Index> indices, std::vector<double> scores, Index d, Index p)
    : indices_(std::move(indices)), scores_(std::move(scores)), d_(d) {
  if (d < 1) throw std::invalid_argument("candidate target size must be >= 1");
  if (indices_.size() != scores_.size()) throw std::invalid_argument("indices and scores differ in length");
  if (static_cast<Index>(indices_.size()) != std::min(d, p)) {
    throw std::invalid_argument("candidate set size must equal min(d, p)");
  }
  for (std::size_t i = 1; i < scores_.size(); ++i) {
    if (scores_[i] > scores_[i - 1]) throw std::invalid_argument("candidate scores must be non-increasing");
  }
  std::vector<Index> sorted = indices_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("candidate indices must be distinct");
  }
  if (!sorted.empty() && (sorted.front() < 0 || sorted.back() >= p)) {
    throw std::invalid_argument("candidate index out of range");
  }
}

bool CandidateSet::contains(Index j) const {
  return std::find(indices_.begin(), indices_.end(), j) != indices_.end();
}

TestRecord TestRecord::make(Index index, double alpha_hat, double se_alpha, double p_alpha,
                            double beta_hat, double se_beta, double p_beta) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(p_alpha) || !in_unit(p_beta)) throw std::invalid_argument("p-values must lie in [0, 1]");
  if (!(se_alpha > 0.0) || !(se_beta > 0.0)) throw std::invalid_argument("standard errors must be positive");
  TestRecord r;
  r.index = index;
  r.alpha_hat = alpha_hat;
  r.se_alpha = se_alpha;
  r.p_alpha = p_alpha;
  r.beta_hat = beta_hat;
  r.se_beta = se_beta;
  r.p_beta = p_beta;
  r.p_max = std::max(p_alpha, p_beta);
  return r;
}

}  // namespace chima
