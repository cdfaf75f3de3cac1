#pragma once

// Shared domain types for the mediation pipeline.
//
// Indices are 0-based throughout the library. Mediator j is column j of
// Dataset::mediators; human-facing output uses Dataset::mediator_names.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace chima {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Exposure X, mediators M (n x p, one column per mediator, column-major so a
// mediator is contiguous), outcome Y and optional covariates C (n x q, q may
// be 0).
struct Dataset {
  Vector exposure;
  Matrix mediators;
  Vector outcome;
  Matrix covariates;
  std::vector<std::string> mediator_names;

  Index n() const { return outcome.size(); }
  Index p() const { return mediators.cols(); }
  Index q() const { return covariates.cols(); }

  friend bool operator==(const Dataset& a, const Dataset& b);
};

// Checks every Dataset invariant and returns the (unchanged) dataset.
// A missing covariate block (0 rows, 0 cols) is normalised to n x 0.
// Throws DataError on dimension mismatch, non-finite entries, duplicate
// names or n < 4.
Dataset validate_dataset(Dataset raw);

// "M0001"-style identifiers for synthetic data.
std::vector<std::string> synthetic_mediator_names(Index p);

// Generating coefficients of a simulated dataset.
struct ModelTruth {
  Vector alpha;
  Vector beta;
  double gamma = 0.0;
  std::vector<Index> active_set;  // { j : alpha_j != 0 and beta_j != 0 }, ascending

  static ModelTruth from_coefficients(Vector alpha, Vector beta, double gamma);
};

// Screened mediators ordered by descending score.
class CandidateSet {
 public:
  CandidateSet() = default;
  // Throws std::invalid_argument unless scores are non-increasing, indices
  // are distinct and inside [0, p) and size == min(d, p).
  CandidateSet(std::vector<Index> indices, std::vector<double> scores, Index d, Index p);

  const std::vector<Index>& indices() const { return indices_; }
  const std::vector<double>& scores() const { return scores_; }
  Index target_size() const { return d_; }
  std::size_t size() const { return indices_.size(); }
  bool contains(Index j) const;

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;

 private:
  std::vector<Index> indices_;
  std::vector<double> scores_;
  Index d_ = 0;
};

// Per-candidate test results for the mediator model (alpha) and outcome
// model (beta). p_max is always max(p_alpha, p_beta).
struct TestRecord {
  Index index = 0;
  double alpha_hat = 0, se_alpha = 0, p_alpha = 1;
  double beta_hat = 0, se_beta = 0, p_beta = 1;
  double p_max = 1;

  static TestRecord make(Index index, double alpha_hat, double se_alpha, double p_alpha,
                         double beta_hat, double se_beta, double p_beta);
};

// Fitted composite-null FDR model.
struct FdrModel {
  double pi00 = 0, pi01 = 0, pi10 = 0;
  double lambda = 0.5;
  double t_hat = 0;
  double alpha_level = 0.05;
};

}  // namespace chima
