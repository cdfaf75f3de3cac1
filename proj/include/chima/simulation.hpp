#pragma once

// Monte-Carlo study harness: correlated-mediator data generation,
// coefficient schemes, replication driver and evaluation metrics.

#include "chima/pipeline.hpp"
#include "chima/types.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace chima {

using Rng = std::mt19937_64;

// Seed of the substream for (master seed, replication, attempt): three
// rounds of splitmix64 folding in each coordinate. Independent of worker
// count and scheduling.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t replication, std::uint64_t attempt = 0);
Rng make_substream(std::uint64_t master, std::uint64_t replication, std::uint64_t attempt = 0);

enum class CovarianceKind { compound_symmetry, toeplitz, factor };

struct CovarianceStructure {
  CovarianceKind kind = CovarianceKind::compound_symmetry;
  double rho = 0.85;  // CS and Toeplitz
  int factors = 2;    // Factor: r
  double tau = 0.8;   // Factor: idiosyncratic SD

  static CovarianceStructure compound_symmetry(double rho) { return {CovarianceKind::compound_symmetry, rho, 0, 0.0}; }
  static CovarianceStructure toeplitz(double rho) { return {CovarianceKind::toeplitz, rho, 0, 0.0}; }
  static CovarianceStructure factor(int r, double tau) { return {CovarianceKind::factor, 0.0, r, tau}; }

  // "CS(0.85)", "Toeplitz(-0.85)", "Factor(r=2,tau=0.8)"
  std::string label() const;
  // ConfigError on rho outside (-1, 1), r < 1, tau <= 0, or a CS rho below
  // -1/(p-1) (not positive definite).
  void validate(Index p) const;
};

enum class Method { chima, alpha_sis, product_sis };
std::string method_name(Method m);
Method parse_method(const std::string& name);

struct SimScenario {
  Index n = 400;
  Index p = 8000;
  int s11 = 4;
  CovarianceStructure structure;
  double coef_low = 0.3;
  double coef_high = 1.0;
  double gamma = 0.5;
  double x_variance = 1.5;
  bool x_param_is_sd = false;  // read x_variance as a standard deviation
  double eps_variance = 1.0;
  int replications = 500;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  // CHIMA tuning; d = 0 means ceil(n / log n), baseline_d = 0 means
  // ceil(2n / log n).
  double k = 1.0;
  double delta = 1.0;
  double lambda = 0.5;
  Index d = 0;
  Index baseline_d = 0;
  AoDesign ao_design = AoDesign::candidates;
  SigmaEpsMethod sigma_eps_method = SigmaEpsMethod::refitted_cross_validation;
  std::vector<Method> methods{Method::chima, Method::alpha_sis, Method::product_sis};
  bool bias_diagnostic = false;

  void validate() const;
  ChimaConfig chima_config() const;
};

// Coefficients: alpha nonzero on the first 1.5 s11 indices, beta nonzero on
// the first s11 and on indices [1.5 s11, 2 s11). Each nonzero draws a
// magnitude from Unif(coef_low, coef_high) and then a fair sign, alpha
// entries first.
ModelTruth gen_coefficients(const SimScenario& scenario, Rng& rng);

// n x p error matrix with rows i.i.d. N_p(0, Sigma). CS uses a shared
// factor (rho >= 0) or a row-sum correction (rho < 0), Toeplitz the AR(1)
// recursion, Factor U = F Lambda + tau * eta with fresh loadings.
Matrix gen_errors(const CovarianceStructure& structure, Index n, Index p, Rng& rng);

// Sigma for CS and Toeplitz (Factor depends on drawn loadings: ConfigError).
Matrix covariance_matrix(const CovarianceStructure& structure, Index p);
// Generic sampler: rows i.i.d. N_p(0, Sigma) through a Cholesky factor.
Matrix sample_mvn_cholesky(const Matrix& sigma, Index n, Rng& rng);

struct SimDraws {
  Matrix errors;
  Vector exposure;
  Vector noise;
};

// Draws U, then X, then epsilon; M = X alpha^T + U, Y = M beta + gamma X +
// epsilon. Optionally records the raw draws.
Dataset gen_dataset(const SimScenario& scenario, const ModelTruth& truth, Rng& rng, SimDraws* draws = nullptr);

struct ReplicationMetrics {
  Index active = 0;      // s11
  Index captured = 0;    // |active ∩ S|
  Index true_pos = 0;    // |active ∩ D|
  Index false_pos = 0;   // |D \ active|

  double screening_rate() const;
  double power() const;
  double fdp() const;
};

ReplicationMetrics evaluate_replication(const ModelTruth& truth, const std::vector<Index>& candidates,
                                        const std::vector<Index>& discoveries);

struct MethodSummary {
  Method method = Method::chima;
  bool has_inference = false;  // screen-only methods report screening rate only
  double screening_rate = 0.0;
  double power = 0.0;
  double fdp = 0.0;
};

struct ReplicationRecord {
  int replication = 0;
  int attempts = 1;
  std::vector<ReplicationMetrics> metrics;  // aligned with SimResult::summaries
  Index bias_checks = 0;
  Index bias_violations = 0;  // active candidates with |R_j| >= |beta_j| / 2
};

struct SimResult {
  SimScenario scenario;
  std::vector<MethodSummary> summaries;
  std::vector<ReplicationRecord> replications;
  int redraws = 0;
  std::vector<std::string> failure_log;
};

// Runs `scenario.replications` independent replications, each on its own
// substream, in parallel over replications. Failing replications are
// redrawn on the next attempt substream (at most 10 attempts).
SimResult run_study(const SimScenario& scenario, int threads = 1);

}  // namespace chima
