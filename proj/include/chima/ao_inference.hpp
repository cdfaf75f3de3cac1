#pragma once

// Outcome-model inference by approximate orthogonalization.
//
// For candidate j the projection direction is
//   v_j = delta (W_{-j} W_{-j}^T + delta I)^{-1} M_j,
// where W_{-j} is the nuisance design without column M_j: Z = [M_S X C] over
// the screened candidates S (default) or Z = [M X C] over all mediators.
// Since W_{-j} W_{-j}^T = Z Z^T - M_j M_j^T, every v_j is obtained from one
// Cholesky factor of G = Z Z^T + delta I via Sherman-Morrison:
//   (G - m m^T)^{-1} m = G^{-1} m / (1 - m^T G^{-1} m).
// A mediator outside Z uses W_{-j} = Z, so v_j = delta G^{-1} M_j.

#include "chima/types.hpp"

#include <Eigen/Cholesky>

#include <string>
#include <vector>

namespace chima {

enum class SigmaEpsMethod { refitted_cross_validation, refit_on_candidates };

// "rcv" and "refit".
std::string sigma_eps_method_name(SigmaEpsMethod method);
// ConfigError on an unknown name.
SigmaEpsMethod parse_sigma_eps_method(const std::string& name);

enum class AoDesign { candidates, all_mediators };

// "candidates" and "all".
std::string ao_design_name(AoDesign design);
// ConfigError on an unknown name.
AoDesign parse_ao_design(const std::string& name);

struct AoConfig {
  double delta = 1.0;
  AoDesign design = AoDesign::candidates;
  SigmaEpsMethod sigma_eps_method = SigmaEpsMethod::refitted_cross_validation;
  double screen_k = 1.0;   // ridge constant for the cross-validation screens
  bool intercept = false;  // adds an intercept column to the residual-variance refit
};

struct SigmaEpsFit {
  double sigma2 = 0.0;
  Index df = 0;
  std::vector<Index> dropped_mediators;  // collinear candidates left out of the refit
  Index dropped_other = 0;               // collinear exposure/covariate/intercept columns
};

// Residual mean square of OLS of Y on [M_S, X, C (, 1)] with denominator
// n - rank. Collinear candidate columns are dropped and reported.
SigmaEpsFit estimate_sigma_eps2(const Dataset& data, const CandidateSet& candidates, bool intercept = false);

// Refitted cross-validation: rows are split by parity, each half screens the
// top ceil(m / log m) mediators by |RHOLP| (m = half size, capped so the
// refit keeps a residual degree of freedom), the other half refits on them,
// and the two residual mean squares are averaged. The screen and the refit
// never share rows, so spurious fit from selection does not shrink the
// estimate.
SigmaEpsFit estimate_sigma_eps2_rcv(const Dataset& data, double k, bool intercept = false);

// Immutable after construction. Holds a reference to the dataset, which must
// outlive the context.
class AoContext {
 public:
  // `gram`, when given, must equal gram_matrix(data); it is only used with
  // the all-mediator design.
  static AoContext build(const Dataset& data, const CandidateSet& candidates, const AoConfig& config,
                         const Matrix* gram = nullptr);

  // (Z Z^T + delta I)^{-1} rhs
  Vector solve(const Vector& rhs) const { return llt_.solve(rhs); }
  const Matrix& factor_source() const { return shifted_gram_; }

  const Dataset& dataset() const { return *data_; }
  const CandidateSet& candidates() const { return candidates_; }
  double delta() const { return delta_; }
  AoDesign design() const { return design_; }
  // True when column j of M is part of Z.
  bool in_design(Index j) const { return design_ == AoDesign::all_mediators || candidates_.contains(j); }
  double sigma_eps2() const { return sigma_.sigma2; }
  const SigmaEpsFit& sigma_eps_fit() const { return sigma_; }

 private:
  AoContext() = default;

  const Dataset* data_ = nullptr;
  CandidateSet candidates_;
  double delta_ = 1.0;
  AoDesign design_ = AoDesign::candidates;
  Matrix shifted_gram_;
  Eigen::LLT<Matrix> llt_;
  SigmaEpsFit sigma_;
};

struct AoProjection {
  Vector v;
  bool used_fallback = false;  // downdate degenerated; refactorised directly
};

// Projection direction for mediator j (any index in [0, p)).
AoProjection ao_projection(const AoContext& context, Index j);

struct BetaTest {
  double beta_hat = 0.0;
  double se_beta = 0.0;
  double p_beta = 1.0;
};

// Closed forms from the scalar products v^T M_j, v^T Y, v^T v.
BetaTest beta_test_from_products(double v_dot_m, double v_dot_y, double v_dot_v, double sigma_eps2);

// beta_hat = (v^T M_j)^{-1} v^T Y, se = |v^T M_j|^{-1} sqrt(v^T v sigma_eps2),
// p = two_sided_p(beta_hat / se). NumericalError when v^T M_j is degenerate.
BetaTest ao_beta_test(const AoContext& context, Index j, const Vector& v);

// 2 (1 - Phi(|z|)), computed as erfc(|z| / sqrt 2).
double two_sided_p(double z);

// Realised bias R_j = (v^T M_j)^{-1} v^T W_{-j} eta_{-j} under known
// coefficients. Diagnostic for simulated data only.
double ao_bias(const Dataset& data, const ModelTruth& truth, Index j, const Vector& v);

}  // namespace chima
