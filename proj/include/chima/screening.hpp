#pragma once

// Mediator screening: Ridge-HOLP outcome-model estimates combined with
// marginal mediator-model OLS, plus the SIS-style baselines.

#include "chima/types.hpp"

namespace chima {

struct RholpConfig {
  double k = 1.0;
  Index d = 0;  // 0 selects default_screen_size(n)
  bool standardize = false;
};

// ceil(n / log n)
Index default_screen_size(Index n);
// ceil(2n / log n), the screen size used by the SIS baselines.
Index baseline_screen_size(Index n);

// Z Z^T for Z = [M X C], an n x n symmetric matrix.
Matrix gram_matrix(const Dataset& data);

// Z^T (k I + Z Z^T)^{-1} Y, ordered as (mediators, exposure, covariates).
// The n x n system is solved by Cholesky. k = 0 requires p + 1 + q >= n and
// a numerically nonsingular Gram matrix; otherwise NumericalError.
Vector rholp_estimates(const Dataset& data, double k);
// Same, reusing a Gram matrix from gram_matrix(data).
Vector rholp_estimates(const Dataset& data, double k, const Matrix& gram);

struct MarginalAlphaFit {
  Vector alpha_hat;
  Vector se_alpha;
  Vector sigma_u2;  // residual mean square, denominator n - (design columns)
};

// OLS of each M_j on [X, C] (plus an intercept column when `intercept`).
// se_alpha_j = sqrt([(D^T D)^{-1}]_XX * sigma_u2_j). NumericalError when the
// design is rank deficient or leaves no residual degrees of freedom.
MarginalAlphaFit marginal_alpha_fit(const Dataset& data, bool intercept = false, int threads = 1);

// Coefficient of M_j in the marginal outcome regression of Y on
// [M_j, X, C (, 1)], for every j.
Vector marginal_outcome_coefficients(const Dataset& data, bool intercept = false, int threads = 1);

// Top-d mediators by |alpha_hat_j * beta_tilde_j|; ties go to the smaller
// index.
CandidateSet select_candidates(const Vector& alpha_hat, const Vector& beta_tilde, Index d);

enum class BaselineStrategy { alpha_sis, product_sis };

// alpha_sis ranks by |alpha_hat_j|, product_sis by |alpha_hat_j * beta_check_j|.
CandidateSet baseline_screen(const Dataset& data, BaselineStrategy strategy, Index d,
                             bool intercept = false, int threads = 1);

// Copy with every column of M, X, C and Y centred to mean zero.
Dataset center_columns(const Dataset& data);
// Copy with every column of M, X and C divided by its sample standard
// deviation. Constant columns raise DataError.
Dataset standardize_columns(const Dataset& data);

}  // namespace chima
