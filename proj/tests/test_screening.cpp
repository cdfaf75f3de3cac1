#include <doctest.h>

#include "chima/errors.hpp"
#include "chima/screening.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <numeric>

using namespace chima;

TEST_CASE("default screen sizes") {
  CHECK(default_screen_size(400) == 67);   // 400 / log(400) = 66.76
  CHECK(baseline_screen_size(400) == 134);  // 800 / log(400) = 133.5
}

TEST_CASE("rholp of a zero outcome is zero") {
  Dataset d = oracle::random_dataset(6, 9, 1);
  d.outcome.setZero();
  const Vector b = rholp_estimates(d, 1.0);
  CHECK(b.size() == 10);
  CHECK(b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rholp matches the dense dual oracle at n=5, p=8") {
  const Dataset d = oracle::random_dataset(5, 8, 17);
  const Vector got = rholp_estimates(d, 1.0);
  const Vector want = oracle::rholp_dual(d, 1.0);
  CHECK(oracle::max_relative_error(got, want) < 1e-8);
}

TEST_CASE("rholp ridge dual identity against the primal solution") {
  for (unsigned seed = 0; seed < 12; ++seed) {
    const Index n = 6 + seed;
    const Index p = 4 + 9 * seed;  // both n < p and n > p instances
    const Dataset d = oracle::random_dataset(n, p, 100 + seed, seed % 3);
    for (double k : {0.1, 1.0, 25.0}) {
      CAPTURE(seed);
      CAPTURE(k);
      CHECK(oracle::max_relative_error(rholp_estimates(d, k), oracle::ridge_primal(d, k)) < 1e-8);
    }
  }
}

TEST_CASE("rholp with a huge ridge constant ranks like marginal screening") {
  const Dataset d = oracle::random_dataset(20, 30, 5);
  const Vector b = rholp_estimates(d, 1e9);
  Vector marginal(d.p());
  for (Index j = 0; j < d.p(); ++j) {
    double s = 0.0;
    for (Index i = 0; i < d.n(); ++i) s += d.mediators(i, j) * d.outcome(i);
    marginal(j) = s;
  }
  CHECK(oracle::full_sort_top(b.head(d.p()), d.p()) == oracle::full_sort_top(marginal, d.p()));
}

TEST_CASE("rholp at k = 0") {
  SUBCASE("p + 1 >= n interpolates the outcome") {
    const Dataset d = oracle::random_dataset(6, 12, 8);
    const Vector b = rholp_estimates(d, 0.0);
    const Vector fitted = d.mediators * b.head(d.p()) + d.exposure * b(d.p());
    CHECK((fitted - d.outcome).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(oracle::max_relative_error(b, oracle::rholp_dual(d, 0.0)) < 1e-8);
  }
  SUBCASE("p + 1 < n is singular") {
    const Dataset d = oracle::random_dataset(12, 4, 8);
    CHECK_THROWS_AS(rholp_estimates(d, 0.0), NumericalError);
  }
  SUBCASE("rank-deficient rows are singular") {
    Dataset d = oracle::random_dataset(6, 12, 9);
    d.mediators.row(5) = d.mediators.row(4);
    d.exposure(5) = d.exposure(4);
    CHECK_THROWS_AS(rholp_estimates(d, 0.0), NumericalError);
  }
  SUBCASE("negative k") {
    const Dataset d = oracle::random_dataset(6, 12, 9);
    CHECK_THROWS_AS(rholp_estimates(d, -1.0), ConfigError);
  }
}

TEST_CASE("marginal alpha fit: exact linear relation") {
  Dataset d = oracle::random_dataset(10, 2, 3);
  d.mediators.col(0) = 2.0 * d.exposure;
  const MarginalAlphaFit fit = marginal_alpha_fit(d);
  CHECK(fit.alpha_hat(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.sigma_u2(0) == doctest::Approx(0.0).epsilon(1e-20));
  CHECK(fit.sigma_u2(0) < 1e-24);
}

TEST_CASE("marginal alpha fit: mediator orthogonal to exposure") {
  Dataset d = oracle::random_dataset(10, 2, 4);
  const double proj = d.mediators.col(1).dot(d.exposure) / d.exposure.squaredNorm();
  d.mediators.col(1) -= proj * d.exposure;
  const MarginalAlphaFit fit = marginal_alpha_fit(d);
  CHECK(std::abs(fit.alpha_hat(1)) < 1e-10);
}

TEST_CASE("marginal alpha fit matches the normal-equations oracle") {
  for (bool intercept : {false, true}) {
    for (Index q : {0, 2}) {
      const Dataset d = oracle::random_dataset(50, 7, 21 + static_cast<unsigned>(q), q);
      const MarginalAlphaFit fit = marginal_alpha_fit(d, intercept, 2);
      Matrix design(d.n(), 1 + q + (intercept ? 1 : 0));
      design.col(0) = d.exposure;
      if (q) design.middleCols(1, q) = d.covariates;
      if (intercept) design.col(design.cols() - 1).setOnes();
      const Matrix inv = oracle::dense_inverse(oracle::mat_mul(oracle::transpose(design), design));
      for (Index j = 0; j < d.p(); ++j) {
        const Vector coef = oracle::normal_equations(design, d.mediators.col(j));
        const double s2 = oracle::residual_variance(design, d.mediators.col(j));
        CHECK(std::abs(fit.alpha_hat(j) - coef(0)) < 1e-10);
        CHECK(std::abs(fit.sigma_u2(j) - s2) < 1e-10);
        CHECK(std::abs(fit.se_alpha(j) - std::sqrt(inv(0, 0) * s2)) < 1e-10);
      }
    }
  }
}

TEST_CASE("marginal alpha fit rejects a rank-deficient design") {
  Dataset d = oracle::random_dataset(10, 2, 4, 1);
  d.covariates.col(0) = 3.0 * d.exposure;
  CHECK_THROWS_AS(marginal_alpha_fit(d), NumericalError);
}

TEST_CASE("select_candidates ordering and ties") {
  Vector a(3), b(3);
  a << 3, 1, 2;
  b << 1, 1, 1;
  CHECK(select_candidates(a, b, 2).indices() == std::vector<Index>{0, 2});

  Vector e = Vector::Ones(4);
  CHECK(select_candidates(e, e, 2).indices() == std::vector<Index>{0, 1});

  const CandidateSet all = select_candidates(a, b, 10);
  CHECK(all.size() == 3);
  CHECK(all.target_size() == 10);
}

TEST_CASE("select_candidates agrees with a full sort") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  Vector a(100), b(100);
  for (Index j = 0; j < 100; ++j) {
    a(j) = z(rng);
    b(j) = z(rng);
  }
  const Vector prod = (a.array() * b.array()).matrix();
  CHECK(select_candidates(a, b, 10).indices() == oracle::full_sort_top(prod, 10));
}

TEST_CASE("selection is invariant to scaling Y") {
  Dataset d = oracle::random_dataset(15, 40, 6);
  const MarginalAlphaFit fit = marginal_alpha_fit(d);
  const CandidateSet before = select_candidates(fit.alpha_hat, rholp_estimates(d, 1.0).head(d.p()), 8);
  for (double c : {0.001, 3.0, 1e4}) {
    Dataset scaled = d;
    scaled.outcome *= c;
    const CandidateSet after =
        select_candidates(marginal_alpha_fit(scaled).alpha_hat, rholp_estimates(scaled, 1.0).head(d.p()), 8);
    CHECK(after.indices() == before.indices());
  }
}

TEST_CASE("selection is permutation equivariant") {
  const Dataset d = oracle::random_dataset(15, 40, 7);
  std::vector<Index> perm(static_cast<std::size_t>(d.p()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);

  Dataset permuted = d;
  for (Index j = 0; j < d.p(); ++j) {
    permuted.mediators.col(j) = d.mediators.col(perm[static_cast<std::size_t>(j)]);
    permuted.mediator_names[static_cast<std::size_t>(j)] = d.mediator_names[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
  }
  auto screen = [](const Dataset& x) {
    return select_candidates(marginal_alpha_fit(x).alpha_hat, rholp_estimates(x, 1.0).head(x.p()), 6);
  };
  const CandidateSet original_set = screen(d);
  const CandidateSet permuted_set = screen(permuted);
  const auto& original = original_set.indices();
  std::vector<Index> mapped;
  for (Index j : permuted_set.indices()) mapped.push_back(perm[static_cast<std::size_t>(j)]);
  std::sort(mapped.begin(), mapped.end());
  std::vector<Index> sorted = original;
  std::sort(sorted.begin(), sorted.end());
  CHECK(mapped == sorted);
}

TEST_CASE("screening is deterministic") {
  const Dataset d = oracle::random_dataset(30, 200, 11);
  auto run = [&] {
    return select_candidates(marginal_alpha_fit(d, false, 3).alpha_hat, rholp_estimates(d, 1.0).head(d.p()), 12);
  };
  CHECK(run() == run());
}

TEST_CASE("baseline alpha_sis puts the single exposure-driven mediator first") {
  Dataset d = oracle::random_dataset(40, 6, 13);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (Index j = 0; j < d.p(); ++j) {
    for (Index i = 0; i < d.n(); ++i) d.mediators(i, j) = z(rng);
  }
  d.mediators.col(4) += 2.0 * d.exposure;
  CHECK(baseline_screen(d, BaselineStrategy::alpha_sis, 3).indices().front() == 4);
}

TEST_CASE("marginal outcome coefficients match per-mediator normal equations") {
  const Dataset d = oracle::random_dataset(40, 6, 14);
  const Vector got = marginal_outcome_coefficients(d);
  for (Index j = 0; j < d.p(); ++j) {
    Matrix design(d.n(), 2);
    design.col(0) = d.mediators.col(j);
    design.col(1) = d.exposure;
    CHECK(std::abs(got(j) - oracle::normal_equations(design, d.outcome)(0)) < 1e-10);
  }
}

TEST_CASE("both baselines return every index when d = p") {
  const Dataset d = oracle::random_dataset(40, 6, 15);
  for (auto s : {BaselineStrategy::alpha_sis, BaselineStrategy::product_sis}) {
    auto idx = baseline_screen(d, s, d.p()).indices();
    std::sort(idx.begin(), idx.end());
    CHECK(idx == std::vector<Index>{0, 1, 2, 3, 4, 5});
  }
}

TEST_CASE("centering and standardization") {
  Dataset d = oracle::random_dataset(12, 4, 16, 1);
  const Dataset c = center_columns(d);
  CHECK(std::abs(c.outcome.mean()) < 1e-12);
  CHECK(c.mediators.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  const Dataset s = standardize_columns(c);
  const double var = s.mediators.col(2).squaredNorm() / static_cast<double>(s.n() - 1);
  CHECK(var == doctest::Approx(1.0));
  d.mediators.col(1).setConstant(2.0);
  CHECK_THROWS_AS(standardize_columns(d), DataError);
}
