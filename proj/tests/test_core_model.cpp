#include <doctest.h>

#include "chima/errors.hpp"
#include "chima/types.hpp"

#include <cmath>
#include <limits>

using namespace chima;

namespace {

Dataset small_dataset(Index rows_m = 10) {
  Dataset d;
  d.exposure = Vector::LinSpaced(10, 0.0, 9.0);
  d.mediators = Matrix::Random(rows_m, 3);
  d.outcome = Vector::Ones(10);
  d.mediator_names = {"a", "b", "c"};
  return d;
}

}  // namespace

TEST_CASE("validate_dataset accepts consistent dimensions") {
  const Dataset d = validate_dataset(small_dataset());
  CHECK(d.n() == 10);
  CHECK(d.p() == 3);
  CHECK(d.q() == 0);
  CHECK(d.covariates.rows() == 10);
}

TEST_CASE("validate_dataset rejects a row-count mismatch") {
  CHECK_THROWS_AS(validate_dataset(small_dataset(9)), DataError);
  CHECK_THROWS_WITH(validate_dataset(small_dataset(9)), doctest::Contains("mismatch"));
}

TEST_CASE("validate_dataset reports the position of a NaN") {
  Dataset d = small_dataset();
  d.mediators(2, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(validate_dataset(d), doctest::Contains("(2, 1)"), DataError);
}

TEST_CASE("validate_dataset error paths") {
  SUBCASE("duplicate names") {
    Dataset d = small_dataset();
    d.mediator_names = {"a", "b", "a"};
    CHECK_THROWS_WITH_AS(validate_dataset(d), doctest::Contains("duplicate"), DataError);
  }
  SUBCASE("too few observations") {
    Dataset d;
    d.exposure = Vector::Ones(3);
    d.outcome = Vector::Ones(3);
    d.mediators = Matrix::Ones(3, 1);
    d.mediator_names = {"a"};
    CHECK_THROWS_AS(validate_dataset(d), DataError);
  }
  SUBCASE("infinite outcome") {
    Dataset d = small_dataset();
    d.outcome(4) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_WITH_AS(validate_dataset(d), doctest::Contains("outcome"), DataError);
  }
  SUBCASE("covariate rows") {
    Dataset d = small_dataset();
    d.covariates = Matrix::Ones(8, 2);
    CHECK_THROWS_AS(validate_dataset(d), DataError);
  }
  SUBCASE("name count") {
    Dataset d = small_dataset();
    d.mediator_names.pop_back();
    CHECK_THROWS_AS(validate_dataset(d), DataError);
  }
}

TEST_CASE("validate_dataset is idempotent") {
  const Dataset once = validate_dataset(small_dataset());
  const Dataset twice = validate_dataset(once);
  CHECK(once == twice);
}

TEST_CASE("synthetic names are zero padded and one based") {
  const auto names = synthetic_mediator_names(12);
  CHECK(names.front() == "M0001");
  CHECK(names.back() == "M0012");
}

TEST_CASE("ModelTruth active set is the overlap of supports") {
  Vector a(5), b(5);
  a << 1, 0, 2, 3, 0;
  b << 1, 4, 0, 5, 0;
  const ModelTruth t = ModelTruth::from_coefficients(a, b, 0.5);
  CHECK(t.active_set == std::vector<Index>{0, 3});
}

TEST_CASE("TestRecord enforces p_max") {
  const TestRecord r = TestRecord::make(3, 0.4, 0.1, 0.02, -0.3, 0.2, 0.3);
  CHECK(r.p_max == 0.3);
  CHECK(r.index == 3);
  CHECK_THROWS(TestRecord::make(0, 0, 0.1, 1.5, 0, 0.1, 0.2));
  CHECK_THROWS(TestRecord::make(0, 0, 0.0, 0.5, 0, 0.1, 0.2));
}

TEST_CASE("CandidateSet invariants") {
  CHECK_NOTHROW(CandidateSet({2, 0}, {3.0, 1.0}, 2, 5));
  CHECK_THROWS(CandidateSet({2, 0}, {1.0, 3.0}, 2, 5));   // increasing scores
  CHECK_THROWS(CandidateSet({2, 2}, {3.0, 1.0}, 2, 5));   // duplicate
  CHECK_THROWS(CandidateSet({2, 7}, {3.0, 1.0}, 2, 5));   // out of range
  CHECK_THROWS(CandidateSet({2}, {3.0}, 2, 5));           // wrong size
  CHECK_NOTHROW(CandidateSet({1, 0}, {3.0, 1.0}, 4, 2));  // d > p keeps p
}
