#include <doctest.h>

#include "actol/embedding.hpp"
#include "actol/random.hpp"

using namespace actol;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Unit vector whose cosine with e0 is c.
Vector with_cosine(double c) { return vec({c, std::sqrt(1.0 - c * c), 0.0}); }

}  // namespace

TEST_CASE("normalize") {
  const Vector n = normalize(vec({3.0, 4.0}));
  CHECK(n(0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(n(1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK((normalize(n) - n).norm() < 1e-15);
  CHECK_THROWS_AS(normalize(vec({0.0, 0.0})), std::invalid_argument);
  CHECK(is_unit_norm(n));
  CHECK_FALSE(is_unit_norm(vec({1.0, 1e-4})));
}

TEST_CASE("cosine similarity") {
  CHECK(cosine_sim(vec({1, 0}), vec({0, 2})) == doctest::Approx(0.0));
  CHECK(cosine_sim(vec({2, 0}), vec({3, 0})) == 1.0);
  CHECK(cosine_sim(vec({1, 1}), vec({-1, -1})) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(cosine_sim(vec({1, 0}), vec({1, 0, 0})), std::invalid_argument);
  CHECK_THROWS_AS(cosine_sim(vec({0, 0}), vec({1, 0})), std::invalid_argument);
}

TEST_CASE("alignment score") {
  const Vector l = vec({1, 0, 0});
  const Vector a = with_cosine(0.9);
  const Vector b = with_cosine(0.4);
  CHECK(alignment_score(a, a, l) == 0.0);
  CHECK(alignment_score(a, b, l) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(alignment_score(a, b, l) == alignment_score(b, a, l));
  CHECK(alignment_from_sims(0.9, 0.4) == doctest::Approx(-0.5));
}

TEST_CASE("alignment score properties on random unit vectors") {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto d = rng.uniform_int(2, 12);
    const Vector vi = rng.unit_vector(d), vj = rng.unit_vector(d);
    const Vector l = rng.unit_vector(d), l2 = rng.unit_vector(d);
    const double r = alignment_score(vi, vj, l);
    CHECK(r <= 0.0);
    CHECK(r >= -2.0);
    CHECK(r == alignment_score(vj, vi, l));
    CHECK(r >= -(vi - vj).norm() - 1e-12);
    CHECK(std::abs(cosine_sim(vi, l) - cosine_sim(vi, l2)) <= (l - l2).norm() + 1e-12);
  }
}

TEST_CASE("timestamps validation") {
  CHECK_NOTHROW(validate_timestamps(std::vector<std::int64_t>{0, 1, 5}));
  CHECK_THROWS_AS(validate_timestamps(std::vector<std::int64_t>{0, 2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(validate_timestamps(std::vector<std::int64_t>{3, 1}), std::invalid_argument);
  CHECK_THROWS_AS(validate_timestamps(std::vector<std::int64_t>{-1, 1}), std::invalid_argument);
}

TEST_CASE("clip sequence") {
  const Vector l = vec({1, 0});
  ClipSequence clip({0, 2, 5}, {vec({1, 0}), vec({0, 3}), vec({1, 1})}, l);
  CHECK(clip.size() == 3);
  CHECK(clip.dim() == 2);
  CHECK(clip.distance(0, 2) == 5);
  CHECK(clip.distance(2, 1) == 3);
  CHECK_FALSE(clip.all_unit_norm());

  const auto s = clip.similarities();
  CHECK(s[0] == 1.0);
  CHECK(s[1] == doctest::Approx(0.0));
  CHECK(s[2] == doctest::Approx(std::sqrt(0.5)));

  const auto r = clip.alignment_matrix();
  CHECK(r(0, 0) == 0.0);
  CHECK(r(0, 1) == doctest::Approx(-1.0));
  CHECK(r(1, 0) == r(0, 1));

  clip.normalize_all();
  CHECK(clip.all_unit_norm());

  CHECK_THROWS_AS(ClipSequence({0, 1}, {vec({1, 0})}, l), std::invalid_argument);
  CHECK_THROWS_AS(ClipSequence({0, 1}, {vec({1, 0}), vec({0, 0})}, l), std::invalid_argument);
  CHECK_THROWS_AS(ClipSequence({0, 1}, {vec({1, 0}), vec({1, 0, 0})}, l), std::invalid_argument);
  CHECK_THROWS_AS(ClipSequence({1, 0}, {vec({1, 0}), vec({0, 1})}, l), std::invalid_argument);
  CHECK_THROWS_AS(ClipSequence({0}, {vec({1})}, vec({1})), std::invalid_argument);
}
