#include <doctest.h>

#include <cmath>
#include <numbers>

#include "actol/objectives.hpp"
#include "actol/random.hpp"
#include "actol/synthetic.hpp"
#include "actol/theory.hpp"
#include "actol/trainer.hpp"
#include "oracles.hpp"

using namespace actol;

TEST_CASE("report bookkeeping") {
  TheoremReport r;
  r.record(0.5);
  r.record(0.0);
  r.finalize();
  CHECK(r.pass);
  CHECK(r.worst_slack == 0.0);
  r.record(0.0, true);
  r.finalize();
  CHECK_FALSE(r.pass);
  CHECK(r.violations == 1);
  CHECK(r.instances == 3);
}

TEST_CASE("lower bound holds on random clips") {
  Rng rng(1);
  std::vector<ClipSequence> clips;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    clips.push_back(random_clip(static_cast<std::size_t>(rng.uniform_int(2, 12)), rng.uniform_int(2, 16), k));
  }
  const auto report = check_lower_bound(clips);
  CHECK(report.pass);
  CHECK(report.violations == 0);
  CHECK(report.measurements.at("boundary_cases") > 0);
  CHECK(report.instances + report.measurements.at("boundary_cases") == 1000);
  CHECK(report.measurements.at("min_gap") > 0.0);

  // Identical embeddings: the gap is vlo - L* in closed form.
  Vector v = Vector::Unit(3, 0), l = Vector::Unit(3, 1);
  std::vector<ClipSequence> flat{ClipSequence({0, 1, 2}, std::vector<Vector>(3, v), l)};
  const auto fr = check_lower_bound(flat);
  CHECK(fr.pass);
  CHECK(fr.measurements.at("min_gap") == doctest::Approx(2.0 * std::numbers::ln2 / 6.0).epsilon(1e-14));
}

TEST_CASE("near-optimal construction") {
  const std::vector<std::int64_t> ts{0, 1, 2, 3};
  CHECK(near_optimal_gap(ts, 0.01) == doctest::Approx(std::log(4.0 / 0.01)));
  for (double eps : {1.0, 0.1, 0.01, 1e-4}) {
    const auto r = construct_near_optimal(ts, eps);
    CHECK(vlo_loss_on_scores(ts, r) < lower_bound(ts) + eps);
    CHECK(oracle::vlo(ts, r) < oracle::lower_bound(ts) + eps);
    // Equal distances share a score; closer beats farther by at least gamma.
    const double gamma = near_optimal_gap(ts, eps);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
          if (i == j || i == k) continue;
          const auto dij = std::abs(i - j), dik = std::abs(i - k);
          if (dij == dik) CHECK(r(i, j) == r(i, k));
          if (dij < dik) CHECK(r(i, j) - r(i, k) >= gamma * (1 - 1e-15));
        }
  }
  const std::vector<double> eps{1.0, 0.1, 0.01};
  CHECK(check_tightness(ts, eps).pass);

  const std::vector<std::int64_t> irregular{0, 2, 3, 7, 8, 9};
  CHECK(check_tightness(irregular, eps).pass);

  const std::vector<std::int64_t> two{0, 5};
  CHECK(vlo_loss_on_scores(two, construct_near_optimal(two, 0.1)) == 0.0);
  CHECK(lower_bound(two) == 0.0);
}

TEST_CASE("lipschitz and continuity") {
  const auto report = check_lipschitz(1000, 6, 3);
  CHECK(report.pass);
  CHECK(report.instances == 1000);

  Rng rng(4);
  const Vector v = rng.unit_vector(4);
  const Vector l = rng.unit_vector(4);
  ClipSequence same({0, 1}, {v, v}, l);
  const auto sr = check_continuity(same, {});
  CHECK(sr.pass);
  CHECK(sr.worst_slack == 0.0);

  const auto clip = random_clip(8, 5, 9);
  const auto bridged = sample_bridge(clip, full_interval(clip), 11);
  const auto br = check_continuity(bridged, {});
  CHECK(br.pass);
  // Every pair including k == m, plus the deviation-ratio record.
  CHECK(br.instances == 8 * 9 / 2 + 1);
  CHECK(std::isfinite(br.measurements.at("deviation_ratio")));
  CHECK(br.measurements.at("deviation_ratio") >= 0.0);

  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 3}, {2, 5}};
  CHECK(check_continuity(bridged, pairs).instances == 3);

  TrainConfig cfg;
  cfg.steps = 300;
  const auto trained = train_free(generate_clip({}).clip, cfg).final_clip;
  CHECK(check_continuity(trained, {}).pass);
}

TEST_CASE("robustness") {
  Rng rng(5);
  const Vector vi = rng.unit_vector(6), vj = rng.unit_vector(6), l = rng.unit_vector(6);
  const auto zero = check_robustness(vi, vj, l, 0.0, 100, 1);
  CHECK(zero.pass);
  CHECK(zero.measurements.at("worst_ratio") == 0.0);
  for (double delta : {0.01, 0.1, 0.5, 2.0}) {
    const auto r = check_robustness(vi, vj, l, delta, 10000, 2);
    CHECK(r.pass);
    CHECK(r.instances == 10000);
    CHECK(r.measurements.at("worst_ratio") <= 1.0);
  }

  // Move l along the direction that changes the score fastest.
  const double delta = 0.1;
  const Vector dir = vi - vj;
  const Vector tangent = (dir - dir.dot(l) * l).normalized();
  const double angle = 2.0 * std::asin(delta / 2.0);
  const Vector lp = std::cos(angle) * l + std::sin(angle) * tangent;
  CHECK((lp - l).norm() <= delta + 1e-15);
  const double change = std::abs(alignment_score(vi, vj, lp) - alignment_score(vi, vj, l));
  CHECK(change / (2.0 * delta) <= 1.0);
}

TEST_CASE("bridge statistics and negative control") {
  const auto good = check_bridge_statistics(10000, 10, 8, 1);
  CHECK(good.pass);
  CHECK(good.measurements.at("expected_variance") == doctest::Approx(2.5));
  CHECK(good.measurements.at("variance_rel_error") < 0.05);

  const VarianceModel flipped = [](double t, std::int64_t a, std::int64_t b) { return -bb_variance(t, a, b); };
  const auto bad = check_bridge_statistics(10000, 10, 8, 1, 0.05, flipped);
  CHECK_FALSE(bad.pass);
  CHECK(bad.violations > 0);
}
