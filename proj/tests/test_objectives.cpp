#include <doctest.h>

#include <cmath>
#include <numbers>

#include "actol/objectives.hpp"
#include "actol/random.hpp"
#include "actol/synthetic.hpp"
#include "oracles.hpp"

using namespace actol;

namespace {

using TS = std::vector<std::int64_t>;

ClipSequence identical_clip(const TS& ts, Eigen::Index d = 3) {
  Vector v = Vector::Zero(d);
  v(0) = 1.0;
  Vector l = Vector::Zero(d);
  l(1) = 1.0;
  return ClipSequence(ts, std::vector<Vector>(ts.size(), v), l);
}

ClipSequence rotated(const ClipSequence& clip, const Eigen::MatrixXd& q) {
  std::vector<Vector> frames;
  for (const auto& f : clip.frames()) frames.push_back(q * f);
  return ClipSequence(clip.timestamps(), frames, q * clip.language());
}

Eigen::MatrixXd random_orthogonal(Eigen::Index d, Rng& rng) {
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.normal();
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

}  // namespace

TEST_CASE("negative sets") {
  const TS ts{0, 1, 2};
  CHECK(negative_set(ts, 0, 1) == std::vector<std::size_t>{1, 2});
  CHECK(negative_set(ts, 0, 2) == std::vector<std::size_t>{2});
  CHECK(negative_set(ts, 1, 0) == std::vector<std::size_t>{0, 2});
  CHECK_THROWS_AS(negative_set(ts, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(negative_set(ts, 0, 3), std::out_of_range);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) {
        const auto n = negative_set(ts, i, j);
        CHECK(std::find(n.begin(), n.end(), j) != n.end());
      }
}

TEST_CASE("distance profiles") {
  const TS ts{0, 1, 2};
  auto p = distance_profile(ts, 1);
  CHECK(p.distances == TS{1});
  CHECK(p.multiplicities == std::vector<std::size_t>{2});
  p = distance_profile(ts, 0);
  CHECK(p.distances == TS{1, 2});
  CHECK(p.multiplicities == std::vector<std::size_t>{1, 1});
  p = distance_profile(TS{0, 5, 10, 20}, 0);
  CHECK(p.distances == TS{5, 10, 20});
  CHECK(p.multiplicities == std::vector<std::size_t>{1, 1, 1});
  CHECK_THROWS_AS(distance_profile(ts, 3), std::out_of_range);
}

TEST_CASE("lower bound values") {
  CHECK(lower_bound(TS{0, 1, 2}) == doctest::Approx(2.0 * std::numbers::ln2 / 6.0).epsilon(1e-14));
  CHECK(lower_bound(TS{0, 1, 2}) == doctest::Approx(0.2310).epsilon(1e-3));
  CHECK(lower_bound(TS{0, 1, 3, 7}) == 0.0);
  CHECK(lower_bound(TS{4, 9}) == 0.0);
  CHECK_THROWS(lower_bound(TS{0}));
}

TEST_CASE("vlo loss closed forms") {
  const double expected = 4.0 * std::numbers::ln2 / 6.0;
  CHECK(vlo_loss(identical_clip({0, 1, 2})) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(vlo_loss(identical_clip({0, 1, 2})) == doctest::Approx(0.4621).epsilon(1e-4));
  CHECK(vlo_loss_on_scores(TS{0, 1, 2}, Eigen::MatrixXd::Zero(3, 3)) ==
        doctest::Approx(expected).epsilon(1e-14));

  Rng rng(3);
  ClipSequence two({0, 7}, {rng.unit_vector(4), rng.unit_vector(4)}, rng.unit_vector(4));
  CHECK(vlo_loss(two) == 0.0);
  CHECK(vlo_loss_on_scores(TS{0, 1}, Eigen::MatrixXd::Random(2, 2)) == 0.0);

  CHECK_THROWS_AS(vlo_loss(two, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(vlo_loss_on_scores(TS{0, 1, 2}, Eigen::MatrixXd::Zero(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("vlo loss matches the reference formula on random clips") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto clip = random_clip(2 + seed % 11, 2 + static_cast<Eigen::Index>(seed % 7), seed);
    const auto r = oracle::scores(oracle::sims(clip.frames(), clip.language()));
    for (double tau : {1.0, 0.3}) {
      CHECK(vlo_loss(clip, tau) == doctest::Approx(oracle::vlo(clip.timestamps(), r, tau)).epsilon(1e-12));
    }
    CHECK(lower_bound(clip) == doctest::Approx(oracle::lower_bound(clip.timestamps())).epsilon(1e-14));
  }
}

TEST_CASE("vlo loss invariances") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto clip = random_clip(6, 5, 1000 + trial);
    const auto q = random_orthogonal(5, rng);
    CHECK(vlo_loss(rotated(clip, q)) == doctest::Approx(vlo_loss(clip)).epsilon(1e-12));
    CHECK(vlo_loss(clip) > lower_bound(clip));
  }

  // Only the distance order matters.
  const auto base = random_clip(4, 3, 77);
  ClipSequence stretched({0, 10, 20, 30}, base.frames(), base.language());
  ClipSequence unit({0, 1, 2, 3}, base.frames(), base.language());
  CHECK(vlo_loss(stretched) == vlo_loss(unit));
}

TEST_CASE("brownian bridge mean and variance") {
  Rng rng(5);
  ClipSequence clip({0, 3, 10}, {rng.unit_vector(3), rng.unit_vector(3), rng.unit_vector(3)},
                    rng.unit_vector(3));
  const BridgeInterval iv{0, 2};
  CHECK((bb_mean(0, iv, clip) - clip.frame(0)).norm() == 0.0);
  CHECK((bb_mean(10, iv, clip) - clip.frame(2)).norm() < 1e-15);
  CHECK((bb_mean(5, iv, clip) - 0.5 * (clip.frame(0) + clip.frame(2))).norm() < 1e-15);
  CHECK_THROWS_AS(bb_mean(11, iv, clip), std::out_of_range);

  CHECK(bb_variance(0, 0, 10) == 0.0);
  CHECK(bb_variance(10, 0, 10) == 0.0);
  CHECK(bb_variance(2, 0, 10) == doctest::Approx(1.6).epsilon(1e-15));
  for (std::int64_t len : {2, 6, 10, 40}) {
    CHECK(bb_variance(len / 2.0 + 3, 3, 3 + len) == doctest::Approx(len / 4.0).epsilon(1e-15));
  }
  CHECK(bb_variance(4, iv, ClipSequence({2, 3, 6}, clip.frames(), clip.language())) ==
        doctest::Approx(2.0 * 2.0 / 4.0));
  CHECK_THROWS_AS(bb_variance(-1, 0, 10), std::out_of_range);
  CHECK_THROWS_AS(bb_variance(1, 5, 5), std::invalid_argument);
  CHECK_THROWS_AS(bb_mean(1, BridgeInterval{0, 3}, clip), std::invalid_argument);
}

TEST_CASE("brownian bridge loss") {
  Vector a(2), b(2), u(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  u << 0.6, 0.8;
  const Vector mid = 0.5 * (a + b);
  for (double delta : {0.0, 0.1, 0.7}) {
    ClipSequence clip({0, 1, 2}, {a, Vector(mid + delta * u), b}, a);
    CHECK(bb_loss(clip, {0, 2}) == doctest::Approx(delta * delta).epsilon(1e-14));
  }
  ClipSequence two({0, 4}, {a, b}, a);
  CHECK(bb_loss(two, {0, 1}) == 0.0);

  // On the interpolant.
  ClipSequence line({0, 1, 3, 4}, {a, Vector(0.75 * a + 0.25 * b), Vector(0.25 * a + 0.75 * b), b}, a);
  CHECK(bb_loss(line, {0, 3}) < 1e-30);

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto clip = random_clip(3 + seed % 9, 4, seed);
    const int n = static_cast<int>(clip.size());
    const BridgeInterval iv{seed % 2, clip.size() - 1};
    CHECK(bb_loss(clip, iv) == doctest::Approx(oracle::bb(clip.timestamps(), clip.frames(),
                                                          static_cast<int>(iv.start), n - 1))
                                   .epsilon(1e-13));
    // Time reversal of the interval.
    std::vector<std::int64_t> ts;
    std::vector<Vector> frames;
    for (int k = n - 1; k >= 0; --k) {
      ts.push_back(clip.timestamp(n - 1) - clip.timestamp(k));
      frames.push_back(clip.frame(k));
    }
    ClipSequence rev(ts, frames, clip.language());
    CHECK(bb_loss(rev, full_interval(rev)) == doctest::Approx(bb_loss(clip, full_interval(clip))).epsilon(1e-13));
  }
}

TEST_CASE("actol loss breakdown") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto clip = random_clip(5, 3, seed);
    const auto zero = actol_loss(clip, 0.0);
    CHECK(zero.total == zero.vlo);
    CHECK(zero.vlo == vlo_loss(clip));
    const auto b = actol_loss(clip, 0.1);
    CHECK(std::abs(b.total - (b.vlo + 0.1 * b.bb)) <= 1e-12);
    CHECK(b.lower_bound == lower_bound(clip));
    CHECK(b.gap == b.vlo - b.lower_bound);
    CHECK(b.gap > 0.0);
    const std::vector<BridgeInterval> ivs{{0, 2}, {1, 4}};
    const auto m = actol_loss(clip, 0.5, 1.0, ivs);
    CHECK(m.bb == doctest::Approx((bb_loss(clip, ivs[0]) + bb_loss(clip, ivs[1])) / 2.0));
  }
  const auto flat = identical_clip({0, 1, 2, 3});
  CHECK(actol_loss(flat, 0.1).total == vlo_loss(flat));
  CHECK_THROWS_AS(actol_loss(flat, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(actol_loss(flat, 0.1, 1.0, std::span<const BridgeInterval>{}), std::invalid_argument);
}

TEST_CASE("tnce family") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto clip = random_clip(2 + seed % 10, 3, seed);
    for (double tau : {1.0, 0.07}) {
      CHECK(tnce_loss(clip, TnceConfig::vlo(tau)) == vlo_loss(clip, tau));
    }
  }

  // Flat scores: the single last-frame term gives log of the candidate count.
  const auto flat = identical_clip({0, 1, 2, 3, 4});
  CHECK(tnce_loss(flat, TnceConfig::last_frame()) == doctest::Approx(std::log(4.0)).epsilon(1e-15));

  // Single candidate.
  const auto two = random_clip(2, 3, 9);
  CHECK(tnce_loss(two, TnceConfig::last_frame()) == 0.0);

  TnceConfig future{PositiveSelector::FutureFrame, NegativeSelector::OtherFrames, ScoreKind::DirectSim, 1.0};
  const auto terms = tnce_terms(TS{0, 1, 2}, future);
  CHECK(terms.size() == 3);
  for (const auto& t : terms) {
    CHECK(t.positive > t.anchor);
    CHECK(std::find(t.candidates.begin(), t.candidates.end(), t.positive) != t.candidates.end());
  }
  // Direct-sim future-frame loss against the formula.
  const auto clip = random_clip(4, 3, 31);
  const auto s = clip.similarities();
  double expect = 0.0;
  int count = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      double denom = 0.0;
      for (int k = 0; k < 4; ++k)
        if (k != i) denom += std::exp(s[k]);
      expect += std::log(denom) - s[j];
      ++count;
    }
  CHECK(tnce_loss(clip, future) == doctest::Approx(expect / count).epsilon(1e-13));

  CHECK(parse_positive_selector("future-frame") == PositiveSelector::FutureFrame);
  CHECK(to_string(NegativeSelector::FartherFrames) == "farther-frames");
  CHECK(parse_score_kind("direct-sim") == ScoreKind::DirectSim);
  CHECK_THROWS_AS(parse_score_kind("cosine"), std::invalid_argument);
  CHECK_THROWS_AS(tnce_loss(clip, TnceConfig{PositiveSelector::VloPair, NegativeSelector::OtherFrames,
                                             ScoreKind::DirectSim, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("log-sum-exp") {
  std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::numbers::ln2));
  CHECK(std::isinf(log_sum_exp(std::vector<double>{})));
  std::vector<double> x{-1.0, 0.5, 2.0};
  CHECK(log_sum_exp(x) == doctest::Approx(std::log(std::exp(-1.0) + std::exp(0.5) + std::exp(2.0))));
}
