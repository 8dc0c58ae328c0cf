#include <doctest.h>

#include <cmath>

#include "actol/objectives.hpp"
#include "actol/random.hpp"
#include "actol/synthetic.hpp"

using namespace actol;

namespace {

std::size_t first_argmax(const std::vector<double>& xs) {
  return static_cast<std::size_t>(std::max_element(xs.begin(), xs.end()) - xs.begin()) + 1;
}

}  // namespace

TEST_CASE("clean clips are monotone") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SyntheticClipSpec spec;
    spec.frames = 4 + seed % 9;
    spec.dim = 2 + static_cast<Eigen::Index>(seed % 6);
    spec.completion_index = spec.frames;
    spec.seed = seed;
    const auto out = generate_clip(spec);
    const auto s = out.clip.similarities();
    for (std::size_t t = 1; t < s.size(); ++t) CHECK(s[t] > s[t - 1]);
    CHECK(out.clip.all_unit_norm());
    CHECK(out.truth.completion_index == spec.frames);
    CHECK(out.truth.progress.front() == 0.0);
    CHECK(out.truth.progress.back() == 1.0);
  }
}

TEST_CASE("tails peak at the completion frame") {
  for (auto tail : {TailMode::Frozen, TailMode::DriftAway, TailMode::SecondAction}) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      SyntheticClipSpec spec;
      spec.frames = 10;
      spec.completion_index = 5;
      spec.tail = tail;
      spec.seed = seed;
      const auto out = generate_clip(spec);
      const auto s = out.clip.similarities();
      CHECK(out.clip.all_unit_norm());
      CHECK(out.truth.completion_index == 5);
      for (std::size_t t = 1; t < 5; ++t) CHECK(out.truth.progress[t] >= out.truth.progress[t - 1]);
      if (tail == TailMode::Frozen) {
        for (std::size_t t = 5; t < 10; ++t) CHECK((out.clip.frame(t) - out.clip.frame(4)).norm() == 0.0);
      } else {
        CHECK(first_argmax(s) == 5);
      }
      if (tail == TailMode::DriftAway) {
        for (std::size_t t = 5; t < 10; ++t) CHECK(s[t] < s[t - 1]);
      }
    }
  }
}

TEST_CASE("generation is deterministic and validated") {
  SyntheticClipSpec spec;
  spec.tail = TailMode::DriftAway;
  spec.completion_index = 5;
  spec.noise_sigma = 0.05;
  spec.seed = 42;
  const auto a = generate_clip(spec);
  const auto b = generate_clip(spec);
  for (std::size_t t = 0; t < a.clip.size(); ++t) CHECK(a.clip.frame(t) == b.clip.frame(t));
  CHECK(a.clip.language() == b.clip.language());
  spec.seed = 43;
  CHECK(generate_clip(spec).clip.language() != a.clip.language());

  SyntheticClipSpec bad;
  bad.completion_index = 0;
  CHECK_THROWS_AS(generate_clip(bad), std::invalid_argument);
  bad.completion_index = 11;
  CHECK_THROWS_AS(generate_clip(bad), std::invalid_argument);
  bad = {};
  bad.noise_sigma = -1.0;
  CHECK_THROWS_AS(generate_clip(bad), std::invalid_argument);

  CHECK(parse_tail_mode("drift-away") == TailMode::DriftAway);
  CHECK(to_string(TailMode::SecondAction) == "second-action");
  CHECK_THROWS_AS(parse_tail_mode("loop"), std::invalid_argument);
}

TEST_CASE("random clips") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto c = random_clip(7, 4, seed);
    CHECK(c.size() == 7);
    CHECK(c.all_unit_norm());
    CHECK(c.timestamp(0) <= 2);
    for (std::size_t t = 1; t < c.size(); ++t) {
      CHECK(c.timestamp(t) - c.timestamp(t - 1) >= 1);
      CHECK(c.timestamp(t) - c.timestamp(t - 1) <= 3);
    }
    CHECK(random_clip(7, 4, seed).frame(3) == c.frame(3));
  }
}

TEST_CASE("slerp") {
  Rng rng(1);
  const Vector a = rng.unit_vector(5), b = rng.unit_vector(5);
  CHECK((slerp(a, b, 0.0) - a).norm() < 1e-15);
  CHECK((slerp(a, b, 1.0) - b).norm() < 1e-14);
  const Vector m = slerp(a, b, 0.5);
  CHECK(std::abs(m.norm() - 1.0) < 1e-14);
  CHECK(m.dot(a) == doctest::Approx(m.dot(b)));
}

TEST_CASE("bridge samples") {
  Rng rng(2);
  const Eigen::Index d = 6;
  const Vector vi = rng.unit_vector(d), vj = rng.unit_vector(d);
  const std::vector<std::int64_t> times{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const int n = 10000;
  Vector sum = Vector::Zero(d), sq = Vector::Zero(d);
  double bb_sum = 0.0;
  for (int s = 0; s < n; ++s) {
    const auto path = sample_bridge(vi, vj, times, static_cast<std::uint64_t>(s));
    REQUIRE(path.size() == times.size());
    CHECK(path.front() == vi);
    CHECK(path.back() == vj);
    sum += path[4];
    sq += path[4].cwiseProduct(path[4]);
    bb_sum += bb_loss(ClipSequence(times, path, vi), {0, times.size() - 1});
  }
  const Vector mean = sum / n;
  const Vector var = sq / n - mean.cwiseProduct(mean);
  const Vector expect = 0.5 * (vi + vj);
  for (Eigen::Index c = 0; c < d; ++c) {
    CHECK(std::abs(mean(c) - expect(c)) < 3.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(var(c) - 2.0) / 2.0 < 0.05);
  }
  // Each coordinate contributes 1/2 per interior frame in expectation.
  CHECK(std::abs(bb_sum / n - d / 2.0) / (d / 2.0) < 0.1);

  const auto clip = random_clip(6, 3, 5);
  const auto replaced = sample_bridge(clip, {1, 4}, 7);
  CHECK(replaced.frame(0) == clip.frame(0));
  CHECK(replaced.frame(1) == clip.frame(1));
  CHECK(replaced.frame(4) == clip.frame(4));
  CHECK(replaced.frame(5) == clip.frame(5));
  CHECK(replaced.frame(2) != clip.frame(2));
}

TEST_CASE("language perturbation") {
  Rng rng(3);
  for (int k = 0; k < 2000; ++k) {
    const Vector l = rng.unit_vector(2 + k % 10);
    CHECK(perturb_language(l, 0.0, k) == l);
    const Vector p = perturb_language(l, 0.1, k);
    const double dist = (p - l).norm();
    CHECK(dist > 0.0);
    CHECK(dist <= 0.1);
    CHECK(std::abs(p.norm() - 1.0) < 1e-12);
    CHECK((perturb_language(l, 2.0, k) - l).norm() <= 2.0);
  }
  const Vector l = rng.unit_vector(3);
  CHECK_THROWS_AS(perturb_language(l, 2.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(perturb_language(l, -0.1, 0), std::invalid_argument);
}

TEST_CASE("rng") {
  Rng a(7), b(7);
  for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
  Rng r(8);
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const auto i = r.uniform_int(-2, 3);
    CHECK(i >= -2);
    CHECK(i <= 3);
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / 20000) < 0.05);
  CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}
