#include "actol/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "actol/random.hpp"

namespace actol {

namespace {

// Angles (radians, measured from the language embedding) of the clip
// geometry. Start angles are drawn per clip; the goal sits close to l.
constexpr double kGoalAngle = 0.2;
constexpr double kStartAngleMin = 1.8;
constexpr double kStartAngleMax = 2.6;
constexpr double kDriftAngleMin = 1.2;
constexpr double kDriftAngleMax = 2.0;

// Unit vector orthogonal to every vector in `basis` (assumed orthonormal).
Vector random_orthogonal(Rng& rng, Eigen::Index dim, std::initializer_list<const Vector*> basis) {
  for (;;) {
    Vector w = rng.gaussian_vector(dim);
    for (const Vector* b : basis) w -= w.dot(*b) * *b;
    if (w.norm() > 1e-6) return w / w.norm();
  }
}

Vector on_circle(const Vector& l, const Vector& u, double angle) {
  return std::cos(angle) * l + std::sin(angle) * u;
}

}  // namespace

TailMode parse_tail_mode(std::string_view name) {
  if (name == "none") return TailMode::None;
  if (name == "frozen") return TailMode::Frozen;
  if (name == "drift-away") return TailMode::DriftAway;
  if (name == "second-action") return TailMode::SecondAction;
  throw std::invalid_argument("unknown tail mode '" + std::string(name) + "'");
}

std::string_view to_string(TailMode mode) {
  switch (mode) {
    case TailMode::None: return "none";
    case TailMode::Frozen: return "frozen";
    case TailMode::DriftAway: return "drift-away";
    case TailMode::SecondAction: return "second-action";
  }
  return "?";
}

void SyntheticClipSpec::validate() const {
  if (frames < 1) throw std::invalid_argument("synthetic clip needs at least one frame");
  if (dim < 2) throw std::invalid_argument("synthetic clip dimension must be at least 2");
  if (completion_index < 1 || completion_index > frames) {
    throw std::invalid_argument("completion_index must lie in [1, frames]");
  }
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be non-negative");
}

Vector slerp(const Vector& a, const Vector& b, double q) {
  const double c = std::clamp(a.dot(b), -1.0, 1.0);
  const double omega = std::acos(c);
  const double s = std::sin(omega);
  if (s < 1e-9) {
    const Vector lin = (1.0 - q) * a + q * b;
    return lin.norm() > 1e-12 ? Vector(lin / lin.norm()) : a;
  }
  return (std::sin((1.0 - q) * omega) / s) * a + (std::sin(q * omega) / s) * b;
}

SyntheticClip generate_clip(const SyntheticClipSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Eigen::Index d = spec.dim;
  const std::size_t n = spec.frames;
  const std::size_t completion = spec.tail == TailMode::None ? n : spec.completion_index;

  const Vector l = rng.unit_vector(d);
  const Vector w = random_orthogonal(rng, d, {&l});
  const double start_angle = rng.uniform(kStartAngleMin, kStartAngleMax);
  const double drift_angle = rng.uniform(kDriftAngleMin, kDriftAngleMax);
  const Vector w2 = d >= 3 ? random_orthogonal(rng, d, {&l, &w}) : w;
  const Vector goal = on_circle(l, w, kGoalAngle);
  // The second action must start by moving away from l and end less aligned
  // than the goal, so the goal stays the unique peak along the geodesic.
  Vector second = rng.unit_vector(d);
  while (!(second.dot(l) < goal.dot(l) - 0.1 &&
           second.dot(l) - second.dot(goal) * goal.dot(l) < 0.0)) {
    second = rng.unit_vector(d);
  }

  std::vector<Vector> frames(n);
  GroundTruth truth{completion, std::vector<double>(n, 0.0)};

  const std::size_t rise = completion - 1;  // frames before the goal
  for (std::size_t p = 0; p < completion; ++p) {
    const double progress = rise == 0 ? 1.0 : static_cast<double>(p) / static_cast<double>(rise);
    truth.progress[p] = progress;
    frames[p] = p + 1 == completion ? goal
                                    : on_circle(l, w, start_angle + progress * (kGoalAngle - start_angle));
  }

  const std::size_t tail = n - completion;
  for (std::size_t k = 1; k <= tail; ++k) {
    const std::size_t p = completion - 1 + k;
    const double q = static_cast<double>(k) / static_cast<double>(tail);
    switch (spec.tail) {
      case TailMode::None:
      case TailMode::Frozen:
        frames[p] = goal;
        truth.progress[p] = 1.0;
        break;
      case TailMode::DriftAway: {
        // Direction rotates from w toward w2 inside the complement of l, so
        // the angle to l alone controls the similarity.
        const Vector u = std::cos(q * std::numbers::pi / 2) * w + std::sin(q * std::numbers::pi / 2) * w2;
        frames[p] = on_circle(l, u / u.norm(), kGoalAngle + q * (drift_angle - kGoalAngle));
        truth.progress[p] = 1.0 - q;
        break;
      }
      case TailMode::SecondAction:
        frames[p] = slerp(goal, second, q);
        truth.progress[p] = 1.0;
        break;
    }
  }

  if (spec.noise_sigma > 0.0) {
    for (auto& f : frames) f = normalize(f + spec.noise_sigma * rng.gaussian_vector(d));
  }

  std::vector<std::int64_t> timestamps(n);
  for (std::size_t p = 0; p < n; ++p) timestamps[p] = static_cast<std::int64_t>(p);
  return {ClipSequence(std::move(timestamps), std::move(frames), l), std::move(truth)};
}

ClipSequence random_clip(std::size_t frames, Eigen::Index dim, std::uint64_t seed,
                         std::int64_t max_gap) {
  if (frames < 1) throw std::invalid_argument("random_clip: need at least one frame");
  if (max_gap < 1) throw std::invalid_argument("random_clip: max_gap must be at least 1");
  Rng rng(seed);
  std::vector<std::int64_t> timestamps(frames);
  timestamps[0] = rng.uniform_int(0, 2);
  for (std::size_t p = 1; p < frames; ++p) {
    timestamps[p] = timestamps[p - 1] + rng.uniform_int(1, max_gap);
  }
  std::vector<Vector> embeddings;
  embeddings.reserve(frames);
  for (std::size_t p = 0; p < frames; ++p) embeddings.push_back(rng.unit_vector(dim));
  return ClipSequence(std::move(timestamps), std::move(embeddings), rng.unit_vector(dim));
}

std::vector<Vector> sample_bridge(const Vector& v_i, const Vector& v_j,
                                  std::span<const std::int64_t> times, std::uint64_t seed) {
  if (times.size() < 2) {
    throw std::invalid_argument("sample_bridge: need at least the two endpoint times");
  }
  if (v_i.size() != v_j.size()) {
    throw std::invalid_argument("sample_bridge: endpoint dimension mismatch");
  }
  validate_timestamps(times);
  Rng rng(seed);
  const std::int64_t a = times.front();
  const std::int64_t b = times.back();
  std::vector<Vector> out;
  out.reserve(times.size());
  out.push_back(v_i);
  for (std::size_t p = 1; p + 1 < times.size(); ++p) {
    const auto t = static_cast<double>(times[p]);
    const double alpha = (t - static_cast<double>(a)) / static_cast<double>(b - a);
    const double sigma = std::sqrt(bb_variance(t, a, b));
    out.push_back(v_i + alpha * (v_j - v_i) + sigma * rng.gaussian_vector(v_i.size()));
  }
  out.push_back(v_j);
  return out;
}

ClipSequence sample_bridge(const ClipSequence& clip, const BridgeInterval& interval,
                           std::uint64_t seed) {
  interval.validate(clip.size());
  const auto& ts = clip.timestamps();
  const std::span<const std::int64_t> times(ts.data() + interval.start,
                                            interval.end - interval.start + 1);
  auto points = sample_bridge(clip.frame(interval.start), clip.frame(interval.end), times, seed);
  ClipSequence out = clip;
  for (std::size_t p = interval.start + 1; p < interval.end; ++p) {
    out.frame(p) = std::move(points[p - interval.start]);
  }
  return out;
}

Vector perturb_language(const Vector& l, double max_distance, std::uint64_t seed) {
  if (!(max_distance >= 0.0)) {
    throw std::invalid_argument("perturb_language: distance must be non-negative");
  }
  if (max_distance > 2.0) {
    throw std::invalid_argument("perturb_language: distance exceeds the unit-sphere diameter");
  }
  if (max_distance == 0.0) return l;
  const Vector base = normalize(l);

  Rng rng(seed);
  const Vector u = random_orthogonal(rng, base.size(), {&base});
  // A chord of length c subtends the angle 2 asin(c/2). Rounding can leave
  // the result a hair too far; shrink the angle with a growing factor.
  double angle = 2.0 * std::asin(max_distance / 2.0);
  Vector out = normalize(on_circle(base, u, angle));
  for (double shrink = 1e-12; (out - l).norm() > max_distance; shrink *= 2.0) {
    angle *= 1.0 - shrink;
    out = normalize(on_circle(base, u, angle));
  }
  return out;
}

}  // namespace actol
