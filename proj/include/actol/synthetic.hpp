#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "actol/embedding.hpp"
#include "actol/objectives.hpp"

namespace actol {

/// What happens after the instructed action completes.
///   None:         the action spans the whole clip (completion is the last frame).
///   Frozen:       the completed state repeats.
///   DriftAway:    frames move away from the language along a geodesic.
///   SecondAction: frames move toward an unrelated random direction.
enum class TailMode { None, Frozen, DriftAway, SecondAction };

TailMode parse_tail_mode(std::string_view name);
std::string_view to_string(TailMode mode);

struct SyntheticClipSpec {
  std::size_t frames = 10;
  Eigen::Index dim = 8;
  /// 1-based frame number at which the action completes.
  std::size_t completion_index = 10;
  TailMode tail = TailMode::None;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  /// 1-based frame number of maximum alignment.
  std::size_t completion_index = 0;
  /// Latent action progress per frame, in [0, 1].
  std::vector<double> progress;
};

struct SyntheticClip {
  ClipSequence clip;
  GroundTruth truth;
};

/// Unit-sphere geodesic interpolation; falls back to normalized linear
/// interpolation when the endpoints are (anti)parallel.
Vector slerp(const Vector& a, const Vector& b, double q);

/// Toy clip with timestamps 0..T-1. Frames follow a geodesic toward the
/// language embedding, peak at the completion frame, then follow the tail
/// mode. Deterministic in spec.seed.
SyntheticClip generate_clip(const SyntheticClipSpec& spec);

/// Random clip: unit-norm frames and language, timestamps starting in [0, 2]
/// with integer gaps drawn from [1, max_gap]. Deterministic in seed.
ClipSequence random_clip(std::size_t frames, Eigen::Index dim, std::uint64_t seed,
                         std::int64_t max_gap = 3);

/// Draws a Brownian bridge pinned at v_i (time times.front()) and v_j (time
/// times.back()). Each interior point is an independent Gaussian with mean
/// bb_mean and per-coordinate variance bb_variance. Endpoints are returned
/// exactly.
std::vector<Vector> sample_bridge(const Vector& v_i, const Vector& v_j,
                                  std::span<const std::int64_t> times, std::uint64_t seed);

/// Copy of `clip` with the interior of `interval` replaced by a bridge sample.
ClipSequence sample_bridge(const ClipSequence& clip, const BridgeInterval& interval,
                           std::uint64_t seed);

/// Unit vector l' with |l - l'| <= max_distance, reached by rotating l along a
/// random great circle through a chord of length max_distance.
/// Throws if max_distance is negative or exceeds the sphere diameter 2.
Vector perturb_language(const Vector& l, double max_distance, std::uint64_t seed);

}  // namespace actol
