#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "actol/embedding.hpp"
#include "actol/synthetic.hpp"
#include "actol/trainer.hpp"

namespace actol {

/// Language-conditioned reward per frame: cosine(v_t, l), plus its per-clip
/// min-max normalization.
struct RewardCurve {
  std::vector<double> raw;
  std::vector<double> normalized;
  /// 1-based frame number of the maximum; earliest frame wins ties.
  std::size_t argmax = 0;
};

RewardCurve reward_curve(const ClipSequence& clip);

/// Min-max normalization to [0, 1]; a constant curve maps to all zeros.
std::vector<double> min_max_normalize(std::span<const double> values);

/// 1-based index of the first maximum.
std::size_t argmax_frame(std::span<const double> values);

/// CSV with header frame_index,timestamp,raw_reward,normalized_reward.
/// frame_index is 1-based.
std::string reward_csv(const ClipSequence& clip, const RewardCurve& curve);

struct NamedObjective {
  std::string name;
  Objective objective;
};

struct ComparisonRun {
  std::uint64_t seed = 0;
  std::size_t completion_index = 0;
  std::vector<std::size_t> argmax;           // per objective
  std::vector<std::size_t> argmax_error;     // |argmax - completion|
  std::vector<RewardCurve> curves;           // per objective, after training
  std::vector<ClipSequence> trained;         // per objective
};

struct ComparisonRecord {
  std::vector<std::string> objectives;
  std::vector<ComparisonRun> runs;  // one per seed, in input order

  /// Median argmax error of one objective across seeds.
  double median_error(std::size_t objective) const;
};

double median(std::vector<double> values);

/// Trains every objective from the same generated clip for each seed and
/// reports how far each trained reward curve's argmax lands from the true
/// completion frame. Seeds run on up to `threads` workers; output order
/// follows `seeds` regardless.
ComparisonRecord compare_objectives(const SyntheticClipSpec& spec,
                                    std::span<const std::uint64_t> seeds,
                                    std::span<const NamedObjective> objectives,
                                    const TrainConfig& train, std::size_t threads = 1);

}  // namespace actol
