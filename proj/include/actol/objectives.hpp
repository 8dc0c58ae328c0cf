#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "actol/embedding.hpp"

namespace actol {

/// Sorted unique temporal distances from one anchor frame, with the number of
/// frames found at each distance.
struct DistanceProfile {
  std::size_t anchor = 0;
  std::vector<std::int64_t> distances;    // strictly increasing, all > 0
  std::vector<std::size_t> multiplicities;  // sums to T - 1
};

/// Closed position range [start, end] inside a clip used as a bridge interval.
struct BridgeInterval {
  std::size_t start = 0;
  std::size_t end = 1;

  void validate(std::size_t clip_size) const;
  std::size_t interior_count() const { return end - start - 1; }
};

struct LossBreakdown {
  double vlo = 0.0;
  double bb = 0.0;
  double total = 0.0;
  double lower_bound = 0.0;
  double gap = 0.0;  // vlo - lower_bound
};

enum class PositiveSelector { LastFrame, FutureFrame, VloPair };
enum class NegativeSelector { OtherFrames, FartherFrames };
enum class ScoreKind { DirectSim, DifferenceScore };

/// Configuration of the unified time-contrastive objective.
///
/// Each term is an (anchor, positive) frame pair plus a candidate set that the
/// softmax normalizes over. The positive is always a member of its candidate
/// set, so every term is non-negative.
///
///   LastFrame:   one term, anchor = first frame, positive = last frame.
///   FutureFrame: every (i, j) with j later than i.
///   VloPair:     every ordered (i, j), i != j.
///
///   OtherFrames:   candidates are all frames except the anchor.
///   FartherFrames: candidates k != anchor with |n(a)-n(k)| >= |n(a)-n(p)|.
///
///   DirectSim:       score(k) = sim(v_k, l).
///   DifferenceScore: score(k) = R(v_a, v_k, l).
struct TnceConfig {
  PositiveSelector positive = PositiveSelector::VloPair;
  NegativeSelector negative = NegativeSelector::FartherFrames;
  ScoreKind score = ScoreKind::DifferenceScore;
  double temperature = 1.0;

  void validate() const;

  /// AcTOL's ordering objective expressed as a tNCE configuration.
  static TnceConfig vlo(double temperature = 1.0) {
    return {PositiveSelector::VloPair, NegativeSelector::FartherFrames, ScoreKind::DifferenceScore,
            temperature};
  }
  /// Final-frame goal-reaching baseline.
  static TnceConfig last_frame(double temperature = 1.0) {
    return {PositiveSelector::LastFrame, NegativeSelector::OtherFrames, ScoreKind::DirectSim,
            temperature};
  }
};

/// One softmax term of a tNCE objective.
struct ContrastTerm {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::vector<std::size_t> candidates;  // ascending, contains positive
};

std::vector<ContrastTerm> tnce_terms(std::span<const std::int64_t> timestamps,
                                     const TnceConfig& cfg);

PositiveSelector parse_positive_selector(std::string_view name);
NegativeSelector parse_negative_selector(std::string_view name);
ScoreKind parse_score_kind(std::string_view name);
std::string_view to_string(PositiveSelector s);
std::string_view to_string(NegativeSelector s);
std::string_view to_string(ScoreKind s);

/// log(sum(exp(x))) with max subtraction. Returns -inf for an empty range.
double log_sum_exp(std::span<const double> x);

/// { k : k != i, |n(i)-n(k)| >= |n(i)-n(j)| }, ascending. Throws if i == j.
std::vector<std::size_t> negative_set(std::span<const std::int64_t> timestamps, std::size_t i,
                                      std::size_t j);
std::vector<std::size_t> negative_set(const ClipSequence& clip, std::size_t i, std::size_t j);

/// Mean over all T(T-1) ordered pairs of the VLO InfoNCE term.
double vlo_loss(const ClipSequence& clip, double temperature = 1.0);

/// VLO loss with alignment scores supplied directly. Only off-diagonal entries
/// are read.
double vlo_loss_on_scores(std::span<const std::int64_t> timestamps, const Eigen::MatrixXd& scores,
                          double temperature = 1.0);

DistanceProfile distance_profile(std::span<const std::int64_t> timestamps, std::size_t anchor);
DistanceProfile distance_profile(const ClipSequence& clip, std::size_t anchor);

/// (1/(T(T-1))) sum_i sum_m n_im log n_im.
double lower_bound(std::span<const std::int64_t> timestamps);
double lower_bound(const ClipSequence& clip);

/// Brownian bridge mean at time t for the interval's endpoint embeddings.
Vector bb_mean(double t, const BridgeInterval& interval, const ClipSequence& clip);

/// (t - a)(b - t)/(b - a) for a bridge pinned at times a < b.
double bb_variance(double t, std::int64_t start_time, std::int64_t end_time);
double bb_variance(double t, const BridgeInterval& interval, const ClipSequence& clip);

/// Mean over interior frames of |v_t - mean(t)|^2 / (2 var(t)). Zero when the
/// interval has no interior frames.
double bb_loss(const ClipSequence& clip, const BridgeInterval& interval);

BridgeInterval full_interval(const ClipSequence& clip);

/// vlo + lambda * mean(bb over intervals). Intervals must be non-empty.
LossBreakdown actol_loss(const ClipSequence& clip, double lambda, double temperature,
                         std::span<const BridgeInterval> intervals);
/// Same, with the whole clip as the single bridge interval.
LossBreakdown actol_loss(const ClipSequence& clip, double lambda, double temperature = 1.0);

double tnce_loss(const ClipSequence& clip, const TnceConfig& cfg);

}  // namespace actol
