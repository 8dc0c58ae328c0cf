#include "actol/objectives.hpp"

#include "loss_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace actol {

namespace {

void require_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("temperature must be positive and finite");
  }
}

using detail::abs_diff;

}  // namespace

void BridgeInterval::validate(std::size_t clip_size) const {
  if (start >= end) {
    throw std::invalid_argument("bridge interval requires start < end");
  }
  if (end >= clip_size) {
    throw std::invalid_argument("bridge interval end " + std::to_string(end) +
                                " outside clip of size " + std::to_string(clip_size));
  }
}

void TnceConfig::validate() const {
  require_temperature(temperature);
}

std::vector<ContrastTerm> tnce_terms(std::span<const std::int64_t> timestamps,
                                     const TnceConfig& cfg) {
  const std::size_t n = timestamps.size();
  if (n < 2) {
    throw std::invalid_argument("tnce: clip needs at least two frames");
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  switch (cfg.positive) {
    case PositiveSelector::LastFrame:
      pairs.emplace_back(0, n - 1);
      break;
    case PositiveSelector::FutureFrame:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
      break;
    case PositiveSelector::VloPair:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) pairs.emplace_back(i, j);
      break;
  }

  std::vector<ContrastTerm> terms;
  terms.reserve(pairs.size());
  for (const auto& [a, p] : pairs) {
    ContrastTerm term{a, p, {}};
    const auto dp = abs_diff(timestamps[a], timestamps[p]);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == a) continue;
      if (cfg.negative == NegativeSelector::FartherFrames &&
          abs_diff(timestamps[a], timestamps[k]) < dp) {
        continue;
      }
      term.candidates.push_back(k);
    }
    if (term.candidates.empty()) {
      throw std::invalid_argument("tnce: selector produced an empty candidate set");
    }
    terms.push_back(std::move(term));
  }
  if (terms.empty()) {
    throw std::invalid_argument("tnce: selector produced no positive pairs");
  }
  return terms;
}

PositiveSelector parse_positive_selector(std::string_view name) {
  if (name == "last-frame") return PositiveSelector::LastFrame;
  if (name == "future-frame") return PositiveSelector::FutureFrame;
  if (name == "vlo-pair") return PositiveSelector::VloPair;
  throw std::invalid_argument("unknown positive selector '" + std::string(name) + "'");
}

NegativeSelector parse_negative_selector(std::string_view name) {
  if (name == "other-frames") return NegativeSelector::OtherFrames;
  if (name == "farther-frames") return NegativeSelector::FartherFrames;
  throw std::invalid_argument("unknown negative selector '" + std::string(name) + "'");
}

ScoreKind parse_score_kind(std::string_view name) {
  if (name == "direct-sim") return ScoreKind::DirectSim;
  if (name == "difference-score") return ScoreKind::DifferenceScore;
  throw std::invalid_argument("unknown score kind '" + std::string(name) + "'");
}

std::string_view to_string(PositiveSelector s) {
  switch (s) {
    case PositiveSelector::LastFrame: return "last-frame";
    case PositiveSelector::FutureFrame: return "future-frame";
    case PositiveSelector::VloPair: return "vlo-pair";
  }
  return "?";
}

std::string_view to_string(NegativeSelector s) {
  return s == NegativeSelector::OtherFrames ? "other-frames" : "farther-frames";
}

std::string_view to_string(ScoreKind s) {
  return s == ScoreKind::DirectSim ? "direct-sim" : "difference-score";
}

double log_sum_exp(std::span<const double> x) { return detail::log_sum_exp(x); }

std::vector<std::size_t> negative_set(std::span<const std::int64_t> timestamps, std::size_t i,
                                      std::size_t j) {
  const std::size_t n = timestamps.size();
  if (i >= n || j >= n) {
    throw std::out_of_range("negative_set: frame index out of range");
  }
  if (i == j) {
    throw std::invalid_argument("negative_set: anchor and positive must differ");
  }
  const auto dij = abs_diff(timestamps[i], timestamps[j]);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < n; ++k) {
    if (k != i && abs_diff(timestamps[i], timestamps[k]) >= dij) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> negative_set(const ClipSequence& clip, std::size_t i, std::size_t j) {
  return negative_set(clip.timestamps(), i, j);
}

double vlo_loss_on_scores(std::span<const std::int64_t> timestamps, const Eigen::MatrixXd& scores,
                          double temperature) {
  require_temperature(temperature);
  const std::size_t n = timestamps.size();
  if (n < 2) {
    throw std::invalid_argument("vlo_loss: clip needs at least two frames");
  }
  if (scores.rows() != static_cast<Eigen::Index>(n) || scores.cols() != static_cast<Eigen::Index>(n)) {
    throw std::invalid_argument("vlo_loss_on_scores: score matrix must be T x T");
  }
  return detail::vlo_mean<double>(
      timestamps,
      [&](std::size_t i, std::size_t k) {
        return scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      },
      temperature);
}

double vlo_loss(const ClipSequence& clip, double temperature) {
  if (clip.size() < 2) {
    throw std::invalid_argument("vlo_loss: clip needs at least two frames");
  }
  return vlo_loss_on_scores(clip.timestamps(), clip.alignment_matrix(), temperature);
}

DistanceProfile distance_profile(std::span<const std::int64_t> timestamps, std::size_t anchor) {
  if (anchor >= timestamps.size()) {
    throw std::out_of_range("distance_profile: anchor out of range");
  }
  std::map<std::int64_t, std::size_t> counts;
  for (std::size_t j = 0; j < timestamps.size(); ++j) {
    if (j != anchor) ++counts[abs_diff(timestamps[anchor], timestamps[j])];
  }
  DistanceProfile profile;
  profile.anchor = anchor;
  for (const auto& [d, c] : counts) {
    profile.distances.push_back(d);
    profile.multiplicities.push_back(c);
  }
  return profile;
}

DistanceProfile distance_profile(const ClipSequence& clip, std::size_t anchor) {
  return distance_profile(clip.timestamps(), anchor);
}

double lower_bound(std::span<const std::int64_t> timestamps) {
  const std::size_t n = timestamps.size();
  if (n < 2) {
    throw std::invalid_argument("lower_bound: clip needs at least two frames");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m : distance_profile(timestamps, i).multiplicities) {
      const auto c = static_cast<double>(m);
      sum += c * std::log(c);
    }
  }
  return sum / static_cast<double>(n * (n - 1));
}

double lower_bound(const ClipSequence& clip) { return lower_bound(clip.timestamps()); }

double bb_variance(double t, std::int64_t start_time, std::int64_t end_time) {
  if (end_time <= start_time) {
    throw std::invalid_argument("bb_variance: interval end must follow its start");
  }
  const auto a = static_cast<double>(start_time);
  const auto b = static_cast<double>(end_time);
  if (t < a || t > b) {
    throw std::out_of_range("bb_variance: time outside the bridge interval");
  }
  return detail::bridge_variance(t, a, b);
}

double bb_variance(double t, const BridgeInterval& interval, const ClipSequence& clip) {
  interval.validate(clip.size());
  return bb_variance(t, clip.timestamp(interval.start), clip.timestamp(interval.end));
}

Vector bb_mean(double t, const BridgeInterval& interval, const ClipSequence& clip) {
  interval.validate(clip.size());
  const auto a = static_cast<double>(clip.timestamp(interval.start));
  const auto b = static_cast<double>(clip.timestamp(interval.end));
  if (t < a || t > b) {
    throw std::out_of_range("bb_mean: time outside the bridge interval");
  }
  const double alpha = (t - a) / (b - a);
  const Vector& vi = clip.frame(interval.start);
  const Vector& vj = clip.frame(interval.end);
  return vi + alpha * (vj - vi);
}

double bb_loss(const ClipSequence& clip, const BridgeInterval& interval) {
  interval.validate(clip.size());
  return detail::bb_mean_loss<double>(clip, interval);
}

BridgeInterval full_interval(const ClipSequence& clip) {
  if (clip.size() < 2) {
    throw std::invalid_argument("full_interval: clip needs at least two frames");
  }
  return {0, clip.size() - 1};
}

LossBreakdown actol_loss(const ClipSequence& clip, double lambda, double temperature,
                         std::span<const BridgeInterval> intervals) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("actol_loss: lambda must be non-negative");
  }
  if (intervals.empty()) {
    throw std::invalid_argument("actol_loss: at least one bridge interval is required");
  }
  LossBreakdown out;
  out.vlo = vlo_loss(clip, temperature);
  double bb = 0.0;
  for (const auto& iv : intervals) bb += bb_loss(clip, iv);
  out.bb = bb / static_cast<double>(intervals.size());
  out.total = out.vlo + lambda * out.bb;
  out.lower_bound = lower_bound(clip);
  out.gap = out.vlo - out.lower_bound;
  return out;
}

LossBreakdown actol_loss(const ClipSequence& clip, double lambda, double temperature) {
  const BridgeInterval full = full_interval(clip);
  return actol_loss(clip, lambda, temperature, std::span<const BridgeInterval>(&full, 1));
}

double tnce_loss(const ClipSequence& clip, const TnceConfig& cfg) {
  cfg.validate();
  const auto terms = tnce_terms(clip.timestamps(), cfg);
  return detail::tnce_mean<double>(clip, cfg, terms);
}

}  // namespace actol
