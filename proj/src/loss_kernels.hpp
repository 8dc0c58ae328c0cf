#pragma once

// Scalar-generic loss formulas. The public API instantiates them with double;
// the finite-difference oracle uses long double so that its central
// differences are not swamped by rounding in the loss value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "actol/embedding.hpp"
#include "actol/objectives.hpp"

namespace actol::detail {

inline std::int64_t abs_diff(std::int64_t a, std::int64_t b) { return a > b ? a - b : b - a; }

template <class S>
S log_sum_exp(std::span<const S> x) {
  if (x.empty()) return -std::numeric_limits<S>::infinity();
  const S m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  S acc = 0;
  for (S v : x) acc += std::exp(v - m);
  return m + std::log(acc);
}

// -log(exp(positive) / sum_k exp(logits_k)); logits contains the positive.
template <class S>
S contrast_term(S positive_logit, std::span<const S> logits) {
  return log_sum_exp(logits) - positive_logit;
}

template <class S>
std::vector<S> similarities(const ClipSequence& clip) {
  if constexpr (std::is_same_v<S, double>) {
    return clip.similarities();
  } else {
    std::vector<S> sims(clip.size());
    const Vector& l = clip.language();
    for (std::size_t t = 0; t < clip.size(); ++t) {
      const Vector& v = clip.frame(t);
      S dot = 0, vv = 0, ll = 0;
      for (Eigen::Index c = 0; c < v.size(); ++c) {
        const S a = v(c);
        const S b = l(c);
        dot += a * b;
        vv += a * a;
        ll += b * b;
      }
      sims[t] = std::clamp(dot / (std::sqrt(vv) * std::sqrt(ll)), S(-1), S(1));
    }
    return sims;
  }
}

// Mean over ordered pairs (i, j) of the contrast of R_ij against the
// negatives N_ij = {k != i : d_ik >= d_ij}. score(i, k) returns R_ik.
template <class S, class Score>
S vlo_mean(std::span<const std::int64_t> timestamps, Score&& score, S temperature) {
  const std::size_t n = timestamps.size();
  std::vector<S> logits;
  logits.reserve(n);
  S sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto dij = abs_diff(timestamps[i], timestamps[j]);
      logits.clear();
      for (std::size_t k = 0; k < n; ++k) {
        if (k != i && abs_diff(timestamps[i], timestamps[k]) >= dij) {
          logits.push_back(score(i, k) / temperature);
        }
      }
      sum += contrast_term<S>(score(i, j) / temperature, logits);
    }
  }
  return sum / static_cast<S>(n * (n - 1));
}

template <class S>
S vlo_from_sims(std::span<const std::int64_t> timestamps, const std::vector<S>& sims,
                S temperature) {
  return vlo_mean<S>(
      timestamps, [&](std::size_t i, std::size_t k) { return -std::abs(sims[i] - sims[k]); },
      temperature);
}

template <class S>
S bridge_variance(S t, S a, S b) {
  return (t - a) * (b - t) / (b - a);
}

// Interval must already be validated against the clip.
template <class S>
S bb_mean_loss(const ClipSequence& clip, const BridgeInterval& interval) {
  const std::size_t interior = interval.interior_count();
  if (interior == 0) return 0;
  const auto a = static_cast<S>(clip.timestamp(interval.start));
  const auto b = static_cast<S>(clip.timestamp(interval.end));
  const Vector& vi = clip.frame(interval.start);
  const Vector& vj = clip.frame(interval.end);
  S sum = 0;
  for (std::size_t p = interval.start + 1; p < interval.end; ++p) {
    const auto t = static_cast<S>(clip.timestamp(p));
    const S alpha = (t - a) / (b - a);
    const Vector& v = clip.frame(p);
    S sq = 0;
    for (Eigen::Index c = 0; c < v.size(); ++c) {
      const S mean = static_cast<S>(vi(c)) + alpha * (static_cast<S>(vj(c)) - static_cast<S>(vi(c)));
      const S dev = static_cast<S>(v(c)) - mean;
      sq += dev * dev;
    }
    sum += sq / (2 * bridge_variance(t, a, b));
  }
  return sum / static_cast<S>(interior);
}

template <class S>
S tnce_mean(const ClipSequence& clip, const TnceConfig& cfg, std::span<const ContrastTerm> terms) {
  const auto sims = similarities<S>(clip);
  const auto tau = static_cast<S>(cfg.temperature);
  std::vector<S> logits;
  S sum = 0;
  for (const auto& term : terms) {
    auto score = [&](std::size_t k) {
      return cfg.score == ScoreKind::DirectSim ? sims[k] : -std::abs(sims[term.anchor] - sims[k]);
    };
    logits.clear();
    for (std::size_t k : term.candidates) logits.push_back(score(k) / tau);
    sum += contrast_term<S>(score(term.positive) / tau, logits);
  }
  return sum / static_cast<S>(terms.size());
}

}  // namespace actol::detail
