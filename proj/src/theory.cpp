#include "actol/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "actol/random.hpp"
#include "actol/synthetic.hpp"

namespace actol {

void TheoremReport::record(double slack, bool strict) {
  if (instances == 0 || slack < worst_slack) worst_slack = slack;
  ++instances;
  const bool held = strict ? slack > 0.0 : slack >= 0.0;
  if (!held) ++violations;
}

VarianceModel default_variance_model() {
  return [](double t, std::int64_t a, std::int64_t b) { return bb_variance(t, a, b); };
}

TheoremReport check_lower_bound(std::span<const ClipSequence> clips, double temperature) {
  if (clips.empty()) throw std::invalid_argument("check_lower_bound: no clips");
  TheoremReport report;
  report.theorem = "lower_bound";
  double boundary = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& clip : clips) {
    const double loss = vlo_loss(clip, temperature);
    const double bound = lower_bound(clip);
    if (clip.size() == 2) {
      boundary += 1.0;
      continue;
    }
    const double gap = loss - bound;
    min_gap = std::min(min_gap, gap);
    report.record(gap, /*strict=*/true);
  }
  report.measurements["boundary_cases"] = boundary;
  if (std::isfinite(min_gap)) report.measurements["min_gap"] = min_gap;
  report.finalize();
  return report;
}

double near_optimal_gap(std::span<const std::int64_t> timestamps, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("near_optimal_gap: eps must be positive");
  if (timestamps.size() < 2) throw std::invalid_argument("near_optimal_gap: need two frames");
  std::size_t min_mult = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    for (std::size_t m : distance_profile(timestamps, i).multiplicities) {
      min_mult = std::min(min_mult, m);
    }
  }
  return std::log(static_cast<double>(timestamps.size()) / (static_cast<double>(min_mult) * eps));
}

Eigen::MatrixXd construct_near_optimal(std::span<const std::int64_t> timestamps, double eps) {
  validate_timestamps(timestamps);
  const double gamma = near_optimal_gap(timestamps, eps);
  const std::size_t n = timestamps.size();

  std::set<std::int64_t> distinct;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) distinct.insert(timestamps[j] - timestamps[i]);

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto d = timestamps[i] > timestamps[j] ? timestamps[i] - timestamps[j]
                                                   : timestamps[j] - timestamps[i];
      const auto rank = std::distance(distinct.begin(), distinct.find(d));
      scores(i, j) = -gamma * static_cast<double>(rank);
    }
  }
  return scores;
}

TheoremReport check_tightness(std::span<const std::int64_t> timestamps,
                              std::span<const double> eps_values) {
  TheoremReport report;
  report.theorem = "tightness";
  const double bound = lower_bound(timestamps);
  for (double eps : eps_values) {
    const double loss = vlo_loss_on_scores(timestamps, construct_near_optimal(timestamps, eps));
    const double slack = bound + eps - loss;
    report.record(slack, /*strict=*/true);
  }
  report.measurements["lower_bound"] = bound;
  report.finalize();
  return report;
}

TheoremReport check_continuity(const ClipSequence& clip,
                               std::span<const std::pair<std::size_t, std::size_t>> pairs,
                               const VarianceModel& variance) {
  TheoremReport report;
  report.theorem = "continuity";
  std::vector<std::pair<std::size_t, std::size_t>> all;
  if (pairs.empty()) {
    for (std::size_t k = 0; k < clip.size(); ++k)
      for (std::size_t m = k; m < clip.size(); ++m) all.emplace_back(k, m);
    pairs = all;
  }
  for (const auto& [k, m] : pairs) {
    if (k >= clip.size() || m >= clip.size()) {
      throw std::out_of_range("check_continuity: pair index out of range");
    }
    const double score = alignment_score(clip.frame(k), clip.frame(m), clip.language());
    const double dist = (clip.frame(k) - clip.frame(m)).norm();
    report.record(dist - std::abs(score) + kInequalityTolerance);
  }

  // Bridge deviation over the whole clip, measured rather than bounded.
  double ratio = 0.0;
  bool well_formed = true;
  if (clip.size() >= 3) {
    const BridgeInterval full = full_interval(clip);
    const auto a = clip.timestamp(full.start);
    const auto b = clip.timestamp(full.end);
    for (std::size_t p = 1; p + 1 < clip.size(); ++p) {
      const auto t = static_cast<double>(clip.timestamp(p));
      const double dev = (clip.frame(p) - bb_mean(t, full, clip)).squaredNorm();
      const double r = dev / variance(t, a, b);
      if (!std::isfinite(r) || r < 0.0) {
        well_formed = false;
        ratio = r;
        break;
      }
      ratio = std::max(ratio, r);
    }
    const double span = static_cast<double>(b - a);
    // Implied modulus for eps = 0.1 with Lipschitz constant 1.
    const double eps = 0.1;
    report.measurements["implied_delta_eps_0.1"] = std::min(eps * span / 4.0, eps * eps / 4.0);
  }
  report.measurements["deviation_ratio"] = ratio;
  report.record(well_formed ? 0.0 : -1.0);
  report.finalize();
  return report;
}

TheoremReport check_lipschitz(std::size_t trials, Eigen::Index dim, std::uint64_t seed) {
  TheoremReport report;
  report.theorem = "lipschitz";
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const Vector vk = rng.unit_vector(dim);
    const Vector vm = rng.unit_vector(dim);
    const Vector l = rng.unit_vector(dim);
    const double score = alignment_score(vk, vm, l);
    report.record((vk - vm).norm() - std::abs(score) + kInequalityTolerance);
  }
  report.finalize();
  return report;
}

TheoremReport check_robustness(const Vector& v_i, const Vector& v_j, const Vector& l,
                               double delta_l, std::size_t trials, std::uint64_t seed) {
  if (!(delta_l >= 0.0) || delta_l > 2.0) {
    throw std::invalid_argument("check_robustness: delta_l must lie in [0, 2]");
  }
  TheoremReport report;
  report.theorem = "robustness";
  const double base = alignment_score(v_i, v_j, l);
  const double bound = 2.0 * delta_l;
  double worst_ratio = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Vector lp = perturb_language(l, delta_l, derive_seed(seed, t));
    const double change = std::abs(alignment_score(v_i, v_j, lp) - base);
    report.record(bound - change + kInequalityTolerance);
    if (bound > 0.0) worst_ratio = std::max(worst_ratio, change / bound);
  }
  report.measurements["worst_ratio"] = worst_ratio;
  report.finalize();
  return report;
}

TheoremReport check_bridge_statistics(std::size_t samples, std::int64_t length, Eigen::Index dim,
                                      std::uint64_t seed, double rel_tol,
                                      const VarianceModel& variance) {
  if (samples < 2) throw std::invalid_argument("check_bridge_statistics: need two samples");
  if (length < 2 || length % 2 != 0) {
    throw std::invalid_argument("check_bridge_statistics: length must be even and >= 2");
  }
  TheoremReport report;
  report.theorem = "bridge_statistics";
  Rng rng(seed);
  const Vector vi = rng.unit_vector(dim);
  const Vector vj = rng.unit_vector(dim);
  std::vector<std::int64_t> times(static_cast<std::size_t>(length) + 1);
  for (std::size_t p = 0; p < times.size(); ++p) times[p] = static_cast<std::int64_t>(p);
  const std::size_t mid = times.size() / 2;
  const Vector mean_mid = 0.5 * (vi + vj);

  Vector sum = Vector::Zero(dim);
  double sq = 0.0;
  std::size_t endpoint_mismatches = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto path = sample_bridge(vi, vj, times, derive_seed(seed, s + 1));
    if (path.front() != vi || path.back() != vj) ++endpoint_mismatches;
    const Vector dev = path[mid] - mean_mid;
    sum += dev;
    sq += dev.squaredNorm();
  }
  const auto ns = static_cast<double>(samples);
  const double empirical_var = sq / (ns * static_cast<double>(dim));
  const double expected_var = variance(static_cast<double>(length) / 2.0, 0, length);
  const double rel_err = std::abs(empirical_var - expected_var) / std::abs(expected_var);
  const double se = std::sqrt(empirical_var / ns);
  const double mean_z = (sum / ns).cwiseAbs().maxCoeff() / se;

  report.record(endpoint_mismatches == 0 ? 0.0 : -static_cast<double>(endpoint_mismatches));
  report.record(std::isfinite(rel_err) ? rel_tol - rel_err : -1.0);
  report.measurements["empirical_variance"] = empirical_var;
  report.measurements["expected_variance"] = expected_var;
  report.measurements["variance_rel_error"] = rel_err;
  report.measurements["max_mean_z"] = mean_z;
  report.finalize();
  return report;
}

}  // namespace actol
