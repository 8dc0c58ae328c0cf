#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "actol/embedding.hpp"
#include "actol/objectives.hpp"

namespace actol {

/// Outcome of one numerical theorem check.
///
/// `worst_slack` is the smallest margin by which the asserted inequality held
/// (negative when violated). `measurements` carries reported, non-asserted
/// quantities.
struct TheoremReport {
  std::string theorem;
  std::size_t instances = 0;
  std::size_t violations = 0;
  double worst_slack = 0.0;
  bool pass = true;
  std::map<std::string, double> measurements;

  /// Counts one instance; a violation when slack < 0 (or <= 0 if strict).
  void record(double slack, bool strict = false);
  void finalize() { pass = violations == 0; }
};

/// Rounding allowance for inequalities that hold with equality only on
/// measure-zero configurations.
inline constexpr double kInequalityTolerance = 1e-12;

/// Variance of a bridge pinned at times (a, b), evaluated at t.
using VarianceModel = std::function<double(double t, std::int64_t a, std::int64_t b)>;

VarianceModel default_variance_model();

/// Strict lower bound vlo_loss > L* on every clip with T >= 3; T = 2 clips
/// (0 == 0) are counted under measurements["boundary_cases"].
TheoremReport check_lower_bound(std::span<const ClipSequence> clips, double temperature = 1.0);

/// gamma = log(T / (min_{i,m} n_im * eps)).
double near_optimal_gap(std::span<const std::int64_t> timestamps, double eps);

/// Symmetric score matrix where frames at equal distance share a score and
/// every closer distance level beats every farther one by at least gamma:
/// R_ij = -gamma * rank(d_ij), rank over the clip's distinct distances.
Eigen::MatrixXd construct_near_optimal(std::span<const std::int64_t> timestamps, double eps);

/// vlo_loss_on_scores(construct_near_optimal(eps)) < L* + eps for each eps.
TheoremReport check_tightness(std::span<const std::int64_t> timestamps,
                              std::span<const double> eps_values);

/// Asserts |R(v_k, v_m, l)| <= |v_k - v_m| for each pair (all pairs when
/// `pairs` is empty). Reports the bridge deviation ratio
/// max_t |v_t - mean(t)|^2 / var(t) over the full-clip interval, and asserts
/// only that it is a finite non-negative number.
TheoremReport check_continuity(const ClipSequence& clip,
                               std::span<const std::pair<std::size_t, std::size_t>> pairs,
                               const VarianceModel& variance = default_variance_model());

/// Lipschitz step on random unit-vector triples (v_k, v_m, l).
TheoremReport check_lipschitz(std::size_t trials, Eigen::Index dim, std::uint64_t seed);

/// |R(v_i, v_j, l') - R(v_i, v_j, l)| <= 2 delta_l for `trials` random
/// perturbations l' of l.
TheoremReport check_robustness(const Vector& v_i, const Vector& v_j, const Vector& l,
                               double delta_l, std::size_t trials, std::uint64_t seed);

/// Monte Carlo check of sample_bridge against the bridge mean and variance:
/// endpoints must match exactly, and the empirical per-coordinate variance at
/// the interval midpoint must lie within `rel_tol` of the variance model.
TheoremReport check_bridge_statistics(std::size_t samples, std::int64_t length, Eigen::Index dim,
                                      std::uint64_t seed, double rel_tol = 0.05,
                                      const VarianceModel& variance = default_variance_model());

}  // namespace actol
