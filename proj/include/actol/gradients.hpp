#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "actol/embedding.hpp"
#include "actol/objectives.hpp"

namespace actol {

/// Gradient of a scalar loss with respect to every frame embedding and the
/// language embedding (ambient coordinates, not projected).
struct GradientSet {
  std::vector<Vector> frames;
  Vector language;
  /// Set when some contributing alignment score sat on the |.| kink; the
  /// reported value is then the subgradient that treats sign(0) as 0.
  bool at_kink = false;

  static GradientSet zeros(const ClipSequence& clip);

  GradientSet& operator+=(const GradientSet& other);
  GradientSet& operator*=(double scale);
  /// this += scale * other
  GradientSet& add_scaled(const GradientSet& other, double scale);

  bool all_finite() const;
  /// Largest absolute component over frames and language.
  double max_abs() const;
};

/// Chain a gradient with respect to the per-frame similarities sim(v_t, l)
/// through the cosine similarity (including its normalization Jacobian).
GradientSet chain_similarity_gradient(const ClipSequence& clip, std::span<const double> dsims);

/// Gradient of vlo_loss with respect to its score matrix. Entries whose
/// score has no derivative (the diagonal) are zero.
Eigen::MatrixXd grad_vlo_scores(std::span<const std::int64_t> timestamps,
                                const Eigen::MatrixXd& scores, double temperature);

GradientSet grad_vlo(const ClipSequence& clip, double temperature = 1.0);
GradientSet grad_bb(const ClipSequence& clip, const BridgeInterval& interval);
GradientSet grad_total(const ClipSequence& clip, double lambda, double temperature,
                       std::span<const BridgeInterval> intervals);
GradientSet grad_tnce(const ClipSequence& clip, const TnceConfig& cfg);

enum class LossId { Vlo, Bb, Total, Tnce };

LossId parse_loss_id(std::string_view name);
std::string_view to_string(LossId id);

/// Parameters shared by the loss identifiers. Empty intervals mean the full
/// clip.
struct LossParams {
  double temperature = 1.0;
  double lambda = 0.1;
  std::vector<BridgeInterval> intervals;
  TnceConfig tnce;
};

double evaluate_loss(LossId id, const ClipSequence& clip, const LossParams& params);
/// The same loss evaluated in long double arithmetic.
long double evaluate_loss_extended(LossId id, const ClipSequence& clip, const LossParams& params);
GradientSet evaluate_gradient(LossId id, const ClipSequence& clip, const LossParams& params);

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

/// Central differences on every coordinate of every frame and of the language
/// embedding. Returns the maximum relative error against `analytic`.
/// Throws std::domain_error if the loss is non-finite at a perturbed point.
double finite_diff_check(const std::function<double(const ClipSequence&)>& loss,
                         const GradientSet& analytic, const ClipSequence& clip, double step);

/// As above for a built-in loss. Differences are taken on the long double
/// evaluation, so the check resolves gradient components well below the
/// rounding noise of the double-precision loss.
double finite_diff_check(LossId id, const ClipSequence& clip, const LossParams& params,
                         double step = 1e-5);

}  // namespace actol
