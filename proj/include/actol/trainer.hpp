#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "actol/embedding.hpp"
#include "actol/gradients.hpp"
#include "actol/objectives.hpp"

namespace actol {

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t steps = 1000;
  double lambda = 0.1;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  bool optimize_language = false;
  /// 1 = the full clip as the only bridge interval; K > 1 = K random
  /// sub-intervals drawn per step.
  std::size_t intervals_per_step = 1;

  void validate() const;
};

struct TrainHistory {
  std::vector<LossBreakdown> records;  // one per step, measured before the update
  ClipSequence final_clip;

  std::vector<double> gap_trajectory() const;
};

/// Thrown when a loss or gradient becomes non-finite during training.
class NonFiniteLossError : public std::runtime_error {
 public:
  NonFiniteLossError(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// The objective optimized by a training run: AcTOL (VLO + lambda * BB) or a
/// plain tNCE configuration.
struct Objective {
  enum class Kind { Actol, Tnce };
  Kind kind = Kind::Actol;
  TnceConfig tnce;

  static Objective actol() { return {}; }
  static Objective baseline(const TnceConfig& cfg) { return {Kind::Tnce, cfg}; }
};

/// Bridge intervals used at one step; deterministic in (seed, step).
std::vector<BridgeInterval> step_intervals(std::size_t clip_size, const TrainConfig& cfg,
                                           std::size_t step);

/// Removes the radial component: g - (g.v) v, for unit v.
Vector project_tangent(const Vector& g, const Vector& v);

/// Projected gradient descent on the unit sphere over free frame embeddings
/// (and the language when cfg.optimize_language).
TrainHistory train_free(const ClipSequence& clip_init, const TrainConfig& cfg,
                        const Objective& objective = Objective::actol());

/// Linear map from feature space (f) to embedding space (d), followed by
/// normalization onto the unit sphere.
class LinearEncoder {
 public:
  LinearEncoder() = default;
  explicit LinearEncoder(Eigen::MatrixXd weights);

  static LinearEncoder identity(Eigen::Index dim);
  /// Gaussian entries scaled by 1/sqrt(f).
  static LinearEncoder random(Eigen::Index feature_dim, Eigen::Index embed_dim, std::uint64_t seed);

  const Eigen::MatrixXd& weights() const { return weights_; }
  Eigen::MatrixXd& weights() { return weights_; }
  Eigen::Index feature_dim() const { return weights_.cols(); }
  Eigen::Index embed_dim() const { return weights_.rows(); }

  Vector encode(const Vector& feature) const;
  ClipSequence encode_clip(std::span<const Vector> features, std::vector<std::int64_t> timestamps,
                           const Vector& language) const;

  /// dL/dW given dL/dv_t at the encoded (normalized) embeddings.
  Eigen::MatrixXd weight_gradient(std::span<const Vector> features,
                                  std::span<const Vector> embedding_grads) const;

 private:
  Eigen::MatrixXd weights_;
};

struct EncoderTrainResult {
  LinearEncoder encoder;
  TrainHistory history;
};

/// Gradient descent on encoder weights under the AcTOL objective.
EncoderTrainResult train_encoder(std::span<const Vector> features,
                                 std::vector<std::int64_t> timestamps, const Vector& language,
                                 const LinearEncoder& init, const TrainConfig& cfg);

/// Smallest delta in (0, 1) for which the VLO property holds on the
/// temperature-scaled scores R/tau, or nullopt when none does. With no
/// constrained triples the smallest positive double is returned.
std::optional<double> measure_delta(const ClipSequence& clip, double temperature = 1.0);
std::optional<double> measure_delta_on_scores(std::span<const std::int64_t> timestamps,
                                              const Eigen::MatrixXd& scores);

/// Number of triples (i, j, k) with d_ij < d_ik but R_ij <= R_ik.
std::size_t ordering_violations(std::span<const std::int64_t> timestamps,
                                const Eigen::MatrixXd& scores);

}  // namespace actol
