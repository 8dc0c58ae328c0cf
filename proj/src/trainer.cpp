#include "actol/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "actol/random.hpp"

namespace actol {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be non-negative and finite");
  }
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (intervals_per_step < 1) throw std::invalid_argument("intervals_per_step must be at least 1");
}

std::vector<double> TrainHistory::gap_trajectory() const {
  std::vector<double> gaps;
  gaps.reserve(records.size());
  for (const auto& r : records) gaps.push_back(r.gap);
  return gaps;
}

std::vector<BridgeInterval> step_intervals(std::size_t clip_size, const TrainConfig& cfg,
                                           std::size_t step) {
  if (clip_size < 2) throw std::invalid_argument("step_intervals: clip needs two frames");
  const BridgeInterval full{0, clip_size - 1};
  if (cfg.intervals_per_step == 1 || clip_size < 3) return {full};

  Rng rng(derive_seed(cfg.seed, step));
  const auto last = static_cast<std::int64_t>(clip_size) - 1;
  std::vector<BridgeInterval> out;
  out.reserve(cfg.intervals_per_step);
  for (std::size_t k = 0; k < cfg.intervals_per_step; ++k) {
    const auto start = rng.uniform_int(0, last - 2);
    const auto end = rng.uniform_int(start + 2, last);
    out.push_back({static_cast<std::size_t>(start), static_cast<std::size_t>(end)});
  }
  return out;
}

Vector project_tangent(const Vector& g, const Vector& v) { return g - g.dot(v) * v; }

namespace {

struct StepEvaluation {
  LossBreakdown loss;
  GradientSet grad;
};

StepEvaluation evaluate_step(const ClipSequence& clip, const TrainConfig& cfg,
                             const Objective& objective, std::span<const BridgeInterval> intervals) {
  StepEvaluation out;
  out.loss = actol_loss(clip, cfg.lambda, cfg.temperature, intervals);
  if (objective.kind == Objective::Kind::Actol) {
    out.grad = grad_total(clip, cfg.lambda, cfg.temperature, intervals);
  } else {
    out.loss.total = tnce_loss(clip, objective.tnce);
    out.grad = grad_tnce(clip, objective.tnce);
  }
  return out;
}

void check_finite(const StepEvaluation& ev, std::size_t step) {
  const auto& l = ev.loss;
  if (!std::isfinite(l.total) || !std::isfinite(l.vlo) || !std::isfinite(l.bb)) {
    throw NonFiniteLossError(step, "non-finite loss at step " + std::to_string(step));
  }
  if (!ev.grad.all_finite()) {
    throw NonFiniteLossError(step, "non-finite gradient at step " + std::to_string(step));
  }
}

// A step of exactly zero leaves v bit-for-bit unchanged.
void sphere_step(Vector& v, const Vector& grad, double lr) {
  const Vector step = lr * project_tangent(grad, v);
  if (step.isZero(0.0)) return;
  v = normalize(v - step);
}

}  // namespace

TrainHistory train_free(const ClipSequence& clip_init, const TrainConfig& cfg,
                        const Objective& objective) {
  cfg.validate();
  if (clip_init.size() < 2) throw std::invalid_argument("train_free: clip needs two frames");
  if (objective.kind == Objective::Kind::Tnce) objective.tnce.validate();

  ClipSequence clip = clip_init;
  TrainHistory history;
  history.records.reserve(cfg.steps);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const auto intervals = step_intervals(clip.size(), cfg, step);
    const StepEvaluation ev = evaluate_step(clip, cfg, objective, intervals);
    check_finite(ev, step);
    history.records.push_back(ev.loss);

    for (std::size_t t = 0; t < clip.size(); ++t) {
      sphere_step(clip.frame(t), ev.grad.frames[t], cfg.learning_rate);
    }
    if (cfg.optimize_language) sphere_step(clip.language(), ev.grad.language, cfg.learning_rate);
  }
  history.final_clip = std::move(clip);
  return history;
}

LinearEncoder::LinearEncoder(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  if (!weights_.allFinite()) throw std::invalid_argument("LinearEncoder: non-finite weights");
}

LinearEncoder LinearEncoder::identity(Eigen::Index dim) {
  return LinearEncoder(Eigen::MatrixXd::Identity(dim, dim));
}

LinearEncoder LinearEncoder::random(Eigen::Index feature_dim, Eigen::Index embed_dim,
                                    std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd w(embed_dim, feature_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  for (Eigen::Index r = 0; r < embed_dim; ++r)
    for (Eigen::Index c = 0; c < feature_dim; ++c) w(r, c) = scale * rng.normal();
  return LinearEncoder(std::move(w));
}

Vector LinearEncoder::encode(const Vector& feature) const {
  if (feature.size() != feature_dim()) {
    throw std::invalid_argument("LinearEncoder: feature dimension mismatch");
  }
  return normalize(weights_ * feature);
}

ClipSequence LinearEncoder::encode_clip(std::span<const Vector> features,
                                        std::vector<std::int64_t> timestamps,
                                        const Vector& language) const {
  std::vector<Vector> frames;
  frames.reserve(features.size());
  for (const auto& x : features) frames.push_back(encode(x));
  return ClipSequence(std::move(timestamps), std::move(frames), language);
}

Eigen::MatrixXd LinearEncoder::weight_gradient(std::span<const Vector> features,
                                               std::span<const Vector> embedding_grads) const {
  if (features.size() != embedding_grads.size()) {
    throw std::invalid_argument("weight_gradient: one gradient per feature required");
  }
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(weights_.rows(), weights_.cols());
  for (std::size_t t = 0; t < features.size(); ++t) {
    const Vector z = weights_ * features[t];
    const double nz = z.norm();
    const Vector v = z / nz;
    // Jacobian of z -> z/|z| is (I - v v^T)/|z|.
    const Vector dz = (embedding_grads[t] - embedding_grads[t].dot(v) * v) / nz;
    grad.noalias() += dz * features[t].transpose();
  }
  return grad;
}

EncoderTrainResult train_encoder(std::span<const Vector> features,
                                 std::vector<std::int64_t> timestamps, const Vector& language,
                                 const LinearEncoder& init, const TrainConfig& cfg) {
  cfg.validate();
  if (features.size() < 2) throw std::invalid_argument("train_encoder: need two frames");
  for (const auto& x : features) {
    if (x.size() != init.feature_dim()) {
      throw std::invalid_argument("train_encoder: inconsistent feature dimension");
    }
  }
  LinearEncoder encoder = init;
  Vector lang = normalize(language);
  EncoderTrainResult result;
  result.history.records.reserve(cfg.steps);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const ClipSequence clip = encoder.encode_clip(features, timestamps, lang);
    const auto intervals = step_intervals(clip.size(), cfg, step);
    const StepEvaluation ev = evaluate_step(clip, cfg, Objective::actol(), intervals);
    check_finite(ev, step);
    result.history.records.push_back(ev.loss);

    encoder.weights() -= cfg.learning_rate * encoder.weight_gradient(features, ev.grad.frames);
    if (cfg.optimize_language) sphere_step(lang, ev.grad.language, cfg.learning_rate);
  }
  result.history.final_clip = encoder.encode_clip(features, std::move(timestamps), lang);
  result.encoder = std::move(encoder);
  return result;
}

namespace {

std::int64_t abs_diff(std::int64_t a, std::int64_t b) { return a > b ? a - b : b - a; }

void require_square(std::span<const std::int64_t> timestamps, const Eigen::MatrixXd& scores) {
  const auto n = static_cast<Eigen::Index>(timestamps.size());
  if (scores.rows() != n || scores.cols() != n) {
    throw std::invalid_argument("score matrix must be T x T");
  }
}

}  // namespace

std::optional<double> measure_delta_on_scores(std::span<const std::int64_t> timestamps,
                                              const Eigen::MatrixXd& scores) {
  require_square(timestamps, scores);
  const std::size_t n = timestamps.size();
  double equal_spread = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const auto dij = abs_diff(timestamps[i], timestamps[j]);
        const auto dik = abs_diff(timestamps[i], timestamps[k]);
        if (dij == dik) {
          equal_spread = std::max(equal_spread, std::abs(scores(i, j) - scores(i, k)));
        } else if (dij < dik) {
          min_margin = std::min(min_margin, scores(i, j) - scores(i, k));
        }
      }
    }
  }
  // Conditions are strict: |spread| < delta and margin > 1/delta.
  double threshold = equal_spread;
  if (std::isfinite(min_margin)) {
    if (!(min_margin > 0.0)) return std::nullopt;
    threshold = std::max(threshold, 1.0 / min_margin);
  }
  const double delta = threshold == 0.0 ? std::numeric_limits<double>::denorm_min()
                                        : std::nextafter(threshold, 2.0);
  if (!(delta < 1.0)) return std::nullopt;
  return delta;
}

std::optional<double> measure_delta(const ClipSequence& clip, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  return measure_delta_on_scores(clip.timestamps(), clip.alignment_matrix() / temperature);
}

std::size_t ordering_violations(std::span<const std::int64_t> timestamps,
                                const Eigen::MatrixXd& scores) {
  require_square(timestamps, scores);
  const std::size_t n = timestamps.size();
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (j == i || k == i || j == k) continue;
        if (abs_diff(timestamps[i], timestamps[j]) < abs_diff(timestamps[i], timestamps[k]) &&
            !(scores(i, j) > scores(i, k))) {
          ++count;
        }
      }
  return count;
}

}  // namespace actol
