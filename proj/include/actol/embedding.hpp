#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace actol {

using Vector = Eigen::VectorXd;

/// Tolerance used when checking the unit-norm invariant of embeddings.
inline constexpr double kUnitNormTolerance = 1e-9;

/// Returns v / ||v||_2. Throws std::invalid_argument on a zero vector.
Vector normalize(const Vector& v);

bool is_unit_norm(const Vector& v, double tol = kUnitNormTolerance);

/// Cosine similarity v.l / (|v||l|), clamped to [-1, 1].
/// Throws std::invalid_argument on dimension mismatch or a zero-norm input.
double cosine_sim(const Vector& v, const Vector& l);

/// Semantic alignment score: -|sim(v_i, l) - sim(v_j, l)|. Always in [-2, 0].
double alignment_score(const Vector& v_i, const Vector& v_j, const Vector& l);

/// Score computed from two precomputed similarities.
inline double alignment_from_sims(double sim_i, double sim_j) {
  const double diff = sim_i - sim_j;
  return diff < 0.0 ? diff : -diff;
}

/// An ordered clip: strictly increasing integer timestamps, one embedding per
/// timestamp, and the language embedding the clip is described by.
///
/// Embeddings are stored as given. Losses treat them through cosine
/// similarity, so they do not have to be unit-norm, but every embedding must be
/// nonzero and share the language dimension.
class ClipSequence {
 public:
  ClipSequence() = default;
  ClipSequence(std::vector<std::int64_t> timestamps, std::vector<Vector> frames,
               Vector language);

  std::size_t size() const { return frames_.size(); }
  Eigen::Index dim() const { return language_.size(); }

  const std::vector<std::int64_t>& timestamps() const { return timestamps_; }
  std::int64_t timestamp(std::size_t i) const { return timestamps_[i]; }

  const std::vector<Vector>& frames() const { return frames_; }
  const Vector& frame(std::size_t i) const { return frames_[i]; }
  Vector& frame(std::size_t i) { return frames_[i]; }

  const Vector& language() const { return language_; }
  Vector& language() { return language_; }

  /// Temporal distance |n(i) - n(j)| in frame-index units.
  std::int64_t distance(std::size_t i, std::size_t j) const {
    const auto d = timestamps_[i] - timestamps_[j];
    return d < 0 ? -d : d;
  }

  /// Cosine similarity of every frame to the language embedding.
  std::vector<double> similarities() const;

  /// Matrix of alignment scores R(v_i, v_j, l); the diagonal is zero.
  Eigen::MatrixXd alignment_matrix() const;

  /// Replace every embedding (and the language) with its normalized version.
  void normalize_all();

  bool all_unit_norm(double tol = kUnitNormTolerance) const;

 private:
  std::vector<std::int64_t> timestamps_;
  std::vector<Vector> frames_;
  Vector language_;
};

/// Validates a timestamp list: non-negative and strictly increasing.
void validate_timestamps(std::span<const std::int64_t> timestamps);

}  // namespace actol
