#include "actol/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace actol {

Vector normalize(const Vector& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("normalize: vector has zero or non-finite norm");
  }
  return v / norm;
}

bool is_unit_norm(const Vector& v, double tol) {
  return std::abs(v.norm() - 1.0) <= tol;
}

double cosine_sim(const Vector& v, const Vector& l) {
  if (v.size() != l.size()) {
    throw std::invalid_argument("cosine_sim: dimension mismatch (" + std::to_string(v.size()) +
                                " vs " + std::to_string(l.size()) + ")");
  }
  const double nv = v.norm();
  const double nl = l.norm();
  if (!(nv > 0.0) || !(nl > 0.0)) {
    throw std::invalid_argument("cosine_sim: zero-norm input");
  }
  return std::clamp(v.dot(l) / (nv * nl), -1.0, 1.0);
}

double alignment_score(const Vector& v_i, const Vector& v_j, const Vector& l) {
  if (v_i.size() != v_j.size()) {
    throw std::invalid_argument("alignment_score: dimension mismatch");
  }
  return alignment_from_sims(cosine_sim(v_i, l), cosine_sim(v_j, l));
}

void validate_timestamps(std::span<const std::int64_t> timestamps) {
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    if (timestamps[i] < 0) {
      throw std::invalid_argument("timestamps must be non-negative");
    }
    if (i > 0 && timestamps[i] <= timestamps[i - 1]) {
      throw std::invalid_argument("timestamps must be strictly increasing");
    }
  }
}

ClipSequence::ClipSequence(std::vector<std::int64_t> timestamps, std::vector<Vector> frames,
                           Vector language)
    : timestamps_(std::move(timestamps)), frames_(std::move(frames)), language_(std::move(language)) {
  if (timestamps_.size() != frames_.size()) {
    throw std::invalid_argument("ClipSequence: " + std::to_string(timestamps_.size()) +
                                " timestamps but " + std::to_string(frames_.size()) + " frames");
  }
  if (frames_.empty()) {
    throw std::invalid_argument("ClipSequence: clip has no frames");
  }
  if (language_.size() < 2) {
    throw std::invalid_argument("ClipSequence: embedding dimension must be at least 2");
  }
  validate_timestamps(timestamps_);
  if (!(language_.norm() > 0.0)) {
    throw std::invalid_argument("ClipSequence: zero language embedding");
  }
  for (const auto& f : frames_) {
    if (f.size() != language_.size()) {
      throw std::invalid_argument("ClipSequence: frame dimension differs from language dimension");
    }
    if (!(f.norm() > 0.0)) {
      throw std::invalid_argument("ClipSequence: zero frame embedding");
    }
  }
}

std::vector<double> ClipSequence::similarities() const {
  std::vector<double> sims(frames_.size());
  for (std::size_t t = 0; t < frames_.size(); ++t) {
    sims[t] = cosine_sim(frames_[t], language_);
  }
  return sims;
}

Eigen::MatrixXd ClipSequence::alignment_matrix() const {
  const auto sims = similarities();
  const auto n = static_cast<Eigen::Index>(sims.size());
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) r(i, j) = alignment_from_sims(sims[i], sims[j]);
    }
  }
  return r;
}

void ClipSequence::normalize_all() {
  for (auto& f : frames_) f = normalize(f);
  language_ = normalize(language_);
}

bool ClipSequence::all_unit_norm(double tol) const {
  if (!is_unit_norm(language_, tol)) return false;
  return std::all_of(frames_.begin(), frames_.end(),
                     [tol](const Vector& f) { return is_unit_norm(f, tol); });
}

}  // namespace actol
