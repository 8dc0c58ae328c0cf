#include "actol/gradients.hpp"

#include "loss_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace actol {

namespace {

constexpr double kKinkThreshold = 1e-12;

// Sign of (s_a - s_k) with the kink treated as zero.
double kink_sign(double sa, double sk, bool& at_kink) {
  const double diff = sa - sk;
  if (std::abs(diff) < kKinkThreshold) {
    at_kink = true;
    return 0.0;
  }
  return diff > 0.0 ? 1.0 : -1.0;
}

// Accumulate dL/dR_{a,k} into dL/ds via R_{a,k} = -|s_a - s_k|.
void push_score_gradient(double g, std::size_t a, std::size_t k, std::span<const double> sims,
                         std::vector<double>& dsims, bool& at_kink) {
  if (g == 0.0) return;
  const double sg = kink_sign(sims[a], sims[k], at_kink);
  dsims[a] -= g * sg;
  dsims[k] += g * sg;
}

}  // namespace

GradientSet GradientSet::zeros(const ClipSequence& clip) {
  GradientSet g;
  g.frames.assign(clip.size(), Vector::Zero(clip.dim()));
  g.language = Vector::Zero(clip.dim());
  return g;
}

GradientSet& GradientSet::operator+=(const GradientSet& other) { return add_scaled(other, 1.0); }

GradientSet& GradientSet::operator*=(double scale) {
  for (auto& f : frames) f *= scale;
  language *= scale;
  return *this;
}

GradientSet& GradientSet::add_scaled(const GradientSet& other, double scale) {
  if (other.frames.size() != frames.size()) {
    throw std::invalid_argument("GradientSet: shape mismatch");
  }
  for (std::size_t t = 0; t < frames.size(); ++t) frames[t] += scale * other.frames[t];
  language += scale * other.language;
  at_kink = at_kink || other.at_kink;
  return *this;
}

bool GradientSet::all_finite() const {
  if (!language.allFinite()) return false;
  return std::all_of(frames.begin(), frames.end(), [](const Vector& f) { return f.allFinite(); });
}

double GradientSet::max_abs() const {
  double m = language.cwiseAbs().maxCoeff();
  for (const auto& f : frames) m = std::max(m, f.cwiseAbs().maxCoeff());
  return m;
}

GradientSet chain_similarity_gradient(const ClipSequence& clip, std::span<const double> dsims) {
  if (dsims.size() != clip.size()) {
    throw std::invalid_argument("chain_similarity_gradient: one entry per frame required");
  }
  GradientSet g = GradientSet::zeros(clip);
  const Vector& l = clip.language();
  const double nl = l.norm();
  for (std::size_t t = 0; t < clip.size(); ++t) {
    if (dsims[t] == 0.0) continue;
    const Vector& v = clip.frame(t);
    const double nv = v.norm();
    const double s = v.dot(l) / (nv * nl);
    g.frames[t] = dsims[t] * (l / (nv * nl) - (s / (nv * nv)) * v);
    g.language += dsims[t] * (v / (nv * nl) - (s / (nl * nl)) * l);
  }
  return g;
}

Eigen::MatrixXd grad_vlo_scores(std::span<const std::int64_t> timestamps,
                                const Eigen::MatrixXd& scores, double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
  const std::size_t n = timestamps.size();
  if (n < 2) {
    throw std::invalid_argument("grad_vlo: clip needs at least two frames");
  }
  if (scores.rows() != static_cast<Eigen::Index>(n) || scores.cols() != static_cast<Eigen::Index>(n)) {
    throw std::invalid_argument("grad_vlo: score matrix must be T x T");
  }
  const double w = 1.0 / (static_cast<double>(n * (n - 1)) * temperature);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::size_t> members;
  std::vector<double> logits;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      members = negative_set(timestamps, i, j);
      logits.clear();
      for (std::size_t k : members) logits.push_back(scores(i, k) / temperature);
      const double lse = log_sum_exp(logits);
      for (std::size_t m = 0; m < members.size(); ++m) {
        grad(i, members[m]) += w * std::exp(logits[m] - lse);
      }
      grad(i, j) -= w;
    }
  }
  return grad;
}

GradientSet grad_vlo(const ClipSequence& clip, double temperature) {
  const auto sims = clip.similarities();
  const Eigen::MatrixXd dscores =
      grad_vlo_scores(clip.timestamps(), clip.alignment_matrix(), temperature);

  std::vector<double> dsims(clip.size(), 0.0);
  bool at_kink = false;
  for (std::size_t i = 0; i < clip.size(); ++i) {
    for (std::size_t k = 0; k < clip.size(); ++k) {
      if (i != k) push_score_gradient(dscores(i, k), i, k, sims, dsims, at_kink);
    }
  }
  GradientSet g = chain_similarity_gradient(clip, dsims);
  g.at_kink = at_kink;
  return g;
}

GradientSet grad_tnce(const ClipSequence& clip, const TnceConfig& cfg) {
  cfg.validate();
  const auto terms = tnce_terms(clip.timestamps(), cfg);
  const auto sims = clip.similarities();
  const double tau = cfg.temperature;
  const double w = 1.0 / (static_cast<double>(terms.size()) * tau);

  std::vector<double> dsims(clip.size(), 0.0);
  std::vector<double> logits;
  bool at_kink = false;

  auto push = [&](const ContrastTerm& term, std::size_t k, double g) {
    if (cfg.score == ScoreKind::DirectSim) {
      dsims[k] += g;
    } else {
      push_score_gradient(g, term.anchor, k, sims, dsims, at_kink);
    }
  };

  for (const auto& term : terms) {
    logits.clear();
    for (std::size_t k : term.candidates) {
      const double s = cfg.score == ScoreKind::DirectSim
                           ? sims[k]
                           : alignment_from_sims(sims[term.anchor], sims[k]);
      logits.push_back(s / tau);
    }
    const double lse = log_sum_exp(logits);
    for (std::size_t m = 0; m < term.candidates.size(); ++m) {
      push(term, term.candidates[m], w * std::exp(logits[m] - lse));
    }
    push(term, term.positive, -w);
  }
  GradientSet g = chain_similarity_gradient(clip, dsims);
  g.at_kink = at_kink;
  return g;
}

GradientSet grad_bb(const ClipSequence& clip, const BridgeInterval& interval) {
  interval.validate(clip.size());
  GradientSet g = GradientSet::zeros(clip);
  const std::size_t interior = interval.interior_count();
  if (interior == 0) return g;

  const auto a = static_cast<double>(clip.timestamp(interval.start));
  const auto b = static_cast<double>(clip.timestamp(interval.end));
  const double inv_count = 1.0 / static_cast<double>(interior);
  for (std::size_t p = interval.start + 1; p < interval.end; ++p) {
    const auto t = static_cast<double>(clip.timestamp(p));
    const double alpha = (t - a) / (b - a);
    const double var = bb_variance(t, clip.timestamp(interval.start), clip.timestamp(interval.end));
    const Vector r = (clip.frame(p) - bb_mean(t, interval, clip)) * (inv_count / var);
    g.frames[p] += r;
    g.frames[interval.start] -= (1.0 - alpha) * r;
    g.frames[interval.end] -= alpha * r;
  }
  return g;
}

GradientSet grad_total(const ClipSequence& clip, double lambda, double temperature,
                       std::span<const BridgeInterval> intervals) {
  if (intervals.empty()) {
    throw std::invalid_argument("grad_total: at least one bridge interval is required");
  }
  GradientSet g = grad_vlo(clip, temperature);
  if (lambda == 0.0) return g;
  const double w = lambda / static_cast<double>(intervals.size());
  for (const auto& iv : intervals) g.add_scaled(grad_bb(clip, iv), w);
  return g;
}

LossId parse_loss_id(std::string_view name) {
  if (name == "vlo") return LossId::Vlo;
  if (name == "bb") return LossId::Bb;
  if (name == "actol" || name == "total") return LossId::Total;
  if (name == "tnce") return LossId::Tnce;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(LossId id) {
  switch (id) {
    case LossId::Vlo: return "vlo";
    case LossId::Bb: return "bb";
    case LossId::Total: return "actol";
    case LossId::Tnce: return "tnce";
  }
  return "?";
}

namespace {

std::vector<BridgeInterval> resolve_intervals(const ClipSequence& clip, const LossParams& params) {
  if (!params.intervals.empty()) return params.intervals;
  return {full_interval(clip)};
}

}  // namespace

double evaluate_loss(LossId id, const ClipSequence& clip, const LossParams& params) {
  const auto intervals = resolve_intervals(clip, params);
  switch (id) {
    case LossId::Vlo:
      return vlo_loss(clip, params.temperature);
    case LossId::Bb: {
      double bb = 0.0;
      for (const auto& iv : intervals) bb += bb_loss(clip, iv);
      return bb / static_cast<double>(intervals.size());
    }
    case LossId::Total:
      return actol_loss(clip, params.lambda, params.temperature, intervals).total;
    case LossId::Tnce:
      return tnce_loss(clip, params.tnce);
  }
  throw std::logic_error("evaluate_loss: unhandled loss id");
}

long double evaluate_loss_extended(LossId id, const ClipSequence& clip, const LossParams& params) {
  using LD = long double;
  const auto intervals = resolve_intervals(clip, params);
  auto bb = [&] {
    LD sum = 0;
    for (const auto& iv : intervals) {
      iv.validate(clip.size());
      sum += detail::bb_mean_loss<LD>(clip, iv);
    }
    return sum / static_cast<LD>(intervals.size());
  };
  auto vlo = [&] {
    if (!(params.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    return detail::vlo_from_sims<LD>(clip.timestamps(), detail::similarities<LD>(clip),
                                     params.temperature);
  };
  switch (id) {
    case LossId::Vlo:
      return vlo();
    case LossId::Bb:
      return bb();
    case LossId::Total:
      if (!(params.lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
      return vlo() + static_cast<LD>(params.lambda) * bb();
    case LossId::Tnce: {
      params.tnce.validate();
      const auto terms = tnce_terms(clip.timestamps(), params.tnce);
      return detail::tnce_mean<LD>(clip, params.tnce, terms);
    }
  }
  throw std::logic_error("evaluate_loss_extended: unhandled loss id");
}

GradientSet evaluate_gradient(LossId id, const ClipSequence& clip, const LossParams& params) {
  const auto intervals = resolve_intervals(clip, params);
  switch (id) {
    case LossId::Vlo:
      return grad_vlo(clip, params.temperature);
    case LossId::Bb: {
      GradientSet g = GradientSet::zeros(clip);
      for (const auto& iv : intervals) g += grad_bb(clip, iv);
      g *= 1.0 / static_cast<double>(intervals.size());
      return g;
    }
    case LossId::Total:
      return grad_total(clip, params.lambda, params.temperature, intervals);
    case LossId::Tnce:
      return grad_tnce(clip, params.tnce);
  }
  throw std::logic_error("evaluate_gradient: unhandled loss id");
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

namespace {

template <class Loss>
double central_difference_check(const Loss& loss, const GradientSet& analytic,
                                const ClipSequence& clip, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("finite_diff_check: step must be positive");
  }
  if (analytic.frames.size() != clip.size()) {
    throw std::invalid_argument("finite_diff_check: gradient shape does not match clip");
  }
  ClipSequence probe = clip;
  double worst = 0.0;

  auto central = [&](double& coord) {
    const double saved = coord;
    const double hi = saved + step;
    const double lo = saved - step;
    coord = hi;
    const auto up = loss(probe);
    coord = lo;
    const auto down = loss(probe);
    coord = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::domain_error("finite_diff_check: loss is non-finite at a perturbed point");
    }
    // Divide by the step actually taken after rounding hi and lo.
    using R = decltype(up - down);
    return static_cast<double>((up - down) / (static_cast<R>(hi) - static_cast<R>(lo)));
  };

  for (std::size_t t = 0; t < probe.size(); ++t) {
    for (Eigen::Index c = 0; c < probe.dim(); ++c) {
      const double numeric = central(probe.frame(t)(c));
      worst = std::max(worst, relative_error(analytic.frames[t](c), numeric));
    }
  }
  for (Eigen::Index c = 0; c < probe.dim(); ++c) {
    const double numeric = central(probe.language()(c));
    worst = std::max(worst, relative_error(analytic.language(c), numeric));
  }
  return worst;
}

}  // namespace

double finite_diff_check(const std::function<double(const ClipSequence&)>& loss,
                         const GradientSet& analytic, const ClipSequence& clip, double step) {
  return central_difference_check(loss, analytic, clip, step);
}

double finite_diff_check(LossId id, const ClipSequence& clip, const LossParams& params,
                         double step) {
  const GradientSet analytic = evaluate_gradient(id, clip, params);
  return central_difference_check(
      [&](const ClipSequence& c) { return evaluate_loss_extended(id, c, params); }, analytic, clip,
      step);
}

}  // namespace actol
