#include "actol/reward.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "actol/format.hpp"

namespace actol {

std::vector<double> min_max_normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

std::size_t argmax_frame(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax_frame: empty curve");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin()) +
         1;
}

RewardCurve reward_curve(const ClipSequence& clip) {
  RewardCurve curve;
  curve.raw = clip.similarities();
  curve.normalized = min_max_normalize(curve.raw);
  curve.argmax = argmax_frame(curve.raw);
  return curve;
}

std::string reward_csv(const ClipSequence& clip, const RewardCurve& curve) {
  if (curve.raw.size() != clip.size()) {
    throw std::invalid_argument("reward_csv: curve length differs from clip length");
  }
  std::ostringstream out;
  out << "frame_index,timestamp,raw_reward,normalized_reward\n";
  for (std::size_t t = 0; t < clip.size(); ++t) {
    out << (t + 1) << ',' << clip.timestamp(t) << ',' << format_double(curve.raw[t]) << ','
        << format_double(curve.normalized[t]) << '\n';
  }
  return out.str();
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: no values");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

double ComparisonRecord::median_error(std::size_t objective) const {
  std::vector<double> errs;
  errs.reserve(runs.size());
  for (const auto& run : runs) errs.push_back(static_cast<double>(run.argmax_error.at(objective)));
  return median(std::move(errs));
}

namespace {

ComparisonRun run_seed(const SyntheticClipSpec& base, std::uint64_t seed,
                       std::span<const NamedObjective> objectives, const TrainConfig& train) {
  SyntheticClipSpec spec = base;
  spec.seed = seed;
  const SyntheticClip generated = generate_clip(spec);

  ComparisonRun run;
  run.seed = seed;
  run.completion_index = generated.truth.completion_index;
  for (const auto& obj : objectives) {
    TrainConfig cfg = train;
    cfg.seed = seed;
    TrainHistory history = train_free(generated.clip, cfg, obj.objective);
    RewardCurve curve = reward_curve(history.final_clip);
    const auto a = curve.argmax;
    run.argmax.push_back(a);
    run.argmax_error.push_back(a > run.completion_index ? a - run.completion_index
                                                        : run.completion_index - a);
    run.curves.push_back(std::move(curve));
    run.trained.push_back(std::move(history.final_clip));
  }
  return run;
}

}  // namespace

ComparisonRecord compare_objectives(const SyntheticClipSpec& spec,
                                    std::span<const std::uint64_t> seeds,
                                    std::span<const NamedObjective> objectives,
                                    const TrainConfig& train, std::size_t threads) {
  spec.validate();
  train.validate();
  if (objectives.empty()) throw std::invalid_argument("compare_objectives: no objectives");
  if (seeds.empty()) throw std::invalid_argument("compare_objectives: no seeds");

  ComparisonRecord record;
  for (const auto& obj : objectives) record.objectives.push_back(obj.name);
  record.runs.resize(seeds.size());

  // Workers claim seed slots by index; each slot is written by exactly one
  // worker, so the record is identical for any thread count.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        record.runs[i] = run_seed(spec, seeds[i], objectives, train);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, seeds.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return record;
}

}  // namespace actol
