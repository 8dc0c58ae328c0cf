#include "actol/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "actol/format.hpp"
#include "actol/gradients.hpp"
#include "actol/io.hpp"
#include "actol/random.hpp"
#include "actol/reward.hpp"
#include "actol/synthetic.hpp"
#include "actol/theory.hpp"
#include "actol/trainer.hpp"

namespace actol::cli {

namespace {

using json = nlohmann::json;

json load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("config root must be an object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

json section(const json& j, const char* key) {
  if (!j.contains(key)) return json::object();
  const json& s = j.at(key);
  if (!s.is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return s;
}

std::uint64_t resolve_seed(const json& cfg, const CommandOptions& opts) {
  if (opts.seed) return *opts.seed;
  return get_or<std::uint64_t>(cfg, "seed", 0);
}

void prepare_out_dir(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
}

json make_document(const json& resolved) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["config"] = resolved;
  return doc;
}

// ---- shared config sections ------------------------------------------------

TrainConfig parse_train(const json& j, std::uint64_t seed, bool require_core) {
  TrainConfig cfg;
  if (require_core) {
    cfg.steps = require(j, "steps").get<std::size_t>();
    cfg.learning_rate = require(j, "learning_rate").get<double>();
  } else {
    cfg.steps = get_or(j, "steps", cfg.steps);
    cfg.learning_rate = get_or(j, "learning_rate", cfg.learning_rate);
  }
  cfg.lambda = get_or(j, "lambda", cfg.lambda);
  cfg.temperature = get_or(j, "temperature", cfg.temperature);
  cfg.optimize_language = get_or(j, "optimize_language", cfg.optimize_language);
  cfg.intervals_per_step = get_or(j, "intervals_per_step", cfg.intervals_per_step);
  cfg.seed = seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  return cfg;
}

json train_to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"steps", cfg.steps},
          {"lambda", cfg.lambda},
          {"temperature", cfg.temperature},
          {"optimize_language", cfg.optimize_language},
          {"intervals_per_step", cfg.intervals_per_step}};
}

SyntheticClipSpec parse_synthetic(const json& j, std::uint64_t seed) {
  SyntheticClipSpec spec;
  spec.frames = get_or(j, "frames", spec.frames);
  spec.dim = get_or<Eigen::Index>(j, "dim", spec.dim);
  spec.completion_index = get_or(j, "completion_index", spec.frames);
  spec.tail = parse_tail_mode(get_or<std::string>(j, "tail_mode", "none"));
  spec.noise_sigma = get_or(j, "noise_sigma", spec.noise_sigma);
  spec.seed = seed;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("clip: ") + e.what());
  }
  return spec;
}

json synthetic_to_json(const SyntheticClipSpec& spec) {
  return {{"frames", spec.frames},
          {"dim", spec.dim},
          {"completion_index", spec.completion_index},
          {"tail_mode", to_string(spec.tail)},
          {"noise_sigma", spec.noise_sigma}};
}

TnceConfig parse_tnce(const json& j) {
  TnceConfig cfg;
  cfg.positive = parse_positive_selector(get_or<std::string>(j, "positive", "vlo-pair"));
  cfg.negative = parse_negative_selector(get_or<std::string>(j, "negative", "farther-frames"));
  cfg.score = parse_score_kind(get_or<std::string>(j, "score", "difference-score"));
  cfg.temperature = get_or(j, "temperature", cfg.temperature);
  cfg.validate();
  return cfg;
}

json tnce_to_json(const TnceConfig& cfg) {
  return {{"positive", to_string(cfg.positive)},
          {"negative", to_string(cfg.negative)},
          {"score", to_string(cfg.score)},
          {"temperature", cfg.temperature}};
}

NamedObjective parse_objective(const json& j) {
  const auto kind = get_or<std::string>(j, "kind", "actol");
  NamedObjective out;
  if (kind == "actol") {
    out = {"actol", Objective::actol()};
  } else if (kind == "tnce") {
    out = {"tnce", Objective::baseline(parse_tnce(j))};
  } else {
    throw ConfigError("unknown objective kind '" + kind + "'");
  }
  out.name = get_or(j, "name", out.name);
  if (out.name.empty() ||
      out.name.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789-_") != std::string::npos) {
    throw ConfigError("objective name must use [a-z0-9-_]: '" + out.name + "'");
  }
  return out;
}

json objective_to_json(const NamedObjective& obj) {
  json j;
  j["name"] = obj.name;
  if (obj.objective.kind == Objective::Kind::Actol) {
    j["kind"] = "actol";
  } else {
    j["kind"] = "tnce";
    j.update(tnce_to_json(obj.objective.tnce));
  }
  return j;
}

// Runs `body`, mapping configuration problems to exit code 2.
template <class Fn>
int guarded(std::ostream& log, Fn&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const json::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const NonFiniteLossError& e) {
    log << "non-finite loss: " << e.what() << "\n";
    return kExitNonFinite;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailed;
  }
}

// Parse-phase wrapper: std::invalid_argument from enum parsers and validators
// are configuration errors.
template <class Fn>
auto parse_phase(Fn&& body) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// ---- train -----------------------------------------------------------------

struct TrainJob {
  std::uint64_t seed = 0;
  json clip_section;
  ClipSequence clip;
  TrainConfig train;
  NamedObjective objective;
};

TrainJob parse_train_job(const json& cfg, const CommandOptions& opts) {
  TrainJob job;
  job.seed = resolve_seed(cfg, opts);
  const json& clip = require(cfg, "clip");
  const auto source = get_or<std::string>(clip, "source", "synthetic");
  if (source == "synthetic") {
    const auto spec = parse_synthetic(clip, job.seed);
    job.clip = generate_clip(spec).clip;
    job.clip_section = synthetic_to_json(spec);
  } else if (source == "random") {
    const auto ts = require(clip, "timestamps").get<std::vector<std::int64_t>>();
    const auto dim = require(clip, "dim").get<Eigen::Index>();
    validate_timestamps(ts);
    if (ts.size() < 2 || dim < 2) throw ConfigError("clip: need >= 2 timestamps and dim >= 2");
    Rng rng(job.seed);
    std::vector<Vector> frames;
    for (std::size_t t = 0; t < ts.size(); ++t) frames.push_back(rng.unit_vector(dim));
    job.clip = ClipSequence(ts, std::move(frames), rng.unit_vector(dim));
    job.clip_section = {{"timestamps", ts}, {"dim", dim}};
  } else if (source == "file") {
    const auto path = require(clip, "path").get<std::string>();
    try {
      job.clip = clip_from_json(json::parse(read_text(path)));
    } catch (const std::exception& e) {
      throw ConfigError("clip file: " + std::string(e.what()));
    }
    job.clip.normalize_all();
    job.clip_section = {{"path", path}};
  } else {
    throw ConfigError("unknown clip source '" + source + "'");
  }
  job.clip_section["source"] = source;
  if (job.clip.size() < 2) throw ConfigError("clip: need at least two frames");
  job.train = parse_train(require(cfg, "train"), job.seed, true);
  job.objective = parse_objective(section(cfg, "objective"));
  return job;
}

}  // namespace

std::size_t threads_from_env() {
  const char* env = std::getenv("ACTOL_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return 1;
  return static_cast<std::size_t>(v);
}

int cmd_train(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const json cfg = load_config(opts.config);
    const TrainJob job = parse_phase([&] { return parse_train_job(cfg, opts); });

    json resolved;
    resolved["seed"] = job.seed;
    resolved["clip"] = job.clip_section;
    resolved["train"] = train_to_json(job.train);
    resolved["objective"] = objective_to_json(job.objective);

    const TrainHistory history = train_free(job.clip, job.train, job.objective.objective);

    prepare_out_dir(opts.out_dir);
    std::ostringstream csv;
    csv << "step,vlo,bb,total,lower_bound,gap\n";
    for (std::size_t s = 0; s < history.records.size(); ++s) {
      const auto& r = history.records[s];
      csv << s << ',' << format_double(r.vlo) << ',' << format_double(r.bb) << ','
          << format_double(r.total) << ',' << format_double(r.lower_bound) << ','
          << format_double(r.gap) << '\n';
    }
    write_text(opts.out_dir / "history.csv", csv.str());

    json clip_doc = make_document(resolved);
    clip_doc.update(clip_to_json(history.final_clip));
    write_text(opts.out_dir / "final_clip.json", dump_json(clip_doc));

    const auto& last = history.records.back();
    log << "trained " << history.records.size() << " steps; final vlo " << format_double(last.vlo)
        << " gap " << format_double(last.gap) << "\n";
    return kExitOk;
  });
}

// ---- verify ----------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 6> kChecks = {"lower_bound", "tightness",  "bridge",
                                                     "robustness",  "lipschitz", "continuity"};

// Per-check RNG stream, so listing order does not change the draws.
std::uint64_t check_stream(std::string_view name) {
  for (std::size_t k = 0; k < kChecks.size(); ++k) {
    if (kChecks[k] == name) return 100 + k;
  }
  throw ConfigError("unknown check '" + std::string(name) + "'");
}

}  // namespace

int cmd_verify(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const json cfg = load_config(opts.config);
    const std::uint64_t seed = resolve_seed(cfg, opts);
    const auto checks = require(cfg, "checks").get<std::vector<std::string>>();
    if (checks.empty()) throw ConfigError("'checks' must list at least one check");
    const json debug = section(cfg, "debug");
    const bool flip_variance = get_or(debug, "flip_bb_variance_sign", false);
    const VarianceModel variance =
        flip_variance ? VarianceModel([](double t, std::int64_t a, std::int64_t b) {
          return -bb_variance(t, a, b);
        })
                      : default_variance_model();

    json resolved;
    resolved["seed"] = seed;
    resolved["checks"] = checks;
    resolved["debug"] = {{"flip_bb_variance_sign", flip_variance}};

    // Parse every section up front so a bad config never produces partial output.
    std::vector<std::function<TheoremReport()>> runs;
    for (const auto& name : checks) {
      const json s = section(cfg, name.c_str());
      const std::uint64_t check_seed = derive_seed(seed, check_stream(name));
      if (name == "lower_bound") {
        const auto clips = get_or<std::size_t>(s, "clips", 1000);
        const auto tmin = get_or<std::size_t>(s, "min_frames", 3);
        const auto tmax = get_or<std::size_t>(s, "max_frames", 12);
        const auto dmin = get_or<Eigen::Index>(s, "min_dim", 2);
        const auto dmax = get_or<Eigen::Index>(s, "max_dim", 16);
        const double tau = get_or(s, "temperature", 1.0);
        if (clips < 1 || tmin < 2 || tmax < tmin || dmin < 2 || dmax < dmin || !(tau > 0.0)) {
          throw ConfigError("lower_bound: invalid ranges");
        }
        resolved[name] = {{"clips", clips}, {"min_frames", tmin}, {"max_frames", tmax},
                          {"min_dim", dmin}, {"max_dim", dmax}, {"temperature", tau}};
        runs.emplace_back([=] {
          Rng rng(check_seed);
          std::vector<ClipSequence> sample;
          sample.reserve(clips);
          for (std::size_t c = 0; c < clips; ++c) {
            const auto t = static_cast<std::size_t>(rng.uniform_int(tmin, tmax));
            const auto d = rng.uniform_int(dmin, dmax);
            sample.push_back(random_clip(t, d, derive_seed(check_seed, c + 1)));
          }
          return check_lower_bound(sample, tau);
        });
      } else if (name == "tightness") {
        const auto ts = get_or(s, "timestamps", std::vector<std::int64_t>{0, 1, 2, 3});
        const auto eps = get_or(s, "eps", std::vector<double>{1.0, 0.1, 0.01});
        validate_timestamps(ts);
        if (ts.size() < 2 || eps.empty()) throw ConfigError("tightness: need timestamps and eps");
        for (double e : eps) {
          if (!(e > 0.0)) throw ConfigError("tightness: eps must be positive");
        }
        resolved[name] = {{"timestamps", ts}, {"eps", eps}};
        runs.emplace_back([=] { return check_tightness(ts, eps); });
      } else if (name == "bridge") {
        const auto samples = get_or<std::size_t>(s, "samples", 10000);
        const auto length = get_or<std::int64_t>(s, "length", 10);
        const auto dim = get_or<Eigen::Index>(s, "dim", 8);
        const double tol = get_or(s, "rel_tol", 0.05);
        if (samples < 2 || length < 2 || length % 2 != 0 || dim < 1) {
          throw ConfigError("bridge: samples >= 2, even length >= 2, dim >= 1 required");
        }
        resolved[name] = {{"samples", samples}, {"length", length}, {"dim", dim}, {"rel_tol", tol}};
        runs.emplace_back([=] { return check_bridge_statistics(samples, length, dim, check_seed, tol, variance); });
      } else if (name == "robustness") {
        const auto trials = get_or<std::size_t>(s, "trials", 10000);
        const auto deltas = get_or(s, "deltas", std::vector<double>{0.01, 0.1, 0.5});
        const auto dim = get_or<Eigen::Index>(s, "dim", 8);
        for (double dl : deltas) {
          if (!(dl >= 0.0) || dl > 2.0) throw ConfigError("robustness: deltas must lie in [0, 2]");
        }
        if (dim < 2 || deltas.empty()) throw ConfigError("robustness: need dim >= 2 and deltas");
        resolved[name] = {{"trials", trials}, {"deltas", deltas}, {"dim", dim}};
        runs.emplace_back([=] {
          Rng rng(check_seed);
          TheoremReport merged;
          merged.theorem = "robustness";
          for (std::size_t k = 0; k < deltas.size(); ++k) {
            const Vector vi = rng.unit_vector(dim);
            const Vector vj = rng.unit_vector(dim);
            const Vector l = rng.unit_vector(dim);
            const auto r = check_robustness(vi, vj, l, deltas[k], trials, derive_seed(check_seed, k + 1));
            if (merged.instances == 0 || r.worst_slack < merged.worst_slack) merged.worst_slack = r.worst_slack;
            merged.instances += r.instances;
            merged.violations += r.violations;
            merged.measurements["worst_ratio_delta_" + format_double(deltas[k])] =
                r.measurements.at("worst_ratio");
          }
          merged.finalize();
          return merged;
        });
      } else if (name == "lipschitz") {
        const auto trials = get_or<std::size_t>(s, "trials", 10000);
        const auto dim = get_or<Eigen::Index>(s, "dim", 8);
        if (dim < 2) throw ConfigError("lipschitz: dim >= 2 required");
        resolved[name] = {{"trials", trials}, {"dim", dim}};
        runs.emplace_back([=] { return check_lipschitz(trials, dim, check_seed); });
      } else if (name == "continuity") {
        SyntheticClipSpec spec = parse_synthetic(section(s, "clip"), check_seed);
        TrainConfig train = parse_train(section(s, "train"), check_seed, false);
        resolved[name] = {{"clip", synthetic_to_json(spec)}, {"train", train_to_json(train)}};
        runs.emplace_back([=] {
          const auto trained = train_free(generate_clip(spec).clip, train).final_clip;
          return check_continuity(trained, {}, variance);
        });
      } else {
        throw ConfigError("unknown check '" + name + "'");
      }
    }

    json doc = make_document(resolved);
    doc["reports"] = json::array();
    bool all_pass = true;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const TheoremReport report = runs[k]();
      all_pass = all_pass && report.pass;
      log << (report.pass ? "PASS " : "FAIL ") << checks[k] << " (" << report.instances
          << " instances, " << report.violations << " violations)\n";
      doc["reports"].push_back(report_to_json(report));
    }
    doc["pass"] = all_pass;
    prepare_out_dir(opts.out_dir);
    write_text(opts.out_dir / "theorem_reports.json", dump_json(doc));
    return all_pass ? kExitOk : kExitFailed;
  });
}

// ---- reward ----------------------------------------------------------------

int cmd_reward(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const json cfg = load_config(opts.config);
    const std::uint64_t seed = resolve_seed(cfg, opts);

    const auto [spec, train, objectives, seeds] = parse_phase([&] {
      auto spec = parse_synthetic(require(cfg, "clip"), seed);
      auto train = parse_train(require(cfg, "train"), seed, true);
      std::vector<NamedObjective> objectives;
      for (const auto& o : require(cfg, "objectives")) objectives.push_back(parse_objective(o));
      if (objectives.empty()) throw ConfigError("'objectives' must not be empty");
      for (std::size_t a = 0; a < objectives.size(); ++a)
        for (std::size_t b = a + 1; b < objectives.size(); ++b)
          if (objectives[a].name == objectives[b].name)
            throw ConfigError("duplicate objective name '" + objectives[a].name + "'");
      // "seeds": a count (seed, seed+1, ...) or an explicit list.
      std::vector<std::uint64_t> seeds;
      const json s = cfg.contains("seeds") ? cfg.at("seeds") : json(20);
      if (s.is_array()) {
        seeds = s.get<std::vector<std::uint64_t>>();
      } else {
        const auto count = s.get<std::size_t>();
        for (std::size_t k = 0; k < count; ++k) seeds.push_back(seed + k);
      }
      if (seeds.empty()) throw ConfigError("'seeds' must name at least one seed");
      return std::make_tuple(spec, train, objectives, seeds);
    });

    json resolved;
    resolved["seed"] = seed;
    resolved["seeds"] = seeds;
    resolved["clip"] = synthetic_to_json(spec);
    resolved["train"] = train_to_json(train);
    resolved["objectives"] = json::array();
    for (const auto& o : objectives) resolved["objectives"].push_back(objective_to_json(o));

    const ComparisonRecord record =
        compare_objectives(spec, seeds, objectives, train, std::max<std::size_t>(opts.threads, 1));

    prepare_out_dir(opts.out_dir);
    const auto curve_dir = opts.out_dir / "curves";
    std::filesystem::create_directories(curve_dir);

    json doc = make_document(resolved);
    doc["seeds"] = seeds;
    json completion = json::array();
    for (const auto& run : record.runs) completion.push_back(run.completion_index);
    doc["completion_index"] = completion;
    doc["objectives"] = json::object();
    for (std::size_t o = 0; o < objectives.size(); ++o) {
      json entry;
      json argmax = json::array();
      json errors = json::array();
      for (const auto& run : record.runs) {
        argmax.push_back(run.argmax[o]);
        errors.push_back(run.argmax_error[o]);
        write_text(curve_dir / (objectives[o].name + "_seed" + std::to_string(run.seed) + ".csv"),
                   reward_csv(run.trained[o], run.curves[o]));
      }
      entry["argmax"] = argmax;
      entry["argmax_error"] = errors;
      entry["median_argmax_error"] = record.median_error(o);
      doc["objectives"][objectives[o].name] = entry;
      log << objectives[o].name << ": median |argmax - completion| = "
          << format_double(record.median_error(o)) << "\n";
    }
    write_text(opts.out_dir / "comparison.json", dump_json(doc));
    return kExitOk;
  });
}

// ---- gradcheck -------------------------------------------------------------

namespace {

double min_similarity_gap(const ClipSequence& clip) {
  const auto sims = clip.similarities();
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sims.size(); ++i)
    for (std::size_t j = i + 1; j < sims.size(); ++j) gap = std::min(gap, std::abs(sims[i] - sims[j]));
  return gap;
}

}  // namespace

int cmd_gradcheck(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const json cfg = load_config(opts.config);
    const std::uint64_t seed = resolve_seed(cfg, opts);

    const auto clips = get_or<std::size_t>(cfg, "clips", 100);
    const auto tmin = get_or<std::size_t>(cfg, "min_frames", 3);
    const auto tmax = get_or<std::size_t>(cfg, "max_frames", 12);
    const auto dmin = get_or<Eigen::Index>(cfg, "min_dim", 2);
    const auto dmax = get_or<Eigen::Index>(cfg, "max_dim", 16);
    const double step = get_or(cfg, "step", 1e-5);
    const double threshold = get_or(cfg, "threshold", 1e-5);
    const double kink_margin = get_or(cfg, "kink_margin", 1e-3);
    const auto loss_names =
        get_or(cfg, "losses", std::vector<std::string>{"vlo", "bb", "actol", "tnce"});
    if (clips < 1 || tmin < 2 || tmax < tmin || dmin < 2 || dmax < dmin) {
      throw ConfigError("gradcheck: invalid clip ranges");
    }
    if (!(step > 0.0) || !(threshold > 0.0)) throw ConfigError("gradcheck: step and threshold must be positive");
    if (loss_names.empty()) throw ConfigError("gradcheck: 'losses' must not be empty");

    LossParams params;
    params.temperature = get_or(cfg, "temperature", params.temperature);
    params.lambda = get_or(cfg, "lambda", params.lambda);
    const auto [ids, tnce] = parse_phase([&] {
      std::vector<LossId> ids;
      for (const auto& n : loss_names) ids.push_back(parse_loss_id(n));
      return std::make_pair(ids, parse_tnce(section(cfg, "tnce")));
    });
    params.tnce = tnce;
    if (!(params.temperature > 0.0) || !(params.lambda >= 0.0)) {
      throw ConfigError("gradcheck: temperature must be positive and lambda non-negative");
    }

    json resolved;
    resolved["seed"] = seed;
    resolved["clips"] = clips;
    resolved["min_frames"] = tmin;
    resolved["max_frames"] = tmax;
    resolved["min_dim"] = dmin;
    resolved["max_dim"] = dmax;
    resolved["step"] = step;
    resolved["threshold"] = threshold;
    resolved["kink_margin"] = kink_margin;
    resolved["losses"] = loss_names;
    resolved["temperature"] = params.temperature;
    resolved["lambda"] = params.lambda;
    resolved["tnce"] = tnce_to_json(params.tnce);

    // Clips are shared across losses; kink-adjacent draws are rejected.
    Rng rng(seed);
    std::vector<ClipSequence> sample;
    std::size_t rejected = 0;
    for (std::uint64_t k = 0; sample.size() < clips; ++k) {
      const auto t = static_cast<std::size_t>(rng.uniform_int(tmin, tmax));
      const auto d = rng.uniform_int(dmin, dmax);
      ClipSequence clip = random_clip(t, d, derive_seed(seed, k + 1));
      if (min_similarity_gap(clip) < kink_margin) {
        ++rejected;
        continue;
      }
      sample.push_back(std::move(clip));
    }

    json doc = make_document(resolved);
    doc["rejected_kink_clips"] = rejected;
    doc["results"] = json::object();
    bool all_pass = true;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      double worst = 0.0;
      for (const auto& clip : sample) worst = std::max(worst, finite_diff_check(ids[k], clip, params, step));
      const bool pass = worst < threshold;
      all_pass = all_pass && pass;
      doc["results"][loss_names[k]] = {{"max_relative_error", worst}, {"pass", pass}};
      log << (pass ? "PASS " : "FAIL ") << loss_names[k] << " max relative error "
          << format_double(worst) << "\n";
    }
    doc["pass"] = all_pass;
    prepare_out_dir(opts.out_dir);
    write_text(opts.out_dir / "gradcheck.json", dump_json(doc));
    return all_pass ? kExitOk : kExitFailed;
  });
}

}  // namespace actol::cli
