#include "actol/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace actol {

namespace {

nlohmann::json vector_to_json(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const nlohmann::json& j, Eigen::Index dim, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    throw std::invalid_argument(std::string(what) + ": expected an array of length d");
  }
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

}  // namespace

nlohmann::json clip_to_json(const ClipSequence& clip) {
  nlohmann::json j;
  j["d"] = clip.dim();
  j["timestamps"] = clip.timestamps();
  auto frames = nlohmann::json::array();
  for (const auto& f : clip.frames()) frames.push_back(vector_to_json(f));
  j["embeddings"] = std::move(frames);
  j["language"] = vector_to_json(clip.language());
  return j;
}

ClipSequence clip_from_json(const nlohmann::json& j) {
  const auto dim = j.at("d").get<Eigen::Index>();
  auto timestamps = j.at("timestamps").get<std::vector<std::int64_t>>();
  const auto& emb = j.at("embeddings");
  if (!emb.is_array()) throw std::invalid_argument("clip: embeddings must be an array");
  std::vector<Vector> frames;
  for (const auto& f : emb) frames.push_back(vector_from_json(f, dim, "clip embedding"));
  return ClipSequence(std::move(timestamps), std::move(frames),
                      vector_from_json(j.at("language"), dim, "clip language"));
}

nlohmann::json report_to_json(const TheoremReport& report) {
  nlohmann::json j;
  j["theorem"] = report.theorem;
  j["instances"] = report.instances;
  j["violations"] = report.violations;
  j["worst_slack"] = report.worst_slack;
  j["pass"] = report.pass;
  j["measurements"] = report.measurements;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace actol
