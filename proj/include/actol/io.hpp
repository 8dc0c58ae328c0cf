#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "actol/embedding.hpp"
#include "actol/theory.hpp"

namespace actol {

/// Clip file format: {"d": int, "timestamps": [...], "embeddings": [[...]...],
/// "language": [...]}.
nlohmann::json clip_to_json(const ClipSequence& clip);
ClipSequence clip_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const TheoremReport& report);

/// Writes text to a file, replacing it. Throws std::runtime_error on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Pretty JSON with a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace actol
