#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace actol::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitNonFinite = 3;

/// Version stamped into every JSON artifact.
inline constexpr int kSchemaVersion = 1;

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  std::size_t threads = 1;            // cap on parallel seeds
};

/// Raised for unreadable, malformed or incomplete configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads ACTOL_THREADS; 1 when unset or invalid.
std::size_t threads_from_env();

int cmd_train(const CommandOptions& opts, std::ostream& log);
int cmd_verify(const CommandOptions& opts, std::ostream& log);
int cmd_reward(const CommandOptions& opts, std::ostream& log);
int cmd_gradcheck(const CommandOptions& opts, std::ostream& log);

}  // namespace actol::cli
