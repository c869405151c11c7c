#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

namespace rsma {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::string config_path;
  std::string out_dir = ".";
  int jobs = 0;  // 0 = use available parallelism
  std::optional<std::uint64_t> seed;  // overrides the config's base_seed
};

// Executes one scenario config. Writes one CSV per scheme per sweep plus
// manifest.json into out_dir. Returns the process exit code: 0 success,
// 2 config error, 3 numerical failure. No partial outputs survive a failure.
int run_scenario(const RunOptions& options, std::ostream& log);

// Prints the scenario catalog: every kind, its parameters and defaults.
void list_scenarios(std::ostream& out);

// Quick invariant suite; returns 0 when everything passes.
int selftest(std::ostream& out);

// Key-value config text (nested blocks, arrays, '#' comments) or plain JSON.
nlohmann::json parse_config_text(const std::string& text);

// FNV-1a hash of the canonical config serialization, as fixed-width hex.
std::string config_hash_hex(const nlohmann::json& config);

}  // namespace rsma
