#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixht/exponent_opt.hpp"

namespace mixht::cli {

enum class Format { json, csv };

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kBadConfig = 2 };

struct RunConfig {
  std::string subcommand;
  std::string instance_path;     // empty: built-in default instance
  nlohmann::json params = nlohmann::json::object();  // overrides merged over the file
  Format format = Format::json;
  std::string out_path;          // empty: stdout
  std::size_t workers = 0;       // 0: hardware concurrency
  std::uint64_t seed = 20240611ULL;
  double tolerance = 1e-6;
  std::optional<std::string> rc_grid;  // "a:b:step"
  std::optional<std::string> n_range;  // "a..b"
};

struct RunResult {
  int exit_code = kOk;
  std::string output;      // primary artifact (CSV or JSON text)
  nlohmann::json repro;    // config hash, seed, version
  std::string message;     // human-readable diagnostics
};

const std::vector<std::string>& subcommands();
std::string version();

// Never throws; configuration problems map to kBadConfig.
RunResult run(const RunConfig& config);

// Parses "a:b:step" into the closed grid a, a + step, ..., <= b.
std::vector<double> parse_grid(const std::string& text);
// Parses "a..b" (or a single integer) into a, a + 1, ..., b.
std::vector<std::size_t> parse_range(const std::string& text);

// FNV-1a 64 over the canonical dump of the effective configuration.
std::string config_hash(const nlohmann::json& effective);

// Mixture instance with P_X = (0.643, 0.357), a BSC(0.1) branch and a
// Z(0.8) branch, uniform Y alternative and P_X as the X alternative.
MixtureProblem binary_counterexample_problem();

// Full command line entry; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace mixht::cli
