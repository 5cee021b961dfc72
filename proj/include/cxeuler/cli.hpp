#pragma once

// Batch experiment runner: JSON config in, CSV/JSON artifacts and a
// pass/fail verdict out.

#include "cxeuler/spectral.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cxeuler::cli {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Bad config or violated precondition; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string experiment;
  json params = json::object();
  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

const std::vector<std::string>& experiment_names();

/// {experiment, params?, output_dir?, seed?}
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Full parameter table after defaults are applied. Throws ConfigError naming
/// the offending field. No compute.
json resolve_params(const RunConfig& config);
/// "ok" or throws ConfigError.
std::string validate(const RunConfig& config);

struct Criterion {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct RunResult {
  std::vector<Criterion> criteria;
  json measured = json::object();
  json params = json::object();
  std::map<std::string, std::string> files;  // artifact name -> CSV payload

  bool passed() const;
  int exit_code() const { return passed() ? 0 : 1; }
};

/// Validates, then runs the experiment. Deterministic given (config, seed).
RunResult run(const RunConfig& config);

json manifest(const RunConfig& config, const RunResult& result);
/// Writes manifest.json and every CSV into dir (created if missing).
void write_artifacts(const RunConfig& config, const RunResult& result, const std::filesystem::path& dir);

/// Analytic complex vorticity on |k_i| <= band with <k>-exponential decay,
/// seeded Gaussian coefficients and a complex mean flow.
spectral::VorticityState random_analytic_state(int cutoff, double amplitude, int band, std::uint64_t seed);

/// Command-line entry: --config, --out, --validate-only, --list-experiments.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cxeuler::cli
