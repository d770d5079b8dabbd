#pragma once

#include "twistlab/grouprep.hpp"

#include <map>

namespace twistlab {

class ConfigError : public Error {
  public:
    using Error::Error;
};

class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Declarative experiment: kind + seed + flat parameter table. Parsed from
/// TOML; numbers and strings are kept separately after schema validation.
struct ExperimentConfig {
    std::string kind; // axioms | twisted_norm | ext_algebra | enflo_growth | grouprep_roundtrip
    uint64_t seed = 0;
    std::string output_dir;
    std::map<std::string, double> numbers;
    std::map<std::string, std::string> strings;
};

/// Parses a config file: either one experiment at top level or a batch of
/// [[experiment]] tables. Validates each config against its kind's schema.
std::vector<ExperimentConfig> parse_experiment_configs(const std::string& toml_text);

/// Runs one experiment: writes results.csv, manifest.json, certificate files
/// and plot.svg (for curve-producing kinds) into output_dir, atomically.
/// Identical configs produce byte-identical results.csv.
void run_experiment(const ExperimentConfig& config);

/// Batch execution; independent experiments run concurrently under the
/// TWISTLAB_THREADS budget.
void run_experiments(const std::vector<ExperimentConfig>& configs);

/// Full `run` entry point: 0 success, 2 config error, 3 numerical failure.
int run_config_file(const std::string& path, std::string* message = nullptr);

/// Re-checks a stored certificate without re-running any optimizer:
/// 0 on match (recomputation drift <= 1e-12), 4 on mismatch.
/// Throws ConfigError when the file is not a readable certificate.
int verify_certificate_file(const std::string& path, std::string* message = nullptr);

/// Reference config text for each experiment kind.
std::string demo_config(const std::string& kind);

inline constexpr const char* kToolVersion = "twistlab 0.1.0";

} // namespace twistlab
