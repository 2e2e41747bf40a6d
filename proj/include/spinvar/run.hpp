#pragma once

// Run configurations, experiment dispatch, and the results.csv / manifest.json
// file formats used by the command-line tool.

#include "spinvar/verify.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace spinvar {

inline constexpr const char* kToolVersion = "spinvar 1.0.0";

struct RunConfig {
  std::string experiment;
  ModelSpec model;
  std::vector<int> sizes;
  std::vector<double> betas;
  std::vector<double> lambdas;
  double mu = 1.0;
  double alpha = 0.5;
  int order = 1;
  std::size_t samples = 200;
  std::uint64_t seed = 42;
  int nodes = GaussHermiteRule::kDefaultNodes;
  std::size_t instances = 100;  // harris: random (H, O) pairs
  std::size_t max_dim = 64;     // harris: largest random dimension
  std::string output_dir = "results";
};

struct ExperimentInfo {
  std::string name;
  std::string description;
};

/// Registered experiments in display order.
const std::vector<ExperimentInfo>& experiment_registry();
std::string format_experiment_list();

/// Accepts registry names, with '_' treated as '-'.
std::string canonical_experiment_name(const std::string& name);

/// Defaults for one experiment; throws InvalidArgument for unknown names.
RunConfig default_config(const std::string& experiment);

/// Parses a config object (or a manifest holding one under "config"). Missing
/// keys take the experiment defaults; unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& config);

/// Throws InvalidArgument unless every parameter is inside the module caps.
void validate(const RunConfig& config);

struct RunOutcome {
  std::vector<ScanRow> rows;
  bool all_pass = true;
};

/// Runs the experiment in memory. Throws on invalid configs or numerical failures.
RunOutcome execute(const RunConfig& config);

inline constexpr const char* kCsvHeader =
    "experiment,model,N,n,beta,lambda,mu,alpha,observable,mean,variance,stderr,count,bound,ratio,pass";

/// CSV with a fixed header, '.' decimals and 17 significant digits.
std::string to_csv(const std::vector<ScanRow>& rows);

enum ExitCode : int { kExitOk = 0, kExitBoundFailed = 1, kExitInvalidConfig = 2, kExitNumericalFailure = 3 };

/// Validates, executes, writes results.csv and manifest.json into
/// config.output_dir, and maps failures onto the exit-code contract.
int run(const RunConfig& config, std::ostream& log, bool quiet = false);

}  // namespace spinvar
