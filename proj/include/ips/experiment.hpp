#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ips/gen.hpp"
#include "ips/io.hpp"
#include "ips/rates.hpp"

namespace ips {

/// Invalid configuration; `pointer` is the JSON pointer of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& what)
      : std::runtime_error(what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct ExperimentConfig {
  std::string command;
  std::uint64_t seed = 0;
  Time horizon = 1.0;
  std::size_t replicas = 1;
  unsigned threads = 0;  ///< 0 selects the hardware concurrency.
  std::size_t budget = 100000;
  std::string output;  ///< Empty writes to stdout.
  double exhaustion_tolerance = 0.0;
  double band_width = 1.0;
  double block_length = 1.0;
  Json doc;  ///< Full document, for command-specific fields.
};

inline const std::vector<std::string> kCommands = {"simulate", "localize", "percolate",      "hydro", "corrdecay",
                                                   "nbhd",     "counterexample", "dump-noise", "gen"};

/// Sets `key=value`; the key is a dotted path or a JSON pointer, the value
/// is parsed as JSON and kept as a string when that fails.
void apply_override(Json& doc, const std::string& assignment);

ExperimentConfig parse_config(const Json& doc);

ModelPtr model_from_json(const Json& spec, const std::string& pointer = "/model");
OffspringDistribution offspring_from_json(const Json& spec, const std::string& pointer);
/// Builds the graph described by `spec` with the given seed. `n` replaces
/// the size parameter of size-indexed generators.
MarkedGraph graph_from_spec(const Json& spec, std::uint64_t seed, std::size_t budget,
                            std::optional<std::size_t> n = std::nullopt, const std::string& pointer = "/graph");

struct RunOutcome {
  int exit_code = 0;
  std::string summary;
  /// Output files keyed by path suffix ("" for the main output).
  std::vector<std::pair<std::string, std::string>> artifacts;
};

/// Runs the configured experiment without touching the filesystem (except
/// to read graph files).
RunOutcome run_experiment(const ExperimentConfig& config);

/// run_experiment followed by atomic writes of each artifact, or stdout when
/// no output path is configured.
RunOutcome run_and_write(const ExperimentConfig& config);

}  // namespace ips
