#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ips/experiment.hpp"
#include "ips/localize.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 2;
constexpr int kExhausted = 3;

ips::Json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ips::ConfigError("", "cannot open config file " + path);
  ips::Json doc = ips::Json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ips::ConfigError("", "config file " + path + " is not valid JSON");
  // Graph files are resolved against the config file's directory.
  if (doc.is_object() && doc.contains("graph") && doc["graph"].is_object() && doc["graph"].contains("file") &&
      doc["graph"]["file"].is_string()) {
    const fs::path file = doc["graph"]["file"].get<std::string>();
    if (file.is_relative()) doc["graph"]["file"] = (fs::path(path).parent_path() / file).string();
  }
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for pure-jump interacting particle systems on sparse marked graphs.\n"
               "Runs one experiment described by a JSON config; see README.md for the schema."};
  app.set_version_flag("--version", "ipsim 0.1.0");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replicas;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::vector<std::string> overrides;

  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Base seed (overrides config \"seed\")");
  app.add_option("--replicas", replicas, "Replica or sample count (overrides config \"replicas\")");
  app.add_option("--threads", threads,
                 "Worker threads, 0 for all cores. Falls back to $IPS_THREADS, then config \"threads\". "
                 "Outputs do not depend on it");
  app.add_option("--out", out, "Output path (overrides config \"output\"); stdout when absent");
  app.add_option("--override", overrides, "Set a config field, key=value; key is dotted (model.lambda) or a "
                                          "JSON pointer, value is JSON or a bare string")
      ->take_all();
  app.require_subcommand(0, 1);
  app.fallthrough();
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Exact finite-graph simulation; JSON Lines trajectories"},
      {"localize", "Influence-set trace of the targets (CSV)"},
      {"percolate", "Dissociation scan over deltaGrid (CSV)"},
      {"hydro", "Vertex-averaged observable versus the localized limit (CSV)"},
      {"corrdecay", "Covariance of root observables of two random roots (CSV)"},
      {"nbhd", "Empirical radius-1 neighborhood distribution (CSV)"},
      {"counterexample", "Chain detection and the two candidate solutions (CSV plus .summary.csv)"},
      {"dump-noise", "Driving-noise events of every vertex (CSV)"},
      {"gen", "Generate a graph and write it as graph JSON"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    ips::Json doc = config_path.empty() ? ips::Json::object() : read_config(config_path);
    if (!app.get_subcommands().empty()) doc["command"] = app.get_subcommands().front()->get_name();
    if (seed) doc["seed"] = *seed;
    if (replicas) doc["replicas"] = *replicas;
    if (out) doc["output"] = *out;
    for (const auto& o : overrides) ips::apply_override(doc, o);
    if (threads) {
      doc["threads"] = *threads;
    } else if (const char* env = std::getenv("IPS_THREADS"); env && *env) {
      ips::Json value = ips::Json::parse(env, nullptr, false);
      if (!value.is_number_unsigned()) throw ips::ConfigError("/threads", "IPS_THREADS must be a nonnegative integer");
      doc["threads"] = value;
    }
    const auto config = ips::parse_config(doc);
    const auto outcome = ips::run_and_write(config);
    std::cerr << outcome.summary << "\n";
    return outcome.exit_code;
  } catch (const ips::ConfigError& e) {
    std::cerr << "config error at " << (e.pointer().empty() ? "/" : e.pointer()) << ": " << e.what() << "\n";
    return kConfigError;
  } catch (const ips::ExhaustedError& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return kExhausted;
  } catch (const ips::Error& e) {
    if (e.code() == ips::ErrorCode::BudgetExceeded || e.code() == ips::ErrorCode::Exhausted) {
      std::cerr << "budget exhausted: " << e.what() << "\n";
      return kExhausted;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
