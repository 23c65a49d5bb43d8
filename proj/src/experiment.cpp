#include "ips/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>

#include "ips/counterexample.hpp"
#include "ips/empirics.hpp"
#include "ips/localize.hpp"
#include "ips/noise.hpp"
#include "ips/parallel.hpp"
#include "ips/percolate.hpp"
#include "ips/random.hpp"
#include "ips/sim.hpp"

namespace ips {

namespace {

constexpr std::uint64_t kGraphTag = 0x4772617068ull;
constexpr std::uint64_t kInitTag = 0x496E6974ull;
constexpr std::uint64_t kMarkTag = 0x4D61726Bull;

std::string child_ptr(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

[[noreturn]] void fail(const std::string& ptr, const std::string& what) { throw ConfigError(ptr, what); }

const Json& object_at(const Json& doc, const std::string& ptr) {
  if (!doc.is_object()) fail(ptr, "expected an object");
  return doc;
}

const Json* find(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const Json& obj, const std::string& ptr, const char* key, std::optional<double> fallback,
              double lo = -std::numeric_limits<double>::infinity(),
              double hi = std::numeric_limits<double>::infinity()) {
  const Json* x = find(obj, key);
  const std::string p = child_ptr(ptr, key);
  if (!x) {
    if (!fallback) fail(p, "required field is missing");
    return *fallback;
  }
  if (!x->is_number()) fail(p, "expected a number");
  const double v = x->get<double>();
  if (!std::isfinite(v) || v < lo || v > hi)
    fail(p, "value " + format_double(v) + " outside [" + format_double(lo) + ", " + format_double(hi) + "]");
  return v;
}

std::uint64_t uinteger(const Json& obj, const std::string& ptr, const char* key, std::optional<std::uint64_t> fallback,
                       std::uint64_t lo = 0, std::uint64_t hi = std::numeric_limits<std::uint64_t>::max()) {
  const Json* x = find(obj, key);
  const std::string p = child_ptr(ptr, key);
  if (!x) {
    if (!fallback) fail(p, "required field is missing");
    return *fallback;
  }
  if (!x->is_number_integer() || (x->is_number_integer() && !x->is_number_unsigned() && x->get<std::int64_t>() < 0))
    fail(p, "expected a nonnegative integer");
  const auto v = x->get<std::uint64_t>();
  if (v < lo || v > hi) fail(p, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

std::string string_field(const Json& obj, const std::string& ptr, const char* key,
                         std::optional<std::string> fallback = std::nullopt) {
  const Json* x = find(obj, key);
  const std::string p = child_ptr(ptr, key);
  if (!x) {
    if (!fallback) fail(p, "required field is missing");
    return *fallback;
  }
  if (!x->is_string()) fail(p, "expected a string");
  return x->get<std::string>();
}

bool bool_field(const Json& obj, const std::string& ptr, const char* key, bool fallback) {
  const Json* x = find(obj, key);
  if (!x) return fallback;
  if (!x->is_boolean()) fail(child_ptr(ptr, key), "expected true or false");
  return x->get<bool>();
}

std::vector<double> number_list(const Json& obj, const std::string& ptr, const char* key,
                                std::optional<std::vector<double>> fallback, double lo, double hi) {
  const Json* x = find(obj, key);
  const std::string p = child_ptr(ptr, key);
  if (!x) {
    if (!fallback) fail(p, "required field is missing");
    return *fallback;
  }
  if (!x->is_array() || x->empty()) fail(p, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < x->size(); ++i) {
    const Json& e = (*x)[i];
    const std::string pi = p + "/" + std::to_string(i);
    if (!e.is_number()) fail(pi, "expected a number");
    const double v = e.get<double>();
    if (!std::isfinite(v) || v < lo || v > hi) fail(pi, "value " + format_double(v) + " out of range");
    out.push_back(v);
  }
  return out;
}

std::vector<std::size_t> size_list(const Json& obj, const std::string& ptr, const char* key, std::size_t lo) {
  const Json* x = find(obj, key);
  const std::string p = child_ptr(ptr, key);
  if (!x) fail(p, "required field is missing");
  if (!x->is_array() || x->empty()) fail(p, "expected a nonempty array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x->size(); ++i) {
    const Json& e = (*x)[i];
    if (!e.is_number_integer() || e.get<std::int64_t>() < static_cast<std::int64_t>(lo))
      fail(p + "/" + std::to_string(i), "expected an integer >= " + std::to_string(lo));
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

PiecewiseLinear hazard_from_json(const Json& obj, const std::string& ptr) {
  object_at(obj, ptr);
  auto knots = number_list(obj, ptr, "knots", std::nullopt, 0.0, std::numeric_limits<double>::max());
  auto values = number_list(obj, ptr, "values", std::nullopt, 0.0, std::numeric_limits<double>::max());
  const double cap = number(obj, ptr, "cap", std::nullopt, 0.0);
  try {
    return PiecewiseLinear(std::move(knots), std::move(values), cap);
  } catch (const Error& e) {
    fail(ptr, e.what());
  }
}

VertexInit init_from_json(const Json& spec, const std::string& ptr, std::uint64_t seed) {
  VertexInit init;
  if (const Json* initial = find(spec, "initial")) {
    const std::string p = child_ptr(ptr, "initial");
    object_at(*initial, p);
    const double prob = number(*initial, p, "p", std::nullopt, 0.0, 1.0);
    init = bernoulli_states(prob, hash_words({seed, kInitTag}));
  }
  const auto uniform_mark = [&](const char* key, std::uint32_t lane) -> std::function<Mark(VertexKey)> {
    const Json* m = find(spec, key);
    if (!m) return {};
    const std::string p = child_ptr(ptr, key);
    object_at(*m, p);
    const auto range = number_list(*m, p, "uniform", std::nullopt, 0.0, std::numeric_limits<double>::max());
    if (range.size() != 2 || range[0] > range[1]) fail(child_ptr(p, "uniform"), "expected [low, high]");
    const std::uint64_t s = hash_words({seed, kMarkTag});
    return [s, lane, lo = range[0], hi = range[1]](VertexKey k) -> Mark {
      return {lo + (hi - lo) * keyed_uniform(hash_words({s, k}), Stream::Generator, lane)};
    };
  };
  init.mark = uniform_mark("vertexMarks", 1);
  init.edge_mark = uniform_mark("edgeMarks", 2);
  return init;
}

bool is_tree_generator(const std::string& name) { return name == "gw" || name == "ugw" || name == "counterexample"; }

std::string generator_name(const Json& spec, const std::string& ptr) {
  object_at(spec, ptr);
  if (find(spec, "file")) return "file";
  return string_field(spec, ptr, "generator");
}

unsigned threads_of(const ExperimentConfig& c) { return resolve_threads(c.threads); }

DrivingNoise noise_for(const ExperimentConfig& c, const RateModel& model, std::uint64_t seed) {
  return DrivingNoise(seed, model.jump_spec(), c.horizon, c.band_width, c.block_length);
}

const Json& graph_spec(const ExperimentConfig& c) {
  const Json* g = find(c.doc, "graph");
  if (!g) fail("/graph", "required field is missing");
  return *g;
}

ModelPtr model_of(const ExperimentConfig& c) {
  const Json* m = find(c.doc, "model");
  if (!m) fail("/model", "required field is missing");
  return model_from_json(*m);
}

std::uint64_t graph_seed(std::uint64_t seed) { return hash_words({seed, kGraphTag}); }

MarkedGraph finite_graph(const ExperimentConfig& c, std::uint64_t seed) {
  const Json& spec = graph_spec(c);
  if (is_tree_generator(generator_name(spec, "/graph")))
    fail("/graph/generator", "command '" + c.command + "' needs a finite graph");
  return graph_from_spec(spec, graph_seed(seed), c.budget);
}

void check_model(const RateModel& model, const MarkedGraph& g) {
  try {
    model.validate(g);
  } catch (const Error& e) {
    fail("/model", e.what());
  }
}

std::optional<State> observed_state(const ExperimentConfig& c) {
  const Json* o = find(c.doc, "observe");
  if (!o) return 1;
  object_at(*o, "/observe");
  return static_cast<State>(number(*o, "/observe", "state", 1.0, -1e9, 1e9));
}

bool exceeds(double fraction, const ExperimentConfig& c) { return fraction > c.exhaustion_tolerance; }

std::string outcome_line(const ExperimentConfig& c, const std::string& body) {
  return c.command + ": " + body + " -> " + (c.output.empty() ? std::string("stdout") : c.output);
}

// ---------------------------------------------------------------- commands

RunOutcome run_simulate(const ExperimentConfig& c) {
  const auto model = model_of(c);
  const MarkedGraph g = finite_graph(c, c.seed);
  check_model(*model, g);
  struct Rep {
    std::string text;
    std::size_t accepted = 0;
  };
  const auto reps = parallel_map<Rep>(c.replicas, threads_of(c), [&](std::size_t i) {
    const auto noise = noise_for(c, *model, replica_seed(c.seed, i));
    const auto res = simulate_finite(g, *model, noise, c.horizon);
    return Rep{trajectories_jsonl(g, res.trajectories, c.replicas > 1 ? static_cast<long long>(i) : -1), res.accepted};
  });
  std::string out;
  std::size_t accepted = 0;
  for (const auto& r : reps) {
    out += r.text;
    accepted += r.accepted;
  }
  return {0,
          outcome_line(c, std::to_string(c.replicas) + " replicas, " + std::to_string(g.size()) + " vertices, " +
                              std::to_string(accepted) + " jumps"),
          {{"", std::move(out)}}};
}

RunOutcome run_localize(const ExperimentConfig& c) {
  const auto model = model_of(c);
  const Json& spec = graph_spec(c);
  const bool tree = is_tree_generator(generator_name(spec, "/graph"));
  const bool resample = bool_field(spec, "/graph", "resample", tree);
  std::optional<MarkedGraph> shared;
  if (!resample) shared = graph_from_spec(spec, graph_seed(c.seed), c.budget);
  std::vector<VertexLabel> target_labels;
  if (const Json* t = find(c.doc, "targets")) {
    if (!t->is_array() || t->empty()) fail("/targets", "expected a nonempty array of vertex ids");
    for (std::size_t i = 0; i < t->size(); ++i) {
      if (!(*t)[i].is_number_integer() || (*t)[i].get<std::int64_t>() < 0) fail("/targets/" + std::to_string(i), "expected a vertex id");
      target_labels.push_back((*t)[i].get<VertexLabel>());
    }
    if (tree) fail("/targets", "targets are only supported on finite graphs");
  }
  struct Rep {
    std::string rows;
    bool exhausted = false;
    std::size_t size = 0;
  };
  const auto reps = parallel_map<Rep>(c.replicas, threads_of(c), [&](std::size_t i) {
    const std::uint64_t rs = replica_seed(c.seed, i);
    MarkedGraph g = shared ? *shared : graph_from_spec(spec, graph_seed(rs), c.budget);
    check_model(*model, g);
    std::vector<VertexId> targets;
    if (target_labels.empty()) {
      if (!g.root()) fail("/targets", "graph has no root; give targets explicitly");
      targets.push_back(*g.root());
    }
    for (VertexLabel l : target_labels) {
      const auto v = g.find_label(l);
      if (!v) fail("/targets", "unknown vertex id " + std::to_string(l));
      targets.push_back(*v);
    }
    const auto noise = noise_for(c, *model, rs);
    const auto u = influence_set(g, noise, *model, targets, c.horizon, c.budget);
    CsvTable rows({"replica", "step", "tau", "vertex", "setSize"});
    for (std::size_t k = 0; k < u.trace.size(); ++k)
      rows.row() << i << k + 1 << u.trace[k].tau << g.label(u.trace[k].vertex) << u.trace[k].set_size;
    const std::string& s = rows.str();
    return Rep{s.substr(s.find('\n') + 1), u.exhausted, u.vertices.size()};
  });
  std::string out = "replica,step,tau,vertex,setSize\n";
  std::size_t exhausted = 0;
  double mean_size = 0.0;
  for (const auto& r : reps) {
    out += r.rows;
    exhausted += r.exhausted;
    mean_size += static_cast<double>(r.size) / static_cast<double>(c.replicas);
  }
  const double frac = static_cast<double>(exhausted) / static_cast<double>(c.replicas);
  return {exceeds(frac, c) ? 3 : 0,
          outcome_line(c, std::to_string(c.replicas) + " replicas, mean influence set " + format_double(mean_size) +
                              ", exhausted " + std::to_string(exhausted)),
          {{"", std::move(out)}}};
}

RunOutcome run_percolate(const ExperimentConfig& c) {
  const auto model = model_of(c);
  const Json& spec = graph_spec(c);
  const auto deltas = number_list(c.doc, "", "deltaGrid", std::nullopt, std::numeric_limits<double>::min(), c.horizon);
  const std::string gen = generator_name(spec, "/graph");
  std::vector<ScanRow> rows;
  if (gen == "gw" || gen == "ugw") {
    const Json* off = find(spec, "offspring");
    if (!off) fail("/graph/offspring", "required field is missing");
    rows = dissociation_scan(offspring_from_json(*off, "/graph/offspring"), *model, deltas, c.horizon, c.replicas,
                             c.seed, c.budget, threads_of(c));
  } else {
    const MarkedGraph g = finite_graph(c, c.seed);
    check_model(*model, g);
    rows = dissociation_scan(g, *model, deltas, c.horizon, c.replicas, c.seed, threads_of(c));
  }
  CsvTable t({"delta", "meanRootComponent", "p95RootComponent", "fracExhausted", "EZ", "EZ_stderr", "certified"});
  double worst = 0.0;
  std::size_t certified = 0;
  for (const auto& r : rows) {
    auto row = t.row();
    row << r.delta << r.mean_root_component << r.p95_root_component << r.frac_exhausted;
    if (r.grandchildren) row << r.grandchildren->mean << r.grandchildren->stderr_mean;
    else row << "" << "";
    row << r.certified;
    worst = std::max(worst, r.frac_exhausted);
    certified += r.certified;
  }
  return {exceeds(worst, c) ? 3 : 0,
          outcome_line(c, std::to_string(rows.size()) + " deltas, " + std::to_string(certified) + " certified"),
          {{"", t.str()}}};
}

struct SizedFamily {
  GraphSampler sampler;
  RootedSampler limit;
};

SizedFamily sized_family(const ExperimentConfig& c) {
  const Json& spec = graph_spec(c);
  const std::string gen = generator_name(spec, "/graph");
  if (gen != "erdos_renyi" && gen != "regular")
    fail("/graph/generator", "command '" + c.command + "' needs erdos_renyi or regular");
  SizedFamily fam;
  fam.sampler = [spec, budget = c.budget](std::size_t n, std::uint64_t s) {
    return graph_from_spec(spec, s, budget, n);
  };
  std::optional<OffspringDistribution> rho;
  if (const Json* lim = find(c.doc, "limitOffspring")) rho = offspring_from_json(*lim, "/limitOffspring");
  else if (gen == "erdos_renyi") rho = OffspringDistribution::poisson(number(spec, "/graph", "c", std::nullopt, 0.0));
  else rho = OffspringDistribution::delta(uinteger(spec, "/graph", "d", std::nullopt));
  fam.limit = [spec, rho = *rho, budget = c.budget](std::uint64_t s) {
    return ugw_tree(rho, s, budget, init_from_json(spec, "/graph", s));
  };
  return fam;
}

RunOutcome run_hydro(const ExperimentConfig& c) {
  const auto model = model_of(c);
  const auto sizes = size_list(c.doc, "", "nList", 1);
  const auto limit_runs = uinteger(c.doc, "", "limitRuns", 1000, 1);
  const auto fam = sized_family(c);
  const auto f = state_indicator(*observed_state(c), c.horizon);
  const auto rep = hydro_experiment(fam.sampler, *model, sizes, fam.limit, f, c.horizon, c.replicas, limit_runs,
                                    c.budget, c.seed, threads_of(c));
  CsvTable t({"n", "mean", "stderr", "replicas", "difference", "differenceStderr"});
  for (const auto& r : rep.rows)
    t.row() << std::to_string(r.n) << r.mean << r.stderr_mean << r.replicas << r.difference << r.difference_stderr;
  t.row() << "limit" << rep.limit_mean << rep.limit_stderr << rep.limit_runs << "" << "";
  return {exceeds(rep.limit_exhausted_fraction, c) ? 3 : 0,
          outcome_line(c, std::to_string(rep.rows.size()) + " sizes, limit " + format_double(rep.limit_mean) +
                              ", limit exhausted fraction " + format_double(rep.limit_exhausted_fraction)),
          {{"", t.str()}}};
}

RunOutcome run_corrdecay(const ExperimentConfig& c) {
  const auto model = model_of(c);
  const auto sizes = size_list(c.doc, "", "nList", 2);
  const std::string mode_name = string_field(c.doc, "", "mode", "averaged");
  CovarianceMode mode;
  if (mode_name == "averaged") mode = CovarianceMode::Averaged;
  else if (mode_name == "sampledPair") mode = CovarianceMode::SampledPair;
  else fail("/mode", "expected \"averaged\" or \"sampledPair\"");
  const bool independent = bool_field(c.doc, "", "independentGraphs", false);
  const auto fam = sized_family(c);
  const auto f = at_root(state_indicator(*observed_state(c), c.horizon));
  const auto rows =
      correlation_decay(fam.sampler, *model, sizes, f, f, c.horizon, c.replicas, c.seed, threads_of(c), mode, independent);
  CsvTable t({"n", "covariance", "stderr", "replicas"});
  for (const auto& r : rows) t.row() << r.n << r.covariance << r.stderr_cov << r.replicas;
  return {0, outcome_line(c, std::to_string(rows.size()) + " sizes"), {{"", t.str()}}};
}

RunOutcome run_nbhd(const ExperimentConfig& c) {
  const auto model = model_of(c);
  const Json& spec = graph_spec(c);
  const bool resample = bool_field(spec, "/graph", "resample", false);
  std::optional<MarkedGraph> shared;
  if (!resample) shared = finite_graph(c, c.seed);
  const auto grid = number_list(c.doc, "", "timeGrid", std::vector<double>{c.horizon}, 0.0, c.horizon);
  MarkDiscretizer disc;
  disc.grid = number(c.doc, "", "markGrid", 1e-6, std::numeric_limits<double>::min());
  disc.vertex_cap = uinteger(c.doc, "", "vertexCap", 64, 1, 64);
  const auto reps = parallel_map<NeighborhoodReport>(c.replicas, threads_of(c), [&](std::size_t i) {
    const std::uint64_t rs = replica_seed(c.seed, i);
    const MarkedGraph g = shared ? *shared : finite_graph(c, rs);
    check_model(*model, g);
    const auto res = simulate_finite(g, *model, noise_for(c, *model, rs), c.horizon);
    return neighborhood_empirical(g, res.trajectories, grid, disc);
  });
  std::map<BallSignature, double> weights;
  double overflow = 0.0;
  const double scale = 1.0 / static_cast<double>(c.replicas);
  for (const auto& r : reps) {
    for (const auto& [sig, w] : r.weights) weights[sig] += w * scale;
    overflow += r.overflow * scale;
  }
  CsvTable t({"signature", "weight"});
  for (const auto& [sig, w] : weights) t.row() << sig.hex() << w;
  t.row() << "overflow" << overflow;
  return {0, outcome_line(c, std::to_string(weights.size()) + " classes"), {{"", t.str()}}};
}

std::string join_labels(const MarkedGraph& g, const std::vector<VertexId>& path) {
  std::string s;
  for (VertexId v : path) s += (s.empty() ? "" : " ") + std::to_string(g.label(v));
  return s;
}

std::string join_times(const std::vector<Time>& ts) {
  std::string s;
  for (Time t : ts) s += (s.empty() ? "" : " ") + format_double(t);
  return s;
}

RunOutcome run_counterexample(const ExperimentConfig& c) {
  const auto depth = static_cast<std::uint32_t>(uinteger(c.doc, "", "depth", std::nullopt, 1, 12));
  const auto full_budget = uinteger(c.doc, "", "fullBudget", 100000);
  const bool dyadic = c.horizon >= 1.0;
  const OneWayInfectionModel model;
  struct Rep {
    bool exhausted = false;
    std::vector<bool> exhaustive_found, dyadic_found;
    std::string row;
    bool root_infected = false;
    bool verified = true;
  };
  const auto reps = parallel_map<Rep>(c.replicas, threads_of(c), [&](std::size_t i) {
    const std::uint64_t rs = replica_seed(c.seed, i);
    Rep rep;
    CsvTable t({"replica", "found", "dyadicFound", "rootTime", "zeroOk", "tildeOk", "fullChecked", "path", "times"});
    try {
      MarkedGraph tree = counterexample_tree(depth, graph_seed(rs), c.budget);
      const auto noise = noise_for(c, model, rs);
      for (std::uint32_t d = 1; d <= depth; ++d) {
        rep.exhaustive_found.push_back(detect_chain(tree, noise, d, c.horizon, ChainStrategy::Exhaustive).found);
        rep.dyadic_found.push_back(dyadic && detect_chain(tree, noise, d, c.horizon, ChainStrategy::Dyadic).found);
      }
      const auto cert = detect_chain(tree, noise, depth, c.horizon, ChainStrategy::Exhaustive);
      const auto sols = two_solutions(tree, noise, depth, c.horizon, full_budget);
      rep.root_infected = sols.root_time.has_value();
      rep.verified = sols.zero_verdict.ok() && sols.tilde_verdict.ok() &&
                     (!sols.full_tilde_verdict || (sols.full_tilde_verdict->ok() && sols.full_zero_verdict->ok()));
      auto row = t.row();
      row << i << cert.found;
      if (dyadic) row << rep.dyadic_found.back();
      else row << "";
      if (sols.root_time) row << *sols.root_time;
      else row << "";
      row << sols.zero_verdict.ok() << sols.tilde_verdict.ok() << sols.full_tilde_verdict.has_value()
          << join_labels(tree, cert.path) << join_times(cert.times);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BudgetExceeded) throw;
      rep.exhausted = true;
      t.row() << i << "exhausted";
    }
    rep.row = t.str().substr(t.str().find('\n') + 1);
    return rep;
  });
  std::string out = "replica,found,dyadicFound,rootTime,zeroOk,tildeOk,fullChecked,path,times\n";
  std::vector<std::size_t> ex(depth, 0), dy(depth, 0);
  std::size_t exhausted = 0, infected = 0, failures = 0, usable = 0;
  for (const auto& r : reps) {
    out += r.row;
    if (r.exhausted) {
      ++exhausted;
      continue;
    }
    ++usable;
    infected += r.root_infected;
    failures += !r.verified;
    for (std::uint32_t d = 0; d < depth; ++d) {
      ex[d] += r.exhaustive_found[d];
      dy[d] += r.dyadic_found[d];
    }
  }
  const double denom = std::max<double>(1.0, static_cast<double>(usable));
  CsvTable summary({"depth", "replicas", "exhaustiveFrequency", "dyadicFrequency", "rootInfectedFrequency",
                    "verifierFailures"});
  for (std::uint32_t d = 0; d < depth; ++d) {
    auto row = summary.row();
    row << d + 1 << usable << static_cast<double>(ex[d]) / denom;
    if (dyadic) row << static_cast<double>(dy[d]) / denom;
    else row << "";
    if (d + 1 == depth) row << static_cast<double>(infected) / denom << failures;
    else row << "" << "";
  }
  const double frac = static_cast<double>(exhausted) / static_cast<double>(c.replicas);
  return {exceeds(frac, c) ? 3 : 0,
          outcome_line(c, std::to_string(usable) + " replicas, root infected " +
                              format_double(static_cast<double>(infected) / denom) + ", verifier failures " +
                              std::to_string(failures) + ", exhausted " + std::to_string(exhausted)),
          {{"", std::move(out)}, {".summary.csv", summary.str()}}};
}

RunOutcome run_dump_noise(const ExperimentConfig& c) {
  const auto model = model_of(c);
  const MarkedGraph g = finite_graph(c, c.seed);
  check_model(*model, g);
  const auto caps = level_caps(g, *model, c.horizon);
  const auto noise = noise_for(c, *model, replica_seed(c.seed, 0));
  CsvTable t({"vertexKey", "t", "r", "j"});
  std::size_t count = 0;
  for (VertexId v = 0; v < g.size(); ++v)
    for (const auto& e : noise.events(g.key(v), caps[v], 0.0, c.horizon)) {
      t.row() << g.key(v) << e.t << e.r << e.j;
      ++count;
    }
  return {0, outcome_line(c, std::to_string(count) + " events"), {{"", t.str()}}};
}

RunOutcome run_gen(const ExperimentConfig& c) {
  const Json& spec = graph_spec(c);
  MarkedGraph g = graph_from_spec(spec, graph_seed(c.seed), c.budget);
  if (g.is_lazy() && !g.is_complete()) {
    const auto radius = static_cast<std::uint32_t>(uinteger(c.doc, "", "radius", std::nullopt, 0, 64));
    g = truncate_ball(g, radius);
  }
  return {0, outcome_line(c, std::to_string(g.size()) + " vertices, " + std::to_string(g.edge_count()) + " edges"),
          {{"", graph_to_json(g).dump(1) + "\n"}}};
}

}  // namespace

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail("", "override '" + assignment + "' is not key=value");
  std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  if (key.front() != '/') {
    std::replace(key.begin(), key.end(), '.', '/');
    key = "/" + key;
  }
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  try {
    doc[Json::json_pointer(key)] = std::move(value);
  } catch (const Json::exception& e) {
    fail(key, std::string("cannot apply override: ") + e.what());
  }
}

ExperimentConfig parse_config(const Json& doc) {
  object_at(doc, "");
  ExperimentConfig c;
  c.doc = doc;
  c.command = string_field(doc, "", "command");
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end())
    fail("/command", "unknown command '" + c.command + "'");
  c.seed = uinteger(doc, "", "seed", std::nullopt);
  c.horizon = number(doc, "", "horizon", 1.0, std::numeric_limits<double>::min(), 1e6);
  c.replicas = uinteger(doc, "", "replicas", 1, 1, std::uint64_t{1} << 40);
  c.threads = static_cast<unsigned>(uinteger(doc, "", "threads", 0, 0, 4096));
  c.budget = uinteger(doc, "", "budget", 100000, 1);
  c.output = string_field(doc, "", "output", "");
  c.exhaustion_tolerance = number(doc, "", "exhaustionTolerance", 0.0, 0.0, 1.0);
  if (const Json* n = find(doc, "noise")) {
    object_at(*n, "/noise");
    c.band_width = number(*n, "/noise", "bandWidth", 1.0, std::numeric_limits<double>::min());
    c.block_length = number(*n, "/noise", "blockLength", 1.0, std::numeric_limits<double>::min());
  }
  return c;
}

ModelPtr model_from_json(const Json& spec, const std::string& ptr) {
  object_at(spec, ptr);
  const std::string name = string_field(spec, ptr, "name");
  try {
    if (name == "contact") return std::make_shared<ContactModel>(number(spec, ptr, "lambda", std::nullopt, 0.0));
    if (name == "het_contact")
      return std::make_shared<HetContactModel>(number(spec, ptr, "recoveryCap", std::nullopt, 0.0),
                                               number(spec, ptr, "transmissionCap", std::nullopt, 0.0));
    if (name == "renewal_contact") {
      const Json* inf = find(spec, "infection");
      const Json* rec = find(spec, "recovery");
      if (!inf) fail(child_ptr(ptr, "infection"), "required field is missing");
      if (!rec) fail(child_ptr(ptr, "recovery"), "required field is missing");
      const std::string arg = string_field(spec, ptr, "hazardArg", "elapsed");
      if (arg != "elapsed" && arg != "absolute") fail(child_ptr(ptr, "hazardArg"), "expected \"elapsed\" or \"absolute\"");
      return std::make_shared<RenewalContactModel>(hazard_from_json(*inf, child_ptr(ptr, "infection")),
                                                   hazard_from_json(*rec, child_ptr(ptr, "recovery")),
                                                   number(spec, ptr, "history", 1.0, 0.0), arg == "absolute");
    }
    if (name == "one_way") return std::make_shared<OneWayInfectionModel>();
  } catch (const Error& e) {
    fail(ptr, e.what());
  }
  fail(child_ptr(ptr, "name"), "unknown model '" + name + "'");
}

OffspringDistribution offspring_from_json(const Json& spec, const std::string& ptr) {
  object_at(spec, ptr);
  try {
    if (find(spec, "poisson")) return OffspringDistribution::poisson(number(spec, ptr, "poisson", std::nullopt, 0.0, 1e3));
    if (find(spec, "delta")) return OffspringDistribution::delta(uinteger(spec, ptr, "delta", std::nullopt, 0, 1 << 20));
    if (find(spec, "geometric"))
      return OffspringDistribution::geometric(number(spec, ptr, "geometric", std::nullopt, 1e-9, 1.0));
    if (find(spec, "pmf"))
      return OffspringDistribution(number_list(spec, ptr, "pmf", std::nullopt, 0.0, 1.0));
  } catch (const Error& e) {
    fail(ptr, e.what());
  }
  fail(ptr, "expected one of poisson, delta, geometric, pmf");
}

MarkedGraph graph_from_spec(const Json& spec, std::uint64_t seed, std::size_t budget, std::optional<std::size_t> n,
                            const std::string& ptr) {
  const std::string gen = generator_name(spec, ptr);
  if (gen == "file") {
    try {
      return load_graph(string_field(spec, ptr, "file"));
    } catch (const Error& e) {
      fail(child_ptr(ptr, "file"), e.what());
    }
  }
  const VertexInit init = init_from_json(spec, ptr, seed);
  const auto size = [&] { return n ? *n : uinteger(spec, ptr, "n", std::nullopt, 1); };
  const auto root = [&](MarkedGraph g) {
    if (const Json* r = find(spec, "root")) {
      const auto v = uinteger(spec, ptr, "root", std::nullopt, 0, g.size() - 1);
      (void)r;
      g.set_root(static_cast<VertexId>(v));
    } else if (g.size() > 0 && !g.root()) {
      g.set_root(0);
    }
    return g;
  };
  try {
    if (gen == "erdos_renyi") return root(erdos_renyi(size(), number(spec, ptr, "c", std::nullopt, 0.0), seed, init));
    if (gen == "regular")
      return root(regular_graph(size(), uinteger(spec, ptr, "d", std::nullopt), seed, init));
    if (gen == "configuration") {
      std::vector<std::size_t> degrees;
      for (double d : number_list(spec, ptr, "degrees", std::nullopt, 0.0, 1e9)) {
        if (d != std::floor(d)) fail(child_ptr(ptr, "degrees"), "degrees must be integers");
        degrees.push_back(static_cast<std::size_t>(d));
      }
      return root(configuration_model(degrees, seed, init));
    }
    if (gen == "grid") {
      std::vector<std::size_t> dims;
      for (double d : number_list(spec, ptr, "dims", std::nullopt, 1.0, 1e9)) {
        if (d != std::floor(d)) fail(child_ptr(ptr, "dims"), "dims must be integers");
        dims.push_back(static_cast<std::size_t>(d));
      }
      return root(grid(dims, init));
    }
    if (gen == "gw" || gen == "ugw") {
      const Json* off = find(spec, "offspring");
      if (!off) fail(child_ptr(ptr, "offspring"), "required field is missing");
      const auto rho = offspring_from_json(*off, child_ptr(ptr, "offspring"));
      return gen == "gw" ? gw_tree(rho, seed, budget, init) : ugw_tree(rho, seed, budget, init);
    }
    if (gen == "counterexample")
      return counterexample_tree(static_cast<std::uint32_t>(uinteger(spec, ptr, "depth", std::nullopt, 1, 12)), seed,
                                 budget);
  } catch (const Error& e) {
    fail(ptr, e.what());
  }
  fail(child_ptr(ptr, "generator"), "unknown generator '" + gen + "'");
}

RunOutcome run_experiment(const ExperimentConfig& c) {
  if (c.command == "simulate") return run_simulate(c);
  if (c.command == "localize") return run_localize(c);
  if (c.command == "percolate") return run_percolate(c);
  if (c.command == "hydro") return run_hydro(c);
  if (c.command == "corrdecay") return run_corrdecay(c);
  if (c.command == "nbhd") return run_nbhd(c);
  if (c.command == "counterexample") return run_counterexample(c);
  if (c.command == "dump-noise") return run_dump_noise(c);
  if (c.command == "gen") return run_gen(c);
  fail("/command", "unknown command '" + c.command + "'");
}

RunOutcome run_and_write(const ExperimentConfig& c) {
  RunOutcome out = run_experiment(c);
  for (const auto& [suffix, content] : out.artifacts) {
    if (c.output.empty()) std::cout << content;
    else write_atomic(c.output + suffix, content);
  }
  return out;
}

}  // namespace ips
