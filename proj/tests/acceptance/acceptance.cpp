// Acceptance suite. `acceptance N...` runs the listed criteria (all when none
// are given) and prints one PASS/FAIL line for each.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <unistd.h>

#include "ips/counterexample.hpp"
#include "ips/empirics.hpp"
#include "ips/experiment.hpp"
#include "ips/gen.hpp"
#include "ips/localize.hpp"
#include "ips/parallel.hpp"
#include "ips/percolate.hpp"
#include "ips/random.hpp"
#include "ips/sim.hpp"
#include "ips/stats.hpp"
#include "rate_samples.hpp"

using namespace ips;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << x;
  return ss.str();
}

const JumpSpec kContactJumps = JumpSpec::uniform({-1, 1});
const unsigned kThreads = resolve_threads(0);

MarkedGraph small_graph(std::size_t n, const std::vector<std::pair<VertexId, VertexId>>& edges) {
  MarkedGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_vertex(0);
  for (auto [u, v] : edges) g.add_edge(u, v);
  return g;
}

// 1. Monte Carlo marginals against the exact CTMC on every connected graph
// with at most three vertices.
Outcome oracle_equivalence() {
  const auto start = Clock::now();
  const std::vector<MarkedGraph> graphs = {small_graph(1, {}), small_graph(2, {{0, 1}}),
                                           small_graph(3, {{0, 1}, {1, 2}}),
                                           small_graph(3, {{0, 1}, {1, 2}, {0, 2}})};
  const std::vector<Time> times = {0.5, 1.0};
  const std::size_t replicas = 100000;
  std::size_t comparisons = 0, beyond = 0, case_index = 0;
  double max_z = 0.0;
  std::string worst;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const std::size_t n = graphs[gi].size();
    for (std::size_t config = 0; config < (std::size_t{1} << n); ++config) {
      MarkedGraph g = graphs[gi];
      for (VertexId v = 0; v < n; ++v) g.set_state(v, static_cast<State>((config >> v) & 1));
      for (double lambda : {0.5, 1.0, 2.0}) {
        const ContactModel model(lambda);
        const auto oracle = ctmc_oracle(g, model, times);
        const std::uint64_t base = hash_words({0xC1, case_index++});
        // infected[t][v]
        std::vector<std::vector<std::size_t>> infected(times.size(), std::vector<std::size_t>(n, 0));
        for (std::size_t r = 0; r < replicas; ++r) {
          const DrivingNoise noise(replica_seed(base, r), kContactJumps, 1.0);
          const auto res = simulate_finite(g, model, noise, 1.0);
          for (std::size_t ti = 0; ti < times.size(); ++ti)
            for (VertexId v = 0; v < n; ++v) infected[ti][v] += res.trajectories[v].value_at(times[ti]) == 1;
        }
        for (std::size_t ti = 0; ti < times.size(); ++ti)
          for (VertexId v = 0; v < n; ++v)
            for (State s : {0, 1}) {
              const double p = oracle.marginal(ti, v, s);
              const double count = s == 1 ? static_cast<double>(infected[ti][v])
                                          : static_cast<double>(replicas - infected[ti][v]);
              const double freq = count / static_cast<double>(replicas);
              const double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(replicas));
              ++comparisons;
              const double diff = std::abs(freq - p);
              const double z = se > 0.0 ? diff / se : (diff > 0.0 ? INFINITY : 0.0);
              if (z > max_z) {
                max_z = z;
                worst = "graph " + std::to_string(gi) + " start " + std::to_string(config) + " lambda " +
                        fmt(lambda) + " t " + fmt(times[ti]) + " v " + std::to_string(v);
              }
              beyond += diff > 3.0 * se;
            }
      }
    }
  }
  const double secs = seconds_since(start);
  return {beyond == 0 && secs < 120.0,
          std::to_string(comparisons) + " state comparisons, " + std::to_string(beyond) +
              " beyond 3 SE, max |z| " + fmt(max_z) + " (" + worst + "), " + fmt(secs, 3) + " s (limit 120 s)"};
}

// 2. Localized root trajectory against the B_12 truncation on UGW(Poisson(2)).
Outcome localization_equality() {
  const auto start = Clock::now();
  const ContactModel model(0.8);
  const auto rho = OffspringDistribution::poisson(2.0);
  const std::size_t runs = 1000, budget = 200000;
  const std::uint32_t radius = 12;
  std::size_t contained = 0, equal = 0, exhausted = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    const std::uint64_t s = replica_seed(0xC2, i);
    MarkedGraph tree = ugw_tree(rho, s, 5000000, bernoulli_states(0.1, s));
    const DrivingNoise noise(s, kContactJumps, 1.0);
    const VertexId root = *tree.root();
    const auto u = influence_set(tree, noise, model, std::span(&root, 1), 1.0, budget);
    if (u.exhausted) {
      ++exhausted;
      continue;
    }
    std::uint32_t depth = 0;
    for (VertexId v : u.vertices) depth = std::max(depth, tree.depth(v));
    if (depth > radius) continue;
    ++contained;
    const auto loc = localized_marginal(tree, model, noise, std::span(&root, 1), 1.0, budget);
    const MarkedGraph ball = truncate_ball(tree, radius);
    const auto full = simulate_finite(ball, model, noise, 1.0);
    equal += loc.trajectories[0] == full.trajectories[*ball.root()];
  }
  const double freq = static_cast<double>(contained) / static_cast<double>(runs);
  const double secs = seconds_since(start);
  return {equal == contained && freq >= 0.95 && secs < 300.0,
          "containment " + fmt(freq) + " (need >= 0.95), equal " + std::to_string(equal) + "/" +
              std::to_string(contained) + ", exhausted at budget " + std::to_string(budget) + ": " +
              std::to_string(exhausted) + ", " + fmt(secs, 3) + " s (limit 300 s)"};
}

// 3. Activation law per closure size and the 3-path component distribution.
Outcome percolation_law() {
  const ContactModel model(1.0);
  const double delta = 0.1, horizon = 1.0;
  const std::size_t samples = 100000;
  const auto n = static_cast<double>(samples);
  std::size_t beyond = 0, checks = 0;
  double max_z = 0.0;
  for (std::size_t k = 1; k <= 6; ++k) {
    MarkedGraph star;
    star.add_vertex(0);
    for (std::size_t i = 1; i < k; ++i) star.add_edge(0, star.add_vertex(0));
    const double p = 1.0 - std::exp(-delta * kContactJumps.total() * model.bound(k, horizon));
    double hits = 0.0;
    for (std::size_t s = 0; s < samples; ++s)
      hits += is_active(star, model, DrivingNoise(replica_seed(0xC3, s), kContactJumps, horizon), 0, delta, horizon);
    const double se = std::sqrt(p * (1.0 - p) / n);
    max_z = std::max(max_z, std::abs(hits / n - p) / se);
    beyond += std::abs(hits / n - p) > 3.0 * se;
    ++checks;
  }
  // Path a - b - c rooted at b.
  const double pm = 1.0 - std::exp(-delta * 2.0 * model.bound(3, horizon));
  const double pe = 1.0 - std::exp(-delta * 2.0 * model.bound(2, horizon));
  std::vector<double> expected(4, 0.0);
  for (int pattern = 0; pattern < 8; ++pattern) {
    const bool a = pattern & 1, b = pattern & 2, c = pattern & 4;
    const double w = (a ? pe : 1 - pe) * (b ? pm : 1 - pm) * (c ? pe : 1 - pe);
    expected[b ? 1 + a + c : 0] += w;
  }
  std::vector<double> counts(4, 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    MarkedGraph path = small_graph(3, {{0, 1}, {1, 2}});
    path.set_root(1);
    const auto res = percolate(path, model, DrivingNoise(replica_seed(0xC33, s), kContactJumps, horizon), delta, horizon);
    counts[*res.root_component_size] += 1.0;
  }
  for (std::size_t size = 0; size < 4; ++size) {
    const double p = expected[size];
    const double se = std::sqrt(p * (1.0 - p) / n);
    max_z = std::max(max_z, std::abs(counts[size] / n - p) / se);
    beyond += std::abs(counts[size] / n - p) > 3.0 * se;
    ++checks;
  }
  return {beyond == 0, std::to_string(checks) + " frequency checks, " + std::to_string(beyond) +
                           " beyond 3 SE, max |z| " + fmt(max_z)};
}

// 4. Subcriticality certificate on GW(Poisson(2)).
Outcome subcriticality() {
  const auto start = Clock::now();
  const ContactModel model(1.0);
  const auto rho = OffspringDistribution::poisson(2.0);
  const std::size_t samples = 10000, budget = 100000;
  std::optional<double> chosen;
  std::string upper_bounds;
  for (int k = 1; k <= 20; ++k) {
    const double delta = 0.01 * k;
    const auto ez = halfperc_grandchild_mean(rho, model, delta, 1.0, samples, hash_words({0xC4, std::uint64_t(k)}),
                                             kThreads);
    const double upper = ez.mean + kUpper99 * ez.stderr_mean;
    if (upper < 1.0) chosen = delta;
    if (k <= 5 || upper < 1.0) upper_bounds += " " + fmt(delta, 2) + ":" + fmt(upper, 3);
  }
  if (!chosen) return {false, "no delta in {0.01,...,0.2} certified; upper bounds" + upper_bounds};
  const auto rows = dissociation_scan(rho, model, {*chosen}, 1.0, samples, 0xC44, budget, kThreads);
  const auto& row = rows.at(0);
  return {row.certified && row.frac_exhausted == 0.0,
          "largest certified delta " + fmt(*chosen, 2) + ", scan EZ " + fmt(row.grandchildren->mean) + " +- " +
              fmt(row.grandchildren->stderr_mean) + ", certified " + (row.certified ? "yes" : "no") +
              ", exhausted fraction " + fmt(row.frac_exhausted) + " over " + std::to_string(samples) +
              " samples (budget " + std::to_string(budget) + "), upper bounds" + upper_bounds + ", " +
              fmt(seconds_since(start), 3) + " s"};
}

GraphSampler er_sampler() {
  return [](std::size_t n, std::uint64_t s) {
    return erdos_renyi(n, 2.0, s, bernoulli_states(0.1, hash_words({s, 0x496E6974})));
  };
}

// 5. Hydrodynamic limit on ER(n, 2/n).
Outcome hydrodynamic() {
  const auto start = Clock::now();
  const ContactModel model(1.0);
  const auto rho = OffspringDistribution::poisson(2.0);
  const RootedSampler limit = [&](std::uint64_t s) {
    return ugw_tree(rho, s, 5000000, bernoulli_states(0.1, hash_words({s, 0x496E6974})));
  };
  const auto rep = hydro_experiment(er_sampler(), model, {100, 1000, 10000}, limit, state_indicator(1, 1.0), 1.0, 200,
                                    10000, 1000000, 0xC5, kThreads);
  bool decreasing = true;
  std::string diffs;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    diffs += " n=" + std::to_string(rep.rows[i].n) + ":" + fmt(rep.rows[i].difference) + "+-" +
             fmt(rep.rows[i].difference_stderr, 2);
    if (i > 0) decreasing &= rep.rows[i].difference < rep.rows[i - 1].difference;
  }
  const double secs = seconds_since(start);
  const bool ok = decreasing && rep.rows.back().difference <= 0.02 && secs < 1800.0;
  return {ok, "limit " + fmt(rep.limit_mean) + " +- " + fmt(rep.limit_stderr, 2) + " from " +
                  std::to_string(rep.limit_runs) + " runs (exhausted fraction " +
                  fmt(rep.limit_exhausted_fraction) + "), differences" + diffs + ", decreasing " +
                  (decreasing ? "yes" : "no") + ", " + fmt(secs, 4) + " s (limit 1800 s)"};
}

// 6. Correlation decay with an independent-graph negative control.
Outcome correlation() {
  const auto start = Clock::now();
  const ContactModel model(1.0);
  const auto f = at_root(state_indicator(1, 1.0));
  const auto rows = correlation_decay(er_sampler(), model, {100, 10000}, f, f, 1.0, 2000, 0xC6, kThreads);
  const auto control =
      correlation_decay(er_sampler(), model, {100}, f, f, 1.0, 2000, 0xC66, kThreads, CovarianceMode::Averaged, true);
  const double small = std::abs(rows[0].covariance), large = std::abs(rows[1].covariance);
  const double gap_se = std::hypot(rows[0].stderr_cov, rows[1].stderr_cov);
  const bool decay = large <= 0.01 && small - large > 3.0 * gap_se;
  const bool control_ok = std::abs(control[0].covariance) < 3.0 * control[0].stderr_cov;
  return {decay && control_ok,
          "cov n=100 " + fmt(rows[0].covariance) + " +- " + fmt(rows[0].stderr_cov, 2) + ", n=10000 " +
              fmt(rows[1].covariance) + " +- " + fmt(rows[1].stderr_cov, 2) + ", independent-graph control " +
              fmt(control[0].covariance) + " +- " + fmt(control[0].stderr_cov, 2) + ", " +
              fmt(seconds_since(start), 3) + " s"};
}

// 7. Two solutions on the counterexample tree.
Outcome non_uniqueness() {
  const auto start = Clock::now();
  const std::uint32_t depth = 8;
  const std::size_t replicas = 1000;
  const OneWayInfectionModel model;
  struct Rep {
    bool infected = false, verified = false, monotone = true;
    std::vector<bool> found;
  };
  const auto reps = parallel_map<Rep>(replicas, kThreads, [&](std::size_t i) {
    const std::uint64_t s = replica_seed(0xC7, i);
    MarkedGraph tree = counterexample_tree(depth, s, 100000000);
    const DrivingNoise noise(s, model.jump_spec(), 1.0);
    Rep rep;
    for (std::uint32_t d = 1; d <= depth; ++d) {
      rep.found.push_back(detect_chain(tree, noise, d, 1.0, ChainStrategy::Exhaustive).found);
      if (d > 1 && rep.found[d - 1] && !rep.found[d - 2]) rep.monotone = false;
    }
    const auto sols = two_solutions(tree, noise, depth, 1.0);
    rep.infected = sols.tilde[0].value_at(1.0) == 1;
    bool zero = sols.zero_verdict.ok();
    for (const auto& tr : sols.zero) zero &= tr.x0 == 0 && tr.jumps.empty();
    rep.verified = zero && sols.tilde_verdict.ok();
    return rep;
  });
  std::size_t infected = 0, verified = 0, monotone = 0;
  std::vector<std::size_t> found(depth, 0);
  for (const auto& r : reps) {
    infected += r.infected;
    verified += r.verified;
    monotone += r.monotone;
    for (std::uint32_t d = 0; d < depth; ++d) found[d] += r.found[d];
  }
  bool freq_monotone = true;
  std::string freqs;
  for (std::uint32_t d = 0; d < depth; ++d) {
    freqs += " " + fmt(static_cast<double>(found[d]) / replicas, 3);
    if (d > 0) freq_monotone &= found[d] <= found[d - 1];
  }
  const double p = static_cast<double>(infected) / replicas;
  return {p >= 0.9 && verified == replicas && monotone == replicas && freq_monotone,
          "P(root infected at 1) " + fmt(p) + " (need >= 0.9; the root's only neighbor path caps it at 1-1/e = " +
              fmt(1.0 - std::exp(-1.0)) + "), both solutions verified " + std::to_string(verified) + "/" +
              std::to_string(replicas) + ", per-replica monotone " + std::to_string(monotone) + "/" +
              std::to_string(replicas) + ", detection by depth" + freqs + ", " + fmt(seconds_since(start), 3) + " s"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 8. Properness, rate structure and CLI determinism.
Outcome structural() {
  std::string detail;
  bool ok = true;

  std::size_t improper = 0, ties = 0;
  CounterRng rng(0xC8, Stream::Sampling);
  for (int i = 0; i < 100000; ++i) {
    const std::size_t n = 2 + rng.below(29);
    const MarkedGraph g = erdos_renyi(n, 3.0 * rng.uniform(), rng.next_u64(), bernoulli_states(0.5, rng.next_u64()));
    const ContactModel model(3.0 * rng.uniform());
    const auto res = simulate_finite(g, model, DrivingNoise(rng.next_u64(), kContactJumps, 1.0), 1.0);
    improper += !is_proper(res.trajectories);
    ties += res.ties;
  }
  ok &= improper == 0 && ties == 0;
  detail += "improper runs " + std::to_string(improper) + "/100000 (ties " + std::to_string(ties) + ")";

  std::size_t class_fail = 0, past_fail = 0, bound_fail = 0, checks = 0;
  for (const auto& mc : testing::all_models()) {
    for (int i = 0; i < 10000; ++i) {
      const auto s = testing::random_sample(rng, mc.vertex_cap, mc.edge_cap, mc.history);
      const Time t = rng.uniform();
      std::vector<VertexId> perm(s.g.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto relabeled = testing::relabel(s, perm);
      auto future = s;
      for (auto& tr : future.traj) {
        while (!tr.jumps.empty() && tr.jumps.back().t >= t) tr.jumps.pop_back();
        State x = tr.final_value();
        for (Time u = t + 0.25 * rng.uniform(); u < 1.0; u += 0.25 * rng.uniform()) {
          const State j = x == 0 ? 1 : -1;
          tr.jumps.push_back({u, j});
          x += j;
        }
      }
      const double bound = mc.model->bound(s.g.degree(0) + 1, 1.0);
      for (State j : mc.model->jump_spec().jumps()) {
        const double r = testing::rate_at(*mc.model, s, j, t);
        class_fail += r != testing::rate_at(*mc.model, relabeled, j, t);
        past_fail += r != testing::rate_at(*mc.model, future, j, t);
        bound_fail += !(r <= bound);
        ++checks;
      }
    }
  }
  ok &= class_fail == 0 && past_fail == 0 && bound_fail == 0;
  detail += "; rate checks " + std::to_string(checks) + " per property, class-function failures " +
            std::to_string(class_fail) + ", predictability failures " + std::to_string(past_fail) +
            ", bound failures " + std::to_string(bound_fail);

  const fs::path dir = fs::temp_directory_path() / ("ips_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path data = IPS_TEST_DATA;
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"simulate", "--config " + (data / "simulate_path3.json").string() + " --replicas 50"},
      {"percolate", "--config " + (data / "percolate_grid.json").string() + " --replicas 200"},
      {"hydro", "--config " + (data / "hydro_small.json").string()},
      {"localize", "localize --seed 3 --replicas 40 --override 'graph={\"generator\":\"ugw\",\"offspring\":"
                   "{\"poisson\":2}}' 'model={\"name\":\"contact\",\"lambda\":0.8}'"},
      {"corrdecay", "corrdecay --seed 3 --replicas 200 --override 'graph={\"generator\":\"erdos_renyi\",\"c\":2,"
                    "\"initial\":{\"p\":0.1}}' 'model={\"name\":\"contact\",\"lambda\":1}' 'nList=[50,200]'"},
      {"nbhd", "nbhd --seed 3 --replicas 10 --override 'graph={\"generator\":\"erdos_renyi\",\"n\":100,\"c\":2,"
               "\"initial\":{\"p\":0.3}}' 'model={\"name\":\"contact\",\"lambda\":1}'"},
      {"counterexample", "counterexample --seed 3 --replicas 40 --override depth=5"},
      {"dump-noise", "dump-noise --config " + (data / "simulate_path3.json").string()},
  };
  std::size_t identical = 0;
  std::string mismatched;
  for (const auto& [name, args] : runs) {
    std::vector<std::string> outputs;
    for (const std::string prefix : {"", "", "IPS_THREADS=4 "}) {
      const std::string threads = prefix.empty() ? (outputs.empty() ? " --threads 1" : " --threads 3") : "";
      const fs::path out = dir / (name + std::to_string(outputs.size()));
      const std::string cmd = "env -u IPS_THREADS " + prefix + std::string(IPSIM_PATH) + " " + args + threads +
                              " --out " + out.string() + " 2>/dev/null";
      const int rc = std::system(cmd.c_str());
      outputs.push_back(rc == 0 ? slurp(out) : "<exit " + std::to_string(rc) + ">");
    }
    // Rerun with the first settings.
    const fs::path again = dir / (name + "_again");
    [[maybe_unused]] const int rerun = std::system(("env -u IPS_THREADS " + std::string(IPSIM_PATH) + " " + args + " --threads 1 --out " + again.string() +
                 " 2>/dev/null").c_str());
    outputs.push_back(slurp(again));
    const bool same = !outputs[0].empty() && outputs[0].rfind("<exit", 0) != 0 &&
                      std::all_of(outputs.begin(), outputs.end(), [&](const std::string& o) { return o == outputs[0]; });
    identical += same;
    if (!same) mismatched += " " + name;
  }
  fs::remove_all(dir);
  ok &= identical == runs.size();
  detail += "; CLI byte-identical across reruns and --threads 1/3/IPS_THREADS=4: " + std::to_string(identical) + "/" +
            std::to_string(runs.size()) + (mismatched.empty() ? "" : " (differs:" + mismatched + ")");
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence}, {"localization equality", localization_equality},
      {"percolation law", percolation_law},       {"subcriticality certificate", subcriticality},
      {"hydrodynamic convergence", hydrodynamic}, {"correlation decay", correlation},
      {"non-uniqueness", non_uniqueness},         {"structural invariants", structural},
  };
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion " << argv[i] << "\n";
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(k));
  }
  if (selected.empty())
    for (std::size_t k = 1; k <= criteria.size(); ++k) selected.push_back(k);
  bool all = true;
  for (std::size_t k : selected) {
    const auto& [name, run] = criteria[k - 1];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::cout << "criterion " << k << " [" << name << "]: " << (o.pass ? "PASS" : "FAIL") << " | " << o.detail
              << std::endl;
    all &= o.pass;
  }
  return all ? 0 : 1;
}
