#include "ips/empirics.hpp"

#include <algorithm>
#include <cmath>

#include "ips/localize.hpp"
#include "ips/parallel.hpp"
#include "ips/random.hpp"
#include "ips/sim.hpp"
#include "ips/stats.hpp"

namespace ips {

TrajectoryFunctional state_indicator(State state, Time t) {
  return [state, t](const Trajectory& tr) { return tr.value_at(t) == state ? 1.0 : 0.0; };
}

RootedFunctional at_root(TrajectoryFunctional f) {
  return [f = std::move(f)](const MarkedGraph&, std::span<const Trajectory> traj, VertexId root) {
    return f(traj[root]);
  };
}

MeasureReport empirical_measure(std::span<const Trajectory> trajectories, const TrajectoryFunctional& f) {
  MeasureReport out;
  if (trajectories.empty()) return out;
  const double w = 1.0 / static_cast<double>(trajectories.size());
  double sum = 0.0;
  for (const auto& tr : trajectories) {
    const double x = f(tr);
    sum += x;
    out.histogram[x] += w;
  }
  out.mean = sum / static_cast<double>(trajectories.size());
  return out;
}

NeighborhoodReport neighborhood_empirical(const MarkedGraph& g, std::span<const Trajectory> trajectories,
                                          std::span<const Time> time_grid, const MarkDiscretizer& disc) {
  if (trajectories.size() != g.size()) throw Error(ErrorCode::InvalidArgument, "one trajectory per vertex required");
  NeighborhoodReport out;
  if (g.size() == 0) return out;
  const double w = 1.0 / static_cast<double>(g.size());
  std::vector<std::vector<std::int64_t>> tokens;
  for (VertexId v = 0; v < g.size(); ++v) {
    auto members = ball_members(g, v, 1).vertices;
    std::sort(members.begin(), members.end());
    if (members.size() > disc.vertex_cap) {
      out.overflow += w;
      continue;
    }
    const MarkedGraph ball = induced_subgraph(g, members, v);
    tokens.assign(members.size(), {});
    for (std::size_t i = 0; i < members.size(); ++i)
      for (Time t : time_grid) tokens[i].push_back(trajectories[members[i]].value_at(t));
    out.weights[canonical_signature(ball, disc, tokens)] += w;
  }
  return out;
}

double total_variation(const NeighborhoodReport& a, const NeighborhoodReport& b) {
  double sum = std::abs(a.overflow - b.overflow);
  auto ia = a.weights.begin();
  auto ib = b.weights.begin();
  while (ia != a.weights.end() || ib != b.weights.end()) {
    if (ib == b.weights.end() || (ia != a.weights.end() && ia->first < ib->first)) {
      sum += ia++->second;
    } else if (ia == a.weights.end() || ib->first < ia->first) {
      sum += ib++->second;
    } else {
      sum += std::abs(ia++->second - ib++->second);
    }
  }
  return 0.5 * sum;
}

namespace {

std::uint64_t size_seed(std::uint64_t seed, std::size_t n) { return hash_words({seed, 0x53697A65ull, n}); }
std::uint64_t graph_seed(std::uint64_t replica) { return hash_words({replica, 0x47726170ull}); }

/// Average of f over all roots.
double vertex_average(const MarkedGraph& g, std::span<const Trajectory> traj, const RootedFunctional& f) {
  double sum = 0.0;
  for (VertexId v = 0; v < g.size(); ++v) sum += f(g, traj, v);
  return sum / static_cast<double>(g.size());
}

struct Pair {
  double a = 0.0;
  double b = 0.0;
};

/// Sample covariance with its standard error. Data are shifted by the first
/// pair, so a constant coordinate gives exactly zero.
CovarianceRow covariance(std::size_t n, const std::vector<Pair>& pairs) {
  CovarianceRow row;
  row.n = n;
  row.replicas = pairs.size();
  if (pairs.size() < 2) return row;
  const double r = static_cast<double>(pairs.size());
  const Pair base = pairs.front();
  double sa = 0.0, sb = 0.0, sab = 0.0;
  for (const auto& p : pairs) {
    sa += p.a - base.a;
    sb += p.b - base.b;
    sab += (p.a - base.a) * (p.b - base.b);
  }
  row.covariance = (sab - sa * sb / r) / (r - 1.0);
  const double ma = sa / r, mb = sb / r;
  RunningStats products;
  for (const auto& p : pairs) products.add((p.a - base.a - ma) * (p.b - base.b - mb));
  row.stderr_cov = products.stderr_mean();
  return row;
}

}  // namespace

std::vector<CovarianceRow> correlation_decay(const GraphSampler& sampler, const RateModel& model,
                                             const std::vector<std::size_t>& sizes, const RootedFunctional& f1,
                                             const RootedFunctional& f2, Time horizon, std::size_t replicas,
                                             std::uint64_t seed, unsigned threads, CovarianceMode mode,
                                             bool independent_graphs) {
  std::vector<CovarianceRow> rows;
  for (std::size_t n : sizes) {
    const std::uint64_t base = size_seed(seed, n);
    const auto pairs = parallel_map<Pair>(replicas, threads, [&](std::size_t i) {
      const std::uint64_t s = replica_seed(base, i);
      const MarkedGraph g = sampler(n, graph_seed(s));
      const DrivingNoise noise(s, model.jump_spec(), horizon);
      const auto traj = simulate_finite(g, model, noise, horizon).trajectories;
      std::optional<MarkedGraph> g2;
      std::vector<Trajectory> traj2;
      if (independent_graphs) {
        const std::uint64_t s2 = hash_words({s, 0x496E6465ull});
        g2 = sampler(n, graph_seed(s2));
        traj2 = simulate_finite(*g2, model, DrivingNoise(s2, model.jump_spec(), horizon), horizon).trajectories;
      }
      const MarkedGraph& h = g2 ? *g2 : g;
      const std::span<const Trajectory> htraj = g2 ? std::span<const Trajectory>(traj2) : std::span<const Trajectory>(traj);
      if (mode == CovarianceMode::Averaged) return Pair{vertex_average(g, traj, f1), vertex_average(h, htraj, f2)};
      CounterRng rng(s, Stream::Sampling);
      const auto o1 = static_cast<VertexId>(rng.below(g.size()));
      const auto o2 = static_cast<VertexId>(rng.below(h.size()));
      return Pair{f1(g, traj, o1), f2(h, htraj, o2)};
    });
    rows.push_back(covariance(n, pairs));
  }
  return rows;
}

HydroReport hydro_experiment(const GraphSampler& sampler, const RateModel& model, const std::vector<std::size_t>& sizes,
                             const RootedSampler& limit, const TrajectoryFunctional& f, Time horizon,
                             std::size_t replicas, std::size_t limit_runs, std::size_t budget, std::uint64_t seed,
                             unsigned threads) {
  HydroReport report;
  struct LimitSample {
    double value = 0.0;
    bool exhausted = false;
  };
  const std::uint64_t limit_base = hash_words({seed, 0x4C696D69ull});
  const auto samples = parallel_map<LimitSample>(limit_runs, threads, [&](std::size_t i) {
    const std::uint64_t s = replica_seed(limit_base, i);
    MarkedGraph tree = limit(graph_seed(s));
    const DrivingNoise noise(s, model.jump_spec(), horizon);
    const VertexId root = tree.require_root();
    try {
      const auto res = localized_marginal(tree, model, noise, std::span<const VertexId>(&root, 1), horizon, budget);
      return LimitSample{f(res.trajectories[0]), false};
    } catch (const ExhaustedError&) {
      return LimitSample{0.0, true};
    }
  });
  RunningStats lim;
  std::size_t exhausted = 0;
  for (const auto& s : samples) {
    if (s.exhausted)
      ++exhausted;
    else
      lim.add(s.value);
  }
  report.limit_mean = lim.mean();
  report.limit_stderr = lim.stderr_mean();
  report.limit_runs = lim.count();
  report.limit_exhausted_fraction = limit_runs ? static_cast<double>(exhausted) / static_cast<double>(limit_runs) : 0.0;

  for (std::size_t n : sizes) {
    const std::uint64_t base = size_seed(seed, n);
    const auto means = parallel_map<double>(replicas, threads, [&](std::size_t i) {
      const std::uint64_t s = replica_seed(base, i);
      const MarkedGraph g = sampler(n, graph_seed(s));
      const DrivingNoise noise(s, model.jump_spec(), horizon);
      const auto traj = simulate_finite(g, model, noise, horizon).trajectories;
      return empirical_measure(traj, f).mean;
    });
    RunningStats st;
    for (double m : means) st.add(m);
    HydroRow row;
    row.n = n;
    row.mean = st.mean();
    row.stderr_mean = st.stderr_mean();
    row.replicas = st.count();
    row.difference = std::abs(row.mean - report.limit_mean);
    row.difference_stderr = std::hypot(row.stderr_mean, report.limit_stderr);
    report.rows.push_back(row);
  }
  return report;
}

OracleResult::OracleResult(std::vector<State> states, std::size_t vertices, std::vector<Time> times,
                           std::vector<std::vector<double>> distributions)
    : states_(std::move(states)), vertices_(vertices), times_(std::move(times)), dists_(std::move(distributions)) {}

State OracleResult::state_of(std::size_t config, VertexId v) const {
  for (VertexId u = 0; u < v; ++u) config /= states_.size();
  return states_[config % states_.size()];
}

double OracleResult::marginal(std::size_t i, VertexId v, State state) const {
  double p = 0.0;
  const auto& d = dists_[i];
  for (std::size_t c = 0; c < d.size(); ++c)
    if (state_of(c, v) == state) p += d[c];
  return p;
}

namespace {

std::size_t config_count(std::size_t m, std::size_t n, std::size_t max_states) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > max_states / std::max<std::size_t>(m, 1))
      throw Error(ErrorCode::StateSpaceTooLarge, std::to_string(m) + "^" + std::to_string(n) + " configurations");
    total *= m;
  }
  if (total > max_states) throw Error(ErrorCode::StateSpaceTooLarge, std::to_string(total) + " configurations");
  return total;
}

}  // namespace

std::vector<std::vector<std::pair<std::size_t, double>>> ctmc_generator(const MarkedGraph& g, const RateModel& model,
                                                                        std::size_t max_states) {
  if (!model.is_markov()) throw Error(ErrorCode::NotMarkov, model.name() + " depends on trajectory history");
  if (!g.is_complete()) throw Error(ErrorCode::NonFinite, "oracle needs a finite graph");
  const auto states = model.state_space();
  const std::size_t m = states.size(), n = g.size();
  const std::size_t total = config_count(m, n, max_states);
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t v = 1; v < n; ++v) stride[v] = stride[v - 1] * m;

  std::vector<std::vector<std::pair<std::size_t, double>>> rows(total);
  std::vector<Trajectory> traj(n);
  BallViewBuilder builder(g);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rest = c;
    for (std::size_t v = 0; v < n; ++v) {
      traj[v].x0 = states[rest % m];
      rest /= m;
    }
    for (VertexId v = 0; v < n; ++v) {
      const auto& ball = builder.build(v, traj, 0.0);
      const auto from = static_cast<std::size_t>(std::lower_bound(states.begin(), states.end(), traj[v].x0) - states.begin());
      for (State j : model.jump_spec().jumps()) {
        const double rate = model.rate(ball, j, 0.0);
        if (rate <= 0.0) continue;
        const auto it = std::lower_bound(states.begin(), states.end(), traj[v].x0 + j);
        if (it == states.end() || *it != traj[v].x0 + j)
          throw Error(ErrorCode::StateEscape, "positive rate out of the state space");
        const auto to_idx = static_cast<std::size_t>(it - states.begin());
        rows[c].emplace_back(c - from * stride[v] + to_idx * stride[v], rate);
      }
    }
  }
  return rows;
}

OracleResult ctmc_oracle(const MarkedGraph& g, const RateModel& model, const std::vector<Time>& times, double tol,
                         std::size_t max_states) {
  const auto rows = ctmc_generator(g, model, max_states);
  const auto states = model.state_space();
  const std::size_t total = rows.size();
  std::size_t start = 0, stride = 1;
  for (VertexId v = 0; v < g.size(); ++v) {
    const auto it = std::lower_bound(states.begin(), states.end(), g.state(v));
    if (it == states.end() || *it != g.state(v)) throw Error(ErrorCode::StateEscape, "initial state outside space");
    start += static_cast<std::size_t>(it - states.begin()) * stride;
    stride *= states.size();
  }
  // Uniformize over the configurations reachable from the start only, so an
  // absorbing start stays an exact point mass.
  std::vector<bool> reachable(total, false);
  std::vector<std::size_t> stack{start};
  reachable[start] = true;
  while (!stack.empty()) {
    const std::size_t c = stack.back();
    stack.pop_back();
    for (const auto& [to, rate] : rows[c])
      if (!reachable[to]) {
        reachable[to] = true;
        stack.push_back(to);
      }
  }
  std::vector<double> exit(total, 0.0);
  double uniform_rate = 0.0;
  for (std::size_t c = 0; c < total; ++c) {
    for (const auto& [to, rate] : rows[c]) exit[c] += rate;
    if (reachable[c]) uniform_rate = std::max(uniform_rate, exit[c]);
  }

  std::vector<std::vector<double>> dists;
  for (Time t : times) {
    if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "oracle times must be >= 0");
    std::vector<double> v(total, 0.0), next(total), acc(total, 0.0);
    v[start] = 1.0;
    const double lt = uniform_rate * t;
    if (lt == 0.0) {
      dists.push_back(v);
      continue;
    }
    double mass = 0.0;
    const auto max_terms = static_cast<std::size_t>(lt + 40.0 * std::sqrt(lt) + 200.0);
    for (std::size_t k = 0; k <= max_terms; ++k) {
      const double w = std::exp(-lt + static_cast<double>(k) * std::log(lt) - std::lgamma(static_cast<double>(k) + 1.0));
      for (std::size_t c = 0; c < total; ++c) acc[c] += w * v[c];
      mass += w;
      if (1.0 - mass <= tol && static_cast<double>(k) >= lt) break;
      for (std::size_t c = 0; c < total; ++c) next[c] = reachable[c] ? v[c] * (1.0 - exit[c] / uniform_rate) : 0.0;
      for (std::size_t c = 0; c < total; ++c)
        if (reachable[c])
          for (const auto& [to, rate] : rows[c]) next[to] += v[c] * rate / uniform_rate;
      v.swap(next);
    }
    dists.push_back(std::move(acc));
  }
  return OracleResult(states, g.size(), times, std::move(dists));
}

}  // namespace ips
