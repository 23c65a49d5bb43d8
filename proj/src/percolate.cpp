#include "ips/percolate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "ips/localize.hpp"
#include "ips/parallel.hpp"
#include "ips/random.hpp"
#include "ips/stats.hpp"

namespace ips {

bool is_active(const MarkedGraph& g, const RateModel& model, const DrivingNoise& noise, VertexId v, double delta,
               Time horizon) {
  const auto e = noise.first_event_after(g.key(v), ambient_cap(g, model, v, horizon), 0.0);
  return e && e->t <= delta;
}

namespace {

void check_delta(double delta, Time horizon, const DrivingNoise& noise) {
  if (!(delta > 0.0) || delta > horizon || horizon > noise.horizon())
    throw Error(ErrorCode::WindowOutOfRange, "need 0 < delta <= T <= noise horizon");
}

std::size_t find(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

void percolate_finite(const MarkedGraph& g, const RateModel& model, const DrivingNoise& noise, Time horizon,
                      PercolationResult& out) {
  const std::size_t n = g.size();
  std::vector<bool> active(n);
  for (VertexId v = 0; v < n; ++v) {
    active[v] = is_active(g, model, noise, v, out.delta, horizon);
    if (active[v]) out.active.push_back(v);
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (VertexId v : out.active)
    for (VertexId u : g.neighbors(v))
      if (u > v && active[u]) parent[find(parent, u)] = find(parent, v);
  std::vector<std::size_t> index(n, static_cast<std::size_t>(-1));
  for (VertexId v : out.active) {
    const std::size_t r = find(parent, v);
    if (index[r] == static_cast<std::size_t>(-1)) {
      index[r] = out.components.size();
      out.components.emplace_back();
    }
    out.components[index[r]].push_back(v);
  }
  if (const auto root = g.root()) {
    out.root_component_size = active[*root] ? out.components[index[find(parent, *root)]].size() : 0;
  }
}

void percolate_lazy(MarkedGraph& g, const RateModel& model, const DrivingNoise& noise, Time horizon,
                    PercolationResult& out) {
  const VertexId root = g.require_root();
  out.root_component_size = 0;
  if (!is_active(g, model, noise, root, out.delta, horizon)) return;
  std::vector<bool> seen(g.size(), false);
  std::deque<VertexId> queue{root};
  seen[root] = true;
  out.active.push_back(root);
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    try {
      g.expand(v);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BudgetExceeded) throw;
      out.exhausted = true;
      break;
    }
    if (seen.size() < g.size()) seen.resize(g.size(), false);
    for (VertexId u : g.neighbors(v)) {
      if (seen[u]) continue;
      seen[u] = true;
      if (is_active(g, model, noise, u, out.delta, horizon)) {
        out.active.push_back(u);
        queue.push_back(u);
      }
    }
  }
  std::sort(out.active.begin(), out.active.end());
  out.root_component_size = out.active.size();
}

}  // namespace

PercolationResult percolate(MarkedGraph& g, const RateModel& model, const DrivingNoise& noise, double delta,
                            Time horizon) {
  check_delta(delta, horizon, noise);
  PercolationResult out;
  out.delta = delta;
  if (g.is_lazy() && !g.is_complete())
    percolate_lazy(g, model, noise, horizon, out);
  else
    percolate_finite(g, model, noise, horizon, out);
  return out;
}

namespace {

std::uint64_t tree_seed(std::uint64_t sample_seed) { return hash_words({sample_seed, 0x54726565ull}); }

double grandchildren(const OffspringDistribution& rho, const RateModel& model, double delta, Time horizon,
                     std::uint64_t sample_seed) {
  auto tree = gw_tree(rho, tree_seed(sample_seed), static_cast<std::size_t>(-1));
  const DrivingNoise noise(sample_seed, model.jump_spec(), horizon);
  const VertexId root = *tree.root();
  tree.expand(root);
  double z = 0.0;
  for (VertexId u : tree.neighbors(root))
    if (is_active(tree, model, noise, u, delta, horizon)) z += static_cast<double>(tree.pending_children(u));
  return z;
}

Estimate summarize(const std::vector<double>& xs) {
  RunningStats s;
  for (double x : xs) s.add(x);
  return {s.mean(), s.stderr_mean(), s.count()};
}

}  // namespace

Estimate halfperc_grandchild_mean(const OffspringDistribution& rho, const RateModel& model, double delta, Time horizon,
                                  std::size_t samples, std::uint64_t seed, unsigned threads) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be >= 1");
  if (!(delta > 0.0) || delta > horizon) throw Error(ErrorCode::WindowOutOfRange, "need 0 < delta <= T");
  const auto zs = parallel_map<double>(samples, threads, [&](std::size_t i) {
    return grandchildren(rho, model, delta, horizon, replica_seed(seed, i));
  });
  return summarize(zs);
}

namespace {

struct ComponentSample {
  double size = 0.0;
  bool exhausted = false;
};

ScanRow summarize_components(double delta, const std::vector<ComponentSample>& samples) {
  ScanRow row;
  row.delta = delta;
  std::vector<double> sizes;
  std::size_t exhausted = 0;
  RunningStats s;
  for (const auto& c : samples) {
    sizes.push_back(c.size);
    s.add(c.size);
    exhausted += c.exhausted;
  }
  row.mean_root_component = s.mean();
  row.p95_root_component = quantile(sizes, 0.95);
  row.frac_exhausted = samples.empty() ? 0.0 : static_cast<double>(exhausted) / static_cast<double>(samples.size());
  return row;
}

void check_grid(const std::vector<double>& deltas, Time horizon) {
  for (double d : deltas)
    if (!(d > 0.0) || d > horizon) throw Error(ErrorCode::WindowOutOfRange, "delta grid must lie in (0, T]");
}

}  // namespace

std::vector<ScanRow> dissociation_scan(const OffspringDistribution& rho, const RateModel& model,
                                       const std::vector<double>& deltas, Time horizon, std::size_t samples,
                                       std::uint64_t seed, std::size_t budget, unsigned threads) {
  check_grid(deltas, horizon);
  std::vector<ScanRow> rows;
  for (double delta : deltas) {
    const auto comps = parallel_map<ComponentSample>(samples, threads, [&](std::size_t i) {
      const auto s = replica_seed(seed, i);
      auto tree = gw_tree(rho, tree_seed(s), budget);
      const DrivingNoise noise(s, model.jump_spec(), horizon);
      const auto res = percolate(tree, model, noise, delta, horizon);
      return ComponentSample{static_cast<double>(*res.root_component_size), res.exhausted};
    });
    ScanRow row = summarize_components(delta, comps);
    row.grandchildren = halfperc_grandchild_mean(rho, model, delta, horizon, samples, seed, threads);
    row.certified = row.grandchildren->mean + kUpper99 * row.grandchildren->stderr_mean < 1.0;
    rows.push_back(row);
  }
  return rows;
}

std::vector<ScanRow> dissociation_scan(const MarkedGraph& g, const RateModel& model, const std::vector<double>& deltas,
                                       Time horizon, std::size_t samples, std::uint64_t seed, unsigned threads) {
  check_grid(deltas, horizon);
  if (g.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty graph");
  std::size_t max_degree = 0;
  for (VertexId v = 0; v < g.size(); ++v) max_degree = std::max(max_degree, g.degree(v));
  std::vector<ScanRow> rows;
  for (double delta : deltas) {
    const auto comps = parallel_map<ComponentSample>(samples, threads, [&](std::size_t i) {
      const auto s = replica_seed(seed, i);
      MarkedGraph copy = g;
      if (!copy.root()) copy.set_root(static_cast<VertexId>(CounterRng(s, Stream::Sampling).below(g.size())));
      const DrivingNoise noise(s, model.jump_spec(), horizon);
      const auto res = percolate(copy, model, noise, delta, horizon);
      return ComponentSample{static_cast<double>(*res.root_component_size), res.exhausted};
    });
    ScanRow row = summarize_components(delta, comps);
    const double p_max = 1.0 - std::exp(-delta * model.jump_spec().total() * model.bound(max_degree + 1, horizon));
    row.certified = p_max * static_cast<double>(max_degree > 0 ? max_degree - 1 : 0) < 1.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ips
