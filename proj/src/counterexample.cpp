#include "ips/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "ips/gen.hpp"

namespace ips {

namespace {

struct Chain {
  std::vector<VertexId> path;  // frontier first
  std::vector<Time> times;
};

class ChainSearch {
 public:
  ChainSearch(MarkedGraph& g, const DrivingNoise& noise, std::uint32_t depth, Time horizon)
      : g_(g), noise_(noise), depth_(depth), horizon_(horizon) {
    if (depth < 1) throw Error(ErrorCode::InvalidArgument, "depth must be >= 1");
    if (!(horizon > 0.0) || horizon > noise.horizon())
      throw Error(ErrorCode::WindowOutOfRange, "horizon exceeds the noise horizon");
  }

  bool is_frontier(VertexId v) const { return g_.depth(v) >= depth_; }

  const std::vector<Time>& events(VertexId v) {
    if (cache_.size() <= v) {
      cache_.resize(g_.size());
      cached_.resize(g_.size(), false);
    }
    if (!cached_[v]) {
      for (const auto& e : noise_.events(g_.key(v), 1.0, 0.0, horizon_)) cache_[v].push_back(e.t);
      cached_[v] = true;
    }
    return cache_[v];
  }

  std::vector<VertexId> children(VertexId v) {
    g_.expand(v);
    std::vector<VertexId> out;
    for (VertexId u : g_.neighbors(v))
      if (g_.depth(u) == g_.depth(v) + 1) out.push_back(u);
    return out;
  }

  bool has_children(VertexId v) const {
    if (!g_.is_expanded(v)) return g_.pending_children(v) > 0;
    return g_.degree(v) > (g_.depth(v) == 0 ? 0u : 1u);
  }

  /// Latest event of v strictly before s.
  std::optional<Time> last_before(VertexId v, Time s) {
    const auto& ev = events(v);
    const auto it = std::lower_bound(ev.begin(), ev.end(), s);
    if (it == ev.begin()) return std::nullopt;
    return *std::prev(it);
  }

  /// Whether a chain from the frontier through v's subtree reaches v strictly
  /// before s. Frontier vertices count as reached at time 0.
  bool reaches(VertexId v, Time s) {
    if (is_frontier(v)) return s > 0.0;
    const auto e = last_before(v, s);
    if (!e) return false;
    if (g_.depth(v) + 1 == depth_) return has_children(v);
    for (VertexId c : children(v))
      if (reaches(c, *e)) return true;
    return false;
  }

  /// A chain witnessing reaches(v, s).
  std::optional<Chain> chain_before(VertexId v, Time s) {
    if (is_frontier(v)) return s > 0.0 ? std::optional<Chain>(Chain{{v}, {}}) : std::nullopt;
    const auto e = last_before(v, s);
    if (!e) return std::nullopt;
    for (VertexId c : children(v))
      if (reaches(c, *e)) {
        auto chain = chain_before(c, *e);
        chain->path.push_back(v);
        chain->times.push_back(*e);
        return chain;
      }
    return std::nullopt;
  }

  /// First time v is reached: its first event after either `floor` (the
  /// parent's reach time) or the reach time of one of its children.
  std::optional<Time> first_reach(VertexId v, std::optional<Time> floor) {
    if (is_frontier(v)) return 0.0;
    for (Time e : events(v)) {
      if (floor && e > *floor) return e;
      if (g_.depth(v) + 1 == depth_) {
        if (has_children(v)) return e;
        continue;
      }
      for (VertexId c : children(v))
        if (reaches(c, e)) return e;
    }
    return std::nullopt;
  }

  MarkedGraph& graph() { return g_; }
  std::uint32_t depth() const { return depth_; }
  Time horizon() const { return horizon_; }

 private:
  MarkedGraph& g_;
  const DrivingNoise& noise_;
  std::uint32_t depth_;
  Time horizon_;
  std::vector<std::vector<Time>> cache_;
  std::vector<bool> cached_;
};

std::optional<Time> first_in(const std::vector<Time>& ev, double lo, double hi) {
  const auto it = std::upper_bound(ev.begin(), ev.end(), lo);
  if (it != ev.end() && *it < hi) return *it;
  return std::nullopt;
}

ChainCertificate dyadic(ChainSearch& search) {
  if (search.horizon() < 1.0) throw Error(ErrorCode::InvalidArgument, "dyadic windows need T >= 1");
  MarkedGraph& g = search.graph();
  const std::uint32_t depth = search.depth();
  ChainCertificate cert;
  cert.extended.assign(depth, false);
  std::vector<VertexId> path{g.require_root()};
  std::vector<std::optional<Time>> hits;
  for (std::uint32_t n = 0; n < depth; ++n) {
    const VertexId v = path.back();
    hits.push_back(first_in(search.events(v), std::ldexp(1.0, -static_cast<int>(n) - 1), std::ldexp(1.0, -static_cast<int>(n))));
    const auto kids = search.children(v);
    if (kids.empty()) return cert;
    VertexId next = kids.front();
    for (VertexId c : kids)
      if (first_in(search.events(c), std::ldexp(1.0, -static_cast<int>(n) - 2), std::ldexp(1.0, -static_cast<int>(n) - 1))) {
        next = c;
        cert.extended[n] = true;
        break;
      }
    path.push_back(next);
  }
  if (!std::all_of(hits.begin(), hits.end(), [](const auto& h) { return h.has_value(); })) return cert;
  cert.found = true;
  cert.path.assign(path.rbegin(), path.rend());
  for (auto it = hits.rbegin(); it != hits.rend(); ++it) cert.times.push_back(**it);
  return cert;
}

ChainCertificate exhaustive(ChainSearch& search) {
  const VertexId root = search.graph().require_root();
  ChainCertificate cert;
  const auto when = search.first_reach(root, std::nullopt);
  if (!when) return cert;
  // first_reach found a child reached before `when`; rebuild that chain.
  for (VertexId c : search.children(root)) {
    if (!search.reaches(c, *when)) continue;
    auto chain = search.chain_before(c, *when);
    cert.found = true;
    cert.path = std::move(chain->path);
    cert.times = std::move(chain->times);
    cert.path.push_back(root);
    cert.times.push_back(*when);
    break;
  }
  return cert;
}

Trajectory infected_from(std::optional<Time> t) {
  Trajectory tr{0, {}};
  if (t) tr.jumps.push_back({*t, 1});
  return tr;
}

/// Replays every event of `v` against trajectories given on cl(v).
void replay_vertex(const MarkedGraph& tree, VertexId v, const std::vector<VertexId>& ball,
                   const std::vector<Trajectory>& trajectories, const RateModel& model, const DrivingNoise& noise,
                   Time horizon, Verdict& verdict) {
  const MarkedGraph local = induced_subgraph(tree, ball, v);
  const VertexId lv = *local.root();
  BallViewBuilder builder(local);
  const auto& jumps = trajectories[lv].jumps;
  std::vector<bool> matched(jumps.size(), false);
  for (const auto& e : noise.events(tree.key(v), model.bound(ball.size(), horizon), 0.0, horizon)) {
    ++verdict.events_checked;
    const bool accept = e.r <= model.rate(builder.build(lv, trajectories, e.t), e.j, e.t);
    const auto it = std::find_if(jumps.begin(), jumps.end(), [&](const Jump& j) { return j.t == e.t && j.j == e.j; });
    const bool has_jump = it != jumps.end();
    if (has_jump) matched[static_cast<std::size_t>(it - jumps.begin())] = true;
    if (accept && !has_jump) verdict.violations.push_back({ViolationKind::MissedJump, v, e.t, e.j});
    if (!accept && has_jump) verdict.violations.push_back({ViolationKind::RejectedJump, v, e.t, e.j});
  }
  for (std::size_t i = 0; i < jumps.size(); ++i)
    if (!matched[i]) verdict.violations.push_back({ViolationKind::UnmatchedJump, v, jumps[i].t, jumps[i].j});
}

/// Earliest reach times on a finite truncation by a Dijkstra sweep from the
/// frontier.
std::vector<std::optional<Time>> reach_times(const MarkedGraph& b, const DrivingNoise& noise, std::uint32_t depth,
                                             Time horizon, const std::vector<std::uint32_t>& depths) {
  std::vector<std::optional<Time>> rho(b.size());
  using Item = std::pair<Time, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (VertexId v = 0; v < b.size(); ++v)
    if (depths[v] >= depth) {
      rho[v] = 0.0;
      queue.push({0.0, v});
    }
  std::vector<bool> done(b.size(), false);
  while (!queue.empty()) {
    const auto [t, x] = queue.top();
    queue.pop();
    if (done[x]) continue;
    done[x] = true;
    for (VertexId u : b.neighbors(x)) {
      if (done[u] || depths[u] >= depth) continue;
      const auto e = noise.first_event_after(b.key(u), 1.0, t);
      if (!e || e->t > horizon) continue;
      if (!rho[u] || e->t < *rho[u]) {
        rho[u] = e->t;
        queue.push({e->t, u});
      }
    }
  }
  return rho;
}

}  // namespace

ChainCertificate detect_chain(MarkedGraph& tree, const DrivingNoise& noise, std::uint32_t depth, Time horizon,
                              ChainStrategy strategy) {
  ChainSearch search(tree, noise, depth, horizon);
  return strategy == ChainStrategy::Dyadic ? dyadic(search) : exhaustive(search);
}

SolutionPair two_solutions(MarkedGraph& tree, const DrivingNoise& noise, std::uint32_t depth, Time horizon,
                           std::size_t full_budget) {
  const OneWayInfectionModel model;
  for (VertexId v = 0; v < tree.size(); ++v)
    if (tree.state(v) != 0) throw Error(ErrorCode::InvalidArgument, "initial states must all be 0");
  ChainSearch search(tree, noise, depth, horizon);
  const auto cert = exhaustive(search);
  SolutionPair out;

  // Path to replay: the certificate's, else the first-child path.
  std::vector<VertexId> path;
  if (cert.found) {
    path.assign(cert.path.rbegin(), cert.path.rend());
    path.pop_back();
  } else {
    path.push_back(tree.require_root());
    while (path.size() < depth) {
      const auto kids = search.children(path.back());
      if (kids.empty()) break;
      path.push_back(kids.front());
    }
  }

  std::optional<Time> parent_rho;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const VertexId v = path[k];
    const auto rho = search.first_reach(v, parent_rho);
    if (k == 0) out.root_time = rho;
    std::vector<VertexId> ball{v};
    if (k > 0) ball.push_back(path[k - 1]);
    const auto kids = search.children(v);
    ball.insert(ball.end(), kids.begin(), kids.end());
    std::sort(ball.begin(), ball.end());

    // Trajectories indexed like the local ball (sorted ids).
    std::vector<Trajectory> tilde(ball.size()), zero(ball.size(), Trajectory{0, {}});
    for (std::size_t i = 0; i < ball.size(); ++i) {
      const VertexId u = ball[i];
      if (u == v)
        tilde[i] = infected_from(rho);
      else if (k > 0 && u == path[k - 1])
        tilde[i] = infected_from(parent_rho);
      else if (search.is_frontier(u))
        tilde[i] = Trajectory{1, {}};
      else
        tilde[i] = infected_from(search.first_reach(u, rho));
    }
    replay_vertex(tree, v, ball, tilde, model, noise, horizon, out.tilde_verdict);
    replay_vertex(tree, v, ball, zero, model, noise, horizon, out.zero_verdict);
    out.vertices.push_back(v);
    out.zero.push_back(Trajectory{0, {}});
    out.tilde.push_back(infected_from(rho));
    parent_rho = rho;
  }

  if (counterexample_tree_size(depth) <= full_budget) {
    const auto members = ball_members(tree, tree.require_root(), depth).vertices;
    MarkedGraph b = induced_subgraph(tree, members, tree.require_root());
    std::vector<std::uint32_t> depths(b.size());
    std::vector<VertexId> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    for (VertexId i = 0; i < b.size(); ++i) depths[i] = tree.depth(sorted[i]);
    const auto rho = reach_times(b, noise, depth, horizon, depths);
    std::vector<Trajectory> zero(b.size(), Trajectory{0, {}}), tilde(b.size());
    for (VertexId i = 0; i < b.size(); ++i) tilde[i] = depths[i] >= depth ? Trajectory{1, {}} : infected_from(rho[i]);
    out.full_zero_verdict = verify_sde(b, model, noise, zero, horizon);
    // The frontier is a boundary infected from the start.
    MarkedGraph boundary = b;
    for (VertexId i = 0; i < b.size(); ++i)
      if (depths[i] >= depth) boundary.set_state(i, 1);
    out.full_tilde_verdict = verify_sde(boundary, model, noise, tilde, horizon);
    out.full_root_time = rho[*b.root()];
  }
  return out;
}

}  // namespace ips
