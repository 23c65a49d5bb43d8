#include "ips/graph.hpp"

#include <algorithm>
#include <deque>

namespace ips {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ZeroMean: return "ZeroMean";
    case ErrorCode::OddDegreeSum: return "OddDegreeSum";
    case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::MarkOutOfRange: return "MarkOutOfRange";
    case ErrorCode::UnboundedHazard: return "UnboundedHazard";
    case ErrorCode::StateEscape: return "StateEscape";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotMarkov: return "NotMarkov";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::Exhausted: return "Exhausted";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
  }
  return "Unknown";
}

VertexId MarkedGraph::add_vertex(State state, Mark mark) {
  const auto id = static_cast<VertexLabel>(size());
  return add_vertex(state, std::move(mark), id, id);
}

VertexId MarkedGraph::add_vertex(State state, Mark mark, VertexLabel label, VertexKey key) {
  if (size() >= budget_) throw Error(ErrorCode::BudgetExceeded, "vertex budget " + std::to_string(budget_));
  const auto id = static_cast<VertexId>(size());
  nbrs_.emplace_back();
  nbr_edges_.emplace_back();
  states_.push_back(state);
  marks_.push_back(std::move(mark));
  labels_.push_back(label);
  keys_.push_back(key);
  depths_.push_back(0);
  expanded_.push_back(!is_lazy());
  return id;
}

void MarkedGraph::check_vertex(VertexId v) const {
  if (v >= size()) throw Error(ErrorCode::UnknownVertex, "vertex " + std::to_string(v));
}

bool MarkedGraph::try_add_edge(VertexId u, VertexId v, Mark mark) {
  check_vertex(u);
  check_vertex(v);
  if (u == v || has_edge(u, v)) return false;
  const auto e = static_cast<std::uint32_t>(edge_marks_.size());
  edge_marks_.push_back(std::move(mark));
  auto insert = [&](VertexId a, VertexId b) {
    auto& list = nbrs_[a];
    const auto pos = std::lower_bound(list.begin(), list.end(), b) - list.begin();
    list.insert(list.begin() + pos, b);
    nbr_edges_[a].insert(nbr_edges_[a].begin() + pos, e);
  };
  insert(u, v);
  insert(v, u);
  return true;
}

void MarkedGraph::add_edge(VertexId u, VertexId v, Mark mark) {
  check_vertex(u);
  check_vertex(v);
  if (u == v) throw Error(ErrorCode::InvalidGraph, "self-loop at " + std::to_string(u));
  if (!try_add_edge(u, v, std::move(mark)))
    throw Error(ErrorCode::InvalidGraph, "duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
}

bool MarkedGraph::has_edge(VertexId u, VertexId v) const {
  const auto& list = nbrs_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

const Mark& MarkedGraph::edge_mark(VertexId u, VertexId v) const {
  const auto& list = nbrs_[u];
  const auto it = std::lower_bound(list.begin(), list.end(), v);
  if (it == list.end() || *it != v)
    throw Error(ErrorCode::UnknownVertex, "no edge " + std::to_string(u) + "-" + std::to_string(v));
  return edge_marks_[nbr_edges_[u][static_cast<std::size_t>(it - list.begin())]];
}

void MarkedGraph::set_root(std::optional<VertexId> r) {
  if (r) check_vertex(*r);
  root_ = r;
}

VertexId MarkedGraph::require_root() const {
  if (!root_) throw Error(ErrorCode::NoRoot, "graph has no root");
  return *root_;
}

std::optional<VertexId> MarkedGraph::find_label(VertexLabel label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<VertexId>(it - labels_.begin());
}

bool MarkedGraph::is_complete() const {
  return std::all_of(expanded_.begin(), expanded_.end(), [](bool b) { return b; });
}

void MarkedGraph::make_lazy(std::shared_ptr<const LazyExpander> expander, std::size_t budget) {
  expander_ = std::move(expander);
  budget_ = budget;
  if (size() > budget_) throw Error(ErrorCode::BudgetExceeded, "graph already exceeds budget");
}

std::size_t MarkedGraph::pending_children(VertexId v) const {
  check_vertex(v);
  if (expanded_[v]) return 0;
  return expander_->child_count(keys_[v], depths_[v]);
}

void MarkedGraph::expand(VertexId v) {
  check_vertex(v);
  if (expanded_[v]) return;
  const std::size_t count = expander_->child_count(keys_[v], depths_[v]);
  if (size() + count > budget_)
    throw Error(ErrorCode::BudgetExceeded, "expanding vertex " + std::to_string(v) + " needs " +
                                               std::to_string(size() + count) + " > budget " +
                                               std::to_string(budget_));
  auto specs = expander_->children(keys_[v], depths_[v]);
  const std::uint32_t child_depth = depths_[v] + 1;
  nbrs_[v].reserve(nbrs_[v].size() + count);
  nbr_edges_[v].reserve(nbr_edges_[v].size() + count);
  for (auto& spec : specs) {
    const auto c = add_vertex(spec.state, std::move(spec.mark), size(), spec.key);
    depths_[c] = child_depth;
    // Children carry larger ids than every existing vertex, so appending keeps lists sorted.
    const auto e = static_cast<std::uint32_t>(edge_marks_.size());
    edge_marks_.push_back(std::move(spec.edge_mark));
    nbrs_[v].push_back(c);
    nbr_edges_[v].push_back(e);
    nbrs_[c].push_back(v);
    nbr_edges_[c].push_back(e);
  }
  expanded_[v] = true;
}

void MarkedGraph::validate() const {
  for (VertexId v = 0; v < size(); ++v) {
    const auto& list = nbrs_[v];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const VertexId u = list[i];
      if (u >= size()) throw Error(ErrorCode::InvalidGraph, "dangling neighbor");
      if (u == v) throw Error(ErrorCode::InvalidGraph, "self-loop at " + std::to_string(v));
      if (i > 0 && list[i - 1] >= u) throw Error(ErrorCode::InvalidGraph, "unsorted or duplicate adjacency");
      if (!has_edge(u, v)) throw Error(ErrorCode::InvalidGraph, "asymmetric adjacency");
    }
  }
  if (root_ && *root_ >= size()) throw Error(ErrorCode::InvalidGraph, "root out of range");
}

MarkedGraph induced_subgraph(const MarkedGraph& g, std::span<const VertexId> vertices,
                             std::optional<VertexId> root) {
  std::vector<VertexId> order(vertices.begin(), vertices.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  MarkedGraph h;
  std::vector<VertexId> local(g.size(), kNoVertex);
  for (VertexId v : order) {
    g.check_vertex(v);
    local[v] = h.add_vertex(g.state(v), g.vertex_mark(v), g.label(v), g.key(v));
  }
  for (VertexId v : order) {
    const auto nb = g.neighbors(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const VertexId u = nb[i];
      if (u > v && local[u] != kNoVertex) h.add_edge(local[v], local[u], g.edge_mark_at(v, i));
    }
  }
  const auto r = root ? root : g.root();
  if (r && local[*r] != kNoVertex) h.set_root(local[*r]);
  return h;
}

namespace {

template <class Graph, class Expand>
BallMembers bfs_ball(Graph& g, VertexId source, std::uint32_t radius, Expand&& expand) {
  g.check_vertex(source);
  BallMembers out;
  std::vector<std::uint32_t> dist(g.size(), static_cast<std::uint32_t>(-1));
  std::deque<VertexId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    out.vertices.push_back(v);
    out.distance.push_back(dist[v]);
    if (dist[v] == radius) continue;
    expand(v);
    if (dist.size() < g.size()) dist.resize(g.size(), static_cast<std::uint32_t>(-1));
    for (VertexId u : g.neighbors(v)) {
      if (dist[u] == static_cast<std::uint32_t>(-1)) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return out;
}

}  // namespace

BallMembers ball_members(MarkedGraph& g, VertexId source, std::uint32_t radius) {
  return bfs_ball(g, source, radius, [&](VertexId v) { g.expand(v); });
}

BallMembers ball_members(const MarkedGraph& g, VertexId source, std::uint32_t radius) {
  return bfs_ball(g, source, radius, [&](VertexId v) {
    if (!g.is_expanded(v))
      throw Error(ErrorCode::NonFinite, "vertex " + std::to_string(v) + " is not expanded");
  });
}

MarkedGraph truncate_ball(MarkedGraph& g, std::uint32_t radius) {
  const VertexId r = g.require_root();
  const auto members = ball_members(g, r, radius);
  return induced_subgraph(g, members.vertices, r);
}

MarkedGraph truncate_ball(const MarkedGraph& g, std::uint32_t radius) {
  const VertexId r = g.require_root();
  const auto members = ball_members(g, r, radius);
  return induced_subgraph(g, members.vertices, r);
}

MarkedGraph ball_around(const MarkedGraph& g, VertexId center, std::uint32_t radius) {
  const auto members = ball_members(g, center, radius);
  return induced_subgraph(g, members.vertices, center);
}

MarkedGraph connected_component(const MarkedGraph& g, VertexId v) {
  g.check_vertex(v);
  if (!g.is_complete()) throw Error(ErrorCode::NonFinite, "connected_component needs a finite graph");
  const auto members = ball_members(g, v, static_cast<std::uint32_t>(-1));
  return induced_subgraph(g, members.vertices, v);
}

VertexSet closure(const MarkedGraph& g, std::span<const VertexId> vertices) {
  VertexSet out;
  for (VertexId v : vertices) {
    g.check_vertex(v);
    out.push_back(v);
    for (VertexId u : g.neighbors(v)) out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace ips
