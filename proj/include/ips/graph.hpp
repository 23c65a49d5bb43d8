#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ips/core.hpp"

namespace ips {

class MarkedGraph;

/// Description of one child produced by a lazy expansion.
struct ChildSpec {
  VertexKey key = 0;
  State state = 0;
  Mark mark;
  Mark edge_mark;
};

/// Source of children for lazily generated trees. Implementations must be
/// pure functions of the parent's key and depth, so the materialized graph
/// does not depend on the order in which vertices are expanded.
class LazyExpander {
 public:
  virtual ~LazyExpander() = default;
  virtual std::vector<ChildSpec> children(VertexKey parent_key, std::uint32_t depth) const = 0;
  /// Number of children, without building them. Used for budget checks.
  virtual std::size_t child_count(VertexKey parent_key, std::uint32_t depth) const = 0;
};

/// Simple undirected graph with vertex marks, edge marks and initial states.
///
/// Vertices are dense indices `0..size()-1`, each carrying a stable label
/// and a noise key. Adjacency lists are kept sorted. A lazy graph owns a
/// LazyExpander and a vertex budget; `expand(v)` materializes the children
/// of `v`. Graphs never shrink.
class MarkedGraph {
 public:
  MarkedGraph() = default;

  VertexId add_vertex(State state, Mark mark = {});
  VertexId add_vertex(State state, Mark mark, VertexLabel label, VertexKey key);

  /// Adds edge {u, v}. Throws InvalidGraph on self-loops or duplicates.
  void add_edge(VertexId u, VertexId v, Mark mark = {});
  /// Adds edge {u, v} unless it is a self-loop or already present.
  bool try_add_edge(VertexId u, VertexId v, Mark mark = {});

  std::size_t size() const { return states_.size(); }
  std::size_t edge_count() const { return edge_marks_.size(); }

  std::span<const VertexId> neighbors(VertexId v) const { return nbrs_[v]; }
  std::size_t degree(VertexId v) const { return nbrs_[v].size(); }
  bool has_edge(VertexId u, VertexId v) const;
  /// Mark of edge {u, v}; throws UnknownVertex if absent.
  const Mark& edge_mark(VertexId u, VertexId v) const;
  /// Mark of the edge between v and its i-th neighbor.
  const Mark& edge_mark_at(VertexId v, std::size_t i) const { return edge_marks_[nbr_edges_[v][i]]; }

  State state(VertexId v) const { return states_[v]; }
  void set_state(VertexId v, State s) { states_[v] = s; }
  const Mark& vertex_mark(VertexId v) const { return marks_[v]; }
  void set_vertex_mark(VertexId v, Mark m) { marks_[v] = std::move(m); }
  VertexLabel label(VertexId v) const { return labels_[v]; }
  VertexKey key(VertexId v) const { return keys_[v]; }
  std::uint32_t depth(VertexId v) const { return depths_[v]; }

  std::optional<VertexId> root() const { return root_; }
  void set_root(std::optional<VertexId> r);
  /// Root or NoRoot error.
  VertexId require_root() const;

  void check_vertex(VertexId v) const;
  /// Index of the vertex with the given label, if present (linear scan).
  std::optional<VertexId> find_label(VertexLabel label) const;

  // Lazy expansion.
  bool is_lazy() const { return expander_ != nullptr; }
  bool is_expanded(VertexId v) const { return expanded_[v]; }
  /// True when every vertex is expanded (the graph is finite and complete).
  bool is_complete() const;
  void make_lazy(std::shared_ptr<const LazyExpander> expander, std::size_t budget);
  std::size_t budget() const { return budget_; }
  void set_budget(std::size_t budget) { budget_ = budget; }
  /// Materializes the children of v; no-op if already expanded. Throws
  /// BudgetExceeded (leaving the graph unchanged) if the budget would be
  /// exceeded.
  void expand(VertexId v);
  /// Children count that `expand(v)` would add (0 when already expanded).
  std::size_t pending_children(VertexId v) const;

  /// Throws InvalidGraph if an invariant is violated.
  void validate() const;

 private:
  std::vector<std::vector<VertexId>> nbrs_;
  std::vector<std::vector<std::uint32_t>> nbr_edges_;
  std::vector<Mark> edge_marks_;
  std::vector<State> states_;
  std::vector<Mark> marks_;
  std::vector<VertexLabel> labels_;
  std::vector<VertexKey> keys_;
  std::vector<std::uint32_t> depths_;
  std::vector<bool> expanded_;
  std::optional<VertexId> root_;
  std::shared_ptr<const LazyExpander> expander_;
  std::size_t budget_ = static_cast<std::size_t>(-1);
};

/// Sorted vertex set.
using VertexSet = std::vector<VertexId>;

/// Induced subgraph on `vertices`, preserving labels, keys, marks and states.
/// The root is kept if it belongs to the set; `root` overrides it. Vertices
/// keep their relative order.
MarkedGraph induced_subgraph(const MarkedGraph& g, std::span<const VertexId> vertices,
                             std::optional<VertexId> root = std::nullopt);

/// Distances from `source`, expanding lazily up to distance `radius`.
/// Returns vertices within `radius` in BFS order with their distances.
struct BallMembers {
  std::vector<VertexId> vertices;
  std::vector<std::uint32_t> distance;
};
BallMembers ball_members(MarkedGraph& g, VertexId source, std::uint32_t radius);
BallMembers ball_members(const MarkedGraph& g, VertexId source, std::uint32_t radius);

/// B_m(g): induced subgraph on vertices within distance m of the root,
/// rooted at the image of the root. Lazy graphs are expanded as needed.
MarkedGraph truncate_ball(MarkedGraph& g, std::uint32_t radius);
MarkedGraph truncate_ball(const MarkedGraph& g, std::uint32_t radius);
/// Ball of radius m around an arbitrary center, rooted at that center.
MarkedGraph ball_around(const MarkedGraph& g, VertexId center, std::uint32_t radius);

/// Connected component of v, rooted at v. Requires a complete graph.
MarkedGraph connected_component(const MarkedGraph& g, VertexId v);

/// U together with all neighbors of U (sorted).
VertexSet closure(const MarkedGraph& g, std::span<const VertexId> vertices);

// Canonical signatures of small rooted marked graphs.

struct MarkDiscretizer {
  double grid = 1e-6;
  std::size_t vertex_cap = 64;
};

struct BallSignature {
  std::string bytes;
  friend bool operator==(const BallSignature&, const BallSignature&) = default;
  friend auto operator<=>(const BallSignature&, const BallSignature&) = default;
  std::string hex() const;
};

/// Canonical encoding of a finite rooted marked graph. Two graphs receive
/// equal signatures iff a root-, mark- and state-preserving isomorphism
/// exists after marks are rounded to `disc.grid`. `extra_tokens`, if given,
/// attaches an integer vector to each vertex (e.g. a discretized trajectory)
/// that isomorphisms must also preserve. Throws TooLarge above the cap.
BallSignature canonical_signature(const MarkedGraph& ball, const MarkDiscretizer& disc = {},
                                  std::span<const std::vector<std::int64_t>> extra_tokens = {});

}  // namespace ips
