#pragma once

#include <optional>
#include <vector>

#include "ips/graph.hpp"
#include "ips/noise.hpp"
#include "ips/rates.hpp"
#include "ips/sim.hpp"

namespace ips {

// Non-uniqueness on the tree whose generation-k vertices have 4^k children,
// with the one-way infection model (rate 1 iff the vertex is healthy and a
// neighbor is infected). Chains from the depth-D frontier stand in for
// infinite causal chains: frontier vertices act as a boundary that is
// infected from time 0+.

enum class ChainStrategy {
  /// Greedy descent: generation n must hold an event in (2^-(n+1), 2^-n),
  /// the next vertex is the first child with an event one window lower.
  Dyadic,
  /// Any root-directed path with increasing event times.
  Exhaustive,
};

struct ChainCertificate {
  bool found = false;
  /// Frontier vertex first, root last (empty when not found).
  std::vector<VertexId> path;
  /// One event time per non-initial path vertex, strictly increasing.
  std::vector<Time> times;
  /// Dyadic only: extended[n] is true when generation n (n >= 1) had a child
  /// with an event in its window.
  std::vector<bool> extended;
};

/// Searches for a causal chain from depth `depth` to the root by time T.
/// The tree is expanded as needed.
ChainCertificate detect_chain(MarkedGraph& tree, const DrivingNoise& noise, std::uint32_t depth, Time horizon,
                              ChainStrategy strategy);

struct SolutionPair {
  /// Replayed vertices: a root-to-frontier path (frontier excluded).
  std::vector<VertexId> vertices;
  std::vector<Trajectory> zero;   ///< X = 0, parallel to `vertices`.
  std::vector<Trajectory> tilde;  ///< Chain solution, parallel to `vertices`.
  /// Time the chain solution infects the root, if by T.
  std::optional<Time> root_time;
  Verdict zero_verdict;   ///< Replay of every event of the path vertices.
  Verdict tilde_verdict;
  /// verify_sde on the whole depth-D truncation, when it fits `full_budget`.
  std::optional<Verdict> full_zero_verdict;
  std::optional<Verdict> full_tilde_verdict;
  std::optional<Time> full_root_time;
};

/// Builds X = 0 and the chain solution (a vertex is infected from the first
/// time a chain from the frontier reaches it) and replays both against the
/// noise.
SolutionPair two_solutions(MarkedGraph& tree, const DrivingNoise& noise, std::uint32_t depth, Time horizon,
                           std::size_t full_budget = 100000);

}  // namespace ips
