#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ips/graph.hpp"
#include "ips/noise.hpp"
#include "ips/rates.hpp"

namespace ips {

struct SimulationResult {
  std::vector<Trajectory> trajectories;  ///< Indexed by vertex id.
  std::size_t events = 0;                ///< Candidate events examined.
  std::size_t accepted = 0;
  std::size_t ties = 0;                  ///< Cross-vertex events sharing a timestamp.
};

/// Level caps bound(|cl(v)|, T) from the closure sizes in g.
std::vector<double> level_caps(const MarkedGraph& g, const RateModel& model, Time horizon);

/// Exact thinning construction on a finite graph: every event (t, r, j) of
/// vertex v with r below its level cap is examined in time order and the
/// jump is taken iff r <= rate(cl(v) at t-). `caps` overrides the per-vertex
/// level caps (used when closures in an ambient graph are larger). Throws
/// NonFinite on unexpanded lazy graphs and StateEscape if a jump leaves the
/// state space.
SimulationResult simulate_finite(const MarkedGraph& g, const RateModel& model, const DrivingNoise& noise, Time horizon,
                                 std::span<const double> caps = {});

/// Same construction from explicit per-vertex event lists (sorted by time,
/// already thinned to the caps), e.g. lists cached by an earlier pass.
SimulationResult simulate_events(const MarkedGraph& g, const RateModel& model,
                                 std::span<const std::vector<NoiseEvent>> events, Time horizon,
                                 std::span<const double> caps);

enum class ViolationKind {
  MissedJump,        ///< Replay accepts an event that has no matching jump.
  UnmatchedJump,     ///< A jump with no event of the same time and type.
  RejectedJump,      ///< A jump at an event the replay rejects.
  InitialMismatch,   ///< Initial state differs from the graph's.
  StateEscape,       ///< Trajectory leaves the state space.
  NotIncreasing,     ///< Jump times not strictly increasing or outside (0, T].
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  VertexId vertex;
  Time t;
  State jump;
};

struct Verdict {
  std::vector<Violation> violations;
  std::size_t events_checked = 0;
  bool ok() const { return violations.empty(); }
};

/// Replays every event of every vertex against the given trajectories and
/// reports where they disagree with the thinning rule.
Verdict verify_sde(const MarkedGraph& g, const RateModel& model, const DrivingNoise& noise,
                   std::span<const Trajectory> trajectories, Time horizon, std::span<const double> caps = {});

/// True iff no two distinct vertices share a jump time.
bool is_proper(std::span<const Trajectory> trajectories);

}  // namespace ips
