#pragma once

#include <span>
#include <vector>

#include "ips/graph.hpp"
#include "ips/noise.hpp"
#include "ips/rates.hpp"

namespace ips {

struct InfluenceStep {
  Time tau;
  VertexId vertex;
  std::size_t set_size;  ///< |U_k| after adding the closure of `vertex`.
};

/// Result of the backward recursion: tau_k is the latest event strictly
/// below tau_{k-1} among U_{k-1}, v_k its vertex, U_k = U_{k-1} + cl(v_k).
struct InfluenceSet {
  VertexSet vertices;              ///< Sorted U_K (ids of the ambient graph).
  std::vector<double> caps;        ///< Level cap of each vertex, ambient closure.
  /// Events of each vertex at its cap strictly below its entry time (up to
  /// and including T for targets).
  std::vector<std::vector<NoiseEvent>> events;
  std::vector<InfluenceStep> trace;
  bool exhausted = false;

  std::size_t event_count() const { return trace.size(); }
  bool contains(VertexId v) const;
};

/// Level cap bound(|cl(v)|, T) with |cl(v)| taken in the full (possibly
/// lazy) graph, without materializing v's children.
double ambient_cap(const MarkedGraph& g, const RateModel& model, VertexId v, Time horizon);

/// Runs the recursion from the target set O. Lazy vertices are expanded as
/// their events are processed; exceeding the graph budget or `budget`
/// vertices in U sets `exhausted` instead of throwing.
InfluenceSet influence_set(MarkedGraph& g, const DrivingNoise& noise, const RateModel& model,
                           std::span<const VertexId> targets, Time horizon, std::size_t budget);

class ExhaustedError : public Error {
 public:
  explicit ExhaustedError(InfluenceSet partial)
      : Error(ErrorCode::Exhausted, "influence set exceeded its budget at " +
                                        std::to_string(partial.vertices.size()) + " vertices"),
        partial_(std::move(partial)) {}
  const InfluenceSet& partial() const { return partial_; }

 private:
  InfluenceSet partial_;
};

struct LocalizedResult {
  std::vector<Trajectory> trajectories;  ///< One per target, in target order.
  InfluenceSet influence;
};

/// Exact trajectories of the targets on a (possibly infinite) graph: the
/// dynamics are simulated on the subgraph induced by the influence set, with
/// level caps from the ambient closures. Throws ExhaustedError.
LocalizedResult localized_marginal(MarkedGraph& g, const RateModel& model, const DrivingNoise& noise,
                                   std::span<const VertexId> targets, Time horizon, std::size_t budget);

struct LocalizationCheck {
  bool contained = false;  ///< Influence set lies inside the ball.
  bool equal = false;      ///< Marginals on the targets coincide.
  bool ok() const { return !contained || equal; }
};

/// Compares the target marginals of the simulation on B_radius(g) (driven by
/// `noise`) with the simulation on all of g (driven by `full_noise`, the
/// same noise unless a negative control is wanted).
LocalizationCheck check_localization(const MarkedGraph& g, const RateModel& model, const DrivingNoise& noise,
                                     std::span<const VertexId> targets, std::uint32_t radius, Time horizon,
                                     const DrivingNoise* full_noise = nullptr);

}  // namespace ips
