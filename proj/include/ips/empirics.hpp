#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ips/graph.hpp"
#include "ips/rates.hpp"

namespace ips {

/// Real-valued function of one trajectory.
using TrajectoryFunctional = std::function<double(const Trajectory&)>;
/// Real-valued function of a rooted graph with trajectories (evaluated at
/// the given root).
using RootedFunctional = std::function<double(const MarkedGraph&, std::span<const Trajectory>, VertexId)>;

/// 1{x(t) == state}.
TrajectoryFunctional state_indicator(State state, Time t);
/// Lifts a one-trajectory functional to a rooted one (reads the root only).
RootedFunctional at_root(TrajectoryFunctional f);

struct MeasureReport {
  double mean = 0.0;
  std::map<double, double> histogram;  ///< Value -> weight; weights sum to 1.
};

/// Empirical law of f(X_v) over the vertices.
MeasureReport empirical_measure(std::span<const Trajectory> trajectories, const TrajectoryFunctional& f);

struct NeighborhoodReport {
  std::map<BallSignature, double> weights;  ///< Signature -> weight.
  double overflow = 0.0;                    ///< Weight of balls over the canonicalization cap.
};

/// Law of the radius-1 ball around a uniform vertex, each trajectory
/// replaced by its values on the time grid.
NeighborhoodReport neighborhood_empirical(const MarkedGraph& g, std::span<const Trajectory> trajectories,
                                          std::span<const Time> time_grid, const MarkDiscretizer& disc = {});

/// Total variation distance between two neighborhood reports (overflow
/// treated as one extra atom).
double total_variation(const NeighborhoodReport& a, const NeighborhoodReport& b);

/// Random finite graph of size n for a given seed.
using GraphSampler = std::function<MarkedGraph(std::size_t n, std::uint64_t seed)>;
/// Random lazy rooted graph for a given seed.
using RootedSampler = std::function<MarkedGraph(std::uint64_t seed)>;

enum class CovarianceMode {
  /// Per replica, average f1 and f2 over all roots (exact conditional
  /// expectation for independent uniform roots).
  Averaged,
  /// Per replica, one pair of independent uniform roots.
  SampledPair,
};

struct CovarianceRow {
  std::size_t n = 0;
  double covariance = 0.0;
  double stderr_cov = 0.0;
  std::size_t replicas = 0;
};

/// Cov(f1(o1), f2(o2)) for independent uniform roots o1, o2 of one random
/// graph and its dynamics. With `independent_graphs` the two roots come
/// from independent graphs (negative control).
std::vector<CovarianceRow> correlation_decay(const GraphSampler& sampler, const RateModel& model,
                                             const std::vector<std::size_t>& sizes, const RootedFunctional& f1,
                                             const RootedFunctional& f2, Time horizon, std::size_t replicas,
                                             std::uint64_t seed, unsigned threads = 1,
                                             CovarianceMode mode = CovarianceMode::Averaged,
                                             bool independent_graphs = false);

struct HydroRow {
  std::size_t n = 0;
  double mean = 0.0;        ///< Mean over replicas of the vertex average of f.
  double stderr_mean = 0.0;
  std::size_t replicas = 0;
  double difference = 0.0;  ///< |mean - limit mean|.
  double difference_stderr = 0.0;
};

struct HydroReport {
  std::vector<HydroRow> rows;
  double limit_mean = 0.0;
  double limit_stderr = 0.0;
  std::size_t limit_runs = 0;
  double limit_exhausted_fraction = 0.0;
};

/// Vertex-averaged f on finite graphs of each size, against E[f(X_root)]
/// on the limit graph computed by localized simulation.
HydroReport hydro_experiment(const GraphSampler& sampler, const RateModel& model, const std::vector<std::size_t>& sizes,
                             const RootedSampler& limit, const TrajectoryFunctional& f, Time horizon,
                             std::size_t replicas, std::size_t limit_runs, std::size_t budget, std::uint64_t seed,
                             unsigned threads = 1);

/// Exact transient law of a Markov model on a small graph.
class OracleResult {
 public:
  OracleResult(std::vector<State> states, std::size_t vertices, std::vector<Time> times,
               std::vector<std::vector<double>> distributions);

  std::size_t vertices() const { return vertices_; }
  const std::vector<State>& state_space() const { return states_; }
  const std::vector<Time>& times() const { return times_; }
  /// Probability of each product configuration at times()[i].
  const std::vector<double>& distribution(std::size_t i) const { return dists_[i]; }
  /// State of vertex v in configuration `config`.
  State state_of(std::size_t config, VertexId v) const;
  /// P(X_v(times()[i]) = state).
  double marginal(std::size_t i, VertexId v, State state) const;

 private:
  std::vector<State> states_;
  std::size_t vertices_;
  std::vector<Time> times_;
  std::vector<std::vector<double>> dists_;
};

/// Generator of the Markov chain on product configurations (row = from).
/// Throws NotMarkov or StateSpaceTooLarge (more than `max_states`).
std::vector<std::vector<std::pair<std::size_t, double>>> ctmc_generator(const MarkedGraph& g, const RateModel& model,
                                                                        std::size_t max_states = 4096);

/// Distribution at each time by uniformization, truncation error <= tol.
OracleResult ctmc_oracle(const MarkedGraph& g, const RateModel& model, const std::vector<Time>& times,
                         double tol = 1e-12, std::size_t max_states = 4096);

}  // namespace ips
