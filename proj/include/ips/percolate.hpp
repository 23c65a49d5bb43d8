#pragma once

#include <optional>
#include <vector>

#include "ips/gen.hpp"
#include "ips/graph.hpp"
#include "ips/noise.hpp"
#include "ips/rates.hpp"

namespace ips {

struct PercolationResult {
  double delta = 0.0;
  VertexSet active;
  /// Components of the active subgraph (finite graphs only), each sorted,
  /// ordered by smallest vertex.
  std::vector<VertexSet> components;
  /// Size of the root's component; 0 if the root is inactive, empty when the
  /// graph has no root.
  std::optional<std::size_t> root_component_size;
  bool exhausted = false;
};

/// Whether v has an event in (0, delta] below its ambient level cap.
bool is_active(const MarkedGraph& g, const RateModel& model, const DrivingNoise& noise, VertexId v, double delta,
               Time horizon);

/// Site percolation keeping the vertices with an event in (0, delta]. Finite
/// graphs get all components; lazy graphs only the root component, explored
/// until the graph budget runs out.
PercolationResult percolate(MarkedGraph& g, const RateModel& model, const DrivingNoise& noise, double delta,
                            Time horizon);

struct Estimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo mean of Z = sum over children u of the root of
/// R_u * (# children of u) on GW(rho) trees, R_u the activity of u.
Estimate halfperc_grandchild_mean(const OffspringDistribution& rho, const RateModel& model, double delta, Time horizon,
                                  std::size_t samples, std::uint64_t seed, unsigned threads = 1);

struct ScanRow {
  double delta = 0.0;
  double mean_root_component = 0.0;
  double p95_root_component = 0.0;
  double frac_exhausted = 0.0;
  std::optional<Estimate> grandchildren;  ///< Trees only.
  bool certified = false;
};

/// One-sided 99% normal quantile used for the subcriticality certificate.
inline constexpr double kUpper99 = 2.3263478740408408;

/// Scan over GW(rho) trees: root-component statistics on lazy trees with
/// the given vertex budget, and E[Z] with its certificate (upper 99% bound
/// below 1).
std::vector<ScanRow> dissociation_scan(const OffspringDistribution& rho, const RateModel& model,
                                       const std::vector<double>& deltas, Time horizon, std::size_t samples,
                                       std::uint64_t seed, std::size_t budget, unsigned threads = 1);

/// Scan over a fixed finite graph with fresh noise per sample. The component
/// of the root (or of a uniformly drawn vertex when unrooted) is measured. A
/// delta is certified when p_max * (d_max - 1) < 1, p_max the largest
/// activation probability, which bounds component exploration by a
/// subcritical branching process.
std::vector<ScanRow> dissociation_scan(const MarkedGraph& g, const RateModel& model, const std::vector<double>& deltas,
                                       Time horizon, std::size_t samples, std::uint64_t seed, unsigned threads = 1);

}  // namespace ips
