#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "ips/graph.hpp"
#include "ips/random.hpp"

namespace ips {

/// Probability mass function on {0, 1, 2, ...}.
class OffspringDistribution {
 public:
  /// pmf[k] = P(K = k). Must be nonnegative and sum to 1 within 1e-12.
  explicit OffspringDistribution(std::vector<double> pmf);

  static OffspringDistribution delta(std::size_t k);
  /// Poisson(c) truncated at the (1 - tail) quantile and renormalized.
  static OffspringDistribution poisson(double c, double tail = 1e-12);
  /// P(K = k) = (1 - p)^k p, truncated like poisson().
  static OffspringDistribution geometric(double p, double tail = 1e-12);

  const std::vector<double>& pmf() const { return pmf_; }
  double mean() const { return mean_; }
  double probability(std::size_t k) const { return k < pmf_.size() ? pmf_[k] : 0.0; }
  std::size_t max_value() const { return pmf_.size() - 1; }

  /// Inverse-CDF sample from a uniform in (0, 1).
  std::size_t sample(double u) const;

  /// Size-biased law: P(K = k) = (k + 1) pmf[k + 1] / mean. ZeroMean if mean is 0.
  OffspringDistribution size_biased() const;

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
};

/// Per-vertex decoration of generated vertices, keyed by the vertex key.
struct VertexInit {
  std::function<State(VertexKey)> state;
  std::function<Mark(VertexKey)> mark;
  std::function<Mark(VertexKey child_key)> edge_mark;

  ChildSpec make(VertexKey key) const;
};

/// Initial states i.i.d. Bernoulli(p) in {0, 1}, keyed by vertex key and seed.
VertexInit bernoulli_states(double p, std::uint64_t seed);

/// Key of child `index` of a vertex with key `parent`.
VertexKey child_key(std::uint64_t seed, VertexKey parent, std::uint64_t index);
VertexKey root_key(std::uint64_t seed);

/// Lazy Galton-Watson tree: each vertex's child count ~ rho, drawn from a
/// stream keyed by the vertex's path-derived key.
MarkedGraph gw_tree(const OffspringDistribution& rho, std::uint64_t seed, std::size_t budget,
                    const VertexInit& init = {});

/// Lazy unimodular GW tree: root child count ~ rho, others ~ rho.size_biased().
MarkedGraph ugw_tree(const OffspringDistribution& rho, std::uint64_t seed, std::size_t budget,
                     const VertexInit& init = {});

/// Lazy tree where every generation-k vertex has 4^k children, cut at `depth`
/// (generation `depth` vertices are leaves). All initial states 0.
MarkedGraph counterexample_tree(std::uint32_t depth, std::uint64_t seed, std::size_t budget);
/// Number of vertices of the full counterexample tree of the given depth.
std::size_t counterexample_tree_size(std::uint32_t depth);

/// G(n, min(c/n, 1)), unrooted.
MarkedGraph erdos_renyi(std::size_t n, double c, std::uint64_t seed, const VertexInit& init = {});

/// Erased configuration model: uniform pairing of half-edges, self-loops and
/// multi-edges dropped. OddDegreeSum if the degree sum is odd.
MarkedGraph configuration_model(const std::vector<std::size_t>& degrees, std::uint64_t seed,
                                const VertexInit& init = {});

/// Uniform simple d-regular graph on n vertices by rejection of non-simple
/// pairings. OddDegreeSum if n*d is odd.
MarkedGraph regular_graph(std::size_t n, std::size_t d, std::uint64_t seed, const VertexInit& init = {},
                          std::size_t max_attempts = 100000);

/// Finite box lattice with the given side lengths (row-major vertex order).
MarkedGraph grid(const std::vector<std::size_t>& dims, const VertexInit& init = {});

/// Applies `init` to every vertex and edge of a finite graph (by key).
void decorate(MarkedGraph& g, const VertexInit& init);

}  // namespace ips
