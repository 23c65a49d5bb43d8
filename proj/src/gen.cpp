#include "ips/gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ips {

namespace {

OffspringDistribution truncated(const std::function<double(std::size_t)>& pmf_at, double tail) {
  std::vector<double> pmf;
  double mass = 0.0;
  for (std::size_t k = 0; mass < 1.0 - tail && k < 100000; ++k) {
    pmf.push_back(pmf_at(k));
    mass += pmf.back();
  }
  for (double& p : pmf) p /= mass;
  return OffspringDistribution(std::move(pmf));
}

}  // namespace

OffspringDistribution::OffspringDistribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {
  if (pmf_.empty()) throw Error(ErrorCode::InvalidArgument, "empty pmf");
  double total = 0.0;
  for (double p : pmf_) {
    if (!(p >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "pmf sums to " + std::to_string(total));
  while (pmf_.size() > 1 && pmf_.back() == 0.0) pmf_.pop_back();
  cdf_.resize(pmf_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    acc += pmf_[k];
    cdf_[k] = acc;
    mean_ += static_cast<double>(k) * pmf_[k];
  }
  cdf_.back() = 1.0;
}

OffspringDistribution OffspringDistribution::delta(std::size_t k) {
  std::vector<double> pmf(k + 1, 0.0);
  pmf[k] = 1.0;
  return OffspringDistribution(std::move(pmf));
}

OffspringDistribution OffspringDistribution::poisson(double c, double tail) {
  if (!(c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "Poisson mean must be >= 0");
  if (c == 0.0) return delta(0);
  return truncated([c](std::size_t k) { return std::exp(-c + static_cast<double>(k) * std::log(c) - std::lgamma(k + 1.0)); },
                   tail);
}

OffspringDistribution OffspringDistribution::geometric(double p, double tail) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "geometric p must be in (0, 1]");
  return truncated([p](std::size_t k) { return std::pow(1.0 - p, static_cast<double>(k)) * p; }, tail);
}

std::size_t OffspringDistribution::sample(double u) const {
  return static_cast<std::size_t>(std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
}

OffspringDistribution OffspringDistribution::size_biased() const {
  if (mean_ <= 0.0) throw Error(ErrorCode::ZeroMean, "size-biased law needs a positive mean");
  std::vector<double> out(pmf_.size() > 1 ? pmf_.size() - 1 : 1, 0.0);
  for (std::size_t k = 0; k + 1 < pmf_.size(); ++k) out[k] = static_cast<double>(k + 1) * pmf_[k + 1] / mean_;
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& p : out) p /= total;
  return OffspringDistribution(std::move(out));
}

ChildSpec VertexInit::make(VertexKey key) const {
  ChildSpec spec;
  spec.key = key;
  if (state) spec.state = state(key);
  if (mark) spec.mark = mark(key);
  if (edge_mark) spec.edge_mark = edge_mark(key);
  return spec;
}

VertexInit bernoulli_states(double p, std::uint64_t seed) {
  VertexInit init;
  init.state = [p, seed](VertexKey key) -> State {
    return keyed_uniform(hash_words({seed, key}), Stream::InitialState) < p ? 1 : 0;
  };
  return init;
}

VertexKey child_key(std::uint64_t seed, VertexKey parent, std::uint64_t index) {
  return hash_words({seed, parent, index});
}

VertexKey root_key(std::uint64_t seed) { return hash_words({seed, 0x526F6F74ull}); }

namespace {

class TreeExpander : public LazyExpander {
 public:
  TreeExpander(std::uint64_t seed, VertexInit init) : seed_(seed), init_(std::move(init)) {}

  std::vector<ChildSpec> children(VertexKey parent, std::uint32_t depth) const override {
    const std::size_t n = child_count(parent, depth);
    std::vector<ChildSpec> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(init_.make(child_key(seed_, parent, i)));
    return out;
  }

 protected:
  std::uint64_t seed_;
  VertexInit init_;
};

class GaltonWatsonExpander final : public TreeExpander {
 public:
  GaltonWatsonExpander(std::uint64_t seed, VertexInit init, OffspringDistribution root_law,
                       OffspringDistribution law)
      : TreeExpander(seed, std::move(init)), root_law_(std::move(root_law)), law_(std::move(law)) {}

  std::size_t child_count(VertexKey key, std::uint32_t depth) const override {
    const double u = keyed_uniform(hash_words({seed_, key}), Stream::Offspring);
    return depth == 0 ? root_law_.sample(u) : law_.sample(u);
  }

 private:
  OffspringDistribution root_law_;
  OffspringDistribution law_;
};

class SuperExponentialExpander final : public TreeExpander {
 public:
  SuperExponentialExpander(std::uint64_t seed, std::uint32_t depth) : TreeExpander(seed, {}), depth_(depth) {}

  std::size_t child_count(VertexKey, std::uint32_t depth) const override {
    if (depth >= depth_) return 0;
    return std::size_t{1} << (2 * depth);
  }

 private:
  std::uint32_t depth_;
};

MarkedGraph lazy_tree(std::shared_ptr<const LazyExpander> expander, std::uint64_t seed, std::size_t budget,
                      const VertexInit& init) {
  if (budget < 1) throw Error(ErrorCode::InvalidArgument, "budget must be >= 1");
  MarkedGraph g;
  g.make_lazy(std::move(expander), budget);
  const auto spec = init.make(root_key(seed));
  const VertexId r = g.add_vertex(spec.state, spec.mark, 0, spec.key);
  g.set_root(r);
  return g;
}

}  // namespace

MarkedGraph gw_tree(const OffspringDistribution& rho, std::uint64_t seed, std::size_t budget, const VertexInit& init) {
  return lazy_tree(std::make_shared<GaltonWatsonExpander>(seed, init, rho, rho), seed, budget, init);
}

MarkedGraph ugw_tree(const OffspringDistribution& rho, std::uint64_t seed, std::size_t budget, const VertexInit& init) {
  return lazy_tree(std::make_shared<GaltonWatsonExpander>(seed, init, rho, rho.size_biased()), seed, budget, init);
}

MarkedGraph counterexample_tree(std::uint32_t depth, std::uint64_t seed, std::size_t budget) {
  if (depth > 30) throw Error(ErrorCode::InvalidArgument, "depth too large");
  return lazy_tree(std::make_shared<SuperExponentialExpander>(seed, depth), seed, budget, {});
}

std::size_t counterexample_tree_size(std::uint32_t depth) {
  // Generation k+1 has |gen k| * 4^k vertices; saturates at SIZE_MAX.
  constexpr auto kMax = static_cast<std::size_t>(-1);
  std::size_t total = 1, generation = 1;
  for (std::uint32_t k = 0; k < depth; ++k) {
    const std::size_t fan = std::size_t{1} << std::min<std::uint32_t>(2 * k, 62);
    if (2 * k >= 62 || generation > kMax / fan) return kMax;
    generation *= fan;
    if (total > kMax - generation) return kMax;
    total += generation;
  }
  return total;
}

void decorate(MarkedGraph& g, const VertexInit& init) {
  for (VertexId v = 0; v < g.size(); ++v) {
    if (init.state) g.set_state(v, init.state(g.key(v)));
    if (init.mark) g.set_vertex_mark(v, init.mark(g.key(v)));
  }
}

namespace {

MarkedGraph empty_graph(std::size_t n, const VertexInit& init) {
  MarkedGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_vertex(0);
  decorate(g, init);
  return g;
}

Mark edge_mark_for(const MarkedGraph& g, VertexId u, VertexId v, const VertexInit& init) {
  if (!init.edge_mark) return {};
  return init.edge_mark(hash_words({g.key(std::min(u, v)), g.key(std::max(u, v))}));
}

}  // namespace

MarkedGraph erdos_renyi(std::size_t n, double c, std::uint64_t seed, const VertexInit& init) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (!(c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "c must be >= 0");
  MarkedGraph g = empty_graph(n, init);
  const double p = std::min(c / static_cast<double>(n), 1.0);
  if (p <= 0.0 || n < 2) return g;
  CounterRng rng(seed, Stream::Generator, 1);
  // Geometric skipping over the lower-triangular pairs (w < v).
  const double log_q = std::log1p(-p);
  std::int64_t v = 1, w = -1;
  const auto nn = static_cast<std::int64_t>(n);
  while (v < nn) {
    const double skip = p >= 1.0 ? 0.0 : std::floor(std::log(rng.uniform()) / log_q);
    w += 1 + static_cast<std::int64_t>(std::min(skip, 4.0e18));
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn) {
      const auto a = static_cast<VertexId>(w), b = static_cast<VertexId>(v);
      g.add_edge(a, b, edge_mark_for(g, a, b, init));
    }
  }
  return g;
}

namespace {

std::vector<VertexId> shuffled_stubs(const std::vector<std::size_t>& degrees, CounterRng& rng) {
  std::vector<VertexId> stubs;
  for (std::size_t v = 0; v < degrees.size(); ++v)
    for (std::size_t k = 0; k < degrees[v]; ++k) stubs.push_back(static_cast<VertexId>(v));
  for (std::size_t i = stubs.size(); i > 1; --i) std::swap(stubs[i - 1], stubs[rng.below(i)]);
  return stubs;
}

void check_even(const std::vector<std::size_t>& degrees) {
  const auto total = std::accumulate(degrees.begin(), degrees.end(), std::size_t{0});
  if (total % 2 != 0) throw Error(ErrorCode::OddDegreeSum, "degree sum " + std::to_string(total) + " is odd");
}

}  // namespace

MarkedGraph configuration_model(const std::vector<std::size_t>& degrees, std::uint64_t seed, const VertexInit& init) {
  check_even(degrees);
  MarkedGraph g = empty_graph(degrees.size(), init);
  CounterRng rng(seed, Stream::Generator, 2);
  const auto stubs = shuffled_stubs(degrees, rng);
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2)
    g.try_add_edge(stubs[i], stubs[i + 1], edge_mark_for(g, stubs[i], stubs[i + 1], init));
  return g;
}

MarkedGraph regular_graph(std::size_t n, std::size_t d, std::uint64_t seed, const VertexInit& init,
                          std::size_t max_attempts) {
  const std::vector<std::size_t> degrees(n, d);
  check_even(degrees);
  if (d >= n && n > 0 && d > 0) throw Error(ErrorCode::InvalidArgument, "no simple d-regular graph with d >= n");
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    CounterRng rng(seed, Stream::Generator, 3, static_cast<std::uint32_t>(attempt));
    const auto stubs = shuffled_stubs(degrees, rng);
    MarkedGraph g = empty_graph(n, init);
    bool simple = true;
    for (std::size_t i = 0; i + 1 < stubs.size() && simple; i += 2)
      simple = g.try_add_edge(stubs[i], stubs[i + 1], edge_mark_for(g, stubs[i], stubs[i + 1], init));
    if (simple) return g;
  }
  throw Error(ErrorCode::InvalidArgument, "no simple pairing found within attempt limit");
}

MarkedGraph grid(const std::vector<std::size_t>& dims, const VertexInit& init) {
  if (dims.empty()) throw Error(ErrorCode::InvalidArgument, "grid needs at least one dimension");
  std::size_t n = 1;
  for (auto d : dims) {
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "grid side must be >= 1");
    n *= d;
  }
  MarkedGraph g = empty_graph(n, init);
  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t i = dims.size() - 1; i > 0; --i) stride[i - 1] = stride[i] * dims[i];
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t axis = 0; axis < dims.size(); ++axis) {
      const std::size_t coord = (v / stride[axis]) % dims[axis];
      if (coord + 1 < dims[axis]) {
        const auto a = static_cast<VertexId>(v), b = static_cast<VertexId>(v + stride[axis]);
        g.add_edge(a, b, edge_mark_for(g, a, b, init));
      }
    }
  }
  return g;
}

}  // namespace ips
