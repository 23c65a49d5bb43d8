#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ips/gen.hpp"
#include "ips/localize.hpp"
#include "ips/percolate.hpp"
#include "ips/random.hpp"
#include "stats_util.hpp"

using namespace ips;

namespace {

const JumpSpec kContactJumps = JumpSpec::uniform({-1, 1});

MarkedGraph path3() {
  MarkedGraph g;
  for (int i = 0; i < 3; ++i) g.add_vertex(0);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.set_root(1);
  return g;
}

double se_of(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST_CASE("no events means nothing is active") {
  auto g = path3();
  const auto noise = DrivingNoise::scripted(kContactJumps, 1.0, {});
  const auto res = percolate(g, ContactModel(1.0), noise, 0.5, 1.0);
  CHECK(res.active.empty());
  CHECK(res.components.empty());
  CHECK(*res.root_component_size == 0);
}

TEST_CASE("delta outside (0, T] is rejected") {
  auto g = path3();
  const DrivingNoise noise(1, kContactJumps, 1.0);
  CHECK_THROWS_AS(percolate(g, ContactModel(1.0), noise, 0.0, 1.0), Error);
  CHECK_THROWS_AS(percolate(g, ContactModel(1.0), noise, 1.5, 1.0), Error);
}

TEST_CASE("activation probability of a degree-2 vertex") {
  const auto g = path3();
  const ContactModel model(1.0);
  const double n = 1e5;
  double hits = 0.0;
  for (std::uint64_t s = 0; s < 100000; ++s) {
    const DrivingNoise noise(s, kContactJumps, 1.0);
    hits += is_active(g, model, noise, 1, 0.1, 1.0);
  }
  const double p = 1.0 - std::exp(-0.6);
  CHECK(p == doctest::Approx(0.45119).epsilon(1e-4));
  CHECK(within_se(hits / n, p, se_of(p, n)));
}

TEST_CASE("3-path component of the middle vertex matches enumeration") {
  const ContactModel model(1.0);
  const double p_mid = 1.0 - std::exp(-0.1 * 2 * 3);
  const double p_end = 1.0 - std::exp(-0.1 * 2 * 2);
  double expected = 0.0;
  for (int pattern = 0; pattern < 8; ++pattern) {
    const bool a = pattern & 1, b = pattern & 2, c = pattern & 4;
    const double w = (a ? p_end : 1 - p_end) * (b ? p_mid : 1 - p_mid) * (c ? p_end : 1 - p_end);
    if (b && (a || c)) expected += w;
  }
  const double n = 1e5;
  double hits = 0.0;
  for (std::uint64_t s = 0; s < 100000; ++s) {
    auto g = path3();
    const DrivingNoise noise(s, kContactJumps, 1.0);
    const auto res = percolate(g, model, noise, 0.1, 1.0);
    hits += *res.root_component_size >= 2;
    std::size_t total = 0;
    for (const auto& comp : res.components) total += comp.size();
    CHECK(total == res.active.size());
  }
  CHECK(within_se(hits / n, expected, se_of(expected, n)));
}

TEST_CASE("activity is monotone in delta under shared noise") {
  CounterRng rng(3, Stream::Sampling);
  const ContactModel model(1.0);
  for (int i = 0; i < 200; ++i) {
    MarkedGraph g = erdos_renyi(100, 3.0, rng.next_u64());
    const DrivingNoise noise(rng.next_u64(), kContactJumps, 1.0);
    const auto small = percolate(g, model, noise, 0.1, 1.0);
    const auto large = percolate(g, model, noise, 0.3, 1.0);
    CHECK(std::includes(large.active.begin(), large.active.end(), small.active.begin(), small.active.end()));
  }
}

TEST_CASE("components partition the active set into connected pieces") {
  CounterRng rng(4, Stream::Sampling);
  const ContactModel model(1.0);
  for (int i = 0; i < 100; ++i) {
    MarkedGraph g = erdos_renyi(200, 2.0, rng.next_u64());
    const DrivingNoise noise(rng.next_u64(), kContactJumps, 1.0);
    const auto res = percolate(g, model, noise, 0.2, 1.0);
    std::vector<VertexId> all;
    for (const auto& comp : res.components) {
      all.insert(all.end(), comp.begin(), comp.end());
      for (VertexId v : comp)
        for (VertexId u : g.neighbors(v))
          if (std::binary_search(res.active.begin(), res.active.end(), u))
            CHECK(std::binary_search(comp.begin(), comp.end(), u));
    }
    std::sort(all.begin(), all.end());
    CHECK(all == res.active);
  }
}

TEST_CASE("single vertex component is at most 1") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    MarkedGraph g;
    g.add_vertex(1);
    const auto rows = dissociation_scan(g, ContactModel(1.0), {1.0}, 1.0, 20, s);
    CHECK(rows[0].p95_root_component <= 1.0);
    CHECK(rows[0].mean_root_component <= 1.0);
  }
}

TEST_CASE("half percolation on degenerate trees") {
  const ContactModel model(1.0);
  const auto zero = halfperc_grandchild_mean(OffspringDistribution::delta(0), model, 0.1, 1.0, 100, 1);
  CHECK(zero.mean == 0.0);
  const auto one = halfperc_grandchild_mean(OffspringDistribution::delta(1), model, 0.25, 0.25, 100000, 9, 4);
  const double p = 1.0 - std::exp(-1.5);
  CHECK(p == doctest::Approx(0.7769).epsilon(1e-4));
  CHECK(within_se(one.mean, p, se_of(p, 1e5)));
}

TEST_CASE("grandchild mean decreases with delta") {
  const ContactModel model(1.0);
  const auto rho = OffspringDistribution::poisson(2.0);
  std::vector<Estimate> es;
  for (double d : {0.2, 0.1, 0.05}) es.push_back(halfperc_grandchild_mean(rho, model, d, 1.0, 20000, 11, 4));
  for (std::size_t i = 1; i < es.size(); ++i) {
    const double gap = es[i - 1].mean - es[i].mean;
    CHECK(gap > 3.0 * std::hypot(es[i - 1].stderr_mean, es[i].stderr_mean));
  }
}

TEST_CASE("grid scan certifies small deltas") {
  const MarkedGraph g = grid({20, 20});
  const auto rows = dissociation_scan(g, ContactModel(1.0), {0.01, 0.02, 0.05, 0.1}, 1.0, 50, 5, 4);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].certified);
  CHECK_FALSE(rows[3].certified);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK((!rows[i].certified || rows[i - 1].certified));
}

TEST_CASE("supercritical tree exhausts") {
  const auto rows =
      dissociation_scan(OffspringDistribution::poisson(4.0), ContactModel(4.0), {1.0}, 1.0, 50, 2, 2000, 4);
  CHECK(rows[0].frac_exhausted > 0.5);
  CHECK_FALSE(rows[0].certified);
}

TEST_CASE("influence set lies in the closure of the root component") {
  CounterRng rng(12, Stream::Sampling);
  const ContactModel model(1.0);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng.below(100);
    MarkedGraph g = erdos_renyi(n, 0.5 + 1.5 * rng.uniform(), rng.next_u64());
    const auto root = static_cast<VertexId>(rng.below(n));
    g.set_root(root);
    const DrivingNoise noise(rng.next_u64(), kContactJumps, 1.0);
    const auto perc = percolate(g, model, noise, 1.0, 1.0);
    VertexSet comp{root};
    for (const auto& c : perc.components)
      if (std::binary_search(c.begin(), c.end(), root)) comp = c;
    const auto cl = closure(g, comp);
    MarkedGraph copy = g;
    const auto u = influence_set(copy, noise, model, std::span(&root, 1), 1.0, n + 1);
    CHECK(std::includes(cl.begin(), cl.end(), u.vertices.begin(), u.vertices.end()));
  }
}
