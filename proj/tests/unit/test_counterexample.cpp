#include <doctest.h>

#include <cmath>

#include "ips/counterexample.hpp"
#include "ips/gen.hpp"
#include "stats_util.hpp"

using namespace ips;

namespace {

const JumpSpec kOne = JumpSpec::uniform({1});

void check_certificate(const MarkedGraph& tree, const DrivingNoise& noise, const ChainCertificate& c,
                       std::uint32_t depth, Time horizon) {
  REQUIRE(c.found);
  REQUIRE(c.path.size() == depth + 1);
  REQUIRE(c.times.size() == depth);
  CHECK(c.path.back() == *tree.root());
  CHECK(tree.depth(c.path.front()) == depth);
  for (std::size_t i = 1; i < c.path.size(); ++i) {
    CHECK(tree.depth(c.path[i]) + 1 == tree.depth(c.path[i - 1]));
    CHECK(tree.has_edge(c.path[i], c.path[i - 1]));
    const Time t = c.times[i - 1];
    CHECK(t <= horizon);
    if (i > 1) CHECK(t > c.times[i - 2]);
    bool is_event = false;
    for (const auto& e : noise.events(tree.key(c.path[i]), 1.0, 0.0, horizon)) is_event |= e.t == t;
    CHECK(is_event);
  }
}

}  // namespace

TEST_CASE("no events, no chain") {
  auto tree = counterexample_tree(3, 1, 100000);
  const auto noise = DrivingNoise::scripted(kOne, 1.0, {});
  CHECK_FALSE(detect_chain(tree, noise, 3, 1.0, ChainStrategy::Exhaustive).found);
  CHECK_FALSE(detect_chain(tree, noise, 3, 1.0, ChainStrategy::Dyadic).found);
  const auto sols = two_solutions(tree, noise, 3, 1.0);
  CHECK_FALSE(sols.root_time);
  for (const auto& tr : sols.tilde) CHECK(tr.jumps.empty());
  CHECK(sols.tilde_verdict.ok());
  CHECK(sols.zero_verdict.ok());
}

TEST_CASE("depth-1 hand example") {
  auto tree = counterexample_tree(1, 7, 100);
  tree.expand(*tree.root());
  REQUIRE(tree.size() == 2);
  const auto noise = DrivingNoise::scripted(kOne, 1.0, {{tree.key(1), {{0.3, 0.5, 1}}}, {tree.key(0), {{0.5, 0.5, 1}}}});
  const auto c = detect_chain(tree, noise, 1, 1.0, ChainStrategy::Exhaustive);
  REQUIRE(c.found);
  CHECK(c.path == std::vector<VertexId>{1, 0});
  CHECK(c.times == std::vector<Time>{0.5});
  // Dyadic windows are open: an event at 1/2 is outside (1/2, 1).
  CHECK_FALSE(detect_chain(tree, noise, 1, 1.0, ChainStrategy::Dyadic).found);
  const auto inner = DrivingNoise::scripted(kOne, 1.0, {{tree.key(0), {{0.7, 0.5, 1}}}});
  const auto d = detect_chain(tree, inner, 1, 1.0, ChainStrategy::Dyadic);
  CHECK(d.found);
  CHECK(d.times == std::vector<Time>{0.7});
  const auto sols = two_solutions(tree, noise, 1, 1.0);
  REQUIRE(sols.root_time);
  CHECK(*sols.root_time == 0.5);
  CHECK(sols.tilde[0].value_at(0.49) == 0);
  CHECK(sols.tilde[0].value_at(0.5) == 1);
  CHECK(sols.tilde[0].value_at(1.0) == 1);
  CHECK(sols.tilde_verdict.ok());
  REQUIRE(sols.full_tilde_verdict);
  CHECK(sols.full_tilde_verdict->ok());
}

TEST_CASE("dyadic extension failure probability of generation 1") {
  const double n = 1e5;
  double failures = 0.0;
  for (std::uint64_t s = 0; s < 100000; ++s) {
    auto tree = counterexample_tree(2, s, 100);
    const DrivingNoise noise(s, kOne, 1.0);
    const auto c = detect_chain(tree, noise, 2, 1.0, ChainStrategy::Dyadic);
    failures += !c.extended[1];
  }
  const double alpha = std::exp(-0.5);
  CHECK(alpha == doctest::Approx(0.6065).epsilon(1e-4));
  CHECK(within_se(failures / n, alpha, std::sqrt(alpha * (1 - alpha) / n)));
}

TEST_CASE("certificates are valid and monotone in depth") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto tree = counterexample_tree(6, s, 50000000);
    const DrivingNoise noise(s, kOne, 1.0);
    bool prev_ex = true, prev_dy = true;
    for (std::uint32_t d = 1; d <= 6; ++d) {
      const auto ex = detect_chain(tree, noise, d, 1.0, ChainStrategy::Exhaustive);
      const auto dy = detect_chain(tree, noise, d, 1.0, ChainStrategy::Dyadic);
      if (ex.found) check_certificate(tree, noise, ex, d, 1.0);
      if (dy.found) check_certificate(tree, noise, dy, d, 1.0);
      CHECK((!dy.found || ex.found));
      CHECK((!ex.found || prev_ex));
      CHECK((!dy.found || prev_dy));
      prev_ex = ex.found;
      prev_dy = dy.found;
    }
  }
}

TEST_CASE("both solutions replay on full truncations") {
  std::size_t infected = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    for (std::uint32_t d : {2u, 3u, 4u}) {
      auto tree = counterexample_tree(d, s, 100000);
      const DrivingNoise noise(s, kOne, 1.0);
      const auto sols = two_solutions(tree, noise, d, 1.0);
      CHECK(sols.zero_verdict.ok());
      CHECK(sols.tilde_verdict.ok());
      REQUIRE(sols.full_tilde_verdict);
      CHECK(sols.full_zero_verdict->ok());
      CHECK(sols.full_tilde_verdict->ok());
      CHECK(sols.full_root_time == sols.root_time);
      infected += sols.root_time.has_value();
    }
  }
  CHECK(infected > 0);
}

TEST_CASE("chain solution at depth 8") {
  std::size_t infected = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto tree = counterexample_tree(8, s, 50000000);
    const DrivingNoise noise(s, kOne, 1.0);
    const auto sols = two_solutions(tree, noise, 8, 1.0);
    CHECK(sols.zero_verdict.ok());
    CHECK(sols.tilde_verdict.ok());
    CHECK_FALSE(sols.full_tilde_verdict);
    const auto c = detect_chain(tree, noise, 8, 1.0, ChainStrategy::Exhaustive);
    CHECK(c.found == sols.root_time.has_value());
    if (c.found) CHECK(c.times.back() == *sols.root_time);
    infected += c.found;
  }
  CHECK(infected > 0);
}
