#pragma once

// Random ball samples shared by the rate tests and the acceptance suite.

#include <algorithm>
#include <memory>
#include <vector>

#include "ips/random.hpp"
#include "ips/rates.hpp"

namespace ips::testing {

struct Sample {
  MarkedGraph g;
  std::vector<Trajectory> traj;
  VertexId center = 0;
};

/// Alternating 0/1 trajectory with random jump times in (0, horizon).
inline Trajectory random_trajectory(CounterRng& rng, double horizon) {
  Trajectory tr;
  tr.x0 = static_cast<State>(rng.below(2));
  const auto n = rng.below(4);
  std::vector<double> times;
  for (std::uint64_t i = 0; i < n; ++i) times.push_back(horizon * rng.uniform());
  std::sort(times.begin(), times.end());
  State x = tr.x0;
  for (double t : times) {
    const State j = x == 0 ? 1 : -1;
    tr.jumps.push_back({t, j});
    x += j;
  }
  return tr;
}

inline Sample random_sample(CounterRng& rng, double vertex_cap, double edge_cap, double history) {
  Sample s;
  const std::size_t n = 1 + rng.below(8);
  for (std::size_t i = 0; i < n; ++i) {
    Mark mark;
    if (history > 0.0) {
      for (std::uint64_t k = rng.below(3); k > 0; --k) mark.push_back(-history * rng.uniform());
      std::sort(mark.begin(), mark.end());
    } else {
      mark.push_back(vertex_cap * rng.uniform());
    }
    s.g.add_vertex(static_cast<State>(rng.below(2)), mark);
  }
  for (VertexId i = 0; i < n; ++i)
    for (VertexId j = i + 1; j < n; ++j)
      if (i == 0 ? rng.bernoulli(0.8) : rng.bernoulli(0.3)) s.g.add_edge(i, j, {edge_cap * rng.uniform()});
  for (VertexId v = 0; v < n; ++v) {
    s.traj.push_back(random_trajectory(rng, 1.0));
    s.g.set_state(v, s.traj.back().x0);
  }
  s.g.set_root(0);
  return s;
}

inline Sample relabel(const Sample& s, const std::vector<VertexId>& perm) {
  std::vector<VertexId> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = static_cast<VertexId>(i);
  Sample out;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    out.g.add_vertex(s.g.state(inverse[k]), s.g.vertex_mark(inverse[k]));
    out.traj.push_back(s.traj[inverse[k]]);
  }
  for (VertexId v = 0; v < s.g.size(); ++v)
    for (VertexId u : s.g.neighbors(v))
      if (u > v) out.g.add_edge(perm[v], perm[u], s.g.edge_mark(v, u));
  out.center = perm[s.center];
  return out;
}

inline double rate_at(const RateModel& m, const Sample& s, State jump, Time t) {
  BallViewBuilder builder(s.g);
  return m.rate(builder.build(s.center, s.traj, t), jump, t);
}

struct ModelCase {
  ModelPtr model;
  double vertex_cap, edge_cap, history;
};

inline std::vector<ModelCase> all_models() {
  const PiecewiseLinear hi({0.0, 0.5, 1.5, 3.0}, {0.2, 1.4, 0.7, 0.9}, 1.5);
  const PiecewiseLinear hr({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}, 2.0);
  return {
      {std::make_shared<ContactModel>(0.7), 1.0, 1.0, 0.0},
      {std::make_shared<HetContactModel>(1.3, 0.6), 1.3, 0.6, 0.0},
      {std::make_shared<RenewalContactModel>(hi, hr, 1.0), 1.0, 1.0, 1.0},
      {std::make_shared<RenewalContactModel>(hi, hr, 1.0, true), 1.0, 1.0, 1.0},
      {std::make_shared<OneWayInfectionModel>(), 1.0, 1.0, 0.0},
  };
}

}  // namespace ips::testing
