#include "ips/localize.hpp"

#include <algorithm>
#include <queue>

#include "ips/sim.hpp"

namespace ips {

bool InfluenceSet::contains(VertexId v) const { return std::binary_search(vertices.begin(), vertices.end(), v); }

double ambient_cap(const MarkedGraph& g, const RateModel& model, VertexId v, Time horizon) {
  return model.bound(g.degree(v) + g.pending_children(v) + 1, horizon);
}

namespace {

struct Candidate {
  Time t;
  VertexId v;
  bool operator<(const Candidate& o) const { return t < o.t || (t == o.t && v < o.v); }
};

class Recursion {
 public:
  Recursion(MarkedGraph& g, const DrivingNoise& noise, const RateModel& model, Time horizon, std::size_t budget)
      : g_(g), noise_(noise), model_(model), horizon_(horizon), budget_(budget) {}

  InfluenceSet run(std::span<const VertexId> targets) {
    for (VertexId v : targets) {
      g_.check_vertex(v);
      if (!is_member(v) && !add(v, horizon_, true)) return finish();
    }
    while (!queue_.empty()) {
      const Candidate c = queue_.top();
      queue_.pop();
      push_previous(c.v);
      try {
        g_.expand(c.v);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BudgetExceeded) throw;
        out_.exhausted = true;
        return finish();
      }
      for (VertexId u : g_.neighbors(c.v))
        if (!is_member(u) && !add(u, c.t, false)) {
          out_.trace.push_back({c.t, c.v, members_.size()});
          return finish();
        }
      out_.trace.push_back({c.t, c.v, members_.size()});
    }
    return finish();
  }

 private:
  bool is_member(VertexId v) const { return v < member_.size() && member_[v]; }

  /// Adds v with its events strictly below `below` (or at most `below` for targets).
  bool add(VertexId v, Time below, bool inclusive) {
    if (members_.size() >= budget_) {
      out_.exhausted = true;
      return false;
    }
    if (member_.size() <= v) {
      member_.resize(g_.size(), false);
      slot_.resize(g_.size(), 0);
    }
    member_[v] = true;
    slot_[v] = static_cast<std::uint32_t>(members_.size());
    members_.push_back(v);
    const double cap = ambient_cap(g_, model_, v, horizon_);
    caps_.push_back(cap);
    auto events = noise_.events(g_.key(v), cap, 0.0, below);
    if (!inclusive && !events.empty() && events.back().t == below) events.pop_back();
    std::vector<Time> times;
    times.reserve(events.size());
    for (const auto& e : events) times.push_back(e.t);
    times_.push_back(std::move(times));
    events_.push_back(std::move(events));
    push_previous(v);
    return true;
  }

  /// Queues the latest not yet used event of v.
  void push_previous(VertexId v) {
    auto& times = times_[slot_[v]];
    if (times.empty()) return;
    queue_.push({times.back(), v});
    times.pop_back();
  }

  InfluenceSet finish() {
    std::vector<std::size_t> order(members_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return members_[a] < members_[b]; });
    for (std::size_t i : order) {
      out_.vertices.push_back(members_[i]);
      out_.caps.push_back(caps_[i]);
      out_.events.push_back(std::move(events_[i]));
    }
    return std::move(out_);
  }

  MarkedGraph& g_;
  const DrivingNoise& noise_;
  const RateModel& model_;
  Time horizon_;
  std::size_t budget_;
  std::vector<bool> member_;
  std::vector<std::uint32_t> slot_;
  std::vector<VertexId> members_;
  std::vector<double> caps_;
  std::vector<std::vector<Time>> times_;
  std::vector<std::vector<NoiseEvent>> events_;
  std::priority_queue<Candidate> queue_;
  InfluenceSet out_;
};

}  // namespace

InfluenceSet influence_set(MarkedGraph& g, const DrivingNoise& noise, const RateModel& model,
                           std::span<const VertexId> targets, Time horizon, std::size_t budget) {
  if (!(horizon > 0.0) || horizon > noise.horizon())
    throw Error(ErrorCode::WindowOutOfRange, "horizon exceeds the noise horizon");
  if (budget < targets.size()) throw Error(ErrorCode::InvalidArgument, "budget smaller than the target set");
  return Recursion(g, noise, model, horizon, budget).run(targets);
}

LocalizedResult localized_marginal(MarkedGraph& g, const RateModel& model, const DrivingNoise& noise,
                                   std::span<const VertexId> targets, Time horizon, std::size_t budget) {
  LocalizedResult out;
  out.influence = influence_set(g, noise, model, targets, horizon, budget);
  if (out.influence.exhausted) throw ExhaustedError(std::move(out.influence));
  const auto& members = out.influence.vertices;
  // Every processed vertex has its whole closure inside the set, and each
  // member carries all its events below its entry time, so replaying just
  // these events on the induced subgraph reproduces the targets exactly.
  const MarkedGraph h = induced_subgraph(g, members);
  const auto sim = simulate_events(h, model, out.influence.events, horizon, out.influence.caps);
  for (VertexId v : targets) {
    const auto local = std::lower_bound(members.begin(), members.end(), v) - members.begin();
    out.trajectories.push_back(sim.trajectories[static_cast<std::size_t>(local)]);
  }
  return out;
}

LocalizationCheck check_localization(const MarkedGraph& g, const RateModel& model, const DrivingNoise& noise,
                                     std::span<const VertexId> targets, std::uint32_t radius, Time horizon,
                                     const DrivingNoise* full_noise) {
  const VertexId root = g.require_root();
  LocalizationCheck out;
  MarkedGraph copy = g;
  const auto influence = influence_set(copy, noise, model, targets, horizon, g.size() + 1);
  auto members = ball_members(g, root, radius).vertices;
  std::sort(members.begin(), members.end());
  out.contained = std::all_of(influence.vertices.begin(), influence.vertices.end(),
                              [&](VertexId v) { return std::binary_search(members.begin(), members.end(), v); });
  const MarkedGraph ball = induced_subgraph(g, members, root);
  const auto in_ball = simulate_finite(ball, model, noise, horizon).trajectories;
  const auto in_full = simulate_finite(g, model, full_noise ? *full_noise : noise, horizon).trajectories;
  out.equal = true;
  for (VertexId v : targets) {
    const auto it = std::lower_bound(members.begin(), members.end(), v);
    if (it == members.end() || *it != v) throw Error(ErrorCode::InvalidArgument, "target outside the ball");
    out.equal &= in_ball[static_cast<std::size_t>(it - members.begin())] == in_full[v];
  }
  return out;
}

}  // namespace ips
