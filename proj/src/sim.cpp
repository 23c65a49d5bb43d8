#include "ips/sim.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace ips {

std::vector<double> level_caps(const MarkedGraph& g, const RateModel& model, Time horizon) {
  std::vector<double> caps(g.size());
  for (VertexId v = 0; v < g.size(); ++v) caps[v] = model.bound(g.degree(v) + 1, horizon);
  return caps;
}

namespace {

void check_finite(const MarkedGraph& g) {
  if (!g.is_complete()) throw Error(ErrorCode::NonFinite, "graph has unexpanded vertices");
}

std::vector<double> resolve_caps(const MarkedGraph& g, const RateModel& model, Time horizon,
                                 std::span<const double> caps) {
  if (caps.empty()) return level_caps(g, model, horizon);
  if (caps.size() != g.size()) throw Error(ErrorCode::InvalidArgument, "one level cap per vertex required");
  return {caps.begin(), caps.end()};
}

void check_horizon(const DrivingNoise& noise, Time horizon) {
  if (!(horizon > 0.0) || horizon > noise.horizon())
    throw Error(ErrorCode::WindowOutOfRange, "horizon " + std::to_string(horizon) + " exceeds the noise horizon");
}

struct Pending {
  Time t;
  VertexId v;
  bool operator>(const Pending& o) const { return t > o.t || (t == o.t && v > o.v); }
};

/// Event source over noise cursors.
class CursorSource {
 public:
  CursorSource(const DrivingNoise& noise, const MarkedGraph& g, const std::vector<double>& caps) {
    cursors_.reserve(g.size());
    for (VertexId v = 0; v < g.size(); ++v) cursors_.emplace_back(&noise, g.key(v), caps[v]);
  }
  const NoiseEvent* peek(VertexId v) const { return cursors_[v].peek(); }
  void advance(VertexId v) { cursors_[v].advance(); }

 private:
  std::vector<EventCursor> cursors_;
};

/// Event source over prepared lists.
class ListSource {
 public:
  explicit ListSource(std::span<const std::vector<NoiseEvent>> events) : events_(events), pos_(events.size(), 0) {}
  const NoiseEvent* peek(VertexId v) const { return pos_[v] < events_[v].size() ? &events_[v][pos_[v]] : nullptr; }
  void advance(VertexId v) { ++pos_[v]; }

 private:
  std::span<const std::vector<NoiseEvent>> events_;
  std::vector<std::size_t> pos_;
};

template <class Source>
SimulationResult run(const MarkedGraph& g, const RateModel& model, Source& source, Time horizon,
                     const std::vector<double>& caps) {
  const std::size_t n = g.size();
  SimulationResult out;
  out.trajectories.resize(n);
  std::vector<State> current(n);
  std::vector<Pending> heap;
  heap.reserve(n);
  for (VertexId v = 0; v < n; ++v) {
    current[v] = g.state(v);
    if (!model.contains(current[v]))
      throw Error(ErrorCode::StateEscape, "initial state " + std::to_string(current[v]) + " at vertex " +
                                              std::to_string(v) + " outside the state space");
    out.trajectories[v].x0 = current[v];
    if (const auto* e = source.peek(v); e && e->t <= horizon) heap.push_back({e->t, v});
  }
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue(std::greater<>{}, std::move(heap));

  BallViewBuilder builder(g);
  Time last_t = -1.0;
  VertexId last_v = kNoVertex;
  while (!queue.empty()) {
    const auto [t, v] = queue.top();
    queue.pop();
    if (t == last_t && v != last_v) ++out.ties;
    last_t = t;
    last_v = v;
    const NoiseEvent e = *source.peek(v);
    ++out.events;
    const BallView& ball = builder.build(v, out.trajectories, t, current.data());
    const double rate = model.rate(ball, e.j, t);
    if (rate > caps[v])
      throw Error(ErrorCode::InvalidArgument, model.name() + " rate " + std::to_string(rate) +
                                                  " exceeds its level cap " + std::to_string(caps[v]));
    if (e.r <= rate) {
      const State next = current[v] + e.j;
      if (!model.contains(next))
        throw Error(ErrorCode::StateEscape, "jump to " + std::to_string(next) + " at vertex " + std::to_string(v));
      current[v] = next;
      out.trajectories[v].jumps.push_back({t, e.j});
      ++out.accepted;
    }
    source.advance(v);
    if (const auto* nx = source.peek(v); nx && nx->t <= horizon) queue.push({nx->t, v});
  }
  return out;
}

}  // namespace

SimulationResult simulate_finite(const MarkedGraph& g, const RateModel& model, const DrivingNoise& noise, Time horizon,
                                 std::span<const double> caps_in) {
  check_finite(g);
  check_horizon(noise, horizon);
  model.validate(g);
  const auto caps = resolve_caps(g, model, horizon, caps_in);
  CursorSource source(noise, g, caps);
  return run(g, model, source, horizon, caps);
}

SimulationResult simulate_events(const MarkedGraph& g, const RateModel& model,
                                 std::span<const std::vector<NoiseEvent>> events, Time horizon,
                                 std::span<const double> caps_in) {
  check_finite(g);
  model.validate(g);
  if (events.size() != g.size()) throw Error(ErrorCode::InvalidArgument, "one event list per vertex required");
  const auto caps = resolve_caps(g, model, horizon, caps_in);
  ListSource source(events);
  return run(g, model, source, horizon, caps);
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::MissedJump: return "missed_jump";
    case ViolationKind::UnmatchedJump: return "unmatched_jump";
    case ViolationKind::RejectedJump: return "rejected_jump";
    case ViolationKind::InitialMismatch: return "initial_mismatch";
    case ViolationKind::StateEscape: return "state_escape";
    case ViolationKind::NotIncreasing: return "not_increasing";
  }
  return "unknown";
}

Verdict verify_sde(const MarkedGraph& g, const RateModel& model, const DrivingNoise& noise,
                   std::span<const Trajectory> trajectories, Time horizon, std::span<const double> caps_in) {
  check_finite(g);
  check_horizon(noise, horizon);
  if (trajectories.size() != g.size()) throw Error(ErrorCode::InvalidArgument, "one trajectory per vertex required");
  const auto caps = resolve_caps(g, model, horizon, caps_in);

  Verdict verdict;
  auto report = [&](ViolationKind kind, VertexId v, Time t, State j) { verdict.violations.push_back({kind, v, t, j}); };

  for (VertexId v = 0; v < g.size(); ++v) {
    const auto& traj = trajectories[v];
    if (traj.x0 != g.state(v)) report(ViolationKind::InitialMismatch, v, 0.0, traj.x0);
    State x = traj.x0;
    if (!model.contains(x)) report(ViolationKind::StateEscape, v, 0.0, x);
    Time prev = 0.0;
    for (const auto& jump : traj.jumps) {
      if (!(jump.t > prev) || jump.t > horizon) report(ViolationKind::NotIncreasing, v, jump.t, jump.j);
      prev = jump.t;
      x += jump.j;
      if (!model.contains(x)) report(ViolationKind::StateEscape, v, jump.t, jump.j);
    }
  }

  BallViewBuilder builder(g);
  for (VertexId v = 0; v < g.size(); ++v) {
    const auto events = noise.events(g.key(v), caps[v], 0.0, horizon);
    const auto& jumps = trajectories[v].jumps;
    std::vector<bool> matched(jumps.size(), false);
    for (const auto& e : events) {
      ++verdict.events_checked;
      const BallView& ball = builder.build(v, trajectories, e.t);
      const bool accept = e.r <= model.rate(ball, e.j, e.t);
      const auto it = std::lower_bound(jumps.begin(), jumps.end(), e.t, [](const Jump& a, Time t) { return a.t < t; });
      const bool has_jump = it != jumps.end() && it->t == e.t && it->j == e.j;
      if (has_jump) matched[static_cast<std::size_t>(it - jumps.begin())] = true;
      if (accept && !has_jump) report(ViolationKind::MissedJump, v, e.t, e.j);
      if (!accept && has_jump) report(ViolationKind::RejectedJump, v, e.t, e.j);
    }
    for (std::size_t i = 0; i < jumps.size(); ++i)
      if (!matched[i]) report(ViolationKind::UnmatchedJump, v, jumps[i].t, jumps[i].j);
  }
  return verdict;
}

bool is_proper(std::span<const Trajectory> trajectories) {
  std::vector<std::pair<Time, std::size_t>> times;
  for (std::size_t v = 0; v < trajectories.size(); ++v)
    for (const auto& jump : trajectories[v].jumps) times.emplace_back(jump.t, v);
  std::sort(times.begin(), times.end());
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i].first == times[i - 1].first && times[i].second != times[i - 1].second) return false;
  return true;
}

}  // namespace ips
