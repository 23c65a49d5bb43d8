#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ips/graph.hpp"
#include "ips/noise.hpp"

namespace ips {

struct Jump {
  Time t = 0.0;
  State j = 0;

  friend bool operator==(const Jump&, const Jump&) = default;
};

/// Piecewise-constant path: initial state plus strictly increasing jumps.
struct Trajectory {
  State x0 = 0;
  std::vector<Jump> jumps;

  /// Value at time t (jumps at times <= t included).
  State value_at(Time t) const;
  /// Left limit at time t (jumps at times < t included).
  State value_before(Time t) const;
  State final_value() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// One vertex of a radius-1 ball, as seen at time t-.
struct LocalVertex {
  VertexId id = kNoVertex;
  State state = 0;
  State x0 = 0;
  /// Jumps strictly before the evaluation time.
  std::span<const Jump> jumps;
  const Mark* mark = nullptr;
};

/// Read-only radius-1 ball around a vertex at time t-: the only input a rate
/// function receives.
class BallView {
 public:
  const LocalVertex& root() const { return vertices_[0]; }
  std::span<const LocalVertex> neighbors() const { return std::span(vertices_).subspan(1); }
  /// Mark of the edge between the root and neighbor i.
  const Mark& edge_mark(std::size_t i) const { return *edge_marks_[i]; }
  /// Whether neighbors i and k are adjacent.
  bool adjacent(std::size_t i, std::size_t k) const;
  std::size_t closure_size() const { return vertices_.size(); }

 private:
  friend class BallViewBuilder;
  const MarkedGraph* graph_ = nullptr;
  std::vector<LocalVertex> vertices_;
  std::vector<const Mark*> edge_marks_;
};

/// Builds ball views from a graph and trajectories indexed by vertex id.
class BallViewBuilder {
 public:
  explicit BallViewBuilder(const MarkedGraph& g) : graph_(g) { view_.graph_ = &g; }

  /// View of cl(v) at time t-. If `current` is given it holds each vertex's
  /// latest state, used when all its recorded jumps precede t.
  const BallView& build(VertexId v, std::span<const Trajectory> trajectories, Time t,
                        const State* current = nullptr);

 private:
  LocalVertex local(VertexId u, const Trajectory& traj, Time t, const State* current) const;

  const MarkedGraph& graph_;
  BallView view_;
};

/// Local jump-rate functions with a closure-size bound.
class RateModel {
 public:
  virtual ~RateModel() = default;

  virtual std::string name() const = 0;
  virtual const JumpSpec& jump_spec() const = 0;
  /// Rate of `jump` at the root of `ball` at time t.
  virtual double rate(const BallView& ball, State jump, Time t) const = 0;
  /// Upper bound on every rate at a vertex with closure size k, up to horizon.
  virtual double bound(std::size_t closure_size, Time horizon) const = 0;
  virtual bool contains(State x) const = 0;
  /// Finite state space in increasing order.
  virtual std::vector<State> state_space() const = 0;
  /// True when rates depend on the current states and marks only.
  virtual bool is_markov() const = 0;
  /// Throws MarkOutOfRange if the graph's marks do not fit the model.
  virtual void validate(const MarkedGraph&) const {}
};

using ModelPtr = std::shared_ptr<const RateModel>;

/// Sum of n copies of x, added one at a time (matches sequential rate sums).
double repeated_sum(double x, std::size_t n);

/// States {0, 1}; infection at rate lambda * (# infected neighbors),
/// recovery at rate 1.
class ContactModel final : public RateModel {
 public:
  explicit ContactModel(double lambda);
  std::string name() const override { return "contact"; }
  const JumpSpec& jump_spec() const override { return jumps_; }
  double rate(const BallView& ball, State jump, Time t) const override;
  double bound(std::size_t closure_size, Time horizon) const override;
  bool contains(State x) const override { return x == 0 || x == 1; }
  std::vector<State> state_space() const override { return {0, 1}; }
  bool is_markov() const override { return true; }
  double lambda() const { return lambda_; }

 private:
  double lambda_;
  JumpSpec jumps_;
};

/// Contact process with edge transmission rates (edge mark[0]) and vertex
/// recovery rates (vertex mark[0]), capped by the given maxima.
class HetContactModel final : public RateModel {
 public:
  HetContactModel(double recovery_cap, double transmission_cap);
  std::string name() const override { return "het_contact"; }
  const JumpSpec& jump_spec() const override { return jumps_; }
  double rate(const BallView& ball, State jump, Time t) const override;
  double bound(std::size_t closure_size, Time horizon) const override;
  bool contains(State x) const override { return x == 0 || x == 1; }
  std::vector<State> state_space() const override { return {0, 1}; }
  bool is_markov() const override { return true; }
  void validate(const MarkedGraph& g) const override;

 private:
  double recovery_cap_;
  double transmission_cap_;
  JumpSpec jumps_;
};

/// Piecewise-linear function through (knots[i], values[i]), constant beyond
/// the end knots, with a declared upper bound.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> knots, std::vector<double> values, double cap);
  static PiecewiseLinear constant(double value) { return PiecewiseLinear({0.0}, {value}, value); }

  double operator()(double x) const;
  double cap() const { return cap_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  double cap_;
};

/// Renewal contact process: hazards evaluated at the time since the most
/// recent event (or at that event time when `absolute` is set). Vertex marks
/// hold pre-time-0 jump times in [-history, 0].
class RenewalContactModel final : public RateModel {
 public:
  RenewalContactModel(PiecewiseLinear infection, PiecewiseLinear recovery, double history, bool absolute = false);
  std::string name() const override { return "renewal_contact"; }
  const JumpSpec& jump_spec() const override { return jumps_; }
  double rate(const BallView& ball, State jump, Time t) const override;
  double bound(std::size_t closure_size, Time horizon) const override;
  bool contains(State x) const override { return x == 0 || x == 1; }
  std::vector<State> state_space() const override { return {0, 1}; }
  bool is_markov() const override { return false; }
  void validate(const MarkedGraph& g) const override;

 private:
  double last_event(const LocalVertex& v) const;
  double hazard_arg(Time t, double last) const { return absolute_ ? last : t - last; }

  PiecewiseLinear infection_;
  PiecewiseLinear recovery_;
  double history_;
  bool absolute_;
  JumpSpec jumps_;
};

/// States {0, 1}, single jump +1 at rate 1 when the vertex is healthy and
/// some neighbor is infected. Bound 1 for every closure size.
class OneWayInfectionModel final : public RateModel {
 public:
  OneWayInfectionModel();
  std::string name() const override { return "one_way"; }
  const JumpSpec& jump_spec() const override { return jumps_; }
  double rate(const BallView& ball, State jump, Time t) const override;
  double bound(std::size_t, Time) const override { return 1.0; }
  bool contains(State x) const override { return x == 0 || x == 1; }
  std::vector<State> state_space() const override { return {0, 1}; }
  bool is_markov() const override { return true; }

 private:
  JumpSpec jumps_;
};

}  // namespace ips
