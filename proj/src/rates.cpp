#include "ips/rates.hpp"

#include <algorithm>
#include <cmath>

namespace ips {

State Trajectory::value_at(Time t) const {
  State x = x0;
  for (const auto& jump : jumps) {
    if (jump.t > t) break;
    x += jump.j;
  }
  return x;
}

State Trajectory::value_before(Time t) const {
  State x = x0;
  for (const auto& jump : jumps) {
    if (jump.t >= t) break;
    x += jump.j;
  }
  return x;
}

State Trajectory::final_value() const {
  State x = x0;
  for (const auto& jump : jumps) x += jump.j;
  return x;
}

bool BallView::adjacent(std::size_t i, std::size_t k) const {
  return graph_->has_edge(vertices_[i + 1].id, vertices_[k + 1].id);
}

LocalVertex BallViewBuilder::local(VertexId u, const Trajectory& traj, Time t, const State* current) const {
  LocalVertex lv;
  lv.id = u;
  lv.x0 = traj.x0;
  lv.mark = &graph_.vertex_mark(u);
  const auto& jumps = traj.jumps;
  if (current && (jumps.empty() || jumps.back().t < t)) {
    lv.state = current[u];
    lv.jumps = jumps;
    return lv;
  }
  const auto end = std::lower_bound(jumps.begin(), jumps.end(), t, [](const Jump& a, Time x) { return a.t < x; });
  lv.jumps = std::span<const Jump>(jumps.data(), static_cast<std::size_t>(end - jumps.begin()));
  lv.state = traj.x0;
  for (const auto& jump : lv.jumps) lv.state += jump.j;
  return lv;
}

const BallView& BallViewBuilder::build(VertexId v, std::span<const Trajectory> trajectories, Time t,
                                       const State* current) {
  auto& verts = view_.vertices_;
  auto& marks = view_.edge_marks_;
  verts.clear();
  marks.clear();
  verts.push_back(local(v, trajectories[v], t, current));
  const auto nb = graph_.neighbors(v);
  for (std::size_t i = 0; i < nb.size(); ++i) {
    verts.push_back(local(nb[i], trajectories[nb[i]], t, current));
    marks.push_back(&graph_.edge_mark_at(v, i));
  }
  return view_;
}

double repeated_sum(double x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x;
  return s;
}

namespace {

JumpSpec plus_minus() { return JumpSpec::uniform({-1, 1}); }

double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double x : terms) s += x;
  return s;
}

double scalar_mark(const Mark& mark, double cap, const char* what) {
  if (mark.empty()) throw Error(ErrorCode::MarkOutOfRange, std::string(what) + " mark is missing");
  const double x = mark[0];
  if (!(x >= 0.0 && x <= cap))
    throw Error(ErrorCode::MarkOutOfRange,
                std::string(what) + " mark " + std::to_string(x) + " outside [0, " + std::to_string(cap) + "]");
  return x;
}

}  // namespace

ContactModel::ContactModel(double lambda) : lambda_(lambda), jumps_(plus_minus()) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
}

double ContactModel::rate(const BallView& ball, State jump, Time) const {
  const State x = ball.root().state;
  if (x == 1) return jump == -1 ? 1.0 : 0.0;
  if (jump != 1) return 0.0;
  std::size_t infected = 0;
  for (const auto& u : ball.neighbors()) infected += u.state == 1;
  return lambda_ * static_cast<double>(infected);
}

double ContactModel::bound(std::size_t k, Time) const {
  return 1.0 + static_cast<double>(k > 0 ? k - 1 : 0) * lambda_;
}

HetContactModel::HetContactModel(double recovery_cap, double transmission_cap)
    : recovery_cap_(recovery_cap), transmission_cap_(transmission_cap), jumps_(plus_minus()) {
  if (!(recovery_cap >= 0.0) || !(transmission_cap >= 0.0) || !std::isfinite(recovery_cap) ||
      !std::isfinite(transmission_cap))
    throw Error(ErrorCode::InvalidArgument, "mark caps must be finite and >= 0");
}

double HetContactModel::rate(const BallView& ball, State jump, Time) const {
  const auto& root = ball.root();
  if (root.state == 1) return jump == -1 ? scalar_mark(*root.mark, recovery_cap_, "vertex") : 0.0;
  if (jump != 1) return 0.0;
  std::vector<double> terms;
  const auto nb = ball.neighbors();
  for (std::size_t i = 0; i < nb.size(); ++i)
    if (nb[i].state == 1) terms.push_back(scalar_mark(ball.edge_mark(i), transmission_cap_, "edge"));
  return sorted_sum(terms);
}

double HetContactModel::bound(std::size_t k, Time) const {
  return recovery_cap_ + repeated_sum(transmission_cap_, k > 0 ? k - 1 : 0);
}

void HetContactModel::validate(const MarkedGraph& g) const {
  for (VertexId v = 0; v < g.size(); ++v) {
    scalar_mark(g.vertex_mark(v), recovery_cap_, "vertex");
    for (std::size_t i = 0; i < g.degree(v); ++i) scalar_mark(g.edge_mark_at(v, i), transmission_cap_, "edge");
  }
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> knots, std::vector<double> values, double cap)
    : knots_(std::move(knots)), values_(std::move(values)), cap_(cap) {
  if (knots_.empty() || knots_.size() != values_.size())
    throw Error(ErrorCode::InvalidArgument, "hazard table needs matching, nonempty knots and values");
  for (std::size_t i = 1; i < knots_.size(); ++i)
    if (!(knots_[i] > knots_[i - 1])) throw Error(ErrorCode::InvalidArgument, "hazard knots must increase");
  if (!std::isfinite(cap)) throw Error(ErrorCode::UnboundedHazard, "hazard cap must be finite");
  for (double v : values_)
    if (!(v >= 0.0 && v <= cap_))
      throw Error(ErrorCode::UnboundedHazard,
                  "hazard value " + std::to_string(v) + " outside [0, " + std::to_string(cap_) + "]");
}

double PiecewiseLinear::operator()(double x) const {
  if (x <= knots_.front()) return values_.front();
  if (x >= knots_.back()) return values_.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - knots_[lo]) / (knots_[hi] - knots_[lo]);
  const double y = values_[lo] + (values_[hi] - values_[lo]) * w;
  return std::clamp(y, std::min(values_[lo], values_[hi]), std::max(values_[lo], values_[hi]));
}

RenewalContactModel::RenewalContactModel(PiecewiseLinear infection, PiecewiseLinear recovery, double history,
                                         bool absolute)
    : infection_(std::move(infection)),
      recovery_(std::move(recovery)),
      history_(history),
      absolute_(absolute),
      jumps_(plus_minus()) {
  if (!(history >= 0.0) || !std::isfinite(history))
    throw Error(ErrorCode::InvalidArgument, "history window must be finite and >= 0");
}

double RenewalContactModel::last_event(const LocalVertex& v) const {
  if (!v.jumps.empty()) return v.jumps.back().t;
  double last = -history_;
  if (v.mark)
    for (double s : *v.mark) last = std::max(last, s);
  return last;
}

double RenewalContactModel::rate(const BallView& ball, State jump, Time t) const {
  const auto& root = ball.root();
  const double root_last = last_event(root);
  if (root.state == 1) return jump == -1 ? recovery_(hazard_arg(t, root_last)) : 0.0;
  if (jump != 1) return 0.0;
  std::vector<double> terms;
  for (const auto& u : ball.neighbors())
    if (u.state == 1) terms.push_back(infection_(hazard_arg(t, std::max(root_last, last_event(u)))));
  return sorted_sum(terms);
}

double RenewalContactModel::bound(std::size_t k, Time) const {
  return recovery_.cap() + repeated_sum(infection_.cap(), k > 0 ? k - 1 : 0);
}

void RenewalContactModel::validate(const MarkedGraph& g) const {
  for (VertexId v = 0; v < g.size(); ++v)
    for (double s : g.vertex_mark(v))
      if (!(s >= -history_ && s <= 0.0))
        throw Error(ErrorCode::MarkOutOfRange, "history time " + std::to_string(s) + " outside [-T0, 0]");
}

OneWayInfectionModel::OneWayInfectionModel() : jumps_(JumpSpec::uniform({1})) {}

double OneWayInfectionModel::rate(const BallView& ball, State jump, Time) const {
  if (jump != 1 || ball.root().state != 0) return 0.0;
  for (const auto& u : ball.neighbors())
    if (u.state == 1) return 1.0;
  return 0.0;
}

}  // namespace ips
