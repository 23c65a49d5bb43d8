#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "ips/core.hpp"

namespace ips {

/// Finite jump set with positive weights.
class JumpSpec {
 public:
  JumpSpec(std::vector<State> jumps, std::vector<double> weights);
  /// Every jump gets weight 1.
  static JumpSpec uniform(std::vector<State> jumps);

  const std::vector<State>& jumps() const { return jumps_; }
  const std::vector<double>& weights() const { return weights_; }
  double total() const { return total_; }
  double weight(State jump) const;
  /// Index i with probability weights[i] / total, from u in (0, 1).
  std::size_t pick(double u) const;

 private:
  std::vector<State> jumps_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

struct NoiseEvent {
  Time t = 0.0;
  double r = 0.0;
  State j = 0;

  friend bool operator==(const NoiseEvent&, const NoiseEvent&) = default;
};

/// Per-vertex marked Poisson processes on (0, T] x (0, inf) x jumps with
/// intensity Lebesgue x Lebesgue x weights.
///
/// The (time, level) plane of each vertex is cut into cells of size
/// block_length x band_width. Each cell is an independent Poisson process
/// drawn from a counter-based stream keyed by (seed, vertex key, band,
/// block), so events are a pure function of those and raising a level cap
/// only adds events.
class DrivingNoise {
 public:
  DrivingNoise(std::uint64_t seed, JumpSpec jumps, Time horizon, double band_width = 1.0,
               double block_length = 1.0);

  /// Noise whose events are given explicitly per vertex key; keys absent
  /// from the table have no events.
  static DrivingNoise scripted(JumpSpec jumps, Time horizon, std::map<VertexKey, std::vector<NoiseEvent>> table,
                               double block_length = 1.0);

  std::uint64_t seed() const { return seed_; }
  const JumpSpec& jump_spec() const { return jumps_; }
  Time horizon() const { return horizon_; }
  double band_width() const { return band_width_; }
  double block_length() const { return block_length_; }

  /// Events with r <= cap and t in (t1, t2], sorted by time. Throws
  /// WindowOutOfRange unless 0 <= t1 <= t2 <= horizon.
  std::vector<NoiseEvent> events(VertexKey key, double cap, Time t1, Time t2) const;

  /// Earliest event with time in (t, horizon] and r <= cap.
  std::optional<NoiseEvent> first_event_after(VertexKey key, double cap, Time t) const;

  /// Latest event with time in (0, t) and r <= cap.
  std::optional<NoiseEvent> last_event_before(VertexKey key, double cap, Time t) const;

  /// Whether any event with r <= cap lies in (t1, t2].
  bool any_event(VertexKey key, double cap, Time t1, Time t2) const;

  /// Appends the events of one cell with r <= cap, sorted by time. Times
  /// are not clipped to the horizon.
  void cell_events(VertexKey key, double cap, std::uint32_t band, std::uint32_t block,
                   std::vector<NoiseEvent>& out) const;

  /// Events of all bands below cap in one time block, sorted by time.
  void block_events(VertexKey key, double cap, std::uint32_t block, std::vector<NoiseEvent>& out) const;

  std::uint32_t block_of(Time t) const;
  std::uint32_t block_count() const { return blocks_; }

 private:
  std::uint64_t vertex_stream(VertexKey key) const;

  std::uint64_t seed_;
  JumpSpec jumps_;
  Time horizon_;
  double band_width_;
  double block_length_;
  std::uint32_t blocks_;
  std::shared_ptr<const std::map<VertexKey, std::vector<NoiseEvent>>> script_;
};

/// Forward iterator over one vertex's events in (0, horizon].
class EventCursor {
 public:
  EventCursor() = default;
  EventCursor(const DrivingNoise* noise, VertexKey key, double cap);

  /// Next event, or nullptr when exhausted. Valid until the next advance().
  const NoiseEvent* peek() const { return pos_ < buffer_.size() ? &buffer_[pos_] : nullptr; }
  void advance();

 private:
  void fill();

  const DrivingNoise* noise_ = nullptr;
  VertexKey key_ = 0;
  double cap_ = 0.0;
  std::uint32_t block_ = 0;
  std::vector<NoiseEvent> buffer_;
  std::size_t pos_ = 0;
};

}  // namespace ips
