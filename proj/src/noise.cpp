#include "ips/noise.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ips/random.hpp"

namespace ips {

JumpSpec::JumpSpec(std::vector<State> jumps, std::vector<double> weights)
    : jumps_(std::move(jumps)), weights_(std::move(weights)) {
  if (jumps_.empty()) throw Error(ErrorCode::InvalidArgument, "jump set is empty");
  if (jumps_.size() != weights_.size()) throw Error(ErrorCode::InvalidArgument, "jumps and weights differ in length");
  std::set<State> seen;
  for (std::size_t i = 0; i < jumps_.size(); ++i) {
    if (jumps_[i] == 0) throw Error(ErrorCode::InvalidArgument, "jump 0 is not allowed");
    if (!seen.insert(jumps_[i]).second) throw Error(ErrorCode::InvalidArgument, "duplicate jump");
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
      throw Error(ErrorCode::InvalidArgument, "jump weights must be positive and finite");
    total_ += weights_[i];
    cumulative_.push_back(total_);
  }
}

JumpSpec JumpSpec::uniform(std::vector<State> jumps) {
  std::vector<double> weights(jumps.size(), 1.0);
  return JumpSpec(std::move(jumps), std::move(weights));
}

double JumpSpec::weight(State jump) const {
  for (std::size_t i = 0; i < jumps_.size(); ++i)
    if (jumps_[i] == jump) return weights_[i];
  return 0.0;
}

std::size_t JumpSpec::pick(double u) const {
  const double x = u * total_;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
  return std::min(static_cast<std::size_t>(it - cumulative_.begin()), jumps_.size() - 1);
}

DrivingNoise::DrivingNoise(std::uint64_t seed, JumpSpec jumps, Time horizon, double band_width, double block_length)
    : seed_(seed), jumps_(std::move(jumps)), horizon_(horizon), band_width_(band_width), block_length_(block_length) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (!(band_width > 0.0) || !std::isfinite(band_width))
    throw Error(ErrorCode::InvalidArgument, "band width must be positive");
  if (!(block_length > 0.0) || !std::isfinite(block_length))
    throw Error(ErrorCode::InvalidArgument, "block length must be positive");
  const double blocks = std::ceil(horizon / block_length);
  if (blocks > 1e9) throw Error(ErrorCode::InvalidArgument, "too many time blocks");
  blocks_ = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(blocks));
}

DrivingNoise DrivingNoise::scripted(JumpSpec jumps, Time horizon, std::map<VertexKey, std::vector<NoiseEvent>> table,
                                    double block_length) {
  DrivingNoise noise(0, std::move(jumps), horizon, 1.0, block_length);
  for (auto& [key, list] : table) {
    for (const auto& e : list)
      if (!(e.t > 0.0) || !(e.r > 0.0) || noise.jumps_.weight(e.j) == 0.0)
        throw Error(ErrorCode::InvalidArgument, "scripted event outside (0, inf) x (0, inf) x jumps");
    std::sort(list.begin(), list.end(), [](const NoiseEvent& a, const NoiseEvent& b) { return a.t < b.t; });
  }
  noise.script_ = std::make_shared<const std::map<VertexKey, std::vector<NoiseEvent>>>(std::move(table));
  return noise;
}

std::uint64_t DrivingNoise::vertex_stream(VertexKey key) const { return hash_words({seed_, key}); }

std::uint32_t DrivingNoise::block_of(Time t) const {
  const double b = std::floor(std::max(t, 0.0) / block_length_);
  return b >= blocks_ ? blocks_ - 1 : static_cast<std::uint32_t>(b);
}

void DrivingNoise::cell_events(VertexKey key, double cap, std::uint32_t band, std::uint32_t block,
                               std::vector<NoiseEvent>& out) const {
  // One Philox block per candidate: 64 bits for the gap, 32 for the level,
  // 32 for the jump type.
  const std::uint64_t stream = vertex_stream(key);
  const Philox4x32::Key k{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  const double rate = band_width_ * jumps_.total();
  const double start = block * block_length_;
  constexpr double kWord = 0x1.0p-32;
  double s = 0.0;
  for (std::uint32_t i = 0;; ++i) {
    const auto w = Philox4x32::apply({static_cast<std::uint32_t>(Stream::Noise), band, block, i}, k);
    s -= std::log(to_unit_open((std::uint64_t{w[0]} << 32) | w[1])) / rate;
    if (s > block_length_) break;
    const double r = (band + (w[2] + 0.5) * kWord) * band_width_;
    if (r <= cap) out.push_back({start + s, r, jumps_.jumps()[jumps_.pick((w[3] + 0.5) * kWord)]});
  }
}

void DrivingNoise::block_events(VertexKey key, double cap, std::uint32_t block, std::vector<NoiseEvent>& out) const {
  const std::size_t first = out.size();
  if (cap <= 0.0) return;
  if (script_) {
    const auto it = script_->find(key);
    if (it == script_->end()) return;
    const double lo = block * block_length_, hi = (block + 1) * block_length_;
    for (const auto& e : it->second)
      if (e.r <= cap && e.t > lo && e.t <= hi) out.push_back(e);
    return;
  }
  const auto bands = static_cast<std::uint32_t>(std::ceil(cap / band_width_));
  for (std::uint32_t band = 0; band < bands; ++band) cell_events(key, cap, band, block, out);
  if (bands > 1)
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
              [](const NoiseEvent& a, const NoiseEvent& b) { return a.t < b.t || (a.t == b.t && a.r < b.r); });
}

std::vector<NoiseEvent> DrivingNoise::events(VertexKey key, double cap, Time t1, Time t2) const {
  if (!(t1 >= 0.0) || !(t2 <= horizon_) || !(t1 <= t2))
    throw Error(ErrorCode::WindowOutOfRange, "window (" + std::to_string(t1) + ", " + std::to_string(t2) +
                                                 "] outside [0, " + std::to_string(horizon_) + "]");
  std::vector<NoiseEvent> out;
  if (t1 == t2) return out;
  const double expected = cap * jumps_.total() * (t2 - t1);
  out.reserve(static_cast<std::size_t>(expected + 3.0 * std::sqrt(expected) + 4.0));
  for (std::uint32_t b = block_of(t1); b <= block_of(t2); ++b) block_events(key, cap, b, out);
  std::erase_if(out, [&](const NoiseEvent& e) { return !(e.t > t1 && e.t <= t2); });
  return out;
}

std::optional<NoiseEvent> DrivingNoise::first_event_after(VertexKey key, double cap, Time t) const {
  std::vector<NoiseEvent> buf;
  for (std::uint32_t b = block_of(t); b < blocks_; ++b) {
    buf.clear();
    block_events(key, cap, b, buf);
    for (const auto& e : buf)
      if (e.t > t) return e.t <= horizon_ ? std::optional<NoiseEvent>(e) : std::nullopt;
  }
  return std::nullopt;
}

std::optional<NoiseEvent> DrivingNoise::last_event_before(VertexKey key, double cap, Time t) const {
  if (t <= 0.0) return std::nullopt;
  std::vector<NoiseEvent> buf;
  for (std::uint32_t b = block_of(std::min(t, horizon_)) + 1; b-- > 0;) {
    buf.clear();
    block_events(key, cap, b, buf);
    for (auto it = buf.rbegin(); it != buf.rend(); ++it)
      if (it->t < t && it->t <= horizon_) return *it;
  }
  return std::nullopt;
}

bool DrivingNoise::any_event(VertexKey key, double cap, Time t1, Time t2) const {
  return !events(key, cap, t1, t2).empty();
}

EventCursor::EventCursor(const DrivingNoise* noise, VertexKey key, double cap) : noise_(noise), key_(key), cap_(cap) {
  fill();
}

void EventCursor::fill() {
  buffer_.clear();
  pos_ = 0;
  while (block_ < noise_->block_count()) {
    noise_->block_events(key_, cap_, block_, buffer_);
    ++block_;
    while (!buffer_.empty() && buffer_.back().t > noise_->horizon()) buffer_.pop_back();
    if (!buffer_.empty()) return;
  }
}

void EventCursor::advance() {
  if (++pos_ >= buffer_.size()) fill();
}

}  // namespace ips
