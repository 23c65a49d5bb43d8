#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ips {

/// Dense index of a vertex inside one MarkedGraph.
using VertexId = std::uint32_t;
/// Stable external identity of a vertex; preserved by subgraph operations.
using VertexLabel = std::uint64_t;
/// Key of a vertex's driving noise and per-vertex randomness.
using VertexKey = std::uint64_t;

using State = std::int32_t;
using Time = double;
using Mark = std::vector<double>;

inline constexpr VertexId kNoVertex = static_cast<VertexId>(-1);

enum class ErrorCode {
  InvalidArgument,
  NoRoot,
  UnknownVertex,
  BudgetExceeded,
  TooLarge,
  ZeroMean,
  OddDegreeSum,
  WindowOutOfRange,
  MarkOutOfRange,
  UnboundedHazard,
  StateEscape,
  NonFinite,
  NotMarkov,
  StateSpaceTooLarge,
  Exhausted,
  InvalidGraph,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ips
