#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace cwids {

using NodeId = std::uint32_t;
using SimTime = double;  // simulated seconds since run start

inline constexpr NodeId kBroadcast = std::numeric_limits<NodeId>::max();

struct Position {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace cwids
