#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wsnlr {

using NodeId = std::int32_t;
using PathId = std::int32_t;

inline constexpr NodeId kNoNode = -1;

/// Planar position in meters.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Load repartition strategy run by every source.
///   0: single best path, no reaction
///   1: uniform split over every known path from the start
///   2: add one path per congestion notification
///   3: spread the congested path's rate over every known path
enum class Mode : int { SinglePath = 0, AllPaths = 1, Incremental = 2, Rebalance = 3 };

inline Mode mode_from_int(int m) {
  if (m < 0 || m > 3) throw std::invalid_argument("mode must be in {0,1,2,3}, got " + std::to_string(m));
  return static_cast<Mode>(m);
}

inline int to_int(Mode m) { return static_cast<int>(m); }

/// Base error for domain failures. The message starts with a short tag
/// ("unconnectable", "broken path", ...) callers can match on.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wsnlr
