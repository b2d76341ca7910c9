/**
 * @file phase_state.hpp
 * @brief Chart-tagged points of T*S^2 and the chart involution.
 */
#pragma once

#include <cmath>
#include <numbers>

#include "qfl/metric_family.hpp"

namespace qfl {

/// (x, y, p_x, p_y) in the NORTH or SOUTH (x, y)-chart; x kept in [0, 2pi).
struct PhaseState {
  Chart chart = Chart::NORTH;
  double x = 0.0;
  double y = 0.0;
  double px = 0.0;
  double py = 0.0;
};

/// x reduced to [0, 2pi).
[[nodiscard]] inline double wrap_angle(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(x, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

[[nodiscard]] inline PhaseState normalized(PhaseState s) {
  s.x = wrap_angle(s.x);
  return s;
}

/// (x, y, p_x, p_y) -> (-x mod 2pi, -y, -p_x, -p_y) with the chart flipped.
/// The map is canonical (x -> -x, y -> -y lifts to p -> -p) and an involution.
[[nodiscard]] inline PhaseState chart_switch(const PhaseState& s) {
  return {s.chart == Chart::NORTH ? Chart::SOUTH : Chart::NORTH, wrap_angle(-s.x), -s.y, -s.px,
          -s.py};
}

/// The same point expressed in the north chart.
[[nodiscard]] inline PhaseState to_north(const PhaseState& s) {
  return s.chart == Chart::NORTH ? s : chart_switch(s);
}

}  // namespace qfl
