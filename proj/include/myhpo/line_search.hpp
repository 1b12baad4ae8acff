#pragma once

namespace myhpo {

struct BacktrackResult {
  double step = 0.0;     // accepted step, 0 when stalled
  double value = 0.0;    // merit at the accepted point, f0 when stalled
  int evaluations = 0;   // merit evaluations at trial points
  int halvings = 0;
  bool stalled = false;  // no decrease within max_halvings
};

// Tries x - t*direction for t = step0, step0/2, ... (at most max_halvings
// halvings) and accepts the first t whose merit is strictly below f0.
template <class Point, class Merit>
BacktrackResult backtrack(Merit&& merit, const Point& x, const Point& direction, double f0,
                          double step0, int max_halvings) {
  BacktrackResult out;
  double t = step0;
  for (int h = 0; h <= max_halvings; ++h) {
    const Point trial = x - t * direction;
    ++out.evaluations;
    const double f = merit(trial);
    if (f < f0) {
      out.step = t;
      out.value = f;
      out.halvings = h;
      return out;
    }
    t *= 0.5;
  }
  out.value = f0;
  out.halvings = max_halvings;
  out.stalled = true;
  return out;
}

}  // namespace myhpo
