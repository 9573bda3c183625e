#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chaoslab {

template <class F>
CircleMax circle_max_generic(const F& f, double r, int samples, double m0, double m1, double m2) {
  CircleMax out;
  if (r == 0.0) {
    out.sampled = std::abs(f(cplx(0.0)));
    out.upper = out.sampled;
    return out;
  }
  const double step = 2.0 * std::numbers::pi / samples;
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    best = std::max(best, std::abs(f(std::polar(r, s * step))));
  }
  const double curvature = 2.0 * (m0 * m2 + m1 * m1);
  const double sq = best * best + curvature * step * step / 8.0;
  out.sampled = best;
  out.upper = std::sqrt(sq);
  return out;
}

}  // namespace chaoslab
