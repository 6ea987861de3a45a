#pragma once

// Adaptive Dormand-Prince 5(4) integration for planar autonomous fields with
// location of a sign change of one state component.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>

#include "akc/errors.hpp"

namespace akc {

using State2 = std::array<double, 2>;

struct DopriResult {
  State2 y{};
  double error = 0.0;
};

template <class F>
DopriResult dopri5_step(const F& f, const State2& y, double h) {
  static constexpr double a21 = 1.0 / 5, a31 = 3.0 / 40, a32 = 9.0 / 40, a41 = 44.0 / 45,
                          a42 = -56.0 / 15, a43 = 32.0 / 9, a51 = 19372.0 / 6561,
                          a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729,
                          a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656, b1 = 35.0 / 384,
                          b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84, e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                          e7 = -1.0 / 40;
  auto axpy = [&](std::initializer_list<std::pair<double, const State2*>> terms) {
    State2 out = y;
    for (auto [c, k] : terms)
      for (int i = 0; i < 2; ++i) out[i] += h * c * (*k)[i];
    return out;
  };
  const State2 k1 = f(y);
  const State2 k2 = f(axpy({{a21, &k1}}));
  const State2 k3 = f(axpy({{a31, &k1}, {a32, &k2}}));
  const State2 k4 = f(axpy({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const State2 k5 = f(axpy({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const State2 k6 = f(axpy({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  DopriResult r;
  r.y = axpy({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  const State2 k7 = f(r.y);
  for (int i = 0; i < 2; ++i) {
    const double e =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    r.error = std::max(r.error, std::abs(e));
  }
  return r;
}

struct EventResult {
  double time = 0.0;
  State2 y{};
  std::size_t steps = 0;
};

/// Integrates y' = f(y) from y0 until component `comp` first changes sign
/// from `sign` (+1 or -1). Steps are controlled to an absolute error of
/// atol per step; the crossing is refined by secant iteration on the step
/// length until |y[comp]| <= event_tol.
template <class F>
EventResult integrate_to_crossing(const F& f, State2 y0, int comp, int sign, double h0,
                                  double atol, double event_tol,
                                  std::size_t max_steps = 2'000'000) {
  State2 y = y0;
  double t = 0.0, h = h0;
  std::size_t steps = 0;
  while (steps < max_steps) {
    DopriResult r = dopri5_step(f, y, h);
    ++steps;
    if (r.error > atol) {
      h *= std::max(0.2, 0.9 * std::pow(atol / r.error, 0.2));
      continue;
    }
    if (sign * r.y[comp] <= 0.0) {
      // Secant on the step length from the last accepted state.
      double ha = 0.0, fa = y[comp], hb = h, fb = r.y[comp];
      State2 yb = r.y;
      for (int it = 0; it < 100 && std::abs(fb) > event_tol; ++it) {
        const double hs = hb - fb * (hb - ha) / (fb - fa);
        const DopriResult rs = dopri5_step(f, y, hs);
        ++steps;
        ha = hb;
        fa = fb;
        hb = hs;
        fb = rs.y[comp];
        yb = rs.y;
      }
      if (std::abs(fb) > event_tol)
        throw IntegrationFailure("event location did not converge");
      return {t + hb, yb, steps};
    }
    t += h;
    y = r.y;
    const double grow = r.error > 0 ? 0.9 * std::pow(atol / r.error, 0.2) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);
  }
  throw IntegrationFailure("no return detected within " + std::to_string(max_steps) + " steps");
}

}  // namespace akc
