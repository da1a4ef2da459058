#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>

#include "forced_osc/errors.hpp"

namespace forced_osc::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Tolerances {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 picks one automatically
  long max_steps = 50'000'000;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

namespace detail {

// Dormand-Prince tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b*, the embedded 4th-order error estimate weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                        e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 to t1 (either direction).
///
/// The local error of every accepted step satisfies
/// |err_i| <= atol + rtol * max(|y_i|, |y_new_i|). `observer(t, y)` is
/// called after every accepted step, including the last; returning false
/// stops the integration early and the current state is returned.
template <std::size_t N, class Rhs, class Observer>
State<N> integrate(Rhs&& rhs, State<N> y, double t0, double t1,
                   const Tolerances& tol, Observer&& observer,
                   Stats* stats = nullptr) {
  using namespace detail;
  if (t1 == t0) return y;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  Stats local;

  auto norm = [&](const State<N>& a, const State<N>& b, const State<N>& err) {
    double worst = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = tol.atol + tol.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
      worst = std::max(worst, std::abs(err[i]) / sc);
    }
    return worst;
  };

  State<N> k1 = rhs(t0, y);
  ++local.rhs_evals;
  double h = tol.initial_step;
  if (h <= 0.0) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = tol.atol + tol.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(k1[i]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, span);
  }
  h = std::min(h, tol.max_step);

  double t = t0;
  State<N> k2, k3, k4, k5, k6, k7, tmp, ynew, err;
  while (dir * (t1 - t) > 0.0) {
    if (local.accepted + local.rejected > tol.max_steps) {
      throw IntegrationError("ode::integrate: step budget exhausted");
    }
    bool last = false;
    if (h >= std::abs(t1 - t)) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double hs = dir * h;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
    k2 = rhs(t + c2 * hs, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs(t + c3 * hs, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(t + c4 * hs, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(t + c5 * hs, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                            a65 * k5[i]);
    k6 = rhs(t + hs, tmp);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                             b6 * k6[i]);
    const double tnew = last ? t1 : t + hs;
    k7 = rhs(tnew, ynew);
    local.rhs_evals += 6;
    for (std::size_t i = 0; i < N; ++i)
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                     e7 * k7[i]);
    const double en = norm(y, ynew, err);
    if (!std::isfinite(en)) {
      ++local.rejected;
      h *= 0.25;
    } else if (en <= 1.0) {
      ++local.accepted;
      t = tnew;
      y = ynew;
      k1 = k7;  // first-same-as-last
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h = std::min(h * fac, tol.max_step);
      if (!observer(t, y)) break;
      if (last) break;
    } else {
      ++local.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
    }
    if (h < 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "ode::integrate: step size underflow at t = " << t << " (h = " << h << ")";
      throw IntegrationError(os.str());
    }
  }
  if (stats) {
    stats->accepted += local.accepted;
    stats->rejected += local.rejected;
    stats->rhs_evals += local.rhs_evals;
  }
  return y;
}

template <std::size_t N, class Rhs>
State<N> integrate(Rhs&& rhs, State<N> y, double t0, double t1,
                   const Tolerances& tol, Stats* stats = nullptr) {
  return integrate<N>(std::forward<Rhs>(rhs), y, t0, t1, tol,
                      [](double, const State<N>&) { return true; }, stats);
}

}  // namespace forced_osc::ode
