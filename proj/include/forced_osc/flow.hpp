#pragma once

// Forced oscillator flow, the period map over one forcing period and its
// Jacobian. Trajectories are integrated in Cartesian coordinates; the
// action-angle chart is only used at the endpoints.

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "forced_osc/action_angle.hpp"
#include "forced_osc/errors.hpp"
#include "forced_osc/forcing.hpp"
#include "forced_osc/gentrig.hpp"
#include "forced_osc/ode.hpp"

namespace forced_osc {

enum class Direction { forward, backward };

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  Direction direction = Direction::backward;

  void check() const {
    if (!(rtol > 0.0 && rtol <= 1e-6) || !(atol > 0.0 && atol <= 1e-6)) {
      throw DomainError("IntegratorConfig: rtol and atol must lie in (0, 1e-6]");
    }
    if (!(max_step > 0.0)) throw DomainError("IntegratorConfig: max_step must be positive");
  }

  ode::Tolerances tolerances() const {
    check();
    ode::Tolerances t;
    t.rtol = rtol;
    t.atol = atol;
    t.max_step = max_step;
    return t;
  }
};

inline constexpr double kActionFloor = 1e-6;

/// (ẋ, ẏ) = (y, -n x^{2n-1} + Σ_j p_j(t) x^j)
inline std::array<double, 2> vf_xy(const Forcing& f, double t, double x, double y) {
  const int n = f.degree();
  return {y, -n * std::pow(x, 2 * n - 1) + f.polynomial(t, x)};
}

/// (Λ̇, κ̇) from K̇ = ∂H/∂κ, κ̇ = -∂H/∂K with Λ = K^{(n-1)/(n+1)}.
inline std::array<double, 2> vf_aa(const GenTrig& g, const Forcing& f, double t, double lambda,
                                   double kappa) {
  const int n = g.degree();
  if (n < 2) throw DomainError("vf_aa: Λ is only a chart for n >= 2");
  if (!(lambda > 0.0)) throw DomainError("vf_aa: Λ must be positive");
  const double K = action_from_lambda(lambda, n);
  const auto [sn, cn] = g.sncn(kappa);
  double dH_dkappa = 0.0;
  double dH_dK = lambda;  // ∂/∂K of ((n+1)/(2n)) K^{2n/(n+1)}
  for (int j = 1; j <= 2 * n - 1; ++j) {
    if (!f.present(j - 1)) continue;
    const double p = f.p(j - 1, t);
    const double scale = -(double(n + 1) / (double(j) * n)) * p;
    const double Kj = action_power(K, j, n);
    dH_dkappa += Kj * scale * double(j) * std::pow(sn, j - 1) * cn;
    dH_dK += double(j) / (n + 1) * Kj / K * scale * std::pow(sn, j);
  }
  const double dlambda = double(n - 1) / (n + 1) * lambda / K * dH_dkappa;
  return {dlambda, -dH_dK};
}

inline CartesianState integrate(const Forcing& f, const IntegratorConfig& cfg,
                                const CartesianState& s, double t1,
                                ode::Stats* stats = nullptr) {
  if (t1 == s.t) throw DomainError("integrate: t1 must differ from t0");
  if (!std::isfinite(s.x) || !std::isfinite(s.y)) throw DomainError("integrate: state not finite");
  auto rhs = [&f](double t, const ode::State<2>& u) { return vf_xy(f, t, u[0], u[1]); };
  const auto out = ode::integrate<2>(rhs, {s.x, s.y}, s.t, t1, cfg.tolerances(), stats);
  return {out[0], out[1], t1};
}

/// Integrates in the (Λ, κ) chart; κ is not reduced.
inline std::array<double, 2> integrate_aa(const GenTrig& g, const Forcing& f,
                                          const IntegratorConfig& cfg, double lambda,
                                          double kappa, double t0, double t1,
                                          ode::Stats* stats = nullptr) {
  if (t1 == t0) throw DomainError("integrate_aa: t1 must differ from t0");
  auto rhs = [&](double t, const ode::State<2>& u) {
    if (!(u[0] > 0.0)) throw ChartError("integrate_aa: Λ left the positive half line");
    return vf_aa(g, f, t, u[0], u[1]);
  };
  const auto out = ode::integrate<2>(rhs, {lambda, kappa}, t0, t1, cfg.tolerances(), stats);
  return {out[0], out[1]};
}

/// 4τ K^{-(n-1)/(n+1)}
inline double unforced_return_time(const GenTrig& g, double K) {
  if (!(K > 0.0)) throw DomainError("unforced_return_time: K must be positive");
  const int n = g.degree();
  return 4.0 * g.tau() * action_power(K, -(n - 1), n);
}

/// Quarter of the (x, y) plane in which κ mod 4τ lies in [qτ, (q+1)τ).
inline int angle_quadrant(double x, double y) {
  if (x >= 0.0 && y < 0.0) return 0;
  if (x > 0.0 && y >= 0.0) return 1;
  if (x <= 0.0 && y > 0.0) return 2;
  return 3;
}

struct PeriodMapSample {
  double K = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;  // reduced input angle
  double K_star = 0.0;
  double lambda_star = 0.0;
  double kappa_star = 0.0;  // unwrapped so that kappa_star - kappa is the total rotation
  double F = 0.0;           // Λ* - Λ
  double G = 0.0;           // κ* - κ - (±TΛ)
  long winding = 0;         // full turns added to the reduced output angle
  long quadrant_steps = 0;  // signed count of quadrant crossings
};

namespace detail {

struct QuadrantTracker {
  int q = 0;
  long steps = 0;
  bool skipped = false;
  double min_K = std::numeric_limits<double>::infinity();

  void update(double x, double y, int n) {
    min_K = std::min(min_K, action_of(x, y, n));
    const int nq = angle_quadrant(x, y);
    int d = ((nq - q) % 4 + 4) % 4;
    if (d == 3) d = -1;
    if (d == 2) skipped = true;
    steps += d;
    q = nq;
  }
};

}  // namespace detail

/// One forcing period from t = 0 (to -T by default) starting at (K, κ).
inline PeriodMapSample period_map(const GenTrig& g, const Forcing& f, const IntegratorConfig& cfg,
                                  const ActionAngleState& start) {
  const int n = g.degree();
  if (f.degree() != n) throw DomainError("period_map: forcing degree differs from GenTrig");
  if (!(start.K > kActionFloor)) throw ChartError("period_map: initial K below the chart floor");
  const double T = f.period();
  const double t1 = start.t + (cfg.direction == Direction::backward ? -T : T);
  const double tau = g.tau();
  const double kappa0 = reduce_angle(start.kappa, g.period());
  const auto c0 = from_action_angle(g, {start.K, kappa0, start.t});
  const int q0 = std::min(3, int(kappa0 / tau));

  ode::Tolerances tol = cfg.tolerances();
  // Keep steps well below a quarter turn so quadrant counting is reliable.
  double cap = 0.25 * tau / std::max(lambda_from_action(start.K, n), 1e-3);
  auto rhs = [&f](double t, const ode::State<2>& u) { return vf_xy(f, t, u[0], u[1]); };

  for (int attempt = 0; attempt < 6; ++attempt, cap *= 0.25) {
    tol.max_step = std::min(cfg.max_step, cap);
    detail::QuadrantTracker tr;
    tr.q = angle_quadrant(c0.x, c0.y);
    const auto end = ode::integrate<2>(
        rhs, {c0.x, c0.y}, start.t, t1, tol,
        [&](double t, const ode::State<2>& u) {
          tr.update(u[0], u[1], n);
          if (tr.min_K < kActionFloor) {
            std::ostringstream os;
            os << "period_map: trajectory reached K = " << tr.min_K << " < " << kActionFloor
               << " at t = " << t;
            throw ChartError(os.str());
          }
          return !tr.skipped;
        });
    if (tr.skipped) continue;

    const auto aa = to_action_angle(g, {end[0], end[1], t1});
    // The quadrant count pins the unwrapped angle to within a quarter turn.
    const double expected = (double(q0) + double(tr.steps) + 0.5) * tau;
    const long w = std::lround((expected - aa.kappa) / (4.0 * tau));

    PeriodMapSample s;
    s.K = start.K;
    s.lambda = lambda_from_action(start.K, n);
    s.kappa = kappa0;
    s.K_star = aa.K;
    s.lambda_star = lambda_from_action(aa.K, n);
    s.kappa_star = aa.kappa + 4.0 * tau * double(w);
    s.winding = w;
    s.quadrant_steps = tr.steps;
    s.F = s.lambda_star - s.lambda;
    const double twist = (cfg.direction == Direction::backward ? 1.0 : -1.0) * T * s.lambda;
    s.G = s.kappa_star - s.kappa - twist;
    return s;
  }
  throw IntegrationError("period_map: quadrant tracking failed even with reduced steps");
}

struct OrbitPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double K = 0.0;
  double kappa = 0.0;  // reduced to [0, 4τ)
  double lambda = 0.0;
  long winding = 0;  // full turns of κ since the start
};

/// Trajectory sampled at `samples` equally spaced times from s.t to t1.
/// Windings come from quadrant counting along the integrator steps.
inline std::vector<OrbitPoint> sample_orbit(const GenTrig& g, const Forcing& f,
                                            const IntegratorConfig& cfg, const CartesianState& s,
                                            double t1, int samples) {
  const int n = g.degree();
  if (f.degree() != n) throw DomainError("sample_orbit: forcing degree differs from GenTrig");
  if (samples < 2) throw DomainError("sample_orbit: needs at least 2 samples");
  if (t1 == s.t) throw DomainError("sample_orbit: t1 must differ from the start time");
  const double tau = g.tau();
  auto rhs = [&f](double t, const ode::State<2>& u) { return vf_xy(f, t, u[0], u[1]); };

  auto point = [&](double t, double x, double y, double unwrap0, long steps) {
    OrbitPoint p{t, x, y, action_of(x, y, n), 0.0, 0.0, 0};
    p.lambda = n >= 2 ? lambda_from_action(p.K, n) : p.K;
    if (p.K > 0.0) p.kappa = to_action_angle(g, {x, y, t}).kappa;
    const double expected = (unwrap0 + double(steps) + 0.5) * tau;
    const double unwrapped = p.kappa + 4.0 * tau * std::round((expected - p.kappa) / (4.0 * tau));
    p.winding = long(std::floor((unwrapped - unwrap0 * tau) / (4.0 * tau)));
    return p;
  };

  // Windings count from the start of the quadrant holding the initial angle.
  const double kappa0 = s.x == 0.0 && s.y == 0.0 ? 0.0 : to_action_angle(g, s).kappa;
  const double q0 = std::min(3.0, std::floor(kappa0 / tau));
  std::vector<OrbitPoint> out;
  out.reserve(samples);
  out.push_back(point(s.t, s.x, s.y, q0, 0));

  ode::State<2> u{s.x, s.y};
  detail::QuadrantTracker tr;
  tr.q = angle_quadrant(s.x, s.y);
  for (int i = 1; i < samples; ++i) {
    const double ta = s.t + (t1 - s.t) * double(i - 1) / double(samples - 1);
    const double tb = i == samples - 1 ? t1 : s.t + (t1 - s.t) * double(i) / double(samples - 1);
    ode::Tolerances tol = cfg.tolerances();
    const double lam = n >= 2 ? lambda_from_action(std::max(action_of(u[0], u[1], n), 1e-12), n) : 1.0;
    double cap = 0.25 * tau / std::max(lam, 1e-3);
    bool done = false;
    for (int attempt = 0; attempt < 6 && !done; ++attempt, cap *= 0.25) {
      tol.max_step = std::min(cfg.max_step, cap);
      detail::QuadrantTracker trial = tr;
      trial.skipped = false;
      const auto end = ode::integrate<2>(rhs, u, ta, tb, tol, [&](double, const ode::State<2>& v) {
        trial.update(v[0], v[1], n);
        return !trial.skipped;
      });
      if (trial.skipped) continue;
      u = end;
      tr = trial;
      done = true;
    }
    if (!done) throw IntegrationError("sample_orbit: quadrant tracking failed even with reduced steps");
    out.push_back(point(tb, u[0], u[1], q0, tr.steps));
  }
  return out;
}

/// Central differences of (K, κ) -> (K*, κ*) with steps dK = hK, dκ = h.
/// Entries are [[∂K*/∂K, ∂K*/∂κ], [∂κ*/∂K, ∂κ*/∂κ]].
inline std::array<std::array<double, 2>, 2> period_map_jacobian(const GenTrig& g,
                                                               const Forcing& f,
                                                               IntegratorConfig cfg,
                                                               const ActionAngleState& s,
                                                               double h = 1e-4) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw DomainError("period_map_jacobian: h must lie in [1e-7, 1e-3]");
  // Differencing amplifies integration error by 1/h, so tighten the tolerances.
  cfg.rtol = std::min(cfg.rtol, 1e-12);
  cfg.atol = std::min(cfg.atol, 1e-14);
  const double dK = h * s.K;
  auto eval = [&](double K, double kappa) {
    // κ is not reduced here so the four probes share one unwrapping branch.
    const auto m = period_map(g, f, cfg, {K, kappa, s.t});
    return std::array<double, 2>{m.K_star, m.kappa_star + (kappa - m.kappa)};
  };
  const auto pK = eval(s.K + dK, s.kappa), mK = eval(s.K - dK, s.kappa);
  const auto pk = eval(s.K, s.kappa + h), mk = eval(s.K, s.kappa - h);
  return {{{(pK[0] - mK[0]) / (2 * dK), (pk[0] - mk[0]) / (2 * h)},
           {(pK[1] - mK[1]) / (2 * dK), (pk[1] - mk[1]) / (2 * h)}}};
}

inline double determinant(const std::array<std::array<double, 2>, 2>& m) {
  return m[0][0] * m[1][1] - m[0][1] * m[1][0];
}

}  // namespace forced_osc
