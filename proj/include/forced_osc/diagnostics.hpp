#pragma once

// Twist coefficients of the special normal form, numeric twist and
// decay-order measurements of the period map, and boundedness scans.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "forced_osc/action_angle.hpp"
#include "forced_osc/errors.hpp"
#include "forced_osc/flow.hpp"
#include "forced_osc/normal_form.hpp"

namespace forced_osc {

/// α(Λ) = TΛ - Σ_j σ_j Λ^{(j-n-1)/(n-1)}, the κ-advance of the special
/// normal form over one backward period, with
/// σ_j = (j/(n+1)) ∫_0^{-T} f̄_j dt.
struct TwistData {
  int n = 2;
  double period = 1.0;
  std::map<int, double> sigma;  // j = 2..2n-1

  double exponent(int j) const { return double(j - n - 1) / double(n - 1); }

  double alpha(double lambda) const {
    double a = period * lambda;
    for (const auto& [j, s] : sigma) a -= s * std::pow(lambda, exponent(j));
    return a;
  }

  double dalpha(double lambda) const {
    double d = period;
    for (const auto& [j, s] : sigma) {
      const double e = exponent(j);
      if (e != 0.0) d -= s * e * std::pow(lambda, e - 1.0);
    }
    return d;
  }
};

/// Time average of a coefficient polynomial over one period (exact for the
/// trigonometric polynomials produced by the engine).
inline double time_mean(const nf::CoeffExpr& c, const Forcing& f) {
  if (c.is_zero()) return 0.0;
  std::size_t degree = 1, harmonics = 1;
  for (const auto& [m, v] : c.terms()) degree = std::max(degree, m.size());
  for (int j = 0; j < f.slots(); ++j) harmonics = std::max(harmonics, f.series(j).harmonics());
  const std::size_t samples = std::max<std::size_t>(256, 2 * degree * harmonics + 64);
  double sum = 0.0;
  for (std::size_t i = 0; i < samples; ++i) sum += c.evaluate(f, f.period() * double(i) / samples);
  return sum / double(samples);
}

inline TwistData twist_coefficients(const nf::NormalFormResult& r, const Forcing& f) {
  if (!r.H_special.kappa_free_from(2)) {
    throw ShapeError("twist_coefficients: H_special depends on κ at an exponent >= 2");
  }
  TwistData td;
  td.n = r.n;
  td.period = f.period();
  for (const auto& [j, fbar] : r.special_coefficients()) {
    // ∫_0^{-T} f̄ dt = -T · mean
    td.sigma[j] = double(j) / (r.n + 1) * -f.period() * time_mean(fbar, f);
  }
  return td;
}

/// ∂κ*/∂Λ of the numeric period map by central differences (relative step
/// `rel`), averaged over the κ-grid.
inline double twist_measure(const GenTrig& g, const Forcing& f, IntegratorConfig cfg,
                            double lambda, const std::vector<double>& kappas,
                            double rel = 1e-4) {
  if (kappas.empty()) throw DomainError("twist_measure: empty κ-grid");
  const int n = g.degree();
  cfg.rtol = std::min(cfg.rtol, 1e-12);
  cfg.atol = std::min(cfg.atol, 1e-14);
  const double h = rel * lambda;
  double sum = 0.0;
  for (double k : kappas) {
    const auto p = period_map(g, f, cfg, {action_from_lambda(lambda + h, n), k, 0.0});
    const auto m = period_map(g, f, cfg, {action_from_lambda(lambda - h, n), k, 0.0});
    sum += (p.kappa_star - m.kappa_star) / (2.0 * h);
  }
  const double sign = cfg.direction == Direction::backward ? 1.0 : -1.0;
  return sign * sum / double(kappas.size());
}

inline std::vector<double> uniform_kappa_grid(const GenTrig& g, int count) {
  std::vector<double> k(count);
  for (int i = 0; i < count; ++i) k[i] = g.period() * double(i) / count;
  return k;
}

inline std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) {
    v[i] = count == 1 ? lo : lo * std::pow(hi / lo, double(i) / double(count - 1));
  }
  return v;
}

struct DecayPoint {
  double lambda = 0.0;
  double max_F = 0.0;
  double max_G = 0.0;
  double noise = 0.0;  // integrator noise level of F and G at this Λ
};

struct DecayFit {
  std::vector<DecayPoint> points;
  double slope_F = std::nan("");
  double slope_G = std::nan("");
  int used_F = 0;
  int used_G = 0;
  int resolved_F = 0;  // points above the noise level
  int resolved_G = 0;
  std::vector<std::string> notes;

  bool degenerate() const {
    return used_F < 2 || used_G < 2 || resolved_F < 2 || resolved_G < 2;
  }
};

inline constexpr double kDecayFloor = 1e-13;

/// Least-squares slope of log y against log x over points with y >= floor.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, int* used,
                           double floor = kDecayFloor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] >= floor)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (used) *used = m;
  if (m < 2) return std::nan("");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

/// Slopes of log max_κ|F| and log max_κ|G - (α(Λ) - TΛ)| against log Λ.
inline DecayFit decay_fit(const GenTrig& g, const Forcing& f, const IntegratorConfig& cfg,
                          const std::vector<double>& lambdas, const std::vector<double>& kappas,
                          const TwistData* twist = nullptr) {
  if (lambdas.size() < 6) throw DomainError("decay_fit: needs at least 6 Λ values");
  if (*std::min_element(lambdas.begin(), lambdas.end()) < 5.0) {
    throw DomainError("decay_fit: Λ below 5 is outside the asymptotic range");
  }
  const int n = g.degree();
  DecayFit fit;
  std::vector<double> xs, fs, gs;
  for (double lam : lambdas) {
    DecayPoint p;
    p.lambda = lam;
    // κ* ~ TΛ and Λ* carry the integrator's relative error
    p.noise = 10.0 * cfg.rtol * std::max(1.0, f.period() * lam);
    const double correction = twist ? twist->alpha(lam) - f.period() * lam : 0.0;
    const double sign = cfg.direction == Direction::backward ? 1.0 : -1.0;
    for (double k : kappas) {
      const auto s = period_map(g, f, cfg, {action_from_lambda(lam, n), k, 0.0});
      p.max_F = std::max(p.max_F, std::abs(s.F));
      p.max_G = std::max(p.max_G, std::abs(s.G - sign * correction));
    }
    if (p.max_F > p.noise) ++fit.resolved_F;
    if (p.max_G > p.noise) ++fit.resolved_G;
    fit.points.push_back(p);
    xs.push_back(lam);
    fs.push_back(p.max_F);
    gs.push_back(p.max_G);
  }
  fit.slope_F = loglog_slope(xs, fs, &fit.used_F);
  fit.slope_G = loglog_slope(xs, gs, &fit.used_G);
  if (fit.used_F < int(xs.size())) {
    fit.notes.push_back(std::to_string(xs.size() - fit.used_F) + " F points below 1e-13 dropped");
  }
  if (fit.used_G < int(xs.size())) {
    fit.notes.push_back(std::to_string(xs.size() - fit.used_G) + " G points below 1e-13 dropped");
  }
  if (fit.degenerate()) {
    fit.notes.push_back("fit degenerate: fewer than two points above the noise level");
  }
  return fit;
}

struct ScanSeed {
  double K = 1.0;
  double kappa = 0.0;
};

/// K evenly spaced in [K_lo, K_hi]; κ from the golden-ratio sequence so the
/// seeds are reproducible without a random engine.
inline std::vector<ScanSeed> scan_seeds(const GenTrig& g, int count, double K_lo, double K_hi) {
  std::vector<ScanSeed> s(count);
  const double golden = 0.6180339887498949;
  for (int i = 0; i < count; ++i) {
    s[i].K = count == 1 ? K_lo : K_lo + (K_hi - K_lo) * double(i) / double(count - 1);
    const double frac = std::fmod(0.5 + golden * double(i), 1.0);
    s[i].kappa = g.period() * frac;
  }
  return s;
}

struct SeedResult {
  ScanSeed seed;
  double max_K = 0.0;
  double min_K = 0.0;
  long iterations = 0;
  bool escaped = false;
  std::string reason;

  double ratio() const { return min_K > 0.0 ? max_K / min_K : std::numeric_limits<double>::infinity(); }
};

struct ScanReport {
  std::vector<SeedResult> seeds;
  long iterations = 0;
  double ceiling = 0.0;

  int escapes() const {
    return int(std::count_if(seeds.begin(), seeds.end(), [](const auto& s) { return s.escaped; }));
  }
  double min_K() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : seeds) m = std::min(m, s.min_K);
    return m;
  }
  double max_K() const {
    double m = 0.0;
    for (const auto& s : seeds) m = std::max(m, s.max_K);
    return m;
  }
  double max_ratio() const {
    double m = 0.0;
    for (const auto& s : seeds) m = std::max(m, s.ratio());
    return m;
  }
};

/// Iterates the period map (in Cartesian coordinates) from each seed and
/// records the K-envelope. Seeds run on `jobs` threads; results keep seed order.
inline ScanReport boundedness_scan(const GenTrig& g, const Forcing& f, const IntegratorConfig& cfg,
                                   const std::vector<ScanSeed>& seeds, long iterations,
                                   double ceiling, int jobs = 1) {
  if (iterations < 1 || iterations > 1'000'000) {
    throw DomainError("boundedness_scan: iterations must lie in [1, 1e6]");
  }
  const int n = g.degree();
  const double T = f.period();
  const double t1 = cfg.direction == Direction::backward ? -T : T;
  ScanReport report;
  report.iterations = iterations;
  report.ceiling = ceiling;
  report.seeds.resize(seeds.size());

  auto run_one = [&](std::size_t i) {
    SeedResult r;
    r.seed = seeds[i];
    r.max_K = r.min_K = seeds[i].K;
    try {
      if (!std::isfinite(seeds[i].K) || !std::isfinite(seeds[i].kappa) || !(seeds[i].K > 0.0)) {
        throw DomainError("seed must have finite K > 0");
      }
      CartesianState s = from_action_angle(g, {seeds[i].K, seeds[i].kappa, 0.0});
      for (long it = 0; it < iterations; ++it) {
        s = integrate(f, cfg, s, t1);
        s.t = 0.0;  // the forcing is T-periodic
        const double K = action_of(s.x, s.y, n);
        r.max_K = std::max(r.max_K, K);
        r.min_K = std::min(r.min_K, K);
        r.iterations = it + 1;
        if (!std::isfinite(K) || K > ceiling) {
          r.escaped = true;
          r.reason = "K exceeded the ceiling";
          break;
        }
        if (K < kActionFloor) {
          r.escaped = true;
          r.reason = "orbit reached the chart floor";
          break;
        }
      }
    } catch (const std::exception& e) {
      r.escaped = true;
      r.reason = e.what();
    }
    report.seeds[i] = r;
  };

  jobs = std::max(1, jobs);
  if (jobs == 1 || seeds.size() < 2) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  return report;
}

}  // namespace forced_osc
