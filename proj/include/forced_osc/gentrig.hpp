#pragma once

// Generalized trigonometric functions sn, cn of degree n:
//   sn'' + n sn^{2n-1} = 0, sn(0) = 0, sn'(0) = 1, cn = sn',
// with cn^2 + sn^{2n} = 1 and quarter period
//   τ = ∫_0^1 (1 - ξ^{2n})^{-1/2} dξ = B(1/(2n), 1/2) / (2n).
// For n = 1 these are sin and cos; for n = 2 the lemniscate pair.

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "forced_osc/errors.hpp"
#include "forced_osc/fourier.hpp"
#include "forced_osc/ode.hpp"

namespace forced_osc {

/// Beta-function closed form of the quarter period.
inline double quarter_period(int n) {
  if (n < 1) throw DomainError("quarter_period: degree must be >= 1");
  return std::beta(1.0 / (2.0 * n), 0.5) / (2.0 * n);
}

/// Adaptive Gauss-Kronrod value of ∫_0^1 (1 - ξ^{2n})^{-1/2} dξ after the
/// substitution ξ = 1 - u^2, which removes the endpoint singularity.
inline double quarter_period_quadrature(int n, double tol = 1e-14) {
  if (n < 1) throw DomainError("quarter_period_quadrature: degree must be >= 1");
  const double two_n = 2.0 * n;
  auto integrand = [two_n](double u) {
    const double u2 = u * u;
    const double denom = -std::expm1(two_n * std::log1p(-u2));
    return 2.0 * u / std::sqrt(denom);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0,
                                                                       20, tol);
}

struct ProfileSeries {
  fourier::Spectrum spectrum;  // base frequency π/(2τ)
  double residual = 0.0;       // l2 norm of the discarded harmonics
  bool truncated = false;      // residual exceeded the build tolerance
};

class GenTrig {
 public:
  static constexpr int kDefaultHarmonics = 64;
  static constexpr int kQuarterSamples = 2048;

  static GenTrig build(int n, int harmonics = kDefaultHarmonics, double tol = 1e-10) {
    if (n < 1) throw DomainError("build_gentrig: degree must be >= 1");
    if (harmonics < 8) throw DomainError("build_gentrig: need at least 8 harmonics");
    if (!(tol > 0.0 && tol <= 1e-8)) throw DomainError("build_gentrig: tolerance must lie in (0, 1e-8]");
    GenTrig g;
    g.n_ = n;
    g.tol_ = tol;
    g.harmonics_ = harmonics;
    g.tau_ = quarter_period(n);
    g.tau_quadrature_ = quarter_period_quadrature(n);
    if (std::abs(g.tau_ - g.tau_quadrature_) > 10.0 * tol) {
      std::ostringstream os;
      os << "build_gentrig: Beta value " << g.tau_ << " and quadrature " << g.tau_quadrature_
         << " disagree";
      throw ConstructionError(os.str());
    }
    g.omega_ = M_PI / (2.0 * g.tau_);
    g.build_tables();
    g.build_harmonics();
    g.build_inverse();
    return g;
  }

  int degree() const { return n_; }
  double tau() const { return tau_; }
  double tau_quadrature() const { return tau_quadrature_; }
  double period() const { return 4.0 * tau_; }
  /// Base κ-frequency π/(2τ) of the Fourier forms.
  double omega() const { return omega_; }
  double build_tolerance() const { return tol_; }
  int harmonics() const { return harmonics_; }

  const std::vector<double>& sn_table() const { return sn_; }
  const std::vector<double>& cn_table() const { return cn_; }
  const std::vector<double>& inverse_table() const { return inverse_; }
  const fourier::Spectrum& sn_harmonics() const { return sn_h_; }
  const fourier::Spectrum& cn_harmonics() const { return cn_h_; }

  std::pair<double, double> sncn(double kappa) const {
    double u = std::fmod(kappa / h_, 4.0 * N);
    if (u < 0.0) u += 4.0 * N;
    const double fl = std::floor(u);
    const long i = long(fl);
    const double x = u - fl;
    // 6-point Lagrange weights on nodes -2..3.
    std::array<double, 6> w;
    for (int m = 0; m < 6; ++m) {
      double num = 1.0, den = 1.0;
      for (int l = 0; l < 6; ++l) {
        if (l == m) continue;
        num *= x - double(l - 2);
        den *= double(m - l);
      }
      w[m] = num / den;
    }
    double s = 0.0, c = 0.0;
    for (int m = 0; m < 6; ++m) {
      const auto [sv, cv] = sample(i + m - 2);
      s += w[m] * sv;
      c += w[m] * cv;
    }
    return {s, c};
  }
  double sn(double kappa) const { return sncn(kappa).first; }
  double cn(double kappa) const { return sncn(kappa).second; }

  double identity_residual(double kappa) const {
    const auto [s, c] = sncn(kappa);
    return std::abs(c * c + std::pow(s, 2 * n_) - 1.0);
  }

  /// Mean of sn^a cn^b over one period, b ∈ {0, 1}.
  double power_mean(int a, int b) const {
    if (a < 0) throw DomainError("sn_power_mean: exponent a must be >= 0");
    if (b != 0 && b != 1) throw DomainError("sn_power_mean: b must be 0 or 1 (reduce cn^2 first)");
    if (b == 1 || a % 2 == 1) return 0.0;
    const double two_n = 2.0 * n_;
    return std::beta((a + 1) / two_n, 0.5) / std::beta(1.0 / two_n, 0.5);
  }

  /// Fourier series of sn^a cn^b with `harmonics` harmonics.
  ProfileSeries profile(int a, int b, int harmonics) const {
    if (a < 0) throw DomainError("profile: exponent a must be >= 0");
    if (b != 0 && b != 1) throw DomainError("profile: b must be 0 or 1");
    if (harmonics < 0) throw DomainError("profile: negative harmonic count");
    std::vector<double> samples(4 * N);
    for (long i = 0; i < 4 * N; ++i) {
      const auto [s, c] = sample(i);
      samples[i] = std::pow(s, a) * (b == 1 ? c : 1.0);
    }
    return analyze(samples, std::size_t(harmonics));
  }

  /// κ ∈ [0, 4τ) with sn(κ) = s, cn(κ) = c. The pair is first rescaled onto
  /// the oval c^2 + s^{2n} = 1.
  double kappa_from_sncn(double s, double c) const {
    const double level = c * c + std::pow(s, 2 * n_);
    if (!(std::abs(level - 1.0) <= 1e-6)) {
      std::ostringstream os;
      os << "kappa_from_sncn: (" << s << ", " << c << ") is off the oval by " << level - 1.0;
      throw DomainError(os.str());
    }
    const double rho = std::pow(level, 1.0 / (2.0 * n_));
    s /= rho;
    c /= std::pow(rho, n_);
    const double base = first_quadrant_angle(std::abs(s), std::abs(c));
    double k;
    if (s >= 0.0 && c > 0.0) {
      k = base;
    } else if (s > 0.0) {
      k = 2.0 * tau_ - base;
    } else if (c < 0.0) {
      k = 2.0 * tau_ + base;
    } else {
      k = 4.0 * tau_ - base;
    }
    if (k >= 4.0 * tau_) k -= 4.0 * tau_;
    if (k < 0.0) k = 0.0;
    return k;
  }

 private:
  static constexpr long N = kQuarterSamples;

  GenTrig() = default;

  // Sample i of the full period, extended from the quarter table by
  // sn(τ+u) = sn(τ-u), cn(τ+u) = -cn(τ-u), sn(κ+2τ) = -sn(κ), cn(κ+2τ) = -cn(κ).
  std::pair<double, double> sample(long i) const {
    long m = i % (4 * N);
    if (m < 0) m += 4 * N;
    const long q = m / N;
    const long r = m % N;
    switch (q) {
      case 0: return {sn_[r], cn_[r]};
      case 1: return {sn_[N - r], -cn_[N - r]};
      case 2: return {-sn_[r], -cn_[r]};
      default: return {-sn_[N - r], cn_[N - r]};
    }
  }

  void build_tables() {
    h_ = tau_ / double(N);
    sn_.assign(N + 1, 0.0);
    cn_.assign(N + 1, 0.0);
    const int n = n_;
    auto rhs = [n](double, const ode::State<2>& z) {
      return ode::State<2>{z[1], -double(n) * std::pow(z[0], 2 * n - 1)};
    };
    ode::Tolerances tol;
    tol.rtol = 1e-12;
    tol.atol = 1e-14;
    ode::State<2> z{0.0, 1.0};
    sn_[0] = 0.0;
    cn_[0] = 1.0;
    for (long i = 1; i <= N; ++i) {
      const double t0 = (i == 1) ? 0.0 : double(i - 1) * h_;
      const double t1 = (i == N) ? tau_ : double(i) * h_;
      z = ode::integrate<2>(rhs, z, t0, t1, tol);
      sn_[i] = z[0];
      cn_[i] = z[1];
    }
    double worst = 0.0;
    for (long i = 0; i <= N; ++i) {
      worst = std::max(worst, std::abs(cn_[i] * cn_[i] + std::pow(sn_[i], 2 * n_) - 1.0));
    }
    if (worst > tol_ || std::abs(sn_[N] - 1.0) > tol_ || std::abs(cn_[N]) > tol_) {
      std::ostringstream os;
      os << "build_gentrig: table check failed (identity residual " << worst << ", sn(tau)-1 = "
         << sn_[N] - 1.0 << ", cn(tau) = " << cn_[N] << ")";
      throw ConstructionError(os.str());
    }
  }

  ProfileSeries analyze(const std::vector<double>& samples, std::size_t harmonics) const {
    const std::size_t tail_end = std::min<std::size_t>(4 * harmonics, 2 * N - 1);
    fourier::Spectrum full = fourier::analyze(samples, std::max(harmonics, tail_end));
    ProfileSeries out;
    double tail = 0.0;
    for (std::size_t k = harmonics + 1; k < full.size(); ++k) tail += 2.0 * std::norm(full[k]);
    full.resize(harmonics + 1);
    fourier::prune(full, 1e-15);
    out.spectrum = std::move(full);
    out.residual = std::sqrt(tail);
    out.truncated = out.residual > tol_;
    return out;
  }

  void build_harmonics() {
    std::vector<double> s(4 * N), c(4 * N);
    for (long i = 0; i < 4 * N; ++i) std::tie(s[i], c[i]) = sample(i);
    auto sp = analyze(s, std::size_t(harmonics_));
    auto cp = analyze(c, std::size_t(harmonics_));
    sn_h_ = std::move(sp.spectrum);
    cn_h_ = std::move(cp.spectrum);
    harmonic_residual_ = std::max(sp.residual, cp.residual);
  }

  // Safeguarded Newton on the interpolant over [0, τ]. Uses sn when cn is
  // comfortably away from zero and cn otherwise, so the derivative never
  // degenerates.
  double first_quadrant_angle(double s, double c, double guess = -1.0) const {
    const bool use_sn = c >= 0.5;
    double lo = 0.0, hi = tau_;
    double k = guess;
    if (k < 0.0) {
      if (!inverse_.empty()) {
        const double pos = std::clamp(s, 0.0, 1.0) * double(inverse_.size() - 1);
        const std::size_t j = std::min<std::size_t>(std::size_t(pos), inverse_.size() - 2);
        const double f = pos - double(j);
        k = (1.0 - f) * inverse_[j] + f * inverse_[j + 1];
      } else {
        k = use_sn ? std::asin(std::clamp(s, 0.0, 1.0)) * tau_ / (M_PI / 2.0)
                   : tau_ * (1.0 - std::clamp(c, 0.0, 1.0));
      }
    }
    k = std::clamp(k, lo, hi);
    for (int it = 0; it < 100; ++it) {
      const auto [sv, cv] = sncn(k);
      double f, d;
      if (use_sn) {
        f = sv - s;
        d = cv;
        if (f > 0.0) hi = k; else lo = k;
      } else {
        f = cv - c;
        d = -double(n_) * std::pow(sv, 2 * n_ - 1);
        if (f < 0.0) hi = k; else lo = k;
      }
      if (f == 0.0) break;
      double next = (d != 0.0) ? k - f / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - k) <= 1e-16 * (1.0 + k)) {
        k = next;
        break;
      }
      k = next;
    }
    return k;
  }

  void build_inverse() {
    constexpr std::size_t L = 1024;
    inverse_.assign(L + 1, 0.0);
    for (std::size_t i = 0; i <= L; ++i) {
      const double s = double(i) / double(L);
      const double c = std::sqrt(std::max(0.0, 1.0 - std::pow(s, 2 * n_)));
      inverse_[i] = (i == L) ? tau_ : first_quadrant_angle(s, c, tau_ * s);
    }
    for (std::size_t i = 1; i <= L; ++i) {
      if (!(inverse_[i] > inverse_[i - 1])) {
        throw ConstructionError("build_gentrig: inverse table is not strictly increasing");
      }
    }
  }

  int n_ = 1;
  int harmonics_ = kDefaultHarmonics;
  double tol_ = 1e-10;
  double tau_ = 0.0;
  double tau_quadrature_ = 0.0;
  double omega_ = 0.0;
  double h_ = 0.0;
  double harmonic_residual_ = 0.0;
  std::vector<double> sn_, cn_;
  fourier::Spectrum sn_h_, cn_h_;
  std::vector<double> inverse_;
};

}  // namespace forced_osc
