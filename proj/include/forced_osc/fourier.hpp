#pragma once

// Real periodic functions stored as one-sided complex spectra.
//
// A spectrum c[0..L] represents f(θ) = c0 + 2 Re Σ_{k=1}^{L} c_k e^{ikθ},
// with c0 real. In κ-space θ = ωκ; cos/sin amplitudes are a_k = 2 Re c_k and
// b_k = -2 Im c_k.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace forced_osc::fourier {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

inline bool is_zero(const Spectrum& s) {
  return std::all_of(s.begin(), s.end(), [](const Complex& c) { return c == 0.0; });
}

/// Zeroes coefficients with |c| < threshold and trims trailing zeros.
inline void prune(Spectrum& s, double threshold) {
  for (auto& c : s) {
    if (std::abs(c.real()) < threshold) c.real(0.0);
    if (std::abs(c.imag()) < threshold) c.imag(0.0);
  }
  while (!s.empty() && s.back() == 0.0) s.pop_back();
}

inline Complex at(const Spectrum& s, long k) {
  if (k >= 0) return static_cast<std::size_t>(k) < s.size() ? s[k] : Complex{};
  return static_cast<std::size_t>(-k) < s.size() ? std::conj(s[-k]) : Complex{};
}

/// y += a * x
inline void axpy(Spectrum& y, double a, const Spectrum& x) {
  if (y.size() < x.size()) y.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += a * x[k];
}

inline Spectrum scaled(Spectrum s, double a) {
  for (auto& c : s) c *= a;
  return s;
}

/// κ-derivative for base frequency ω.
inline Spectrum derivative(const Spectrum& s, double omega) {
  Spectrum d(s.size());
  for (std::size_t k = 1; k < s.size(); ++k) d[k] = s[k] * Complex(0.0, omega * double(k));
  if (!d.empty()) d[0] = 0.0;
  return d;
}

/// Zero-mean κ-antiderivative; the mean of `s` is ignored.
inline Spectrum antiderivative(const Spectrum& s, double omega) {
  Spectrum d(s.size());
  for (std::size_t k = 1; k < s.size(); ++k) d[k] = s[k] / Complex(0.0, omega * double(k));
  if (!d.empty()) d[0] = 0.0;
  return d;
}

/// Product truncated to harmonics 0..max_harmonic. The l1 mass of the
/// discarded harmonics (as a sup-norm bound) is added to *dropped.
inline Spectrum multiply(const Spectrum& a, const Spectrum& b, int max_harmonic,
                         double* dropped = nullptr) {
  if (a.empty() || b.empty()) return {};
  const long la = long(a.size()) - 1;
  const long lb = long(b.size()) - 1;
  const long full = la + lb;
  const long keep = std::min<long>(full, max_harmonic);
  const long stop = dropped ? full : keep;
  Spectrum out(keep + 1);
  double lost = 0.0;
  for (long k = 0; k <= stop; ++k) {
    Complex acc{};
    const long lo = std::max(-la, k - lb);
    const long hi = std::min(la, k + lb);
    for (long l = lo; l <= hi; ++l) acc += at(a, l) * at(b, k - l);
    if (k <= keep) {
      out[k] = acc;
    } else {
      lost += 2.0 * std::abs(acc);
    }
  }
  if (!out.empty()) out[0].imag(0.0);
  if (dropped) *dropped += lost;
  return out;
}

/// Powers e^{ikθ} for k = 0..L.
inline void phases(double theta, std::size_t L, std::vector<Complex>& out) {
  out.resize(L + 1);
  if (L == 0) {
    out[0] = 1.0;
    return;
  }
  const Complex step = std::polar(1.0, theta);
  out[0] = 1.0;
  for (std::size_t k = 1; k <= L; ++k) {
    // Re-seed periodically so rounding in the recurrence stays bounded.
    out[k] = (k % 16 == 0) ? std::polar(1.0, double(k) * theta) : out[k - 1] * step;
  }
}

inline double evaluate(const Spectrum& s, const std::vector<Complex>& ph) {
  if (s.empty()) return 0.0;
  double v = s[0].real();
  for (std::size_t k = 1; k < s.size(); ++k) v += 2.0 * (s[k] * ph[k]).real();
  return v;
}

inline double evaluate(const Spectrum& s, double theta) {
  std::vector<Complex> ph;
  phases(theta, s.empty() ? 0 : s.size() - 1, ph);
  return evaluate(s, ph);
}

/// (f, df/dκ) at phases e^{ikθ}, θ = ωκ.
inline std::pair<double, double> evaluate_with_derivative(const Spectrum& s,
                                                          const std::vector<Complex>& ph,
                                                          double omega) {
  if (s.empty()) return {0.0, 0.0};
  double v = s[0].real(), d = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const Complex z = s[k] * ph[k];
    v += 2.0 * z.real();
    d -= 2.0 * omega * double(k) * z.imag();
  }
  return {v, d};
}

/// Upper bound on sup |f|.
inline double sup_bound(const Spectrum& s) {
  if (s.empty()) return 0.0;
  double v = std::abs(s[0].real());
  for (std::size_t k = 1; k < s.size(); ++k) v += 2.0 * std::abs(s[k]);
  return v;
}

inline double cos_amplitude(const Spectrum& s, std::size_t k) {
  if (k >= s.size()) return 0.0;
  return k == 0 ? s[0].real() : 2.0 * s[k].real();
}

inline double sin_amplitude(const Spectrum& s, std::size_t k) {
  if (k == 0 || k >= s.size()) return 0.0;
  return -2.0 * s[k].imag();
}

/// Spectrum from uniformly spaced samples of one period (plain DFT).
/// Returns harmonics 0..L; the caller chooses L < samples/2.
inline Spectrum analyze(const std::vector<double>& samples, std::size_t L) {
  const std::size_t m = samples.size();
  std::vector<double> cs(m), sn(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double th = 2.0 * M_PI * double(i) / double(m);
    cs[i] = std::cos(th);
    sn[i] = std::sin(th);
  }
  Spectrum out(L + 1);
  for (std::size_t k = 0; k <= L; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < m; ++i) {
      re += samples[i] * cs[idx];
      im -= samples[i] * sn[idx];
      idx += k;
      if (idx >= m) idx -= m;
    }
    out[k] = Complex(re / double(m), im / double(m));
  }
  out[0].imag(0.0);
  return out;
}

}  // namespace forced_osc::fourier
