#pragma once

// Polynomials in the forcing symbols s_{j,d} = p_j^{(d)}(t), d <= 2, and
// κ-Fourier series whose coefficients are such polynomials.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "forced_osc/errors.hpp"
#include "forced_osc/forcing.hpp"
#include "forced_osc/fourier.hpp"

namespace forced_osc::nf {

inline constexpr int kMaxDerivative = 2;
inline constexpr double kPruneThreshold = 1e-14;

struct Symbol {
  int j = 0;
  int d = 0;
};

inline std::uint8_t symbol_id(int j, int d) { return std::uint8_t(3 * j + d); }
inline Symbol symbol_of(std::uint8_t id) { return {id / 3, id % 3}; }

/// Sorted multiset of symbol ids; the empty monomial is 1.
using Monomial = std::vector<std::uint8_t>;

inline Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial m;
  m.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(m));
  return m;
}

inline std::string to_string(const Monomial& m) {
  if (m.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Symbol sym = symbol_of(m[i]);
    if (i) s += "*";
    s += "p" + std::to_string(sym.j) + std::string(sym.d, '\'');
  }
  return s;
}

/// What the engine needs to know about a forcing: which p_j are present and
/// which are constant in t, plus sup bounds of p_j^{(d)} for error tallies.
struct ForcingSignature {
  int n = 2;
  double period = 1.0;
  std::vector<bool> present;
  std::vector<bool> constant;
  std::vector<std::array<double, 3>> sup;  // sup |p_j^{(d)}|

  static ForcingSignature of(const Forcing& f) {
    ForcingSignature s;
    s.n = f.degree();
    s.period = f.period();
    const int m = 2 * s.n - 1;
    s.present.resize(m);
    s.constant.resize(m);
    s.sup.resize(m);
    const double nu = 2.0 * M_PI / f.period();
    for (int j = 0; j < m; ++j) {
      const auto& ser = f.series(j);
      s.present[j] = f.present(j);
      s.constant[j] = ser.is_constant();
      for (int d = 0; d <= kMaxDerivative; ++d) {
        double b = d == 0 ? std::abs(ser.constant) : 0.0;
        for (std::size_t k = 1; k <= ser.harmonics(); ++k) {
          const double a = k <= ser.cos.size() ? ser.cos[k - 1] : 0.0;
          const double c = k <= ser.sin.size() ? ser.sin[k - 1] : 0.0;
          b += std::pow(nu * double(k), d) * std::hypot(a, c);
        }
        s.sup[j][d] = b;
      }
    }
    return s;
  }

  double bound(const Monomial& m) const {
    double b = 1.0;
    for (auto id : m) {
      const Symbol s = symbol_of(id);
      b *= sup[s.j][s.d];
    }
    return b;
  }
};

/// Terms of d/dt of a monomial (Leibniz), with multiplicities folded in.
inline std::vector<std::pair<Monomial, double>> time_derivative(const Monomial& m,
                                                                const ForcingSignature& sig) {
  std::map<Monomial, double> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Symbol s = symbol_of(m[i]);
    if (sig.constant[s.j]) continue;
    if (s.d + 1 > kMaxDerivative) {
      std::ostringstream os;
      os << "normal form needs derivative " << s.d + 1 << " of p_" << s.j
         << ", beyond the supported order " << kMaxDerivative;
      throw SmoothnessPolicyError(os.str());
    }
    Monomial r = m;
    r[i] = symbol_id(s.j, s.d + 1);
    std::sort(r.begin(), r.end());
    out[r] += 1.0;
  }
  return {out.begin(), out.end()};
}

/// Values of every symbol at time t.
inline std::vector<double> symbol_values(const Forcing& f, double t) {
  const int m = 2 * f.degree() - 1;
  std::vector<double> v(3 * m, 0.0);
  for (int j = 0; j < m; ++j) {
    if (!f.present(j)) continue;
    for (int d = 0; d <= kMaxDerivative; ++d) v[3 * j + d] = f.series(j).eval(t, f.period(), d);
  }
  return v;
}

inline double monomial_value(const Monomial& m, const std::vector<double>& values) {
  double v = 1.0;
  for (auto id : m) v *= values[id];
  return v;
}

/// Real polynomial in the symbols.
class CoeffExpr {
 public:
  CoeffExpr() = default;
  explicit CoeffExpr(double c) {
    if (c != 0.0) terms_[{}] = c;
  }

  const std::map<Monomial, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add(const Monomial& m, double c) {
    if (c == 0.0) return;
    terms_[m] += c;
  }

  CoeffExpr& operator+=(const CoeffExpr& o) {
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
  }
  friend CoeffExpr operator+(CoeffExpr a, const CoeffExpr& b) { return a += b; }
  friend CoeffExpr operator*(const CoeffExpr& a, const CoeffExpr& b) {
    CoeffExpr r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add(ma * mb, ca * cb);
    r.prune();
    return r;
  }
  friend CoeffExpr operator*(double s, CoeffExpr a) {
    for (auto& [m, c] : a.terms_) c *= s;
    a.prune();
    return a;
  }

  CoeffExpr time_derivative(const ForcingSignature& sig) const {
    CoeffExpr r;
    for (const auto& [m, c] : terms_)
      for (const auto& [dm, mult] : nf::time_derivative(m, sig)) r.add(dm, c * mult);
    r.prune();
    return r;
  }

  double evaluate(const std::vector<double>& values) const {
    double v = 0.0;
    for (const auto& [m, c] : terms_) v += c * monomial_value(m, values);
    return v;
  }
  double evaluate(const Forcing& f, double t) const { return evaluate(symbol_values(f, t)); }

  /// Drops coefficients below kPruneThreshold times the largest one.
  void prune(double rel = kPruneThreshold) {
    double scale = 0.0;
    for (const auto& [m, c] : terms_) scale = std::max(scale, std::abs(c));
    std::erase_if(terms_, [&](const auto& kv) { return std::abs(kv.second) <= rel * scale; });
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) os << (c < 0 ? " - " : " + ");
      else if (c < 0) os << "-";
      first = false;
      os << std::abs(c);
      if (!m.empty()) os << "*" << nf::to_string(m);
    }
    return os.str();
  }

 private:
  std::map<Monomial, double> terms_;
};

/// Σ_m m(t) · F_m(κ), each F_m a κ-spectrum in θ = ωκ.
class KappaProfile {
 public:
  using Map = std::map<Monomial, fourier::Spectrum>;

  KappaProfile() = default;
  static KappaProfile constant(double c) {
    KappaProfile p;
    if (c != 0.0) p.terms_[{}] = fourier::Spectrum{c};
    return p;
  }
  static KappaProfile single(const Monomial& m, fourier::Spectrum s) {
    KappaProfile p;
    p.add(m, s, 1.0);
    return p;
  }

  const Map& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add(const Monomial& m, const fourier::Spectrum& s, double scale) {
    if (s.empty() || scale == 0.0) return;
    fourier::axpy(terms_[m], scale, s);
  }

  KappaProfile& axpy(double a, const KappaProfile& o) {
    for (const auto& [m, s] : o.terms_) add(m, s, a);
    return *this;
  }
  KappaProfile& operator+=(const KappaProfile& o) { return axpy(1.0, o); }
  KappaProfile scaled(double a) const {
    KappaProfile r;
    r.axpy(a, *this);
    return r;
  }

  /// Harmonic 0 of every coefficient.
  CoeffExpr mean() const {
    CoeffExpr c;
    for (const auto& [m, s] : terms_) c.add(m, s[0].real());
    return c;
  }
  KappaProfile mean_profile() const {
    KappaProfile r;
    for (const auto& [m, s] : terms_)
      if (s[0] != 0.0) r.terms_[m] = fourier::Spectrum{s[0]};
    return r;
  }

  bool is_kappa_free() const {
    for (const auto& [m, s] : terms_)
      for (std::size_t k = 1; k < s.size(); ++k)
        if (s[k] != 0.0) return false;
    return true;
  }

  KappaProfile kappa_derivative(double omega) const {
    KappaProfile r;
    for (const auto& [m, s] : terms_) r.terms_[m] = fourier::derivative(s, omega);
    r.prune();
    return r;
  }
  /// Zero-mean κ-antiderivative; harmonic 0 is ignored.
  KappaProfile kappa_antiderivative(double omega) const {
    KappaProfile r;
    for (const auto& [m, s] : terms_) r.terms_[m] = fourier::antiderivative(s, omega);
    r.prune();
    return r;
  }

  KappaProfile time_derivative(const ForcingSignature& sig) const {
    KappaProfile r;
    for (const auto& [m, s] : terms_)
      for (const auto& [dm, mult] : nf::time_derivative(m, sig)) r.add(dm, s, mult);
    r.prune();
    return r;
  }

  /// Zeroes coefficients at or below `rel` times the largest magnitude in
  /// the profile and removes empty monomials.
  void prune(double rel = kPruneThreshold) {
    double scale = 0.0;
    for (const auto& [m, s] : terms_)
      for (const auto& c : s) scale = std::max({scale, std::abs(c.real()), std::abs(c.imag())});
    const double thr = rel * scale;
    for (auto it = terms_.begin(); it != terms_.end();) {
      auto& s = it->second;
      for (auto& c : s) {
        if (std::abs(c.real()) <= thr) c.real(0.0);
        if (std::abs(c.imag()) <= thr) c.imag(0.0);
      }
      while (!s.empty() && s.back() == 0.0) s.pop_back();
      it = s.empty() ? terms_.erase(it) : std::next(it);
    }
  }

  std::size_t max_harmonic() const {
    std::size_t h = 0;
    for (const auto& [m, s] : terms_) h = std::max(h, s.empty() ? 0 : s.size() - 1);
    return h;
  }

  /// Value at phases e^{ikθ}, given symbol values.
  double evaluate(const std::vector<double>& values,
                  const std::vector<fourier::Complex>& phases) const {
    double v = 0.0;
    for (const auto& [m, s] : terms_) {
      const double mv = monomial_value(m, values);
      if (mv != 0.0) v += mv * fourier::evaluate(s, phases);
    }
    return v;
  }

  /// Upper bound for sup over κ and t, using sup bounds of the symbols.
  double sup_bound(const ForcingSignature& sig) const {
    double b = 0.0;
    for (const auto& [m, s] : terms_) b += sig.bound(m) * fourier::sup_bound(s);
    return b;
  }

  /// Largest derivative order of each p_j that appears.
  void record_orders(std::map<int, int>& ledger) const {
    for (const auto& [m, s] : terms_) {
      for (auto id : m) {
        const Symbol sym = symbol_of(id);
        auto [it, fresh] = ledger.emplace(sym.j, sym.d);
        if (!fresh) it->second = std::max(it->second, sym.d);
      }
    }
  }

 private:
  Map terms_;
};

}  // namespace forced_osc::nf
