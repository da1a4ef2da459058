#pragma once

// T-periodic forcing coefficients p_0(t), ..., p_{2n-2}(t) of
//   x'' + n x^{2n-1} = Σ_j p_j(t) x^j
// as real trigonometric series, with declared smoothness labels.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "forced_osc/errors.hpp"

namespace forced_osc {

enum class Smoothness : int { C0 = 0, C1 = 1, C2 = 2 };

inline std::string to_string(Smoothness s) { return "C" + std::to_string(int(s)); }

inline Smoothness smoothness_from_string(const std::string& s) {
  if (s == "C0") return Smoothness::C0;
  if (s == "C1") return Smoothness::C1;
  if (s == "C2") return Smoothness::C2;
  throw ConfigError("unknown smoothness label '" + s + "' (expected C0, C1 or C2)");
}

/// Minimum smoothness of p_j for the boundedness theorem:
/// p_0 continuous, p_1..p_{n-1} C1, p_n..p_{2n-2} C2.
inline Smoothness theorem_smoothness(int n, int j) {
  if (j == 0) return Smoothness::C0;
  if (j <= n - 1) return Smoothness::C1;
  return Smoothness::C2;
}

/// c + Σ_{k>=1} a_k cos(kνt) + b_k sin(kνt), ν = 2π/T.
struct TrigSeries {
  double constant = 0.0;
  std::vector<double> cos;
  std::vector<double> sin;

  bool is_zero() const {
    auto nz = [](double v) { return v != 0.0; };
    return constant == 0.0 && std::none_of(cos.begin(), cos.end(), nz) &&
           std::none_of(sin.begin(), sin.end(), nz);
  }
  bool is_constant() const {
    auto nz = [](double v) { return v != 0.0; };
    return std::none_of(cos.begin(), cos.end(), nz) && std::none_of(sin.begin(), sin.end(), nz);
  }
  std::size_t harmonics() const { return std::max(cos.size(), sin.size()); }

  /// d-th derivative at t; exact in coefficient space.
  double eval(double t, double period, int d = 0) const {
    const double nu = 2.0 * M_PI / period;
    double v = d == 0 ? constant : 0.0;
    const std::size_t m = harmonics();
    for (std::size_t k = 1; k <= m; ++k) {
      const double a = k <= cos.size() ? cos[k - 1] : 0.0;
      const double b = k <= sin.size() ? sin[k - 1] : 0.0;
      if (a == 0.0 && b == 0.0) continue;
      const double w = nu * double(k);
      const double c = std::cos(w * t), s = std::sin(w * t);
      // derivatives cycle through (c, -s, -c, s) for cos and (s, c, -s, -c) for sin
      switch (d % 4) {
        case 0: v += a * c + b * s; break;
        case 1: v += (-a * s + b * c) * w; break;
        case 2: v += (-a * c - b * s) * w * w; break;
        default: v += (a * s - b * c) * w * w * w; break;
      }
    }
    return v;
  }
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> failures;

  void fail(std::string why) {
    ok = false;
    failures.push_back(std::move(why));
  }
};

class Forcing {
 public:
  static constexpr std::size_t kMaxHarmonics = 32;

  Forcing() = default;
  Forcing(int n, double period) : n_(n), period_(period) {
    coeffs_.resize(std::max(0, 2 * n - 1));
    declared_.assign(coeffs_.size(), Smoothness::C2);
  }

  static Forcing zero(int n, double period = 1.0) { return Forcing(n, period); }

  /// p_0 = amplitude cos(2πt/T); the classical case is n = 2.
  static Forcing morris(int n = 2, double period = 1.0, double amplitude = 1.0) {
    Forcing f(n, period);
    f.set(0, TrigSeries{0.0, {amplitude}, {}});
    return f;
  }

  int degree() const { return n_; }
  double period() const { return period_; }
  /// Number of stored coefficient slots (may exceed 2n-1 for invalid input).
  int slots() const { return int(coeffs_.size()); }

  void set(int j, TrigSeries s, Smoothness declared = Smoothness::C2) {
    if (j < 0) throw DomainError("Forcing::set: negative coefficient index");
    if (std::size_t(j) >= coeffs_.size()) {
      coeffs_.resize(j + 1);
      declared_.resize(j + 1, Smoothness::C2);
    }
    coeffs_[j] = std::move(s);
    declared_[j] = declared;
  }

  const TrigSeries& series(int j) const {
    static const TrigSeries empty;
    return (j >= 0 && std::size_t(j) < coeffs_.size()) ? coeffs_[j] : empty;
  }
  Smoothness declared(int j) const {
    return (j >= 0 && std::size_t(j) < declared_.size()) ? declared_[j] : Smoothness::C2;
  }
  bool present(int j) const { return !series(j).is_zero(); }
  bool constant_in_t(int j) const { return series(j).is_constant(); }
  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const auto& s) { return s.is_zero(); });
  }

  /// d-th t-derivative of p_j at t.
  double p(int j, double t, int d = 0) const {
    if (j < 0 || j > 2 * n_ - 2) {
      std::ostringstream os;
      os << "eval_p: index " << j << " outside [0, " << 2 * n_ - 2 << "]";
      throw DomainError(os.str());
    }
    if (d < 0 || d > 2) throw DomainError("eval_p: derivative order must be 0, 1 or 2");
    if (d > int(declared(j))) {
      std::ostringstream os;
      os << "eval_p: derivative " << d << " of p_" << j << " exceeds its declared smoothness "
         << to_string(declared(j));
      throw SmoothnessPolicyError(os.str());
    }
    return series(j).eval(t, period_, d);
  }

  /// Σ_j p_j(t) x^j
  double polynomial(double t, double x) const {
    double v = 0.0;
    for (int j = int(coeffs_.size()) - 1; j >= 0; --j) v = v * x + coeffs_[j].eval(t, period_);
    return v;
  }

  ValidationReport validate() const {
    ValidationReport r;
    if (n_ < 1) r.fail("degree n must be >= 1");
    if (!(period_ > 0.0) || !std::isfinite(period_)) r.fail("period T must be positive and finite");
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
      const auto& s = coeffs_[j];
      auto finite = [](double v) { return std::isfinite(v); };
      if (!std::isfinite(s.constant) || !std::all_of(s.cos.begin(), s.cos.end(), finite) ||
          !std::all_of(s.sin.begin(), s.sin.end(), finite)) {
        r.fail("p_" + std::to_string(j) + " has non-finite coefficients");
      }
      if (s.harmonics() > kMaxHarmonics) {
        r.fail("p_" + std::to_string(j) + " has more than " + std::to_string(kMaxHarmonics) +
               " harmonics");
      }
      if (int(j) > 2 * n_ - 2) {
        if (!s.is_zero()) {
          r.fail("degree exceeds 2n-2: p_" + std::to_string(j) + " present for n = " +
                 std::to_string(n_));
        }
        continue;
      }
      const Smoothness need = theorem_smoothness(n_, int(j));
      if (int(declared_[j]) < int(need)) {
        r.fail("p_" + std::to_string(j) + " declared " + to_string(declared_[j]) + " but needs " +
               to_string(need));
      }
    }
    return r;
  }

  nlohmann::json to_json() const {
    nlohmann::json p = nlohmann::json::array();
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
      if (coeffs_[j].is_zero() && declared_[j] == Smoothness::C2) continue;
      p.push_back({{"j", j},
                   {"const", coeffs_[j].constant},
                   {"cos", coeffs_[j].cos},
                   {"sin", coeffs_[j].sin},
                   {"smoothness", to_string(declared_[j])}});
    }
    return {{"n", n_}, {"T", period_}, {"p", p}};
  }

  /// Parses the "p" array of a config against degree n and period T.
  static Forcing from_json_terms(int n, double period, const nlohmann::json& terms) {
    if (n < 1) throw ConfigError("n must be >= 1");
    Forcing f(n, period);
    if (terms.is_null()) return f;
    if (!terms.is_array()) throw ConfigError("\"p\" must be an array");
    std::vector<bool> seen;
    for (const auto& e : terms) {
      if (!e.is_object()) throw ConfigError("entries of \"p\" must be objects");
      for (const auto& [key, _] : e.items()) {
        if (key != "j" && key != "const" && key != "cos" && key != "sin" && key != "smoothness") {
          throw ConfigError("unknown key \"" + key + "\" in forcing term");
        }
      }
      if (!e.contains("j") || !e["j"].is_number_integer()) {
        throw ConfigError("forcing term needs an integer \"j\"");
      }
      const int j = e["j"].get<int>();
      if (j < 0) throw ConfigError("forcing index j must be >= 0");
      if (std::size_t(j) < seen.size() && seen[j]) {
        throw ConfigError("duplicate forcing term j = " + std::to_string(j));
      }
      if (std::size_t(j) >= seen.size()) seen.resize(j + 1, false);
      seen[j] = true;
      TrigSeries s;
      try {
        s.constant = e.value("const", 0.0);
        s.cos = e.value("cos", std::vector<double>{});
        s.sin = e.value("sin", std::vector<double>{});
      } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("bad forcing term: ") + ex.what());
      }
      const Smoothness decl =
          e.contains("smoothness") ? smoothness_from_string(e["smoothness"].get<std::string>())
                                   : Smoothness::C2;
      f.set(j, std::move(s), decl);
    }
    return f;
  }

  /// {"n":2, "T":1.0, "p":[{"j":0,"const":0.0,"cos":[1.0],"sin":[]}, ...]}
  static Forcing from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("forcing config must be an object");
    for (const auto& [key, _] : j.items()) {
      if (key != "n" && key != "T" && key != "p") {
        throw ConfigError("unknown key \"" + key + "\" in forcing config");
      }
    }
    try {
      return from_json_terms(j.at("n").get<int>(), j.value("T", 1.0),
                             j.contains("p") ? j["p"] : nlohmann::json());
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(std::string("bad forcing config: ") + ex.what());
    }
  }

 private:
  int n_ = 2;
  double period_ = 1.0;
  std::vector<TrigSeries> coeffs_;
  std::vector<Smoothness> declared_;
};

/// The forcing used throughout the acceptance checks for n = 2:
/// p_0 = cos 2πt, p_1 = 0.3 sin 2πt, p_2 = 0.2 cos 4πt, T = 1.
inline Forcing acceptance_forcing_n2() {
  Forcing f(2, 1.0);
  f.set(0, TrigSeries{0.0, {1.0}, {}});
  f.set(1, TrigSeries{0.0, {}, {0.3}});
  f.set(2, TrigSeries{0.0, {0.0, 0.2}, {}});
  return f;
}

/// A generic smooth forcing with every coefficient present and time dependent.
inline Forcing generic_forcing(int n, double period = 1.0) {
  Forcing f(n, period);
  for (int j = 0; j <= 2 * n - 2; ++j) {
    const double a = 0.3 / (1.0 + j);
    TrigSeries s;
    s.constant = 0.05 * ((j % 3) - 1);
    s.cos = {a, 0.0, 0.25 * a};
    s.sin = {0.0, 0.5 * a};
    if (j % 2 == 1) std::swap(s.cos, s.sin);
    f.set(j, s);
  }
  return f;
}

}  // namespace forced_osc
