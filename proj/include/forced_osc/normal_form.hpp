#pragma once

// Two-stage Lie-triangle (Deprit) normalization of the action-angle
// Hamiltonian
//   H = ((n+1)/(2n)) K^{2n/(n+1)} + Σ_{j=1}^{2n-1} K^{j/(n+1)} f_j(κ, t).
//
// Terms are graded by the exponent numerator q (a term scales as
// K^{q/(n+1)}); row i of a Lie series holds exponent 2n - i and generator
// W_r has exponent n - r + 1. Stage 1 removes the κ-dependence at exponents
// q >= n+1, stage 2 at q >= 2. Time-dependent generators leave remainders
// -∂W/∂t, transported through a second triangle.

#include <climits>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "forced_osc/coeff_expr.hpp"
#include "forced_osc/errors.hpp"
#include "forced_osc/forcing.hpp"
#include "forced_osc/fourier.hpp"
#include "forced_osc/gentrig.hpp"
#include "forced_osc/ode.hpp"

namespace forced_osc::nf {

inline double factorial(int k) {
  std::uint64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= std::uint64_t(i);
  return double(f);
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * std::uint64_t(n - k + i) / std::uint64_t(i);
  return double(c);
}

struct NFTerm {
  int q = 0;
  KappaProfile profile;

  bool is_zero() const { return profile.is_zero(); }
};

/// Σ_q K^{q/(n+1)} profile_q(κ, t); outputs are at ε = 1 (no factorials).
struct NFSeries {
  int n = 2;
  double omega = 1.0;
  std::map<int, KappaProfile> terms;

  const KappaProfile& at(int q) const {
    static const KappaProfile empty;
    auto it = terms.find(q);
    return it == terms.end() ? empty : it->second;
  }

  void add(int q, const KappaProfile& p, double scale = 1.0) {
    if (p.is_zero()) return;
    auto& slot = terms[q];
    slot.axpy(scale, p);
    slot.prune();
    if (slot.is_zero()) terms.erase(q);
  }

  /// True if every profile at exponents >= q is independent of κ.
  bool kappa_free_from(int q) const {
    for (auto it = terms.lower_bound(q); it != terms.end(); ++it)
      if (!it->second.is_kappa_free()) return false;
    return true;
  }
};

struct SeriesValue {
  double value = 0.0;
  double dK = 0.0;
  double dkappa = 0.0;
};

/// Value and first derivatives of Σ_q K^{q/(n+1)} P_q(κ) with the symbols
/// already substituted.
inline SeriesValue evaluate_terms(const std::map<int, KappaProfile>& terms, int n, double omega,
                                  const std::vector<double>& values, double K, double kappa) {
  if (!(K > 0.0)) throw DomainError("evaluate_series: K must be positive");
  std::size_t L = 0;
  for (const auto& [q, p] : terms) L = std::max(L, p.max_harmonic());
  std::vector<fourier::Complex> ph;
  fourier::phases(omega * kappa, L, ph);
  SeriesValue out;
  for (const auto& [q, p] : terms) {
    double v = 0.0, dv = 0.0;
    for (const auto& [m, s] : p.terms()) {
      const double mv = monomial_value(m, values);
      if (mv == 0.0) continue;
      const auto [a, b] = fourier::evaluate_with_derivative(s, ph, omega);
      v += mv * a;
      dv += mv * b;
    }
    const double e = double(q) / (n + 1);
    const double Kq = std::pow(K, e);
    out.value += Kq * v;
    out.dkappa += Kq * dv;
    out.dK += e * Kq / K * v;
  }
  return out;
}

inline double evaluate_series(const NFSeries& s, const Forcing& f, double K, double kappa,
                              double t) {
  return evaluate_terms(s.terms, s.n, s.omega, symbol_values(f, t), K, kappa).value;
}

struct EngineOptions {
  int i_max = 0;          // 0 selects 3n
  int q_min = INT_MIN;    // INT_MIN selects -2n
  int harmonics = 0;      // 0 selects the GenTrig harmonic count
  int tail_rows = 3;      // extra rows computed to estimate the truncation error
  bool stage1_include_wn = false;
};

struct LieCheck {
  int row = 0;
  double residual = 0.0;  // max |B - D - {H_0^0, C}| coefficient
  double scale = 0.0;     // max |D| coefficient
  bool exact() const { return residual <= kPruneThreshold * std::max(1.0, scale); }
};

struct StageResult {
  std::set<int> active_rows;
  std::vector<NFTerm> W;          // index r = 1..N (slot 0 unused)
  std::vector<NFTerm> diagonal;   // H_0^i, i = 0..N
  std::vector<NFTerm> remainder;  // R_0^m, m = 0..
  std::vector<LieCheck> lie_checks;
  NFSeries assembled;  // exponents >= 2n - i_max
  NFSeries tail;       // exponents in [2n - N, 2n - i_max)
};

struct TruncationReport {
  int i_max = 0;
  int q_min = 0;
  int rows = 0;  // N = i_max + tail rows
  std::vector<int> dropped_exponents;
  std::map<int, double> fourier_dropped;  // sup-norm mass of discarded harmonics by exponent
  NFSeries tail;                          // stage-2 terms just below the kept range
  double period = 1.0;
  ForcingSignature signature;

  /// Average geometric decay per exponent step across the tail at K. Single
  /// rows can be small for parity reasons, so successive ratios are not used.
  double ratio(double K) const {
    const int n = tail.n;
    int q_hi = 0, q_lo = 0;
    double m_hi = 0.0, m_lo = 0.0;
    bool first = true;
    for (const auto& [q, p] : tail.terms) {
      const double m = std::pow(K, double(q) / (n + 1)) * p.sup_bound(signature);
      if (m <= 0.0) continue;
      if (first) {
        q_lo = q;
        m_lo = m;
        first = false;
      }
      q_hi = q;
      m_hi = m;
    }
    if (first || q_hi == q_lo) return 0.0;
    return std::pow(m_lo / m_hi, 1.0 / double(q_hi - q_lo));
  }

  /// Bound on the vector-field error of the truncated series integrated over
  /// one period, at action K.
  double residual_bound(double K) const {
    const int n = tail.n;
    double sum = 0.0;
    for (const auto& [q, p] : tail.terms) {
      const double e = double(q) / (n + 1);
      const double Kq = std::pow(K, e);
      const double F = p.sup_bound(signature);
      const double dF = p.kappa_derivative(tail.omega).sup_bound(signature);
      sum += std::max(Kq * dF, std::abs(e) * Kq / K * F);
    }
    for (const auto& [q, mass] : fourier_dropped) {
      sum += std::pow(K, double(q) / (n + 1)) * mass;
    }
    const double rho = ratio(K);
    if (rho >= 1.0) return std::numeric_limits<double>::infinity();
    return period * sum / (1.0 - rho);
  }
};

struct Threshold {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double K = 1.0;  // (1 + nAB)^{(n+1)/n}
  double displacement() const { return B * C; }
};

struct NormalFormResult {
  int n = 2;
  double omega = 1.0;
  double period = 1.0;
  ForcingSignature signature;
  StageResult stage1;
  StageResult stage2;
  NFSeries H_original;      // input Hamiltonian, ε = 1
  NFSeries H_intermediate;  // 𝓗₁ truncated at exponent 2n - i_max
  NFSeries H_special;       // 𝓗₂ truncated likewise
  std::map<int, int> smoothness;
  Threshold threshold;
  Threshold threshold_stage1;
  Threshold threshold_stage2;
  TruncationReport truncation;

  /// κ-free coefficients f̄_j(t) of H_special at exponents j = 2..2n-1.
  std::map<int, CoeffExpr> special_coefficients() const {
    std::map<int, CoeffExpr> out;
    for (int j = 2; j <= 2 * n - 1; ++j) out[j] = H_special.at(j).mean();
    return out;
  }
};

class Engine {
 public:
  Engine(const GenTrig& g, const Forcing& f, EngineOptions opt = {})
      : g_(g), f_(f), sig_(ForcingSignature::of(f)), n_(g.degree()), omega_(g.omega()) {
    if (f.degree() != n_) throw DomainError("normal form: forcing degree differs from GenTrig");
    if (n_ < 2) throw DomainError("normal form: needs n >= 2");
    const auto report = f.validate();
    if (!report.ok) throw DomainError("normal form: invalid forcing: " + report.failures.front());
    i_max_ = opt.i_max > 0 ? opt.i_max : 3 * n_;
    q_min_ = opt.q_min != INT_MIN ? opt.q_min : -2 * n_;
    M_ = opt.harmonics > 0 ? opt.harmonics : g.harmonics();
    if (opt.tail_rows < 1) throw DomainError("normal form: tail_rows must be >= 1");
    if (i_max_ < 2 * n_ - 1) throw DomainError("normal form: i_max must be >= 2n - 1");
    N_ = i_max_ + opt.tail_rows;
    opt_ = opt;
    report_.i_max = i_max_;
    report_.q_min = q_min_;
    report_.rows = N_;
    report_.period = f.period();
    report_.signature = sig_;
  }

  int degree() const { return n_; }
  double omega() const { return omega_; }
  int rows() const { return N_; }
  int i_max() const { return i_max_; }
  int q_min() const { return q_min_; }
  const ForcingSignature& signature() const { return sig_; }

  /// {A, B} = ∂A/∂K ∂B/∂κ - ∂A/∂κ ∂B/∂K for graded terms; the result has
  /// exponent numerator q_A + q_B - (n+1).
  NFTerm bracket(const NFTerm& a, const NFTerm& b, bool prune = true) {
    NFTerm out;
    out.q = a.q + b.q - (n_ + 1);
    if (a.is_zero() || b.is_zero()) return out;
    const double ca = double(a.q) / (n_ + 1);
    const double cb = double(b.q) / (n_ + 1);
    double lost = 0.0;
    for (const auto& [ma, fa] : a.profile.terms()) {
      for (const auto& [mb, gb] : b.profile.terms()) {
        double dropped = 0.0;
        auto s = weighted_product(fa, gb, ca, cb, &dropped);
        lost += dropped * sig_.bound(ma) * sig_.bound(mb);
        out.profile.add(ma * mb, s, 1.0);
      }
    }
    if (prune) out.profile.prune();
    if (lost > 0.0) report_.fourier_dropped[out.q] += lost;
    return out;
  }

  /// D = B - {H_0^0, C}: B is the κ-mean of D, C the zero-mean
  /// antiderivative of -(D - B), at exponent n - r + 1.
  std::pair<NFTerm, NFTerm> solve_homological(const NFTerm& D, int r) {
    if (D.q != 2 * n_ - r) throw ShapeError("solve_homological: D is not in row r");
    NFTerm B{D.q, D.profile.mean_profile()};
    // Left unpruned so that B - D - {H_0^0, C} vanishes up to rounding.
    NFTerm C{n_ - r + 1, {}};
    for (const auto& [m, s] : D.profile.terms()) {
      C.profile.add(m, fourier::antiderivative(s, omega_), -1.0);
    }
    C.profile.prune(0.0);
    return {B, C};
  }

  NFTerm H00() const {
    return {2 * n_, KappaProfile::constant(double(n_ + 1) / (2.0 * n_))};
  }

  /// Runs the Lie triangle on input rows H_i^0 (i = 0..N, factorial
  /// convention). Rows in `active` get a generator that makes H_0^i κ-free.
  StageResult deprit_diagonal(const std::vector<KappaProfile>& input, const std::set<int>& active) {
    StageResult st;
    st.active_rows = active;
    st.W.assign(N_ + 1, NFTerm{});
    for (int r = 0; r <= N_; ++r) st.W[r].q = n_ - r + 1;
    // H[i][j] = H_j^i with exponent 2n - (i + j)
    std::vector<std::vector<KappaProfile>> H(N_ + 1, std::vector<KappaProfile>(N_ + 1));
    for (int j = 0; j <= N_ && j < int(input.size()); ++j) H[0][j] = input[j];
    const NFTerm h00 = H00();
    for (int s = 1; s <= N_; ++s) {
      const int q = 2 * n_ - s;
      if (q < q_min_) {
        note_dropped(q);
        continue;
      }
      for (int i = 1; i <= s; ++i) {
        const int j = s - i;
        KappaProfile e = H[i - 1][j + 1];
        for (int k = 0; k <= j; ++k) {
          if (k + 1 >= s || st.W[k + 1].is_zero()) continue;  // W_s is not known yet
          const NFTerm prev{2 * n_ - (i - 1 + j - k), H[i - 1][j - k]};
          e.axpy(binomial(j, k), bracket(prev, st.W[k + 1]).profile);
        }
        e.prune();
        H[i][j] = std::move(e);
      }
      if (active.count(s)) {
        const NFTerm D{q, H[s][0]};
        auto [B, C] = solve_homological(D, s);
        st.W[s] = C;
        const NFTerm X = bracket(h00, C, false);
        LieCheck chk;
        chk.row = s;
        chk.scale = max_coefficient(D.profile);
        KappaProfile res = B.profile;
        res.axpy(-1.0, D.profile).axpy(-1.0, X.profile);
        res.prune(0.0);
        chk.residual = max_coefficient(res);
        st.lie_checks.push_back(chk);
        for (int i = 1; i < s; ++i) {
          H[i][s - i].axpy(1.0, X.profile);
          H[i][s - i].prune();
        }
        H[s][0] = B.profile;
      }
    }
    st.diagonal.resize(N_ + 1);
    for (int i = 0; i <= N_; ++i) st.diagonal[i] = {2 * n_ - i, H[i][0]};
    return st;
  }

  /// R_j^0 = -∂W_{j+1}/∂t pushed through the same triangle; returns R_0^m
  /// (exponent n - m) for m = 0..N - n.
  std::vector<NFTerm> remainder_diagonal(const std::vector<NFTerm>& W) {
    const int rows = N_ - n_;
    std::vector<std::vector<KappaProfile>> R(rows + 1, std::vector<KappaProfile>(rows + 1));
    for (int j = 0; j <= rows; ++j) {
      if (j + 1 < int(W.size())) R[0][j] = W[j + 1].profile.time_derivative(sig_).scaled(-1.0);
    }
    for (int s = 1; s <= rows; ++s) {
      if (n_ - s < q_min_) {
        note_dropped(n_ - s);
        continue;
      }
      for (int i = 1; i <= s; ++i) {
        const int j = s - i;
        KappaProfile e = R[i - 1][j + 1];
        for (int k = 0; k <= j; ++k) {
          if (k + 1 >= int(W.size()) || W[k + 1].is_zero()) continue;
          const NFTerm prev{n_ - (i - 1 + j - k), R[i - 1][j - k]};
          e.axpy(binomial(j, k), bracket(prev, W[k + 1]).profile);
        }
        e.prune();
        R[i][j] = std::move(e);
      }
    }
    std::vector<NFTerm> out(rows + 1);
    for (int m = 0; m <= rows; ++m) out[m] = {n_ - m, R[m][0]};
    return out;
  }

  /// H_0^0 + Σ_i (H_0^i + R_0^{i-1}) / i!, split into kept and tail parts.
  void assemble(StageResult& st) const {
    NFSeries all;
    all.n = n_;
    all.omega = omega_;
    all.add(2 * n_, st.diagonal[0].profile);
    for (int i = 1; i <= N_; ++i) all.add(2 * n_ - i, st.diagonal[i].profile, 1.0 / factorial(i));
    for (int m = 0; m < int(st.remainder.size()); ++m) {
      all.add(n_ - m, st.remainder[m].profile, 1.0 / factorial(m + 1));
    }
    st.assembled = NFSeries{n_, omega_, {}};
    st.tail = NFSeries{n_, omega_, {}};
    for (auto& [q, p] : all.terms) {
      if (q >= 2 * n_ - i_max_) {
        st.assembled.terms[q] = p;
      } else if (q >= 2 * n_ - N_) {
        st.tail.terms[q] = p;
      }
    }
  }

  /// Input rows H_i^0 = i! K^{(2n-i)/(n+1)} f_{2n-i}.
  std::vector<KappaProfile> original_rows() const {
    std::vector<KappaProfile> rows(N_ + 1);
    rows[0] = H00().profile;
    for (int i = 1; i <= 2 * n_ - 1; ++i) {
      const int j = 2 * n_ - i;
      if (!sig_.present[j - 1]) continue;
      const auto prof = g_.profile(j, 0, M_);
      const double c = factorial(i) * -(double(n_ + 1) / (double(j) * n_));
      rows[i] = KappaProfile::single({symbol_id(j - 1, 0)}, prof.spectrum).scaled(c);
      rows[i].prune();
    }
    return rows;
  }

  NFSeries original_series() const {
    NFSeries s{n_, omega_, {}};
    const auto rows = original_rows();
    for (int i = 0; i <= 2 * n_ - 1; ++i) s.add(2 * n_ - i, rows[i], 1.0 / factorial(i));
    return s;
  }

  StageResult stage1() {
    std::set<int> active;
    for (int r = 1; r <= n_ - 1; ++r) active.insert(r);
    if (opt_.stage1_include_wn) active.insert(n_);
    StageResult st = deprit_diagonal(original_rows(), active);
    st.remainder = remainder_diagonal(st.W);
    assemble(st);
    return st;
  }

  /// Stage 2 takes 𝓗₁ including its tail rows.
  StageResult stage2(const StageResult& s1) {
    std::vector<KappaProfile> rows(N_ + 1);
    auto load = [&](const NFSeries& src) {
      for (const auto& [q, p] : src.terms) {
        const int i = 2 * n_ - q;
        if (i >= 0 && i <= N_) rows[i] = i == 0 ? p : p.scaled(factorial(i));
      }
    };
    load(s1.assembled);
    load(s1.tail);
    std::set<int> active;
    // Row n stays active even when stage 1 built W_n: the stage-1 remainder
    // R_0^0 lands at exponent n and depends on κ.
    for (int r = n_; r <= 2 * n_ - 2; ++r) active.insert(r);
    StageResult st = deprit_diagonal(rows, active);
    st.remainder = remainder_diagonal(st.W);
    assemble(st);
    return st;
  }

  /// A = max |∂F̃/∂κ| / (n+1) and C = max |F̃| over a (κ, t) grid, for the
  /// generators W_r = K^{(n-r+1)/(n+1)} F̃ of one stage.
  Threshold threshold(const std::vector<NFTerm>& W, double B) const {
    Threshold th;
    th.B = B;
    constexpr int kKappa = 256, kTime = 64;
    std::vector<fourier::Complex> ph;
    for (int it = 0; it < kTime; ++it) {
      const auto values = symbol_values(f_, f_.period() * it / kTime);
      for (int ik = 0; ik < kKappa; ++ik) {
        const double theta = 2.0 * M_PI * ik / kKappa;
        for (const auto& w : W) {
          if (w.is_zero()) continue;
          fourier::phases(theta, w.profile.max_harmonic(), ph);
          double v = 0.0, dv = 0.0;
          for (const auto& [m, s] : w.profile.terms()) {
            const double mv = monomial_value(m, values);
            const auto [a, b] = fourier::evaluate_with_derivative(s, ph, omega_);
            v += mv * a;
            dv += mv * b;
          }
          th.A = std::max(th.A, std::abs(dv) / (n_ + 1));
          th.C = std::max(th.C, std::abs(v));
        }
      }
    }
    th.K = std::pow(1.0 + n_ * th.A * th.B, double(n_ + 1) / n_);
    return th;
  }

  NormalFormResult run() {
    NormalFormResult res;
    res.n = n_;
    res.omega = omega_;
    res.period = f_.period();
    res.signature = sig_;
    res.H_original = original_series();
    res.stage1 = stage1();
    res.H_intermediate = res.stage1.assembled;
    res.stage2 = stage2(res.stage1);
    res.H_special = res.stage2.assembled;

    for (const StageResult* st : {&res.stage1, &res.stage2}) {
      for (const auto& w : st->W) w.profile.record_orders(res.smoothness);
      for (const auto& r : st->remainder) r.profile.record_orders(res.smoothness);
      for (const auto& [q, p] : st->assembled.terms) p.record_orders(res.smoothness);
    }

    double b1 = 0.0;  // Σ_{j=0}^{n-1} 1/j!, the bound used for stage 1
    for (int j = 0; j <= n_ - 1; ++j) b1 += 1.0 / factorial(j);
    double b2 = 0.0;
    for (int r : res.stage2.active_rows) b2 += 1.0 / factorial(r - 1);
    res.threshold_stage1 = threshold(res.stage1.W, b1);
    res.threshold_stage2 = threshold(res.stage2.W, b2);
    res.threshold = res.threshold_stage1.K >= res.threshold_stage2.K ? res.threshold_stage1
                                                                     : res.threshold_stage2;

    report_.tail = res.stage2.tail;
    res.truncation = report_;
    return res;
  }

  static double max_coefficient(const KappaProfile& p) {
    double m = 0.0;
    for (const auto& [mon, s] : p.terms())
      for (const auto& c : s) m = std::max({m, std::abs(c.real()), std::abs(c.imag())});
    return m;
  }

 private:
  void note_dropped(int q) {
    auto& d = report_.dropped_exponents;
    if (std::find(d.begin(), d.end(), q) == d.end()) d.push_back(q);
  }

  /// Spectrum of ca F G' - cb F' G, truncated at M harmonics.
  fourier::Spectrum weighted_product(const fourier::Spectrum& F, const fourier::Spectrum& G,
                                     double ca, double cb, double* dropped) const {
    const long la = long(F.size()) - 1, lb = long(G.size()) - 1;
    const long full = la + lb;
    const long keep = std::min<long>(full, M_);
    fourier::Spectrum out(keep + 1);
    double lost = 0.0;
    for (long k = 0; k <= full; ++k) {
      fourier::Complex acc{};
      const long lo = std::max(-la, k - lb), hi = std::min(la, k + lb);
      for (long l = lo; l <= hi; ++l) {
        const double w = omega_ * (ca * double(k - l) - cb * double(l));
        if (w == 0.0) continue;
        acc += fourier::at(F, l) * fourier::at(G, k - l) * fourier::Complex(0.0, w);
      }
      if (k <= keep) out[k] = acc;
      else lost += 2.0 * std::abs(acc);
    }
    if (!out.empty()) out[0].imag(0.0);
    *dropped += lost;
    return out;
  }

  const GenTrig& g_;
  const Forcing& f_;
  ForcingSignature sig_;
  int n_;
  double omega_;
  int i_max_ = 0, q_min_ = 0, M_ = 64, N_ = 0;
  EngineOptions opt_;
  TruncationReport report_;
};

inline NormalFormResult normalize(const GenTrig& g, const Forcing& f, EngineOptions opt = {}) {
  return Engine(g, f, opt).run();
}

/// Largest derivative order of each present p_j; throws if it exceeds the
/// boundedness theorem's table (p_0: 0, p_1..p_{n-1}: 1, p_n..p_{2n-2}: 2).
inline std::map<int, int> required_smoothness(const NormalFormResult& r) {
  std::map<int, int> out;
  for (int j = 0; j <= 2 * r.n - 2; ++j)
    if (r.signature.present[j]) out[j] = 0;
  for (const auto& [j, d] : r.smoothness) out[j] = std::max(out[j], d);
  for (const auto& [j, d] : out) {
    if (d > int(theorem_smoothness(r.n, j))) {
      std::ostringstream os;
      os << "normal form consumed derivative " << d << " of p_" << j << ", more than the "
         << to_string(theorem_smoothness(r.n, j)) << " the theorem allows";
      throw SmoothnessPolicyError(os.str());
    }
  }
  return out;
}

/// Generator of one stage at ε: Σ_r ε^{r-1}/(r-1)! W_r.
inline SeriesValue generator_gradient(const std::vector<NFTerm>& W, int n, double omega,
                                      const std::vector<double>& values, double K, double kappa,
                                      double eps) {
  std::map<int, KappaProfile> terms;
  SeriesValue out;
  for (std::size_t r = 1; r < W.size(); ++r) {
    if (W[r].is_zero()) continue;
    const double w = std::pow(eps, double(r - 1)) / factorial(int(r) - 1);
    if (w == 0.0) continue;
    std::map<int, KappaProfile> one{{W[r].q, W[r].profile}};
    const auto v = evaluate_terms(one, n, omega, values, K, kappa);
    out.value += w * v.value;
    out.dK += w * v.dK;
    out.dkappa += w * v.dkappa;
  }
  return out;
}

/// ε-flow dK/dε = ∂W/∂κ, dκ/dε = -∂W/∂K from ε = 0 to 1 at fixed t.
inline std::array<double, 2> apply_generator(const std::vector<NFTerm>& W, int n, double omega,
                                             const Forcing& f, double K, double kappa, double t) {
  const auto values = symbol_values(f, t);
  ode::Tolerances tol;
  tol.rtol = 1e-12;
  tol.atol = 1e-14;
  auto rhs = [&](double eps, const ode::State<2>& u) {
    if (!(u[0] > 0.0)) throw ChartError("apply_generator: K left the positive half line");
    const auto v = generator_gradient(W, n, omega, values, u[0], u[1], eps);
    return ode::State<2>{v.dkappa, -v.dK};
  };
  return ode::integrate<2>(rhs, {K, kappa}, 0.0, 1.0, tol);
}

/// Coordinates of the original Hamiltonian for a point of the special one:
/// x = φ₁(φ₂(y)).
inline std::array<double, 2> special_to_original(const NormalFormResult& r, const Forcing& f,
                                                 double K, double kappa, double t) {
  const auto mid = apply_generator(r.stage2.W, r.n, r.omega, f, K, kappa, t);
  return apply_generator(r.stage1.W, r.n, r.omega, f, mid[0], mid[1], t);
}

/// Hamilton's equations K' = ∂H/∂κ, κ' = -∂H/∂K for a series.
inline std::array<double, 2> integrate_series(const NFSeries& s, const Forcing& f, double K,
                                              double kappa, double t0, double t1,
                                              double rtol = 1e-11, double atol = 1e-13) {
  ode::Tolerances tol;
  tol.rtol = rtol;
  tol.atol = atol;
  auto rhs = [&](double t, const ode::State<2>& u) {
    if (!(u[0] > 0.0)) throw ChartError("integrate_series: K left the positive half line");
    const auto v = evaluate_terms(s.terms, s.n, s.omega, symbol_values(f, t), u[0], u[1]);
    return ode::State<2>{v.dkappa, -v.dK};
  };
  return ode::integrate<2>(rhs, {K, kappa}, t0, t1, tol);
}

}  // namespace forced_osc::nf
