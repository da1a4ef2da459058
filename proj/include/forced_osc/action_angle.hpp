#pragma once

// Action-angle chart for the unforced oscillator:
//   x = K^{1/(n+1)} sn(κ),  y = -K^{n/(n+1)} cn(κ),
// with dx∧dy = n/(n+1) dK∧dκ. Hamiltonians in the (K, κ) chart are the
// Cartesian ones multiplied by (n+1)/n, and K' = ∂H/∂κ, κ' = -∂H/∂K.

#include <cmath>
#include <sstream>

#include "forced_osc/errors.hpp"
#include "forced_osc/forcing.hpp"
#include "forced_osc/gentrig.hpp"

namespace forced_osc {

struct CartesianState {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

struct ActionAngleState {
  double K = 1.0;
  double kappa = 0.0;  // reduced to [0, 4τ)
  double t = 0.0;
};

/// K^{a/(n+1)}
inline double action_power(double K, int a, int n) { return std::pow(K, double(a) / (n + 1)); }

/// Λ = K^{(n-1)/(n+1)}, the twist variable of the period map.
inline double lambda_from_action(double K, int n) { return action_power(K, n - 1, n); }

inline double action_from_lambda(double lambda, int n) {
  if (n < 2) throw DomainError("action_from_lambda: Λ is only a chart for n >= 2");
  return std::pow(lambda, double(n + 1) / double(n - 1));
}

/// K = (y^2 + x^{2n})^{(n+1)/(2n)}
inline double action_of(double x, double y, int n) {
  return std::pow(y * y + std::pow(x, 2 * n), double(n + 1) / (2.0 * n));
}

inline double reduce_angle(double kappa, double period) {
  double k = std::fmod(kappa, period);
  if (k < 0.0) k += period;
  if (k >= period) k -= period;
  return k;
}

inline CartesianState from_action_angle(const GenTrig& g, const ActionAngleState& s) {
  if (!(s.K > 0.0)) throw DomainError("from_action_angle: K must be positive");
  const int n = g.degree();
  const auto [sn, cn] = g.sncn(s.kappa);
  return {action_power(s.K, 1, n) * sn, -action_power(s.K, n, n) * cn, s.t};
}

inline ActionAngleState to_action_angle(const GenTrig& g, const CartesianState& s) {
  if (s.x == 0.0 && s.y == 0.0) throw DomainError("to_action_angle: origin has no angle");
  const int n = g.degree();
  const double K = action_of(s.x, s.y, n);
  const double sn = s.x / action_power(K, 1, n);
  const double cn = -s.y / action_power(K, n, n);
  return {K, g.kappa_from_sncn(sn, cn), s.t};
}

/// Cartesian Hamiltonian ½(y² + x^{2n}) - Σ_j p_j(t) x^{j+1}/(j+1).
inline double cartesian_hamiltonian(const Forcing& f, double x, double y, double t) {
  const int n = f.degree();
  double h = 0.5 * (y * y + std::pow(x, 2 * n));
  for (int j = 0; j <= 2 * n - 2; ++j) {
    if (!f.present(j)) continue;
    h -= f.p(j, t) * std::pow(x, j + 1) / (j + 1);
  }
  return h;
}

/// f_j(κ, t) = -((n+1)/(j n)) sn^j(κ) p_{j-1}(t), j = 1..2n-1.
inline double original_coefficient(const Forcing& f, int j, double sn, double t) {
  const int n = f.degree();
  return -(double(n + 1) / (double(j) * n)) * std::pow(sn, j) * f.p(j - 1, t);
}

/// ((n+1)/(2n)) K^{2n/(n+1)} + Σ_{j=1}^{2n-1} K^{j/(n+1)} f_j(κ, t)
inline double aa_hamiltonian(const GenTrig& g, const Forcing& f, double K, double kappa,
                             double t) {
  if (!(K > 0.0)) throw DomainError("aa_hamiltonian: K must be positive");
  const int n = g.degree();
  if (f.degree() != n) throw DomainError("aa_hamiltonian: forcing degree differs from GenTrig");
  const double sn = g.sn(kappa);
  double h = double(n + 1) / (2.0 * n) * action_power(K, 2 * n, n);
  for (int j = 1; j <= 2 * n - 1; ++j) {
    if (!f.present(j - 1)) continue;
    h += action_power(K, j, n) * original_coefficient(f, j, sn, t);
  }
  return h;
}

}  // namespace forced_osc
