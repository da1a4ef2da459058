#include <forced_osc/action_angle.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>

using namespace forced_osc;
using Catch::Approx;

namespace {

const GenTrig& trig(int n) {
  static std::map<int, GenTrig> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, GenTrig::build(n)).first;
  return it->second;
}

}  // namespace

TEST_CASE("from_action_angle examples", "[action-angle]") {
  const auto& g = trig(2);
  auto p = from_action_angle(g, {1.0, 0.0, 0.0});
  CHECK(p.x == Approx(0.0).margin(1e-14));
  CHECK(p.y == Approx(-1.0).margin(1e-14));
  p = from_action_angle(g, {1.0, g.tau(), 0.0});
  CHECK(p.x == Approx(1.0).margin(1e-10));
  CHECK(p.y == Approx(0.0).margin(1e-10));
  // κ from the root-finding oracle for sn = 2^{-1/4}, cn = -2^{-1/2}
  p = from_action_angle(g, {std::pow(2.0, 0.75), 1.7264768852365286, 0.0});
  CHECK(p.x == Approx(1.0).margin(1e-10));
  CHECK(p.y == Approx(1.0).margin(1e-10));
  CHECK_THROWS_AS(from_action_angle(g, {0.0, 1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(from_action_angle(g, {-1.0, 1.0, 0.0}), DomainError);
}

TEST_CASE("to_action_angle examples", "[action-angle]") {
  const auto& g = trig(2);
  auto s = to_action_angle(g, {0.0, -1.0, 0.0});
  CHECK(s.K == Approx(1.0).margin(1e-14));
  CHECK(s.kappa == Approx(0.0).margin(1e-12));
  s = to_action_angle(g, {1.0, 0.0, 0.0});
  CHECK(s.K == Approx(1.0).margin(1e-14));
  CHECK(s.kappa == Approx(g.tau()).margin(1e-10));
  s = to_action_angle(g, {1.0, 1.0, 0.0});
  CHECK(s.K == Approx(1.6817928305074290).margin(1e-14));
  CHECK(s.kappa > g.tau());
  CHECK(s.kappa < 2 * g.tau());
  CHECK(s.kappa == Approx(1.7264768852365286).margin(1e-9));
  CHECK_THROWS_AS(to_action_angle(g, {0.0, 0.0, 0.0}), DomainError);
}

TEST_CASE("round trips and level-set identity", "[action-angle][property]") {
  for (int n : {2, 3, 4}) {
    const auto& g = trig(n);
    std::mt19937_64 rng(7 * n);
    std::uniform_real_distribution<double> lk(std::log(0.01), std::log(1e4));
    std::uniform_real_distribution<double> ang(0.0, g.period());
    for (int i = 0; i < 500; ++i) {
      const double K = std::exp(lk(rng));
      const double kappa = ang(rng);
      const auto c = from_action_angle(g, {K, kappa, 0.0});
      const double level = c.y * c.y + std::pow(c.x, 2 * n);
      REQUIRE(std::abs(level / std::pow(K, 2.0 * n / (n + 1)) - 1.0) < 1e-10);
      const auto back = to_action_angle(g, c);
      REQUIRE(back.K == Approx(K).epsilon(1e-12));
      double d = std::abs(back.kappa - kappa);
      d = std::min(d, g.period() - d);
      REQUIRE(d < 1e-8);
    }
  }
}

TEST_CASE("symplectic multiplier n/(n+1)", "[action-angle][property]") {
  for (int n : {2, 3}) {
    const auto& g = trig(n);
    std::mt19937_64 rng(100 + n);
    std::uniform_real_distribution<double> uk(0.5, 50.0);
    std::uniform_real_distribution<double> ang(0.0, g.period());
    for (int i = 0; i < 100; ++i) {
      const double K = uk(rng), kappa = ang(rng);
      const double hK = 1e-5 * K, hk = 1e-5;
      const auto pK = from_action_angle(g, {K + hK, kappa, 0}), mK = from_action_angle(g, {K - hK, kappa, 0});
      const auto pk = from_action_angle(g, {K, kappa + hk, 0}), mk = from_action_angle(g, {K, kappa - hk, 0});
      const double xK = (pK.x - mK.x) / (2 * hK), yK = (pK.y - mK.y) / (2 * hK);
      const double xk = (pk.x - mk.x) / (2 * hk), yk = (pk.y - mk.y) / (2 * hk);
      REQUIRE(xK * yk - xk * yK == Approx(double(n) / (n + 1)).margin(1e-6));
    }
  }
}

TEST_CASE("aa_hamiltonian examples", "[action-angle]") {
  const auto& g = trig(2);
  CHECK(aa_hamiltonian(g, Forcing::zero(2), 1.0, 0.3, 0.0) == Approx(0.75).margin(1e-15));
  Forcing one(2, 1.0);
  one.set(0, TrigSeries{1.0, {}, {}});
  CHECK(aa_hamiltonian(g, one, 1.0, g.tau(), 0.0) == Approx(-0.75).margin(1e-10));
  CHECK(aa_hamiltonian(g, one, 1.0, 0.0, 0.0) == Approx(0.75).margin(1e-14));
}

TEST_CASE("chart consistency of the Hamiltonians", "[action-angle][property]") {
  for (int n : {2, 3}) {
    const auto& g = trig(n);
    const Forcing f = generic_forcing(n);
    std::mt19937_64 rng(9 + n);
    std::uniform_real_distribution<double> uk(0.5, 200.0), ang(0.0, g.period()), ut(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const double K = uk(rng), kappa = ang(rng), t = ut(rng);
      const auto c = from_action_angle(g, {K, kappa, t});
      const double lhs = aa_hamiltonian(g, f, K, kappa, t);
      const double rhs = double(n + 1) / n * cartesian_hamiltonian(f, c.x, c.y, t);
      REQUIRE(lhs == Approx(rhs).epsilon(1e-9));
    }
  }
}
