#include <forced_osc/gentrig.hpp>

#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <map>
#include <random>

using namespace forced_osc;
using Catch::Approx;

namespace {

// Independent oracle: tanh-sinh handles the endpoint singularity directly.
double tau_oracle(int n) {
  boost::math::quadrature::tanh_sinh<double> ts;
  // xc is the distance to the nearer endpoint; near ξ = 1 use it to avoid
  // cancellation in 1 - ξ^{2n}.
  return ts.integrate(
      [n](double x, double xc) {
        const double gap = (x > 0.5 && xc > 0.0) ? -std::expm1(2.0 * n * std::log1p(-xc))
                                                 : 1.0 - std::pow(x, 2 * n);
        return 1.0 / std::sqrt(gap);
      },
      0.0, 1.0);
}

const GenTrig& trig(int n) {
  static std::map<int, GenTrig> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, GenTrig::build(n)).first;
  return it->second;
}

}  // namespace

TEST_CASE("quarter period matches closed form and quadrature", "[gentrig]") {
  CHECK(trig(1).tau() == Approx(M_PI / 2).margin(1e-12));
  // mpmath quadrature of ∫_0^1 (1-ξ^4)^{-1/2}: 1.31102877714605989635...
  CHECK(trig(2).tau() == Approx(1.3110287771460599).margin(1e-12));
  CHECK(std::abs(trig(2).tau() - tau_oracle(2)) < 1e-10);
  // (1/6) B(1/6, 1/2) = 1.21432532394379079...
  CHECK(trig(3).tau() == Approx(1.2143253239437908).margin(1e-12));
  CHECK(std::abs(trig(3).tau() - tau_oracle(3)) < 1e-10);
  for (int n : {1, 2, 3, 5}) {
    CHECK(std::abs(trig(n).tau() - trig(n).tau_quadrature()) < 1e-12);
  }
}

TEST_CASE("build_gentrig rejects bad arguments", "[gentrig]") {
  CHECK_THROWS_AS(GenTrig::build(0), DomainError);
  CHECK_THROWS_AS(GenTrig::build(-3), DomainError);
  CHECK_THROWS_AS(GenTrig::build(2, 4), DomainError);
  CHECK_THROWS_AS(GenTrig::build(2, 64, 1e-6), DomainError);
}

TEST_CASE("n = 1 reproduces sine and cosine", "[gentrig]") {
  const auto& g = trig(1);
  for (double k = -7.0; k < 7.0; k += 0.0137) {
    REQUIRE(g.sn(k) == Approx(std::sin(k)).margin(1e-11));
    REQUIRE(g.cn(k) == Approx(std::cos(k)).margin(1e-11));
  }
}

TEST_CASE("special values of sn and cn", "[gentrig]") {
  const auto& g = trig(2);
  const double tau = g.tau();
  CHECK(g.sn(0.0) == Approx(0.0).margin(1e-14));
  CHECK(g.cn(0.0) == Approx(1.0).margin(1e-14));
  CHECK(g.sn(tau) == Approx(1.0).margin(1e-10));
  CHECK(g.cn(tau) == Approx(0.0).margin(1e-10));
  CHECK(g.sn(2 * tau) == Approx(0.0).margin(1e-10));
  CHECK(g.cn(2 * tau) == Approx(-1.0).margin(1e-10));
}

TEST_CASE("Pythagorean identity over 1e5 samples", "[gentrig][property]") {
  for (int n : {1, 2, 3, 5}) {
    const auto& g = trig(n);
    std::mt19937_64 rng(42 + n);
    std::uniform_real_distribution<double> u(0.0, g.period());
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) worst = std::max(worst, g.identity_residual(u(rng)));
    INFO("n = " << n);
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("derivative identities under central differences", "[gentrig][property]") {
  const double h = 1e-5;
  for (int n : {1, 2, 3, 5}) {
    const auto& g = trig(n);
    double worst_sn = 0.0, worst_cn = 0.0;
    for (double k = -2.0 * g.tau(); k < 6.0 * g.tau(); k += 0.01) {
      const double dsn = (g.sn(k + h) - g.sn(k - h)) / (2 * h);
      const double dcn = (g.cn(k + h) - g.cn(k - h)) / (2 * h);
      worst_sn = std::max(worst_sn, std::abs(dsn - g.cn(k)));
      worst_cn = std::max(worst_cn, std::abs(dcn + n * std::pow(g.sn(k), 2 * n - 1)));
    }
    INFO("n = " << n);
    CHECK(worst_sn < 1e-6);
    CHECK(worst_cn < 1e-6);
  }
}

TEST_CASE("periodicity and reflection symmetries", "[gentrig][property]") {
  for (int n : {2, 3, 5}) {
    const auto& g = trig(n);
    const double tau = g.tau();
    double worst = 0.0;
    for (double k = 0.0; k < 4 * tau; k += 0.003) {
      worst = std::max(worst, std::abs(g.sn(k + 4 * tau) - g.sn(k)));
      worst = std::max(worst, std::abs(g.sn(-k) + g.sn(k)));
      worst = std::max(worst, std::abs(g.sn(tau + k) - g.sn(tau - k)));
      worst = std::max(worst, std::abs(g.cn(-k) - g.cn(k)));
      worst = std::max(worst, std::abs(g.cn(tau + k) + g.cn(tau - k)));
    }
    INFO("n = " << n);
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("power means agree with Beta closed form and table quadrature", "[gentrig]") {
  CHECK(trig(2).power_mean(1, 0) == 0.0);
  CHECK(trig(3).power_mean(3, 0) == 0.0);
  CHECK(trig(2).power_mean(4, 1) == 0.0);
  CHECK(trig(1).power_mean(2, 0) == Approx(0.5).margin(1e-15));
  // 4 (Γ(3/4)/Γ(1/4))^2, mpmath: 0.456946581044463621...
  CHECK(trig(2).power_mean(2, 0) == Approx(0.45694658104446362).margin(1e-14));
  CHECK_THROWS_AS(trig(2).power_mean(2, 2), DomainError);

  for (int n : {1, 2, 3, 5}) {
    const auto& g = trig(n);
    constexpr int samples = 4096;
    for (int a = 0; a <= 8; ++a) {
      for (int b = 0; b <= 1; ++b) {
        double sum = 0.0;  // trapezoid on a periodic integrand
        for (int i = 0; i < samples; ++i) {
          const auto [s, c] = g.sncn(g.period() * i / samples);
          sum += std::pow(s, a) * (b ? c : 1.0);
        }
        INFO("n = " << n << " a = " << a << " b = " << b);
        CHECK(std::abs(sum / samples - g.power_mean(a, b)) < 1e-9);
      }
    }
  }
}

TEST_CASE("profiles", "[gentrig]") {
  SECTION("constant profile") {
    const auto p = trig(2).profile(0, 0, 64);
    REQUIRE(p.spectrum.size() == 1);
    CHECK(p.spectrum[0].real() == Approx(1.0).margin(1e-15));
  }
  SECTION("sn for n = 1 is a single sine harmonic") {
    const auto p = trig(1).profile(1, 0, 64);
    CHECK(fourier::sin_amplitude(p.spectrum, 1) == Approx(1.0).margin(1e-12));
    double others = 0.0;
    for (std::size_t k = 0; k < p.spectrum.size(); ++k) {
      if (k != 1) others += std::abs(p.spectrum[k]);
    }
    others += std::abs(fourier::cos_amplitude(p.spectrum, 1));
    CHECK(others < 1e-12);
  }
  SECTION("sn for n = 2 is odd harmonic") {
    const auto p = trig(2).profile(1, 0, 64);
    for (std::size_t k = 0; k < p.spectrum.size(); k += 2) {
      CHECK(std::abs(p.spectrum[k]) < 1e-14);
    }
    CHECK(std::abs(fourier::sin_amplitude(p.spectrum, 1)) > 0.5);
    CHECK_FALSE(p.truncated);
    CHECK(p.residual < 1e-12);
  }
  SECTION("harmonic 0 equals the power mean") {
    for (int n : {2, 3}) {
      for (int a = 0; a <= 2 * n; ++a) {
        const auto p = trig(n).profile(a, 0, 64);
        const double c0 = p.spectrum.empty() ? 0.0 : p.spectrum[0].real();
        CHECK(c0 == Approx(trig(n).power_mean(a, 0)).margin(1e-13));
      }
    }
  }
  SECTION("profile series reproduces pointwise values") {
    const auto& g = trig(3);
    const auto p = g.profile(5, 1, 64);
    for (double k = 0.0; k < g.period(); k += 0.05) {
      const auto [s, c] = g.sncn(k);
      CHECK(fourier::evaluate(p.spectrum, g.omega() * k) ==
            Approx(std::pow(s, 5) * c).margin(1e-12));
    }
  }
  SECTION("too few harmonics is reported") {
    const auto p = trig(5).profile(9, 0, 2);
    CHECK(p.truncated);
    CHECK(p.residual > 1e-4);
  }
}

TEST_CASE("kappa_from_sncn", "[gentrig]") {
  const auto& g = trig(2);
  CHECK(g.kappa_from_sncn(0.0, 1.0) == Approx(0.0).margin(1e-12));
  CHECK(g.kappa_from_sncn(1.0, 0.0) == Approx(g.tau()).margin(1e-10));
  // 2τ - ∫_0^{2^{-1/4}} (1-ξ^4)^{-1/2} dξ by mpmath: 1.726476885236528623...
  const double k = g.kappa_from_sncn(std::pow(2.0, -0.25), -std::pow(2.0, -0.5));
  CHECK(k > g.tau());
  CHECK(k < 2 * g.tau());
  CHECK(k == Approx(1.7264768852365286).margin(1e-10));
  CHECK_THROWS_AS(g.kappa_from_sncn(0.5, 0.5), DomainError);
}

TEST_CASE("kappa_from_sncn inverts sn, cn", "[gentrig][property]") {
  for (int n : {1, 2, 3, 5}) {
    const auto& g = trig(n);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const double k = g.period() * i / 2000.0;
      const auto [s, c] = g.sncn(k);
      const double back = g.kappa_from_sncn(s, c);
      double d = std::abs(back - k);
      d = std::min(d, g.period() - d);
      worst = std::max(worst, d);
    }
    INFO("n = " << n);
    CHECK(worst < 1e-7);
  }
}

TEST_CASE("inverse table is strictly increasing", "[gentrig]") {
  const auto& inv = trig(3).inverse_table();
  REQUIRE(inv.size() > 2);
  for (std::size_t i = 1; i < inv.size(); ++i) REQUIRE(inv[i] > inv[i - 1]);
  CHECK(inv.front() == 0.0);
  CHECK(inv.back() == Approx(trig(3).tau()).margin(1e-14));
}
