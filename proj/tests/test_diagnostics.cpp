#include <forced_osc/diagnostics.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>

using namespace forced_osc;
using Catch::Approx;

namespace {

const GenTrig& trig(int n) {
  static std::map<int, GenTrig> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, GenTrig::build(n)).first;
  return it->second;
}

Forcing constant_p1() {
  Forcing f(2, 1.0);
  f.set(1, TrigSeries{1.0, {}, {}});
  return f;
}

}  // namespace

TEST_CASE("twist coefficients", "[diagnostics]") {
  const auto& g = trig(2);
  SECTION("zero forcing") {
    const auto td = twist_coefficients(nf::normalize(g, Forcing::zero(2)), Forcing::zero(2));
    for (const auto& [j, s] : td.sigma) CHECK(s == 0.0);
    CHECK(td.alpha(7.0) == 7.0);
    CHECK(td.dalpha(7.0) == 1.0);
  }
  SECTION("constant p1") {
    const Forcing f = constant_p1();
    const auto r = nf::normalize(g, f);
    // f̄_2 = -(3/4) mean(sn^2); mean(sn^2) = 0.456946581044463621 (Beta quotient)
    const double fbar2 = -0.75 * 0.45694658104446362;
    CHECK(time_mean(r.special_coefficients().at(2), f) == Approx(fbar2).epsilon(1e-12));
    const auto td = twist_coefficients(r, f);
    CHECK(td.sigma.at(2) == Approx(-2.0 / 3.0 * fbar2).epsilon(1e-12));
    CHECK(td.sigma.at(2) == Approx(0.22847).margin(1e-5));
    CHECK(td.sigma.at(3) == 0.0);
  }
  SECTION("Morris") {
    const auto td = twist_coefficients(nf::normalize(g, Forcing::morris()), Forcing::morris());
    for (const auto& [j, s] : td.sigma) CHECK(s == 0.0);
  }
  SECTION("κ-dependent rows are rejected") {
    auto r = nf::normalize(g, acceptance_forcing_n2());
    r.H_special.terms[2] = r.H_intermediate.at(2);
    CHECK_THROWS_AS(twist_coefficients(r, acceptance_forcing_n2()), ShapeError);
  }
}

TEST_CASE("α(Λ) predicts the mean rotation of the period map", "[diagnostics]") {
  // The sign of the σ terms is fixed by κ' = -∂H/∂K over 0 -> -T.
  const auto& g = trig(2);
  const Forcing f = constant_p1();
  const auto td = twist_coefficients(nf::normalize(g, f), f);
  const auto kappas = uniform_kappa_grid(g, 16);
  for (double lam : {10.0, 20.0}) {
    double mean_G = 0.0;
    for (double k : kappas) mean_G += period_map(g, f, {}, {action_from_lambda(lam, 2), k, 0.0}).G;
    mean_G /= double(kappas.size());
    const double predicted = td.alpha(lam) - lam;
    INFO("Λ = " << lam);
    CHECK(predicted < 0.0);
    CHECK(std::abs(mean_G - predicted) < 0.01 * std::abs(predicted));
    CHECK(twist_measure(g, f, {}, lam, kappas) == Approx(td.dalpha(lam)).epsilon(1e-4));
  }
}

TEST_CASE("twist_measure", "[diagnostics]") {
  const auto& g = trig(2);
  const auto kappas = uniform_kappa_grid(g, 8);
  CHECK(twist_measure(g, Forcing::zero(2), {}, 10.0, kappas) == Approx(1.0).margin(1e-7));
  Forcing slow = Forcing::zero(2, 2.5);
  CHECK(twist_measure(g, slow, {}, 10.0, kappas) == Approx(2.5).margin(1e-7));
  CHECK(std::abs(twist_measure(g, Forcing::morris(), {}, 50.0, kappas) - 1.0) < 0.01);
  CHECK(std::abs(twist_measure(g, acceptance_forcing_n2(), {}, 100.0, kappas) - 1.0) < 0.02);
  IntegratorConfig fwd;
  fwd.direction = Direction::forward;
  CHECK(twist_measure(g, Forcing::zero(2), fwd, 10.0, kappas) == Approx(1.0).margin(1e-7));
  CHECK_THROWS_AS(twist_measure(g, Forcing::zero(2), {}, 10.0, {}), DomainError);
}

TEST_CASE("loglog_slope", "[diagnostics]") {
  std::vector<double> x, y;
  for (double v : log_spaced(1.0, 100.0, 7)) {
    x.push_back(v);
    y.push_back(3.0 * std::pow(v, -1.5));
  }
  int used = 0;
  CHECK(loglog_slope(x, y, &used) == Approx(-1.5).epsilon(1e-12));
  CHECK(used == 7);
  y[0] = 1e-20;
  CHECK(loglog_slope(x, y, &used) == Approx(-1.5).epsilon(1e-12));
  CHECK(used == 6);
  const auto l = log_spaced(10.0, 100.0, 8);
  CHECK(l.front() == 10.0);
  CHECK(l.back() == Approx(100.0).epsilon(1e-15));
}

TEST_CASE("decay_fit", "[diagnostics]") {
  const auto& g = trig(2);
  const auto kappas = uniform_kappa_grid(g, 8);
  const auto lambdas = log_spaced(10.0, 100.0, 6);
  CHECK_THROWS_AS(decay_fit(g, Forcing::morris(), {}, log_spaced(10, 100, 5), kappas), DomainError);
  CHECK_THROWS_AS(decay_fit(g, Forcing::morris(), {}, log_spaced(2, 100, 8), kappas), DomainError);

  const auto zero = decay_fit(g, Forcing::zero(2), {}, lambdas, kappas);
  for (const auto& p : zero.points) CHECK(p.max_F < p.noise);
  CHECK(zero.degenerate());
  CHECK_FALSE(zero.notes.empty());

  const auto m = decay_fit(g, Forcing::morris(), {}, lambdas, kappas);
  CHECK_FALSE(m.degenerate());
  CHECK(m.slope_G < -1.8);
  CHECK(m.slope_G > -2.4);
}

TEST_CASE("Morris F follows its leading-order term", "[diagnostics]") {
  // Integrating Λ' = -(1/2) Λ^{-1} cn(κ) p(t) by parts along κ' ≈ -Λ gives
  // F = (1/2) Λ^{-2} p(0) [sn(κ*) - sn(κ)] + O(Λ^{-3}).
  const auto& g = trig(2);
  const Forcing f = Forcing::morris();
  for (double lam : {60.0, 100.0}) {
    double worst = 0.0, scale = 0.0;
    for (double k : uniform_kappa_grid(g, 16)) {
      const auto s = period_map(g, f, {}, {action_from_lambda(lam, 2), k, 0.0});
      const double lead = 0.5 / (lam * lam) * f.p(0, 0.0) * (g.sn(s.kappa_star) - g.sn(s.kappa));
      worst = std::max(worst, std::abs(s.F - lead));
      scale = std::max(scale, std::abs(lead));
    }
    INFO("Λ = " << lam);
    CHECK(worst < 0.1 * scale);
  }
}

TEST_CASE("boundedness scan", "[diagnostics]") {
  const auto& g = trig(2);
  const auto seeds = scan_seeds(g, 6, 5.0, 50.0);
  CHECK(seeds.front().K == 5.0);
  CHECK(seeds.back().K == 50.0);

  SECTION("unforced envelopes have zero width") {
    const auto rep = boundedness_scan(g, Forcing::zero(2), {}, seeds, 50, 1e4);
    CHECK(rep.escapes() == 0);
    for (const auto& s : rep.seeds) CHECK(s.ratio() == Approx(1.0).margin(1e-8));
  }
  SECTION("deterministic, also with threads") {
    const Forcing f = acceptance_forcing_n2();
    const auto a = boundedness_scan(g, f, {}, seeds, 40, 1e4);
    const auto b = boundedness_scan(g, f, {}, seeds, 40, 1e4);
    const auto c = boundedness_scan(g, f, {}, seeds, 40, 1e4, 3);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      CHECK(a.seeds[i].max_K == b.seeds[i].max_K);
      CHECK(a.seeds[i].min_K == b.seeds[i].min_K);
      CHECK(a.seeds[i].max_K == c.seeds[i].max_K);
      CHECK(a.seeds[i].min_K == c.seeds[i].min_K);
    }
    CHECK(a.escapes() == 0);
    CHECK(a.max_ratio() > 1.0);
  }
  SECTION("escapes are recorded per seed") {
    const auto rep = boundedness_scan(g, acceptance_forcing_n2(), {}, seeds, 5, 20.0);
    CHECK(rep.escapes() > 0);
    CHECK(rep.escapes() < int(seeds.size()));
    for (const auto& s : rep.seeds) {
      if (s.escaped) CHECK(s.max_K > 20.0);
    }
    const auto bad = boundedness_scan(g, Forcing::morris(), {}, {{-1.0, 0.0}}, 5, 1e4);
    CHECK(bad.seeds[0].escaped);
  }
  SECTION("iteration limits") {
    CHECK_THROWS_AS(boundedness_scan(g, Forcing::morris(), {}, seeds, 0, 1e4), DomainError);
    CHECK_THROWS_AS(boundedness_scan(g, Forcing::morris(), {}, seeds, 2'000'000, 1e4), DomainError);
  }
}

TEST_CASE("long Morris orbit stays bounded", "[diagnostics][slow]") {
  const auto& g = trig(2);
  const auto rep = boundedness_scan(g, Forcing::morris(), {}, {{10.0, 0.0}}, 100000, 1e4);
  CHECK(rep.escapes() == 0);
  CHECK(rep.seeds[0].iterations == 100000);
}
