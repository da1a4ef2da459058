// forced-osc: command-line driver for the forced oscillator toolkit.

#include <CLI11.hpp>
#include <json.hpp>

#include <forced_osc/config.hpp>
#include <forced_osc/diagnostics.hpp>
#include <forced_osc/flow.hpp>
#include <forced_osc/normal_form.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

using namespace forced_osc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output file " + path);
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

class Csv {
 public:
  Csv(std::ostream& os, const std::string& command, const RunConfig& c) : os_(os) {
    os_ << "# forced-osc " << command << " config_hash=" << c.hash() << "\n";
  }
  void comment(const std::string& s) { os_ << "# " << s << "\n"; }
  void header(const std::vector<std::string>& cols) { row(cols); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << csv_field(cells[i]);
    os_ << "\n";
  }

 private:
  std::ostream& os_;
};

void write_summary(const RunConfig& c, json j) {
  if (c.output.summary.empty()) return;
  j["config_hash"] = c.hash();
  Sink s(c.output.summary);
  s.os() << j.dump(2) << "\n";
}

// ---- subcommands ----------------------------------------------------------

int run_gentrig(const RunConfig& c) {
  const auto g = c.gentrig_table();
  Sink sink(c.output.data);
  Csv csv(sink.os(), "gentrig", c);
  csv.comment("n=" + std::to_string(c.n) + " tau=" + num(g.tau()) + " period=" + num(g.period()));
  csv.header({"kappa", "sn", "cn", "residual"});
  const int m = c.gentrig.samples;
  for (int i = 0; i < m; ++i) {
    const double k = g.period() * double(i) / double(m - 1);
    const auto [sn, cn] = g.sncn(k);
    const double res = cn * cn + std::pow(sn, 2 * c.n) - 1.0;
    csv.row({num(k), num(sn), num(cn), num(res)});
  }
  return 0;
}

int run_orbit(const RunConfig& c) {
  const auto g = c.gentrig_table();
  const auto f = c.forcing();
  const auto start = from_action_angle(g, {c.orbit.K, c.orbit.kappa, 0.0});
  const auto pts = sample_orbit(g, f, c.integrator, start, c.orbit.t1, c.orbit.samples);
  Sink sink(c.output.data);
  Csv csv(sink.os(), "orbit", c);
  csv.header({"t", "x", "y", "K", "kappa", "Lambda", "winding"});
  for (const auto& p : pts) {
    csv.row({num(p.t), num(p.x), num(p.y), num(p.K), num(p.kappa), num(p.lambda),
             std::to_string(p.winding)});
  }
  return 0;
}

int run_poincare(const RunConfig& c) {
  const auto g = c.gentrig_table();
  const auto f = c.forcing();
  if (c.n < 2) throw DomainError("poincare needs n >= 2");
  Sink sink(c.output.data);
  Csv csv(sink.os(), "poincare", c);
  csv.header({"iter", "x", "y", "K", "kappa", "Lambda", "winding"});
  ActionAngleState s{c.poincare.K, reduce_angle(c.poincare.kappa, g.period()), 0.0};
  double advance = 0.0;
  auto emit = [&](long it) {
    const auto xy = from_action_angle(g, s);
    const long w = long(std::floor(advance / g.period()));
    csv.row({std::to_string(it), num(xy.x), num(xy.y), num(s.K), num(s.kappa),
             num(lambda_from_action(s.K, c.n)), std::to_string(w)});
  };
  emit(0);
  for (long it = 1; it <= c.poincare.iterations; ++it) {
    const auto m = period_map(g, f, c.integrator, s);
    advance += m.kappa_star - m.kappa;
    s = {m.K_star, reduce_angle(m.kappa_star, g.period()), 0.0};
    emit(it);
  }
  return 0;
}

json spectrum_json(const fourier::Spectrum& s) {
  // value(θ) = Σ_k cos_k cos kθ + sin_k sin kθ with θ = ωκ
  json cosv = json::array(), sinv = json::array();
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double w = k == 0 ? 1.0 : 2.0;
    cosv.push_back(w * s[k].real());
    sinv.push_back(k == 0 ? 0.0 : -w * s[k].imag());
  }
  return {{"cos", cosv}, {"sin", sinv}};
}

json profile_json(const nf::KappaProfile& p);

json series_json(const nf::NFSeries& s) {
  json out = json::object();
  for (const auto& [q, p] : s.terms) {
    out[std::to_string(q)] = profile_json(p);
  }
  return out;
}

json profile_json(const nf::KappaProfile& p) {
  json terms = json::object();
  for (const auto& [m, spec] : p.terms()) terms[nf::to_string(m)] = spectrum_json(spec);
  return terms;
}

// Nonzero generator rows W_r as {"r", "exponent", "terms"}.
json generators_json(const nf::StageResult& st) {
  json rows = json::array();
  for (std::size_t r = 1; r < st.W.size(); ++r) {
    if (st.W[r].profile.is_zero()) continue;
    rows.push_back({{"r", r}, {"exponent", st.W[r].q}, {"terms", profile_json(st.W[r].profile)}});
  }
  return rows;
}

json threshold_json(const nf::Threshold& t) {
  return {{"A", t.A}, {"B", t.B}, {"C", t.C}, {"K", t.K}};
}

int run_normalform(const RunConfig& c) {
  if (c.n < 2) throw DomainError("normalform needs n >= 2");
  const auto g = c.gentrig_table();
  const auto f = c.forcing();
  const auto r = nf::normalize(g, f, c.engine_options());
  json ledger = json::object(), allowed = json::object();
  bool ledger_ok = true;
  std::string ledger_error;
  std::map<int, int> used;
  try {
    used = nf::required_smoothness(r);
  } catch (const SmoothnessPolicyError& e) {
    ledger_ok = false;
    ledger_error = e.what();
    used = r.smoothness;
  }
  for (const auto& [j, d] : used) ledger["p_" + std::to_string(j)] = d;
  for (int j = 0; j <= 2 * c.n - 2; ++j) {
    allowed["p_" + std::to_string(j)] = int(theorem_smoothness(c.n, j));
  }

  json lie = json::array();
  for (const auto* st : {&r.stage1, &r.stage2}) {
    for (const auto& lc : st->lie_checks) {
      lie.push_back({{"stage", st == &r.stage1 ? 1 : 2},
                     {"row", lc.row},
                     {"residual", lc.residual},
                     {"scale", lc.scale},
                     {"exact", lc.exact()}});
    }
  }
  json fdrop = json::object();
  for (const auto& [q, m] : r.truncation.fourier_dropped) fdrop[std::to_string(q)] = m;
  const double K_check = 4.0 * r.threshold.K;
  const double bound = r.truncation.residual_bound(K_check);
  json out = {
      {"config_hash", c.hash()},
      {"n", r.n},
      {"omega", r.omega},
      {"period", r.period},
      {"smoothness_ledger", ledger},
      {"smoothness_allowed", allowed},
      {"smoothness_ok", ledger_ok},
      {"threshold",
       {{"overall", threshold_json(r.threshold)},
        {"stage1", threshold_json(r.threshold_stage1)},
        {"stage2", threshold_json(r.threshold_stage2)}}},
      {"shape",
       {{"intermediate_kappa_free_from_n_plus_1", r.H_intermediate.kappa_free_from(c.n + 1)},
        {"special_kappa_free_from_2", r.H_special.kappa_free_from(2)}}},
      {"generators",
       {{"stage1", generators_json(r.stage1)}, {"stage2", generators_json(r.stage2)}}},
      {"lie_checks", lie},
      {"truncation",
       {{"i_max", r.truncation.i_max},
        {"q_min", r.truncation.q_min},
        {"rows", r.truncation.rows},
        {"dropped_exponents", r.truncation.dropped_exponents},
        {"fourier_dropped", fdrop},
        {"K_check", K_check},
        {"tail_ratio", r.truncation.ratio(K_check)},
        {"residual_bound", std::isfinite(bound) ? json(bound) : json("inf")}}},
      {"series",
       {{"original", series_json(r.H_original)},
        {"intermediate", series_json(r.H_intermediate)},
        {"special", series_json(r.H_special)}}},
  };
  if (!ledger_ok) out["smoothness_error"] = ledger_error;
  Sink sink(c.output.data);
  sink.os() << out.dump(2) << "\n";
  if (!ledger_ok) {
    std::cerr << "forced-osc: " << ledger_error << "\n";
    return kExitNumeric;
  }
  return 0;
}

int run_twist(const RunConfig& c) {
  if (c.n < 2) throw DomainError("twist needs n >= 2");
  const auto g = c.gentrig_table();
  const auto f = c.forcing();
  const auto r = nf::normalize(g, f, c.engine_options());
  const auto td = twist_coefficients(r, f);
  const auto lambdas = log_spaced(c.twist.lambda_min, c.twist.lambda_max, c.twist.points);
  const auto kappas = uniform_kappa_grid(g, c.twist.kappa_phases);
  Sink sink(c.output.data);
  Csv csv(sink.os(), "twist", c);
  for (const auto& [j, s] : td.sigma) csv.comment("sigma_" + std::to_string(j) + "=" + num(s));
  csv.header({"Lambda", "measured", "alpha", "dalpha", "discrepancy"});
  std::vector<double> disc;
  for (double lam : lambdas) {
    const double m = twist_measure(g, f, c.integrator, lam, kappas);
    disc.push_back(std::abs(m - td.dalpha(lam)));
    csv.row({num(lam), num(m), num(td.alpha(lam)), num(td.dalpha(lam)), num(disc.back())});
  }
  int used = 0;
  const double slope = lambdas.size() >= 2 ? loglog_slope(lambdas, disc, &used) : std::nan("");
  csv.comment("discrepancy_slope=" + num(slope) + " points=" + std::to_string(used));
  json sig = json::object();
  for (const auto& [j, s] : td.sigma) sig[std::to_string(j)] = s;
  write_summary(c, {{"sigma", sig}, {"discrepancy_slope", std::isfinite(slope) ? json(slope) : json()}});
  return 0;
}

int run_decay(const RunConfig& c) {
  if (c.n < 2) throw DomainError("decay needs n >= 2");
  const auto g = c.gentrig_table();
  const auto f = c.forcing();
  std::optional<TwistData> td;
  if (c.decay_subtract_twist) td = twist_coefficients(nf::normalize(g, f, c.engine_options()), f);
  const auto fit = decay_fit(g, f, c.integrator,
                             log_spaced(c.decay.lambda_min, c.decay.lambda_max, c.decay.points),
                             uniform_kappa_grid(g, c.decay.kappa_phases), td ? &*td : nullptr);
  Sink sink(c.output.data);
  Csv csv(sink.os(), "decay", c);
  csv.header({"Lambda", "max_F", "max_G", "noise"});
  for (const auto& p : fit.points) csv.row({num(p.lambda), num(p.max_F), num(p.max_G), num(p.noise)});
  csv.comment("slope_F=" + num(fit.slope_F) + " slope_G=" + num(fit.slope_G));
  for (const auto& note : fit.notes) csv.comment(note);
  auto opt = [](double v) { return std::isfinite(v) ? json(v) : json(); };
  write_summary(c, {{"slope_F", opt(fit.slope_F)},
                    {"slope_G", opt(fit.slope_G)},
                    {"degenerate", fit.degenerate()},
                    {"notes", fit.notes}});
  return 0;
}

int run_scan(const RunConfig& c) {
  const auto g = c.gentrig_table();
  const auto f = c.forcing();
  const auto seeds = scan_seeds(g, c.scan.seeds, c.scan.K_min, c.scan.K_max);
  const auto rep = boundedness_scan(g, f, c.integrator, seeds, c.scan.iterations, c.scan.ceiling,
                                    c.scan.jobs);
  Sink sink(c.output.data);
  Csv csv(sink.os(), "scan", c);
  csv.header({"seed", "K0", "kappa0", "max_K", "min_K", "ratio", "iterations", "escaped", "reason"});
  for (std::size_t i = 0; i < rep.seeds.size(); ++i) {
    const auto& s = rep.seeds[i];
    csv.row({std::to_string(i), num(s.seed.K), num(s.seed.kappa), num(s.max_K), num(s.min_K),
             num(s.ratio()), std::to_string(s.iterations), s.escaped ? "1" : "0", s.reason});
  }
  write_summary(c, {{"seeds", rep.seeds.size()},
                    {"iterations", rep.iterations},
                    {"ceiling", rep.ceiling},
                    {"escapes", rep.escapes()},
                    {"min_K", rep.min_K()},
                    {"max_K", rep.max_K()},
                    {"max_ratio", rep.max_ratio()}});
  std::cerr << "scan: " << rep.escapes() << " of " << rep.seeds.size() << " seeds escaped\n";
  return 0;
}

// ---- verify ----------------------------------------------------------------

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

int run_verify(const RunConfig& c) {
  const auto g = c.gentrig_table();
  const auto f = c.forcing();
  const int n = c.n;
  std::vector<Check> checks;
  auto guard = [&](const std::string& name, const std::function<Check()>& body) {
    try {
      checks.push_back(body());
    } catch (const std::exception& e) {
      checks.push_back({name, false, e.what()});
    }
    checks.back().name = name;
  };

  guard("reference identity", [&] {
    double worst = 0.0;
    const int m = 10000;
    for (int i = 0; i < m; ++i) {
      const auto [sn, cn] = g.sncn(g.period() * double(i) / m);
      worst = std::max(worst, std::abs(cn * cn + std::pow(sn, 2 * n) - 1.0));
    }
    return Check{"", worst < 1e-10, "max residual " + num(worst)};
  });

  guard("symplectic multiplier", [&] {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double K = 0.5 + 0.37 * i, k = g.period() * std::fmod(0.13 + 0.618034 * i, 1.0);
      const double hK = 1e-5 * K, hk = 1e-5;
      const auto a = from_action_angle(g, {K + hK, k, 0}), b = from_action_angle(g, {K - hK, k, 0});
      const auto cc = from_action_angle(g, {K, k + hk, 0}), d = from_action_angle(g, {K, k - hk, 0});
      const double det = ((a.x - b.x) * (cc.y - d.y) - (a.y - b.y) * (cc.x - d.x)) / (4 * hK * hk);
      worst = std::max(worst, std::abs(det - double(n) / (n + 1)));
    }
    return Check{"", worst < 1e-6, "max |det - n/(n+1)| " + num(worst)};
  });

  guard("unforced return time", [&] {
    const Forcing zero(n, c.T);
    IntegratorConfig cfg = c.integrator;
    cfg.rtol = 1e-12;
    cfg.atol = 1e-14;
    double worst = 0.0;
    for (double K : {1.0, 8.0}) {
      const auto s = from_action_angle(g, {K, 0.3, 0.0});
      const auto e = integrate(zero, cfg, s, -unforced_return_time(g, K));
      worst = std::max(worst, std::hypot(e.x - s.x, e.y - s.y) / std::hypot(s.x, s.y));
    }
    return Check{"", worst < 1e-7, "max relative return error " + num(worst)};
  });

  if (n >= 2) {
    guard("area preservation", [&] {
      double worst = 0.0;
      for (int i = 0; i < 5; ++i) {
        const ActionAngleState s{5.0 + 6.0 * i, g.period() * std::fmod(0.3 + 0.618034 * i, 1.0), 0};
        worst = std::max(worst, std::abs(determinant(period_map_jacobian(g, f, c.integrator, s)) - 1.0));
      }
      return Check{"", worst < 1e-5, "max |det - 1| " + num(worst)};
    });

    guard("determinism", [&] {
      const ActionAngleState s{12.0, 0.7, 0.0};
      const auto a = period_map(g, f, c.integrator, s), b = period_map(g, f, c.integrator, s);
      return Check{"", a.K_star == b.K_star && a.kappa_star == b.kappa_star, "repeat period map"};
    });

    std::optional<nf::NormalFormResult> r;
    guard("normal form shape", [&] {
      r = nf::normalize(g, f, c.engine_options());
      const bool a = r->H_intermediate.kappa_free_from(n + 1), b = r->H_special.kappa_free_from(2);
      return Check{"", a && b,
                   std::string("intermediate ") + (a ? "ok" : "kappa-dependent") + ", special " +
                       (b ? "ok" : "kappa-dependent")};
    });
    if (r) {
      guard("lie equations", [&] {
        double worst = 0.0;
        bool ok = true;
        for (const auto* st : {&r->stage1, &r->stage2}) {
          for (const auto& lc : st->lie_checks) {
            ok = ok && lc.exact();
            worst = std::max(worst, lc.residual / std::max(1.0, lc.scale));
          }
        }
        return Check{"", ok, "max relative residual " + num(worst)};
      });
      guard("smoothness ledger", [&] {
        const auto used = nf::required_smoothness(*r);
        std::string s;
        for (const auto& [j, d] : used) s += (s.empty() ? "" : " ") + ("p_" + std::to_string(j)) + ":" + std::to_string(d);
        return Check{"", true, s};
      });
    }
  }

  Sink sink(c.output.data);
  auto& os = sink.os();
  os << "# forced-osc verify config_hash=" << c.hash() << "\n";
  bool all = true;
  for (const auto& ch : checks) {
    os << (ch.ok ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
    all = all && ch.ok;
  }
  return all ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forced oscillator period maps, normal forms and diagnostics"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string config_path;
  std::vector<std::string> sets;
  std::optional<int> n_flag, jobs_flag;
  std::optional<double> T_flag, rtol_flag, atol_flag;
  std::optional<std::string> out_flag, dir_flag;
  bool print_config = false;
  app.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--set", sets, "override a config key, e.g. --set scan.iterations=100");
  app.add_option("--n", n_flag, "oscillator degree n");
  app.add_option("--T", T_flag, "forcing period");
  app.add_option("--rtol", rtol_flag, "integrator relative tolerance");
  app.add_option("--atol", atol_flag, "integrator absolute tolerance");
  app.add_option("--direction", dir_flag, "period map direction")
      ->check(CLI::IsMember({"backward", "forward"}));
  app.add_option("-o,--output", out_flag, "primary output path, - for stdout");
  app.add_option("-j,--jobs", jobs_flag, "worker threads for scans");
  app.add_flag("--print-config", print_config, "print the resolved config and exit");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gentrig", "tabulate sn and cn over one period"},
      {"orbit", "sample one trajectory"},
      {"poincare", "iterate the period map"},
      {"normalform", "compute the two-stage normal form (JSON)"},
      {"twist", "compare the numeric twist with the normal form"},
      {"decay", "fit decay orders of the period map corrections"},
      {"scan", "boundedness scan over seeds"},
      {"verify", "run the invariant suite"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  RunConfig cfg;
  try {
    json user = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      user = json::parse(in, nullptr, false);
      if (user.is_discarded()) throw ConfigError("config " + config_path + " is not valid JSON");
    }
    if (n_flag) user["n"] = *n_flag;
    if (T_flag) user["T"] = *T_flag;
    if (rtol_flag) user["integrator"]["rtol"] = *rtol_flag;
    if (atol_flag) user["integrator"]["atol"] = *atol_flag;
    if (dir_flag) user["integrator"]["direction"] = *dir_flag;
    if (out_flag) user["output"]["data"] = *out_flag;
    if (jobs_flag) user["scan"]["jobs"] = *jobs_flag;
    for (const auto& s : sets) set_dotted(user, s);
    cfg = RunConfig::from_json(user);
  } catch (const std::exception& e) {
    std::cerr << "forced-osc: config error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (print_config) {
    std::cout << cfg.to_json().dump(2) << "\n";
    return 0;
  }
  const auto subs = app.get_subcommands();
  if (subs.empty()) {
    std::cerr << app.help();
    return kExitConfig;
  }

  const std::string cmd = subs.front()->get_name();
  try {
    if (cmd == "gentrig") return run_gentrig(cfg);
    if (cmd == "orbit") return run_orbit(cfg);
    if (cmd == "poincare") return run_poincare(cfg);
    if (cmd == "normalform") return run_normalform(cfg);
    if (cmd == "twist") return run_twist(cfg);
    if (cmd == "decay") return run_decay(cfg);
    if (cmd == "scan") return run_scan(cfg);
    if (cmd == "verify") return run_verify(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "forced-osc: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "forced-osc: invalid parameters: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "forced-osc: " << cmd << " failed: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}
