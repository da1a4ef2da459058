#pragma once

// Run configuration shared by all CLI subcommands. The defaults serialized
// by to_json() double as the schema: any key they lack is rejected.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "forced_osc/diagnostics.hpp"
#include "forced_osc/errors.hpp"
#include "forced_osc/flow.hpp"
#include "forced_osc/forcing.hpp"
#include "forced_osc/gentrig.hpp"
#include "forced_osc/normal_form.hpp"

namespace forced_osc {

using nlohmann::json;

struct RunConfig {
  int n = 2;
  double T = 1.0;
  json p = json::array({{{"j", 0}, {"const", 0.0}, {"cos", {1.0}}, {"sin", json::array()},
                         {"smoothness", "C2"}}});

  IntegratorConfig integrator;

  struct GenTrigSection {
    int harmonics = GenTrig::kDefaultHarmonics;
    double tol = 1e-10;
    int samples = 1001;  // points over one full period
  } gentrig;

  struct OrbitSection {
    double K = 10.0;
    double kappa = 0.0;
    double t1 = -10.0;
    int samples = 201;
  } orbit;

  struct PoincareSection {
    double K = 10.0;
    double kappa = 0.0;
    long iterations = 1000;
  } poincare;

  struct NormalFormSection {
    int i_max = 0;  // resolved to 3n
    int q_min = 0;  // resolved to -2n
    int harmonics = 64;
    int tail_rows = 3;
    bool include_wn = false;
  } normal_form;

  struct SweepSection {
    double lambda_min = 10.0;
    double lambda_max = 100.0;
    int points = 8;
    int kappa_phases = 16;
  };
  SweepSection twist;
  SweepSection decay;
  bool decay_subtract_twist = true;

  struct ScanSection {
    int seeds = 50;
    double K_min = 5.0;
    double K_max = 50.0;
    long iterations = 10000;
    double ceiling = 1e4;
    int jobs = 1;
  } scan;

  struct OutputSection {
    std::string data = "-";   // "-" is stdout
    std::string summary;      // empty: no summary file
  } output;

  Forcing forcing() const { return Forcing::from_json_terms(n, T, p); }
  GenTrig gentrig_table() const { return GenTrig::build(n, gentrig.harmonics, gentrig.tol); }

  nf::EngineOptions engine_options() const {
    nf::EngineOptions o;
    o.i_max = normal_form.i_max;
    o.q_min = normal_form.q_min;
    o.harmonics = normal_form.harmonics;
    o.tail_rows = normal_form.tail_rows;
    o.stage1_include_wn = normal_form.include_wn;
    return o;
  }

  void resolve() {
    if (normal_form.i_max == 0) normal_form.i_max = 3 * n;
    if (normal_form.q_min == 0) normal_form.q_min = -2 * n;
  }

  json to_json() const {
    auto sweep = [](const SweepSection& s) {
      return json{{"lambda_min", s.lambda_min},
                  {"lambda_max", s.lambda_max},
                  {"points", s.points},
                  {"kappa_phases", s.kappa_phases}};
    };
    json decay_j = sweep(decay);
    decay_j["subtract_twist"] = decay_subtract_twist;
    return {
        {"n", n},
        {"T", T},
        {"p", p},
        {"integrator",
         {{"rtol", integrator.rtol},
          {"atol", integrator.atol},
          {"max_step", std::isfinite(integrator.max_step) ? json(integrator.max_step) : json()},
          {"direction", integrator.direction == Direction::backward ? "backward" : "forward"}}},
        {"gentrig",
         {{"harmonics", gentrig.harmonics}, {"tol", gentrig.tol}, {"samples", gentrig.samples}}},
        {"orbit",
         {{"K", orbit.K}, {"kappa", orbit.kappa}, {"t1", orbit.t1}, {"samples", orbit.samples}}},
        {"poincare",
         {{"K", poincare.K}, {"kappa", poincare.kappa}, {"iterations", poincare.iterations}}},
        {"normal_form",
         {{"i_max", normal_form.i_max},
          {"q_min", normal_form.q_min},
          {"harmonics", normal_form.harmonics},
          {"tail_rows", normal_form.tail_rows},
          {"include_wn", normal_form.include_wn}}},
        {"twist", sweep(twist)},
        {"decay", decay_j},
        {"scan",
         {{"seeds", scan.seeds},
          {"K_min", scan.K_min},
          {"K_max", scan.K_max},
          {"iterations", scan.iterations},
          {"ceiling", scan.ceiling},
          {"jobs", scan.jobs}}},
        {"output", {{"data", output.data}, {"summary", output.summary}}},
    };
  }

  /// Parses a (possibly partial) config; missing keys take their defaults.
  static RunConfig from_json(const json& user) {
    if (!user.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    if (user.contains("n")) {
      if (!user["n"].is_number_integer()) throw ConfigError("\"n\" must be an integer");
      c.n = user["n"].get<int>();
    }
    json merged = c.to_json();
    merge(merged, user, "");
    try {
      c.n = merged["n"].get<int>();
      c.T = number(merged["T"], "T");
      c.p = merged["p"];
      const auto& in = merged["integrator"];
      c.integrator.rtol = number(in["rtol"], "integrator.rtol");
      c.integrator.atol = number(in["atol"], "integrator.atol");
      c.integrator.max_step = in["max_step"].is_null()
                                  ? std::numeric_limits<double>::infinity()
                                  : number(in["max_step"], "integrator.max_step");
      const auto dir = in["direction"].get<std::string>();
      if (dir != "backward" && dir != "forward") {
        throw ConfigError("integrator.direction must be \"backward\" or \"forward\"");
      }
      c.integrator.direction = dir == "backward" ? Direction::backward : Direction::forward;
      const auto& gt = merged["gentrig"];
      c.gentrig.harmonics = gt["harmonics"].get<int>();
      c.gentrig.tol = number(gt["tol"], "gentrig.tol");
      c.gentrig.samples = gt["samples"].get<int>();
      const auto& ob = merged["orbit"];
      c.orbit.K = number(ob["K"], "orbit.K");
      c.orbit.kappa = number(ob["kappa"], "orbit.kappa");
      c.orbit.t1 = number(ob["t1"], "orbit.t1");
      c.orbit.samples = ob["samples"].get<int>();
      const auto& pc = merged["poincare"];
      c.poincare.K = number(pc["K"], "poincare.K");
      c.poincare.kappa = number(pc["kappa"], "poincare.kappa");
      c.poincare.iterations = pc["iterations"].get<long>();
      const auto& nfj = merged["normal_form"];
      c.normal_form.i_max = nfj["i_max"].get<int>();
      c.normal_form.q_min = nfj["q_min"].get<int>();
      c.normal_form.harmonics = nfj["harmonics"].get<int>();
      c.normal_form.tail_rows = nfj["tail_rows"].get<int>();
      c.normal_form.include_wn = nfj["include_wn"].get<bool>();
      auto sweep = [](const json& s, SweepSection& out, const std::string& name) {
        out.lambda_min = number(s["lambda_min"], name + ".lambda_min");
        out.lambda_max = number(s["lambda_max"], name + ".lambda_max");
        out.points = s["points"].get<int>();
        out.kappa_phases = s["kappa_phases"].get<int>();
      };
      sweep(merged["twist"], c.twist, "twist");
      sweep(merged["decay"], c.decay, "decay");
      c.decay_subtract_twist = merged["decay"]["subtract_twist"].get<bool>();
      const auto& sc = merged["scan"];
      c.scan.seeds = sc["seeds"].get<int>();
      c.scan.K_min = number(sc["K_min"], "scan.K_min");
      c.scan.K_max = number(sc["K_max"], "scan.K_max");
      c.scan.iterations = sc["iterations"].get<long>();
      c.scan.ceiling = number(sc["ceiling"], "scan.ceiling");
      c.scan.jobs = sc["jobs"].get<int>();
      c.output.data = merged["output"]["data"].get<std::string>();
      c.output.summary = merged["output"]["summary"].get<std::string>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    c.resolve();
    c.validate();
    return c;
  }

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config " + path + ": " + e.what());
    }
    return from_json(j);
  }

  void validate() const {
    if (n < 1 || n > 12) throw ConfigError("n must lie in [1, 12]");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be positive");
    try {
      integrator.check();
      const auto f = forcing();
      const auto rep = f.validate();
      if (!rep.ok) throw ConfigError("forcing: " + rep.failures.front());
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    auto positive = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(what);
    };
    positive(gentrig.harmonics >= 8, "gentrig.harmonics must be >= 8");
    positive(gentrig.samples >= 2, "gentrig.samples must be >= 2");
    positive(orbit.K > 0.0 && orbit.samples >= 2 && orbit.t1 != 0.0,
             "orbit needs K > 0, samples >= 2 and t1 != 0");
    positive(poincare.K > 0.0 && poincare.iterations >= 1, "poincare needs K > 0, iterations >= 1");
    positive(normal_form.harmonics >= 8 && normal_form.tail_rows >= 1,
             "normal_form.harmonics must be >= 8 and tail_rows >= 1");
    for (const auto* s : {&twist, &decay}) {
      positive(s->lambda_min > 0.0 && s->lambda_max >= s->lambda_min && s->points >= 1 &&
                   s->kappa_phases >= 1,
               "twist/decay sweeps need 0 < lambda_min <= lambda_max and positive counts");
    }
    positive(scan.seeds >= 1 && scan.K_min > 0.0 && scan.K_max >= scan.K_min &&
                 scan.iterations >= 1 && scan.ceiling > 0.0 && scan.jobs >= 1,
             "scan parameters out of range");
  }

  /// FNV-1a of the canonical JSON dump. Thread count and output paths do
  /// not change results and are left out.
  std::string hash() const {
    json j = to_json();
    j["scan"].erase("jobs");
    j.erase("output");
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : j.dump()) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  static double number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("\"" + key + "\" must be a number");
    return v.get<double>();
  }

  static void merge(json& base, const json& over, const std::string& prefix) {
    for (const auto& [key, value] : over.items()) {
      const std::string path = prefix.empty() ? key : prefix + "." + key;
      if (!base.contains(key)) throw ConfigError("unknown config key \"" + path + "\"");
      json& slot = base[key];
      if (slot.is_object()) {
        if (!value.is_object()) throw ConfigError("\"" + path + "\" must be an object");
        merge(slot, value, path);
      } else {
        slot = value;
      }
    }
  }
};

/// Sets a dotted key ("scan.jobs") in a JSON object. The value text is read
/// as JSON when it parses and as a plain string otherwise.
inline void set_dotted(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects key=value, got \"" + assignment + "\"");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &j;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("--set: \"" + parts[i] + "\" is not a section");
    node = &next;
  }
  (*node)[parts.back()] = value;
}

}  // namespace forced_osc
