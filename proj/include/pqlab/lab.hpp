#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "pqlab/experiments.hpp"
#include "pqlab/io.hpp"
#include "pqlab/toml.hpp"

#ifndef PQLAB_VERSION
#define PQLAB_VERSION "0.1.0"
#endif

namespace pqlab {

inline constexpr const char* kVersion = PQLAB_VERSION;

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"verify-barrier", "solve",   "classify",
                                              "counterexample", "scaling", "multiplied"};
  return kinds;
}

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_invalid_config = 2, exit_numerical = 3 };

// --- config documents -------------------------------------------------------------

/// Reads a JSON or TOML config; the format follows the extension, with
/// content sniffing for anything else.
inline nlohmann::json load_config_text(const std::string& text, const std::string& name = "") {
  const bool toml = name.ends_with(".toml") ||
                    (!name.ends_with(".json") && text.find_first_not_of(" \t\r\n") != std::string::npos &&
                     text[text.find_first_not_of(" \t\r\n")] != '{');
  if (toml) return parse_toml(text);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw LabError(Errc::parse_error, std::string("json: ") + e.what());
  }
}

inline nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LabError(Errc::parse_error, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config_text(ss.str(), path);
}

/// Command-line values that replace fields of the config document.
struct ConfigOverrides {
  std::optional<std::string> kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::vector<double>> h_ladder;
  std::optional<double> tol;
};

inline void apply_overrides(nlohmann::json& cfg, const ConfigOverrides& o) {
  if (!cfg.is_object()) cfg = nlohmann::json::object();
  if (o.kind) cfg["kind"] = *o.kind;
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.out) cfg["out"] = *o.out;
  if (o.h_ladder) cfg["h_ladder"] = *o.h_ladder;
  if (o.tol) cfg["tol"] = *o.tol;
}

inline std::vector<double> parse_ladder(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw LabError(Errc::invalid_config, "bad h-ladder entry '" + item + "'");
    }
  }
  return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Hash of the config without its output location.
inline std::string config_hash(const nlohmann::json& cfg) {
  nlohmann::json c = cfg;
  if (c.is_object()) c.erase("out");
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(c.dump());
  return os.str();
}

// --- validation ---------------------------------------------------------------------

struct ConfigIssue {
  std::string field;
  std::string message;
};

/// Typed view of a validated config document.
struct ExperimentConfig {
  std::string kind;
  Params params;
  std::uint64_t seed = 1;
  std::vector<double> h_ladder;
  double tol = 1e-10;
  std::size_t samples = 10000;
  int k_max = 5;
  std::string out = "out";
  nlohmann::json doc;
};

inline std::vector<double> default_ladder(const std::string& kind) {
  if (kind == "solve") return {1.0 / 8, 1.0 / 16, 1.0 / 32};
  return {1.0 / 16, 1.0 / 32, 1.0 / 64};
}

namespace detail {

inline bool is_number(const nlohmann::json& j) { return j.is_number(); }

inline bool number_array(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) return false;
  for (const auto& x : j)
    if (!x.is_number()) return false;
  return true;
}

inline bool point_like(const nlohmann::json& j, int n) {
  return j.is_object() && j.contains("x") && number_array(j["x"]) && static_cast<int>(j["x"].size()) == n &&
         j.contains("t") && j["t"].is_number();
}

inline bool box_like(const nlohmann::json& j, int n) {
  return j.is_object() && j.contains("lo") && j.contains("hi") && number_array(j["lo"]) && number_array(j["hi"]) &&
         static_cast<int>(j["lo"].size()) == n && static_cast<int>(j["hi"].size()) == n && j.contains("t_lo") &&
         j.contains("t_hi") && j["t_lo"].is_number() && j["t_hi"].is_number();
}

inline bool catalog_has(const std::string& name) {
  for (const auto& e : barrier_catalog())
    if (e.name == name) return true;
  return false;
}

}  // namespace detail

/// Checks a config document; an empty list means it validates.
inline std::vector<ConfigIssue> validate_config(const nlohmann::json& doc) {
  std::vector<ConfigIssue> issues;
  auto bad = [&](std::string f, std::string m) { issues.push_back({std::move(f), std::move(m)}); };
  if (!doc.is_object()) {
    bad("", "config must be a table/object");
    return issues;
  }
  const std::string kind = doc.value("kind", "");
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), kind) == experiment_kinds().end())
    bad("kind", "unknown experiment kind '" + kind + "'");
  int n = 1;
  if (doc.contains("params")) {
    const auto& p = doc["params"];
    if (!p.is_object()) {
      bad("params", "must be a table with p, q, n");
    } else {
      for (const char* k : {"p", "q"})
        if (p.contains(k) && !(p[k].is_number() && p[k].get<double>() > 1.0)) bad(std::string("params.") + k, "must be a number > 1");
      if (p.contains("n")) {
        if (!p["n"].is_number_integer() || p["n"].get<int>() < 1 || p["n"].get<int>() > 3)
          bad("params.n", "must be an integer in 1..3");
        else
          n = p["n"].get<int>();
      }
    }
  }
  if (doc.contains("seed") && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0))
    bad("seed", "must be a non-negative integer");
  if (doc.contains("tol") && !(doc["tol"].is_number() && doc["tol"].get<double>() > 0.0)) bad("tol", "must be positive");
  if (doc.contains("samples") && !(doc["samples"].is_number_integer() && doc["samples"].get<long long>() >= 1))
    bad("samples", "must be a positive integer");
  if (doc.contains("k_max") && !(doc["k_max"].is_number_integer() && doc["k_max"].get<int>() >= 1))
    bad("k_max", "must be a positive integer");
  if (doc.contains("out") && !doc["out"].is_string()) bad("out", "must be a path string");
  if (doc.contains("h_ladder")) {
    const auto& l = doc["h_ladder"];
    if (!detail::number_array(l)) {
      bad("h_ladder", "must be a non-empty array of numbers");
    } else {
      for (std::size_t k = 0; k < l.size(); ++k) {
        if (!(l[k].get<double>() > 0.0)) bad("h_ladder", "grid steps must be positive");
        if (k > 0 && !(l[k].get<double>() < l[k - 1].get<double>())) bad("h_ladder", "must be strictly decreasing");
      }
    }
  }
  if (doc.contains("domain")) {
    try {
      auto d = domain_from_json(doc["domain"]);
      if (d.dim() != n) bad("domain", "dimension differs from params.n");
    } catch (const std::exception& e) {
      bad("domain", e.what());
    }
  }
  if (doc.contains("point") && !detail::point_like(doc["point"], n)) bad("point", "must be {x = [..n..], t = ..}");
  if (doc.contains("window") && !detail::box_like(doc["window"], n))
    bad("window", "must be {lo = [..], hi = [..], t_lo = .., t_hi = ..}");
  if (kind == "verify-barrier") {
    const auto cat = doc.value("catalog", nlohmann::json::object());
    const std::string name = cat.is_object() ? cat.value("name", "") : "";
    if (!detail::catalog_has(name)) bad("catalog.name", "no catalog entry named '" + name + "'");
    if (name == "exterior_ball") {
      if (!cat.contains("xi1") || !detail::point_like(cat["xi1"], n)) bad("catalog.xi1", "exterior ball centre required");
      if (!cat.contains("R1") || !cat["R1"].is_number()) bad("catalog.R1", "exterior ball radius required");
    }
    if (name == "north_pole") {
      for (const char* k : {"theta", "l"})
        if (!cat.contains(k) || !cat[k].is_number()) bad(std::string("catalog.") + k, "required");
    }
    if (name == "perron") {
      if (!doc.contains("domain")) bad("domain", "the perron family needs a domain");
      if (!doc.contains("point")) bad("point", "the perron family needs a touch point");
    }
  }
  if (kind == "classify") {
    if (!doc.contains("domain")) bad("domain", "required for classify");
    if (!doc.contains("point")) bad("point", "required for classify");
    if (doc.contains("expect")) {
      const auto e = doc["expect"];
      if (!e.is_string() || (e != "regular" && e != "irregular")) bad("expect", "must be 'regular' or 'irregular'");
    }
  }
  if (kind == "solve" && doc.contains("exact")) {
    const auto& e = doc["exact"];
    const std::string fam = e.is_object() ? e.value("family", "flat_bottom") : "";
    if (fam != "flat_bottom" && fam != "heat" && fam != "heat_mode" && fam != "constant")
      bad("exact.family", "must be flat_bottom, heat, heat_mode or constant");
  }
  if ((kind == "scaling" || kind == "multiplied") && doc.contains("factors")) {
    if (!detail::number_array(doc["factors"])) {
      bad("factors", "must be a non-empty array of numbers");
    } else {
      for (const auto& f : doc["factors"])
        if (!(f.get<double>() > 0.0)) bad("factors", "factors must be positive");
    }
  }
  if (kind == "scaling" && doc.contains("params") && doc["params"].is_object() && doc["params"].value("q", 1.5) == 2.0)
    bad("params.q", "scaling needs q != 2");
  return issues;
}

inline nlohmann::json validation_report(const std::vector<ConfigIssue>& issues) {
  nlohmann::json e = nlohmann::json::array();
  for (const auto& i : issues) e.push_back({{"field", i.field}, {"message", i.message}});
  return {{"valid", issues.empty()}, {"errors", e}};
}

/// Typed config from a document that passed validate_config.
inline ExperimentConfig make_config(const nlohmann::json& doc) {
  ExperimentConfig c;
  c.doc = doc;
  c.kind = doc.at("kind").get<std::string>();
  const auto p = doc.value("params", nlohmann::json::object());
  Params def = c.kind == "solve" ? Params(2.0, 2.0, 1) : Params(2.0, 1.5, 1);
  c.params = Params(p.value("p", def.p), p.value("q", def.q), p.value("n", def.n));
  c.seed = doc.value("seed", std::uint64_t{1});
  c.h_ladder = doc.contains("h_ladder") ? doc["h_ladder"].get<std::vector<double>>() : default_ladder(c.kind);
  c.tol = doc.value("tol", 1e-10);
  c.samples = doc.value("samples", std::size_t{10000});
  c.k_max = doc.value("k_max", 5);
  c.out = doc.value("out", std::string("out"));
  return c;
}

// --- catalog listing ---------------------------------------------------------------

inline nlohmann::json list_catalog() {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : barrier_catalog())
    rows.push_back({{"name", e.name}, {"result", e.result}, {"constraints", e.constraints}});
  return rows;
}

inline std::string catalog_table() {
  const auto rows = barrier_catalog();
  std::size_t wn = 4, wr = 6;
  for (const auto& e : rows) {
    wn = std::max(wn, e.name.size());
    wr = std::max(wr, e.result.size());
  }
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(wn)) << "name" << "  " << std::setw(static_cast<int>(wr)) << "result"
     << "  constraints\n";
  for (const auto& e : rows)
    os << std::left << std::setw(static_cast<int>(wn)) << e.name << "  " << std::setw(static_cast<int>(wr)) << e.result
       << "  " << e.constraints << '\n';
  return os.str();
}


// --- running experiments -----------------------------------------------------------

/// Report plus named output files (CSV text or binary bytes).
struct RunOutput {
  int exit_code = exit_ok;
  nlohmann::json report;
  std::vector<std::pair<std::string, std::string>> files;
};

namespace detail {

inline SchemeConfig scheme_from_json(const nlohmann::json& j) {
  SchemeConfig c;
  if (!j.is_object()) return c;
  c.eps_grad = j.value("eps_grad", c.eps_grad);
  const std::string rule = j.value("eps_rule", "mesh");
  if (rule == "flat_spot")
    c.eps_rule = EpsRule::flat_spot;
  else if (rule != "mesh")
    throw LabError(Errc::invalid_config, "scheme.eps_rule must be mesh or flat_spot");
  c.stencil_width = j.value("stencil_width", c.stencil_width);
  c.cfl = j.value("cfl", c.cfl);
  c.time_coefficient = j.value("time_coefficient", c.time_coefficient);
  return c;
}

inline VerifierOptions verifier_options(const ExperimentConfig& c) {
  VerifierOptions o;
  o.seed = c.seed;
  o.samples = c.samples;
  o.tol = c.tol;
  return o;
}

inline SpaceTimePoint point_or_origin(const ExperimentConfig& c) {
  return c.doc.contains("point") ? point_from_json(c.doc["point"]) : origin(c.params.n);
}

inline double check_value(const ExperimentConfig& c, const char* key, double def) {
  const auto ch = c.doc.value("checks", nlohmann::json::object());
  return ch.is_object() ? ch.value(key, def) : def;
}

template <class Fn>
std::string csv(const std::string& header, Fn rows) {
  std::ostringstream os;
  os.precision(17);
  os << header << '\n';
  rows(os);
  return os.str();
}

inline std::string witnesses_csv(const VerificationReport& r) {
  return csv("k,j", [&](std::ostream& os) {
    for (const auto& [k, j] : r.witnesses) os << k << ',' << j << '\n';
  });
}

inline RunOutput run_verify(const ExperimentConfig& c) {
  RunOutput out;
  const auto cat = c.doc.value("catalog", nlohmann::json::object());
  const std::string name = cat.value("name", "");
  const auto vopt = verifier_options(c);
  nlohmann::json res{{"catalog", name}};
  bool ok = true;
  auto family_check = [&](const BarrierFamily& fam) {
    auto r = check_barrier_family(fam, c.k_max, c.params, vopt);
    res["family"] = r.to_json();
    res["info"] = fam.info;
    out.files.emplace_back("witnesses.csv", witnesses_csv(r));
    ok = ok && r.passed();
  };
  if (name == "flat_bottom") {
    family_check(make_flat_bottom_family(point_or_origin(c), c.params));
  } else if (name == "exterior_ball") {
    ExteriorBallConfig eb{point_from_json(cat["xi1"]), cat["R1"].get<double>(), point_or_origin(c)};
    family_check(make_exterior_ball_family(eb, c.params));
  } else if (name == "north_pole") {
    family_check(make_north_pole_family(cat["theta"].get<double>(), cat["l"].get<double>(), c.params));
  } else if (name == "perron") {
    auto fam = make_perron_family(domain_from_json(c.doc["domain"]), point_from_json(c.doc["point"]), c.params);
    family_check(fam);
    auto s = check_strong_family(fam, c.k_max, vopt);
    res["strong"] = s.to_json();
    ok = ok && s.passed();
  } else if (name == "counterexample") {
    CounterexampleConfig cc{c.params, cat.value("s", 0.5), cat.value("K", 1.0)};
    auto pair = make_counterexample_pair(cc);
    auto u = check_supersolution(pair.irregularity_barrier, pair.domain, c.params, vopt);
    auto w = check_barrier(pair.single_barrier, pair.domain, origin(c.params.n), c.params, vopt);
    res["irregularity_barrier"] = u.to_json();
    res["single_barrier"] = w.to_json();
    ok = u.passed() && w.passed();
  }
  res["passed"] = ok;
  out.report = res;
  out.exit_code = ok ? exit_ok : exit_check_failed;
  return out;
}

inline RunOutput run_solve(const ExperimentConfig& c) {
  RunOutput out;
  const int n = c.params.n;
  auto domain = c.doc.contains("domain") ? domain_from_json(c.doc["domain"]) : make_cylinder(Vec::Zero(n), 1.0, 0.0, 0.25);
  const auto ex = c.doc.value("exact", nlohmann::json::object());
  const std::string family = ex.value("family", "flat_bottom");
  ScalarField exact = family == "heat"        ? caloric_field(n)
                      : family == "heat_mode" ? heat_mode_field(n)
                      : family == "constant"  ? constant_field(ex.value("value", 1.0), n)
                                             : flat_bottom_field(origin(n), ex.value("j", 1.0), c.params);
  const SchemeConfig scheme = scheme_from_json(c.doc.value("scheme", nlohmann::json::object()));
  DiscreteSolution finest;
  auto st = convergence_study(domain, exact, c.params, c.h_ladder, scheme, &finest);
  const double max_rel = check_value(c, "max_relative_error", 0.05);
  const double min_order = check_value(c, "min_order", 0.8);
  // Data the scheme reproduces to round-off carry no order information.
  const bool exact_fit = st.rows.back().max_error <= 1e-12 * std::max(1.0, st.range);
  const bool has_order = c.h_ladder.size() >= 2 && std::isfinite(st.order) && !exact_fit;
  const bool ok = st.relative_error() <= max_rel && (!has_order || st.order >= min_order);
  out.report = {{"exact", family}, {"domain", domain.description()}, {"study", st.to_json()},
                {"checks", {{"max_relative_error", max_rel}, {"min_order", min_order}}}, {"exact_fit", exact_fit},
                {"passed", ok}};
  out.files.emplace_back("errors.csv", csv("h,tau,steps,max_error", [&](std::ostream& os) {
                           for (const auto& r : st.rows) os << r.h << ',' << r.tau << ',' << r.steps << ',' << r.max_error << '\n';
                         }));
  std::ostringstream text, bin;
  write_csv(finest, text);
  write_binary(finest, bin);
  out.files.emplace_back("solution.csv", text.str());
  out.files.emplace_back("solution.bin", bin.str());
  out.exit_code = ok ? exit_ok : exit_check_failed;
  return out;
}

inline PerronOptions perron_options(const ExperimentConfig& c) {
  PerronOptions opt;
  opt.h_ladder = c.h_ladder;
  opt.scheme = scheme_from_json(c.doc.value("scheme", nlohmann::json::object()));
  if (c.doc.contains("window")) opt.window = box_from_json(c.doc["window"]);
  return opt;
}

inline std::string gaps_csv(const nlohmann::json& evidence, const std::vector<double>& ladder) {
  return csv("probe,h,gap", [&](std::ostream& os) {
    for (const auto& p : evidence["probes"]) {
      const auto& g = p["gaps"];
      for (std::size_t k = 0; k < g.size() && k < ladder.size(); ++k) {
        os << '"' << p["probe"].get<std::string>() << "\"," << ladder[k] << ',';
        if (g[k].is_number())
          os << g[k].get<double>();
        else
          os << "nan";
        os << '\n';
      }
    }
  });
}

inline RunOutput run_classify(const ExperimentConfig& c) {
  RunOutput out;
  auto domain = domain_from_json(c.doc["domain"]);
  const auto xi0 = point_from_json(c.doc["point"]);
  const auto opt = perron_options(c);
  auto r = classify_regularity(domain, xi0, default_probes(domain, xi0, c.params), c.params, opt);
  const std::string verdict = to_string(r.verdict);
  bool ok = r.verdict != Regularity::indeterminate;
  nlohmann::json res{{"verdict", verdict}, {"evidence", r.evidence}};
  if (c.doc.contains("expect")) {
    const bool agrees = c.doc["expect"].get<std::string>() == verdict;
    res["expected"] = c.doc["expect"];
    res["agrees"] = agrees;
    ok = ok && agrees;
  }
  res["passed"] = ok;
  out.report = res;
  out.files.emplace_back("gaps.csv", gaps_csv(r.evidence, opt.h_ladder));
  out.exit_code = ok ? exit_ok : exit_check_failed;
  return out;
}

inline RunOutput run_counterexample(const ExperimentConfig& c) {
  RunOutput out;
  const auto ce = c.doc.value("counterexample", nlohmann::json::object());
  CounterexampleConfig cc{c.params, ce.value("s", 0.5), ce.value("K", 1.0)};
  auto st = counterexample_study(cc, perron_options(c), verifier_options(c));
  const double max_high = check_value(c, "max_high", 0.1);
  const double min_gap = check_value(c, "min_gap", 0.5);
  const std::size_t m = st.limits.size();
  bool ok = st.irregularity_barrier.passed() && st.single_barrier.passed() && m >= 2 &&
            st.limits[m - 1].conclusive && st.limits[m - 1].high <= max_high;
  for (std::size_t k = m >= 2 ? m - 2 : 0; k < m; ++k) ok = ok && std::isfinite(st.gaps[k]) && st.gaps[k] >= min_gap;
  nlohmann::json lim = nlohmann::json::array();
  for (const auto& b : st.limits) lim.push_back(b.to_json());
  out.report = {{"irregularity_barrier", st.irregularity_barrier.to_json()},
                {"single_barrier", st.single_barrier.to_json()},
                {"limits", lim},
                {"gaps", st.gaps},
                {"exponent", st.exponent},
                {"warnings", st.warnings},
                {"checks", {{"max_high", max_high}, {"min_gap", min_gap}}},
                {"passed", ok}};
  out.files.emplace_back("ladder.csv", csv("h,low,high,gap", [&](std::ostream& os) {
                           for (std::size_t k = 0; k < m; ++k)
                             os << st.lower[k].h << ',' << st.limits[k].low << ',' << st.limits[k].high << ','
                                << st.gaps[k] << '\n';
                         }));
  out.exit_code = ok ? exit_ok : exit_check_failed;
  return out;
}

inline RunOutput run_identity(const ExperimentConfig& c, bool scaling) {
  RunOutput out;
  std::vector<double> factors = c.doc.contains("factors") ? c.doc["factors"].get<std::vector<double>>()
                                                          : std::vector<double>{0.5, 2.0};
  const double tol = check_value(c, "identity_tol", c.tol);
  const double dtol = check_value(c, "discrete_tol", 1e-9);
  nlohmann::json rows = nlohmann::json::array();
  bool ok = true;
  std::string text = csv("factor,constant,analytic_exact,analytic_random,discrete", [&](std::ostream& os) {
    for (double f : factors) {
      auto r = scaling ? scaling_check(c.params, f, c.seed, c.samples) : multiplied_check(c.params, f, c.seed, c.samples);
      rows.push_back(r.to_json());
      ok = ok && r.analytic_exact <= tol && r.analytic_random <= tol &&
           r.discrete <= dtol * std::max(1.0, r.discrete_scale);
      os << r.factor << ',' << r.constant << ',' << r.analytic_exact << ',' << r.analytic_random << ',' << r.discrete
         << '\n';
    }
  });
  out.report = {{"checks", {{"identity_tol", tol}, {"discrete_tol", dtol}}}, {"rows", rows}, {"passed", ok}};
  out.files.emplace_back(scaling ? "scaling.csv" : "multiplied.csv", text);
  out.exit_code = ok ? exit_ok : exit_check_failed;
  return out;
}

inline bool numerical_failure(Errc e) {
  return e == Errc::cfl_violation || e == Errc::degenerate_grid || e == Errc::singular_gradient;
}

}  // namespace detail

/// Validates and runs a config document. The report holds no timings, so
/// equal configs give byte-identical reports.
inline RunOutput run_experiment(const nlohmann::json& doc) {
  RunOutput out;
  const auto issues = validate_config(doc);
  nlohmann::json head{{"version", kVersion}, {"config_hash", config_hash(doc)}};
  if (!issues.empty()) {
    out.exit_code = exit_invalid_config;
    out.report = head;
    out.report["validation"] = validation_report(issues);
    out.report["exit_code"] = out.exit_code;
    return out;
  }
  const ExperimentConfig c = make_config(doc);
  head["kind"] = c.kind;
  head["params"] = {{"p", c.params.p}, {"q", c.params.q}, {"n", c.params.n}};
  head["seed"] = c.seed;
  try {
    if (c.kind == "verify-barrier")
      out = detail::run_verify(c);
    else if (c.kind == "solve")
      out = detail::run_solve(c);
    else if (c.kind == "classify")
      out = detail::run_classify(c);
    else if (c.kind == "counterexample")
      out = detail::run_counterexample(c);
    else
      out = detail::run_identity(c, c.kind == "scaling");
    head["result"] = out.report;
  } catch (const LabError& e) {
    out.files.clear();
    out.exit_code = detail::numerical_failure(e.code()) ? exit_numerical : exit_invalid_config;
    head["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
  }
  head["exit_code"] = out.exit_code;
  out.report = head;
  return out;
}

/// Writes report.json and the output files into `dir`.
inline void write_outputs(const RunOutput& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "report.json", std::ios::binary);
    os << r.report.dump(2) << '\n';
  }
  for (const auto& [name, bytes] : r.files) {
    std::ofstream os(dir / name, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
}

}  // namespace pqlab
