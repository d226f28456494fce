#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pqlab/pqlab.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string h_ladder;
  std::optional<double> tol;
};

void add_run_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON or TOML experiment config")->required();
  sub->add_option("--seed", f.seed, "Override the RNG seed");
  sub->add_option("--out", f.out, "Override the output directory");
  sub->add_option("--h-ladder", f.h_ladder, "Comma-separated decreasing grid steps");
  sub->add_option("--tol", f.tol, "Override the verifier tolerance");
}

void set_threads() {
#ifdef _OPENMP
  if (const char* env = std::getenv("LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

int invalid(const std::string& field, const std::string& message) {
  nlohmann::json r{{"version", pqlab::kVersion},
                   {"validation", pqlab::validation_report({{field, message}})},
                   {"exit_code", pqlab::exit_invalid_config}};
  std::cout << r.dump(2) << '\n';
  return pqlab::exit_invalid_config;
}

int run(const std::string& kind, const Flags& f) {
  nlohmann::json doc;
  pqlab::ConfigOverrides o;
  try {
    doc = pqlab::load_config_file(f.config);
    if (!f.h_ladder.empty()) o.h_ladder = pqlab::parse_ladder(f.h_ladder);
  } catch (const pqlab::LabError& e) {
    return invalid("config", e.what());
  }
  if (doc.is_object() && doc.contains("kind") && doc["kind"] != kind)
    return invalid("kind", "config kind '" + doc["kind"].dump() + "' does not match subcommand '" + kind + "'");
  o.kind = kind;
  o.seed = f.seed;
  o.out = f.out;
  o.tol = f.tol;
  pqlab::apply_overrides(doc, o);
  const auto r = pqlab::run_experiment(doc);
  const std::string dir = doc.value("out", std::string("out"));
  pqlab::write_outputs(r, dir);
  const auto& res = r.report.value("result", nlohmann::json::object());
  std::string status = r.exit_code == pqlab::exit_ok ? "PASS" : "FAIL";
  if (res.contains("verdict")) status = res["verdict"].get<std::string>();
  if (r.exit_code == pqlab::exit_invalid_config) {
    status = "INVALID";
    std::cout << r.report.dump(2) << '\n';
  }
  if (r.exit_code == pqlab::exit_numerical) status = "NUMERICAL FAILURE";
  std::cout << kind << ": " << status << " (exit " << r.exit_code << ", hash " << r.report["config_hash"].get<std::string>()
            << ") -> " << dir << '\n';
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  set_threads();
  CLI::App app{"pqlab: barriers, verifier and solver for a d_t u = Delta_pq u"};
  app.set_version_flag("--version", std::string(pqlab::kVersion));
  app.require_subcommand(1);
  Flags flags;
  for (const auto& kind : pqlab::experiment_kinds())
    add_run_flags(app.add_subcommand(kind, "Run a " + kind + " experiment"), flags);
  auto* cat = app.add_subcommand("list-catalog", "List the barrier constructions");
  bool as_json = false;
  cat->add_flag("--json", as_json, "Print JSON instead of a table");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pqlab::exit_invalid_config;
  }
  if (cat->parsed()) {
    std::cout << (as_json ? pqlab::list_catalog().dump(2) + "\n" : pqlab::catalog_table());
    return 0;
  }
  for (const auto& kind : pqlab::experiment_kinds())
    if (app.got_subcommand(kind)) return run(kind, flags);
  return pqlab::exit_invalid_config;
}
