#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pqlab/pqlab.hpp"

using namespace pqlab;
using nlohmann::json;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(PQLAB_SOURCE_DIR) / "configs";

json identity_config() {
  return {{"kind", "scaling"}, {"seed", 9}, {"samples", 40}, {"params", {{"p", 2.5}, {"q", 3.0}, {"n", 1}}}};
}

bool has_field(const std::vector<ConfigIssue>& issues, const std::string& field) {
  for (const auto& i : issues)
    if (i.field == field) return true;
  return false;
}

}  // namespace

TEST(Toml, ParsesTablesArraysAndInlineTables) {
  const char* text = R"(# comment
kind = "solve"   # trailing
seed = 1_000
tol = 1e-8
flag = true
ladder = [
  0.5,  # first
  0.25,
]
name = 'lit\eral'

[params]
p = 2.5
q = +inf

[a.b]
c = { d = [1, [2, 3]], e.f = "x" }
)";
  json j = parse_toml(text);
  EXPECT_EQ(j["kind"], "solve");
  EXPECT_EQ(j["seed"].get<int>(), 1000);
  EXPECT_TRUE(j["seed"].is_number_integer());
  EXPECT_DOUBLE_EQ(j["tol"].get<double>(), 1e-8);
  EXPECT_EQ(j["flag"], true);
  EXPECT_EQ(j["ladder"], json({0.5, 0.25}));
  EXPECT_EQ(j["name"], "lit\\eral");
  EXPECT_DOUBLE_EQ(j["params"]["p"].get<double>(), 2.5);
  EXPECT_TRUE(std::isinf(j["params"]["q"].get<double>()));
  EXPECT_EQ(j["a"]["b"]["c"]["d"], json({1, json({2, 3})}));
  EXPECT_EQ(j["a"]["b"]["c"]["e"]["f"], "x");
}

TEST(Toml, ErrorsCarryLineNumbers) {
  try {
    parse_toml("a = 1\na = 2\n");
    FAIL() << "duplicate key accepted";
  } catch (const LabError& e) {
    EXPECT_EQ(e.code(), Errc::parse_error);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_toml("[[runs]]\n"), LabError);
  EXPECT_THROW(parse_toml("x = \"open\n"), LabError);
  EXPECT_THROW(parse_toml("x = 1 2\n"), LabError);
  EXPECT_THROW(parse_toml("x = 1979-05-27\n"), LabError);
}

TEST(Config, TomlAndJsonGiveTheSameDocument) {
  json a = load_config_text("kind = \"scaling\"\nseed = 9\n[params]\np = 2.5\nq = 3.0\nn = 1\n", "a.toml");
  json b = load_config_text(R"({"kind": "scaling", "seed": 9, "params": {"p": 2.5, "q": 3.0, "n": 1}})", "b.json");
  EXPECT_EQ(a, b);
  EXPECT_EQ(config_hash(a), config_hash(b));
  // Without an extension the format is sniffed.
  EXPECT_EQ(load_config_text("kind = \"scaling\"\n"), json({{"kind", "scaling"}}));
  EXPECT_THROW(load_config_text("{ broken", "c.json"), LabError);
}

TEST(Config, HashIgnoresOutputLocationOnly) {
  json a = identity_config();
  json b = a;
  b["out"] = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b["seed"] = 10;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  // FNV-1a reference values.
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, OverridesReplaceFields) {
  json doc = identity_config();
  ConfigOverrides o;
  o.seed = 77;
  o.out = "dir";
  o.h_ladder = parse_ladder("0.25, 0.125");
  o.tol = 1e-6;
  apply_overrides(doc, o);
  EXPECT_EQ(doc["seed"], 77);
  EXPECT_EQ(doc["out"], "dir");
  EXPECT_EQ(doc["h_ladder"], json({0.25, 0.125}));
  EXPECT_DOUBLE_EQ(doc["tol"].get<double>(), 1e-6);
  EXPECT_THROW(parse_ladder("0.1,x"), LabError);
  EXPECT_THROW(parse_ladder("0.1 0.2"), LabError);
}

TEST(Validation, ReportsEveryProblem) {
  json doc{{"kind", "solve"}, {"params", {{"p", 0.5}, {"q", 2.0}, {"n", 4}}}, {"h_ladder", {0.1, 0.2}}, {"tol", -1}};
  auto issues = validate_config(doc);
  EXPECT_TRUE(has_field(issues, "params.p"));
  EXPECT_TRUE(has_field(issues, "params.n"));
  EXPECT_TRUE(has_field(issues, "h_ladder"));
  EXPECT_TRUE(has_field(issues, "tol"));
  EXPECT_FALSE(has_field(issues, "params.q"));
  auto r = run_experiment(doc);
  EXPECT_EQ(r.exit_code, exit_invalid_config);
  EXPECT_EQ(r.report["validation"]["valid"], false);
  EXPECT_EQ(r.report["validation"]["errors"].size(), issues.size());
  EXPECT_TRUE(r.files.empty());
}

TEST(Validation, KindSpecificRequirements) {
  EXPECT_TRUE(has_field(validate_config({{"kind", "classify"}}), "domain"));
  EXPECT_TRUE(has_field(validate_config({{"kind", "verify-barrier"}, {"catalog", {{"name", "nope"}}}}), "catalog.name"));
  EXPECT_TRUE(has_field(validate_config({{"kind", "verify-barrier"}, {"catalog", {{"name", "north_pole"}}}}),
                        "catalog.theta"));
  EXPECT_TRUE(has_field(validate_config({{"kind", "scaling"}, {"params", {{"q", 2.0}}}}), "params.q"));
  EXPECT_TRUE(has_field(validate_config({{"kind", "multiplied"}, {"factors", {1.0, -2.0}}}), "factors"));
  EXPECT_TRUE(has_field(validate_config({{"kind", "solve"}, {"exact", {{"family", "wave"}}}}), "exact.family"));
  json dom{{"kind", "cylinder"}, {"n", 2}, {"parameters", {{"center", {0.0, 0.0}}, {"radius", 1.0}, {"t1", 0.0}, {"t2", 1.0}}}};
  EXPECT_TRUE(has_field(validate_config({{"kind", "solve"}, {"domain", dom}}), "domain"));
  EXPECT_TRUE(validate_config(json::array()).size() == 1);
}

TEST(Validation, SampleConfigsValidate) {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kConfigs)) {
    const auto path = entry.path();
    if (path.extension() != ".toml" && path.extension() != ".json") continue;
    ++seen;
    auto issues = validate_config(load_config_file(path.string()));
    if (path.stem() == "invalid")
      EXPECT_FALSE(issues.empty());
    else
      EXPECT_TRUE(issues.empty()) << path << ": " << validation_report(issues).dump();
  }
  EXPECT_GE(seen, 8u);
}

TEST(Run, ReportsAreDeterministic) {
  json doc = load_config_file((kConfigs / "flat_bottom.toml").string());
  doc["samples"] = 2000;
  auto a = run_experiment(doc);
  auto b = run_experiment(doc);
  ASSERT_EQ(a.exit_code, exit_ok) << a.report.dump(1);
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(a.files, b.files);
  EXPECT_EQ(a.report["config_hash"], config_hash(doc));
  EXPECT_EQ(a.report["version"], kVersion);
  EXPECT_EQ(a.report.dump().find("time"), std::string::npos);
  doc["seed"] = 8;
  EXPECT_NE(run_experiment(doc).report["config_hash"], a.report["config_hash"]);
}

TEST(Run, IdentityKindsPass) {
  auto s = run_experiment(identity_config());
  EXPECT_EQ(s.exit_code, exit_ok) << s.report.dump(1);
  json m = identity_config();
  m["kind"] = "multiplied";
  m["params"]["q"] = 1.5;
  auto r = run_experiment(m);
  EXPECT_EQ(r.exit_code, exit_ok) << r.report.dump(1);
  ASSERT_EQ(r.files.size(), 1u);
  EXPECT_EQ(r.files[0].first, "multiplied.csv");
  EXPECT_EQ(std::count(r.files[0].second.begin(), r.files[0].second.end(), '\n'), 3);
}

TEST(Run, SolveWritesSolutionFiles) {
  json doc{{"kind", "solve"},
           {"params", {{"p", 2.0}, {"q", 2.0}, {"n", 1}}},
           {"exact", {{"family", "heat_mode"}}},
           {"h_ladder", {0.125, 0.0625}}};
  auto r = run_experiment(doc);
  ASSERT_EQ(r.exit_code, exit_ok) << r.report.dump(1);
  std::map<std::string, std::string> files(r.files.begin(), r.files.end());
  ASSERT_TRUE(files.count("solution.bin"));
  std::istringstream in(files["solution.bin"]);
  auto b = read_binary(in);
  EXPECT_EQ(b.dims.size(), 1u);
  EXPECT_DOUBLE_EQ(b.h, 0.0625);
  ASSERT_FALSE(b.times.empty());
  // The stored final level matches the exact solution to discretization error.
  auto exact = heat_mode_field(1);
  std::size_t checked = 0;
  for (std::size_t k = 0; k < b.values.back().size(); ++k) {
    const double v = b.values.back()[k];
    if (std::isnan(v)) continue;
    const double x = b.origin[0] + b.h * static_cast<double>(k);
    EXPECT_NEAR(v, exact.value({Vec::Constant(1, x), b.times.back()}), 1e-3);
    ++checked;
  }
  EXPECT_GT(checked, 10u);
  const std::string& csv = files["solution.csv"];
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "level,t,x1,value,type");
  EXPECT_EQ(files["errors.csv"].substr(0, 20), "h,tau,steps,max_erro");
}

TEST(Run, ExactFitSkipsOrderCheck) {
  json doc{{"kind", "solve"},
           {"params", {{"p", 2.0}, {"q", 2.0}, {"n", 1}}},
           {"exact", {{"family", "heat"}}},
           {"h_ladder", {0.125, 0.0625}}};
  auto r = run_experiment(doc);
  EXPECT_EQ(r.exit_code, exit_ok) << r.report.dump(1);
  EXPECT_EQ(r.report["result"]["exact_fit"], true);
}

TEST(Run, NumericalFailureExitsThree) {
  json doc{{"kind", "solve"}, {"params", {{"p", 2.0}, {"q", 2.0}, {"n", 1}}}, {"h_ladder", {8.0}}};
  auto r = run_experiment(doc);
  EXPECT_EQ(r.exit_code, exit_numerical) << r.report.dump(1);
  EXPECT_TRUE(r.report.contains("error"));
}

TEST(Run, WriteOutputsCreatesFiles) {
  auto dir = std::filesystem::temp_directory_path() / "pqlab_test_outputs";
  std::filesystem::remove_all(dir);
  auto r = run_experiment(identity_config());
  write_outputs(r, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "scaling.csv"));
  std::ifstream in(dir / "report.json");
  EXPECT_EQ(json::parse(in), r.report);
  std::filesystem::remove_all(dir);
}

TEST(Io, BinaryRejectsForeignData) {
  std::istringstream junk("NOPE....");
  EXPECT_THROW(read_binary(junk), LabError);
  std::istringstream truncated(std::string("PQLB\x01\x00\x00\x00", 8));
  EXPECT_THROW(read_binary(truncated), LabError);
}

TEST(Catalog, ListsEveryConstruction) {
  auto rows = list_catalog();
  std::set<std::string> names;
  for (const auto& r : rows) names.insert(r["name"].get<std::string>());
  for (const char* n : {"perron", "exterior_ball", "north_pole", "flat_bottom", "counterexample"})
    EXPECT_TRUE(names.count(n)) << n;
  EXPECT_NE(catalog_table().find("north_pole"), std::string::npos);
}

TEST(HeatMode, JetMatchesFiniteDifferences) {
  for (int n : {1, 2, 3}) {
    auto f = heat_mode_field(n);
    Params pr(2.0, 2.0, n);
    SpaceTimePoint p{Vec::LinSpaced(n, 0.1, 0.7), 0.3};
    EXPECT_NEAR(residual(f, p, pr).value, 0.0, 1e-13);
    EXPECT_NEAR(residual(value_only(f), p, pr).value, 0.0, 1e-5);
  }
}
