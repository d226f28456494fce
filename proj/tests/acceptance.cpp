// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pqlab/pqlab.hpp"

using namespace pqlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// --- 1. operator closed form --------------------------------------------------------

Outcome operator_closed_form() {
  const std::vector<std::pair<double, double>> pq{{2.0, 1.5}, {3.0, 2.0}, {2.0, 3.0}, {4.0, 4.0}};
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_rel = 0.0, worst_ratio = 1e300;
  std::size_t fd_cases = 0, fd_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto [p, q] = pq[i % 4];
    const int n = 1 + (i / 4) % 3;
    Params pr(p, q, n);
    const double C = 0.1 + 2.0 * U(rng), beta = -1.0 + 3.0 * U(rng), t = 0.2 + U(rng);
    Vec x(n);
    do {
      for (int k = 0; k < n; ++k) x(k) = -1.0 + 2.0 * U(rng);
    } while (x.norm() < 0.2);
    ScalarField f = make_prototype_field(C, beta, pr);
    const double want = prototype_delta_pq(C, beta, pr, t);
    const double got = delta_pq(f, {x, t}, pr);
    worst_rel = std::max(worst_rel, std::abs(got - want) / std::max(1e-300, std::abs(want)));
    // h-halving: error ratio near 4 unless already at round-off.
    const double e1 = std::abs(delta_pq_fd(f, {x, t}, pr, 2e-3) - want);
    const double e2 = std::abs(delta_pq_fd(f, {x, t}, pr, 1e-3) - want);
    if (e1 > 1e-7 * std::max(1.0, std::abs(want))) {
      ++fd_cases;
      worst_ratio = std::min(worst_ratio, e1 / e2);
      if (!(e1 / e2 > 3.0)) ++fd_bad;
    }
  }
  return {worst_rel <= 1e-10 && fd_bad == 0 && fd_cases > 0,
          "max rel dev " + fmt(worst_rel) + ", fd cases " + std::to_string(fd_cases) + ", min halving ratio " +
              fmt(worst_ratio)};
}

// --- 2. exact-solution reproduction ---------------------------------------------------

Outcome exact_reproduction() {
  SchemeConfig cfg;
  cfg.eps_rule = EpsRule::flat_spot;
  cfg.stencil_width = 2;
  const std::vector<double> ladder{1.0 / 8, 1.0 / 16, 1.0 / 32};
  bool ok = true;
  double worst_rel = 0.0, worst_order = 1e300;
  for (auto [p, q] : {std::pair{2.5, 1.7}, {3.0, 3.0}})
    for (int n : {1, 2})
      for (double j : {1.0, 3.0}) {
        Params pr(p, q, n);
        auto dom = make_cylinder(Vec::Zero(n), 1.0, 0.0, 0.25);
        auto st = convergence_study(dom, flat_bottom_field(origin(n), j, pr), pr, ladder, cfg);
        worst_rel = std::max(worst_rel, st.relative_error());
        worst_order = std::min(worst_order, st.order);
        ok = ok && st.relative_error() <= 0.05 && st.order >= 0.8;
      }
  return {ok, "8 cases, worst finest rel error " + fmt(worst_rel) + ", worst order " + fmt(worst_order)};
}

// --- 3. heat reduction ---------------------------------------------------------------

Outcome heat_reduction() {
  const std::vector<double> ladder{1.0 / 8, 1.0 / 16, 1.0 / 32};
  bool ok = true;
  double caloric = 0.0, worst_order = 1e300, spread = 0.0;
  for (int n : {1, 2}) {
    Params pr(2.0, 2.0, n);
    auto dom = make_cylinder(Vec::Zero(n), 1.0, 0.0, 0.25);
    // The scheme is exact on quadratics: the caloric polynomial is reproduced to round-off.
    auto poly = convergence_study(dom, caloric_field(n), pr, ladder);
    for (const auto& r : poly.rows) caloric = std::max(caloric, r.max_error);
    ok = ok && caloric <= 1e-10;
    // A non-polynomial caloric function exposes the O(h^2 + tau) truncation error.
    auto mode = convergence_study(dom, heat_mode_field(n), pr, ladder);
    worst_order = std::min(worst_order, mode.order);
    double lo = 1e300, hi = 0.0;
    for (const auto& r : mode.rows) {
      const double c = r.max_error / (r.h * r.h + r.tau);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    spread = std::max(spread, hi / lo);
    ok = ok && mode.order >= 1.8 && hi / lo <= 2.0;
  }
  return {ok, "caloric max error " + fmt(caloric) + ", cos-mode order " + fmt(worst_order) +
                  ", spread of err/(h^2+tau) " + fmt(spread)};
}

// --- 4. barrier catalog certification -------------------------------------------------

Outcome catalog_certification() {
  VerifierOptions vo;
  vo.samples = 10000;
  vo.tol = 1e-10;
  std::size_t configs = 0, failed = 0;
  std::string failures;
  double min_res = 1e300;
  auto note = [&](const std::string& name, const VerificationReport& r) {
    if (r.checked_samples > 0) min_res = std::min(min_res, r.min_residual);
    if (!r.passed()) {
      ++failed;
      failures += " " + name;
    }
  };
  auto family = [&](const std::string& name, const BarrierFamily& fam, const Params& pr) {
    ++configs;
    note(name, check_barrier_family(fam, 5, pr, vo));
  };
  for (auto [p, q, n] : {std::tuple{2.0, 1.5, 1}, {3.0, 3.0, 2}, {2.5, 1.7, 2}})
    family("flat_bottom", make_flat_bottom_family(origin(n), Params(p, q, n)), Params(p, q, n));
  for (auto [p, q, n] : {std::tuple{3.0, 1.5, 2}, {2.5, 3.0, 2}, {2.0, 4.0, 1}}) {
    Vec x1 = Vec::Zero(n);
    x1(0) = 1.0;
    family("exterior_ball", make_exterior_ball_family({{x1, 0.0}, 1.0, origin(n)}, Params(p, q, n)), Params(p, q, n));
  }
  for (auto [p, q, n, theta, l] :
       {std::tuple{2.0, 1.5, 1, 0.5, 3.0}, {3.0, 1.7, 2, 1.0, 3.0}, {2.0, 3.0, 1, 0.5, 4.0}, {2.5, 2.5, 2, 1.0, 4.0}})
    family("north_pole", make_north_pole_family(theta, l, Params(p, q, n)), Params(p, q, n));
  for (auto [p, q, n] : {std::tuple{2.0, 1.5, 1}, {3.0, 3.0, 2}}) {
    Params pr(p, q, n);
    Vec xb = Vec::Zero(n);
    xb(0) = 1.0;
    auto fam = make_perron_family(make_cylinder(Vec::Zero(n), 1.0, 0.0, 1.0), {xb, 0.5}, pr);
    family("perron", fam, pr);
    note("perron_strong", check_strong_family(fam, 5, vo));
  }
  for (auto [q, s] : {std::pair{1.5, 0.5}, {1.3, 0.5}, {1.7, 0.4}}) {
    ++configs;
    CounterexampleConfig cc{Params(2.0, q, 1), s, 1.0};
    auto pair = make_counterexample_pair(cc);
    note("counterexample_u", check_supersolution(pair.irregularity_barrier, pair.domain, cc.params, vo));
    note("counterexample_w", check_barrier(pair.single_barrier, pair.domain, origin(1), cc.params, vo));
  }
  return {failed == 0 && configs >= 12, std::to_string(configs) + " configurations, min residual " + fmt(min_res) +
                                            (failures.empty() ? "" : ", failed:" + failures)};
}

// --- 5. counterexample reproduction ---------------------------------------------------

Outcome counterexample_reproduction() {
  CounterexampleConfig cfg;  // p = 2, q = 1.5, n = 1, s = 0.5, K = 1
  PerronOptions opt;
  VerifierOptions vo;
  vo.samples = 10000;
  auto st = counterexample_study(cfg, opt, vo);
  const std::size_t m = st.limits.size();
  bool ok = st.irregularity_barrier.passed() && st.single_barrier.passed() && m >= 2;
  std::string gaps;
  for (std::size_t k = 0; k < m; ++k) gaps += (k ? "," : "") + fmt(st.gaps[k]);
  if (ok) {
    ok = st.limits[m - 1].conclusive && st.limits[m - 1].high <= 0.1;
    for (std::size_t k = m - 2; k < m; ++k) ok = ok && std::isfinite(st.gaps[k]) && st.gaps[k] >= 0.5;
  }
  return {ok, std::string("u ") + to_string(st.irregularity_barrier.verdict) + ", w " +
                  to_string(st.single_barrier.verdict) + ", finest high " +
                  (m ? fmt(st.limits[m - 1].high) : std::string("n/a")) + ", gaps " + gaps};
}

// --- 6. discrete comparison -----------------------------------------------------------

Outcome discrete_comparison() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::size_t violations = 0, nodes = 0;
  for (int i = 0; i < 100; ++i) {
    // Exactly monotone settings: n = 1 with any p, or p = 2.
    const bool one_d = i % 2 == 0;
    const int n = one_d ? 1 : 2;
    Params pr(one_d ? 1.5 + 2.5 * U(rng) : 2.0, 1.3 + 2.2 * U(rng), n);
    auto dom = make_cylinder(Vec::Zero(n), 1.0, 0.0, 0.05);
    auto g1 = random_trig_field(rng, n);
    auto bump = random_trig_field(rng, n, 0.5);
    ScalarField g2;
    g2.value = [g1, bump](const SpaceTimePoint& p) { return g1.value(p) + std::pow(bump.value(p), 2); };
    auto r = discrete_comparison_check(dom, g1, g2, GridSpec::covering(dom, n == 1 ? 1.0 / 16 : 1.0 / 8), pr, {}, 1e-12);
    nodes += r.nodes_compared;
    if (!r.ordered) ++violations;
  }
  return {violations == 0 && nodes > 0,
          "100 pairs, " + std::to_string(nodes) + " node comparisons, " + std::to_string(violations) + " violations"};
}

// --- 7. scaling identity ---------------------------------------------------------------

Outcome scaling_identity() {
  bool ok = true;
  double analytic = 0.0, discrete = 0.0;
  for (double q : {1.5, 3.0})
    for (double a : {0.5, 2.0})
      for (auto [p, n] : {std::pair{2.5, 2}, {3.0, 1}}) {
        auto r = scaling_check(Params(p, q, n), a, 7, 200);
        analytic = std::max({analytic, r.analytic_exact, r.analytic_random});
        discrete = std::max(discrete, r.discrete / std::max(1.0, r.discrete_scale));
        ok = ok && r.analytic_exact <= 1e-10 && r.analytic_random <= 1e-10 && r.discrete <= 1e-9 * std::max(1.0, r.discrete_scale);
      }
  return {ok, "max analytic dev " + fmt(analytic) + ", max discrete dev " + fmt(discrete)};
}

// --- 8 and 9. multiplied equation and classifier suite ----------------------------------

struct SuiteRun {
  std::vector<Regularity> verdicts;
  double seconds = 0.0;
};

SuiteRun& suite_at_unit_coefficient() {
  static SuiteRun run = [] {
    SuiteRun r;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& c : classifier_suite()) {
      PerronOptions opt;
      opt.window = c.window;
      r.verdicts.push_back(classify_regularity(c.domain, c.point, default_probes(c.domain, c.point, c.params), c.params, opt).verdict);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }();
  return run;
}

Outcome classifier_suite_check() {
  const auto cases = classifier_suite();
  const auto& run = suite_at_unit_coefficient();
  std::size_t decisive = 0, contradictions = 0;
  std::string listing;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const Regularity v = run.verdicts[k];
    if (v != Regularity::indeterminate) ++decisive;
    if (v != Regularity::indeterminate && v != cases[k].expected) ++contradictions;
    if (v != cases[k].expected) listing += "; " + cases[k].name + " -> " + to_string(v);
  }
  const double share = static_cast<double>(decisive) / static_cast<double>(cases.size());
  return {share >= 0.9 && contradictions == 0,
          std::to_string(decisive) + "/" + std::to_string(cases.size()) + " decisive, " +
              std::to_string(contradictions) + " contradictions" + listing};
}

Outcome multiplied_equation() {
  bool ok = true;
  double analytic = 0.0;
  for (double q : {1.5, 3.0})
    for (double c : {0.5, 2.0}) {
      auto r = multiplied_check(Params(2.5, q, 1), c, 8, 200);
      analytic = std::max({analytic, r.analytic_exact, r.analytic_random});
      ok = ok && r.analytic_exact <= 1e-10 && r.analytic_random <= 1e-10;
    }
  const auto cases = classifier_suite();
  const auto& base = suite_at_unit_coefficient();
  std::size_t compared = 0, differing = 0;
  for (double a : {0.5, 2.0})
    for (std::size_t k = 0; k < cases.size(); ++k) {
      if (!cases[k].cylinder || cases[k].params.q == 2.0) continue;
      PerronOptions opt;
      opt.window = cases[k].window;
      opt.scheme.time_coefficient = a;
      const auto v = classify_regularity(cases[k].domain, cases[k].point,
                                         default_probes(cases[k].domain, cases[k].point, cases[k].params),
                                         cases[k].params, opt)
                         .verdict;
      ++compared;
      if (v != base.verdicts[k]) ++differing;
    }
  return {ok && differing == 0 && compared > 0,
          "max analytic dev " + fmt(analytic) + ", cylinder verdicts differing " + std::to_string(differing) + "/" +
              std::to_string(compared)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "operator closed form", 5, operator_closed_form},
      {2, "exact-solution reproduction", 120, exact_reproduction},
      {3, "heat reduction", 60, heat_reduction},
      {4, "barrier catalog certification", 60, catalog_certification},
      {5, "counterexample reproduction", 300, counterexample_reproduction},
      {6, "discrete comparison", 120, discrete_comparison},
      {7, "scaling identity", 60, scaling_identity},
      {9, "classifier suite", 600, classifier_suite_check},
      {8, "multiplied equation", 180, multiplied_equation},
  };
  std::vector<std::string> lines(10);
  bool all = true;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // The suite at a = 1 is shared; charge it to criterion 9 only.
    if (c.id == 9) secs = std::max(secs, suite_at_unit_coefficient().seconds);
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    all = all && pass;
    std::ostringstream line;
    line << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail << " [" << fmt(secs, 3)
         << " s of " << c.budget_s << " s" << (in_time ? "" : ", over budget") << "]";
    lines[c.id] = line.str();
    std::cerr << line.str() << std::endl;
  }
  std::cout << "\nacceptance summary\n";
  for (int id = 1; id <= 9; ++id) std::cout << lines[id] << '\n';
  std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
  return all ? 0 : 1;
}
