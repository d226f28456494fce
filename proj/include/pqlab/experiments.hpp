#pragma once

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pqlab/barriers.hpp"
#include "pqlab/perron.hpp"
#include "pqlab/solver.hpp"
#include "pqlab/verifier.hpp"

namespace pqlab {

/// Shortest round-trip-free rendering used in case names: 1.5, 3, 0.25.
inline std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

/// sum_k a_k sin(k . x + w_k t + phi_k) with an exact jet.
inline ScalarField random_trig_field(std::mt19937_64& rng, int n, double amp = 1.0, int modes = 4) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  struct Mode {
    double a;
    Vec k;
    double w, phi;
  };
  std::vector<Mode> ms;
  for (int m = 0; m < modes; ++m) {
    Vec k(n);
    for (int i = 0; i < n; ++i) k(i) = 3.0 * U(rng);
    const double a = amp * U(rng);
    const double w = 2.0 * U(rng);
    const double phi = 3.0 * U(rng);
    ms.push_back({a, k, w, phi});
  }
  ScalarField f;
  f.value = [ms](const SpaceTimePoint& p) {
    double v = 0.0;
    for (const auto& m : ms) v += m.a * std::sin(m.k.dot(p.x) + m.w * p.t + m.phi);
    return v;
  };
  f.jet = [ms, n](const SpaceTimePoint& p) {
    JetValue j{0.0, Vec::Zero(n), Mat::Zero(n, n), 0.0};
    for (const auto& m : ms) {
      const double arg = m.k.dot(p.x) + m.w * p.t + m.phi;
      const double s = std::sin(arg), c = std::cos(arg);
      j.value += m.a * s;
      j.grad += m.a * c * m.k;
      j.hess -= m.a * s * m.k * m.k.transpose();
      j.dt += m.a * c * m.w;
    }
    return j;
  };
  return f;
}

/// Caloric polynomial |x|^2 + 2 n t, exact for p = q = 2.
inline ScalarField caloric_field(int n) {
  ScalarField f;
  f.value = [n](const SpaceTimePoint& p) { return p.x.squaredNorm() + 2.0 * n * p.t; };
  f.jet = [n](const SpaceTimePoint& p) {
    return JetValue{p.x.squaredNorm() + 2.0 * n * p.t, 2.0 * p.x, 2.0 * Mat::Identity(n, n), 2.0 * n};
  };
  return f;
}

/// Heat mode exp(-n pi^2 t / 4) prod cos(pi x_i / 2), exact for p = q = 2.
/// Not a polynomial, so the scheme's truncation error is visible.
inline ScalarField heat_mode_field(int n) {
  const double k = std::acos(-1.0) / 2.0;
  ScalarField f;
  f.value = [n, k](const SpaceTimePoint& p) {
    double v = std::exp(-n * k * k * p.t);
    for (int i = 0; i < n; ++i) v *= std::cos(k * p.x(i));
    return v;
  };
  f.jet = [n, k](const SpaceTimePoint& p) {
    const double e = std::exp(-n * k * k * p.t);
    Vec c(n), s(n);
    for (int i = 0; i < n; ++i) {
      c(i) = std::cos(k * p.x(i));
      s(i) = std::sin(k * p.x(i));
    }
    auto prod = [&](int skip1, int skip2) {
      double v = e;
      for (int i = 0; i < n; ++i)
        if (i != skip1 && i != skip2) v *= c(i);
      return v;
    };
    JetValue j{prod(-1, -1), Vec(n), Mat(n, n), -n * k * k * prod(-1, -1)};
    for (int i = 0; i < n; ++i) {
      j.grad(i) = -k * s(i) * prod(i, -1);
      for (int m = 0; m < n; ++m)
        j.hess(i, m) = i == m ? -k * k * prod(-1, -1) : k * k * s(i) * s(m) * prod(i, m);
    }
    return j;
  };
  return f;
}

/// Least-squares slope of log(error) against log(h).
inline double observed_order(const std::vector<double>& h, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(err[k] > 0.0)) continue;
    const double x = std::log(h[k]), y = std::log(err[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    m += 1;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// --- convergence against an exact solution --------------------------------------

struct ConvergenceRow {
  double h = 0.0;
  double tau = 0.0;
  std::size_t steps = 0;
  double max_error = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  /// Range of the exact solution over interior nodes of all rungs.
  double range = 0.0;
  double order = std::numeric_limits<double>::quiet_NaN();
  double relative_error() const { return rows.empty() || !(range > 0.0) ? 0.0 : rows.back().max_error / range; }

  nlohmann::json to_json() const {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& x : rows) r.push_back({{"h", x.h}, {"tau", x.tau}, {"steps", x.steps}, {"max_error", x.max_error}});
    return {{"rungs", r}, {"range", range}, {"relative_error", relative_error()},
            {"order", std::isfinite(order) ? nlohmann::json(order) : nlohmann::json(nullptr)}};
  }
};

/// Max interior error over every time level, per rung of the ladder.
inline ConvergenceStudy convergence_study(const SpaceTimeDomain& domain, const ScalarField& exact, const Params& params,
                                          const std::vector<double>& ladder, const SchemeConfig& cfg = {},
                                          DiscreteSolution* finest = nullptr) {
  ConvergenceStudy s;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double h : ladder) {
    ConvergenceRow row;
    row.h = h;
    auto sol = solve_dirichlet(domain, exact, GridSpec::covering(domain, h), params, cfg, [&](const Stepper& st) {
      for (std::size_t k = 0; k < st.types().size(); ++k) {
        if (st.types()[k] != NodeType::interior) continue;
        const double e = exact.value({st.coords(k), st.time()});
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        row.max_error = std::max(row.max_error, std::abs(st.values()[k] - e));
      }
    });
    row.tau = sol.tau;
    row.steps = sol.steps;
    s.rows.push_back(row);
    if (finest) *finest = std::move(sol);
  }
  s.range = hi > lo ? hi - lo : 0.0;
  std::vector<double> hs, es;
  for (const auto& r : s.rows) {
    hs.push_back(r.h);
    es.push_back(r.max_error);
  }
  s.order = observed_order(hs, es);
  return s;
}

// --- scaling and multiplied-equation identities ----------------------------------

struct IdentityCheck {
  double factor = 0.0;       ///< a for scaling, c for multiplication
  double constant = 0.0;     ///< K for scaling, a = c^{q-2} for multiplication
  double analytic_exact = 0.0;
  double analytic_random = 0.0;
  double discrete = 0.0;
  double discrete_scale = 0.0;

  nlohmann::json to_json() const {
    return {{"factor", factor},           {"constant", constant}, {"analytic_exact", analytic_exact},
            {"analytic_random", analytic_random}, {"discrete", discrete}, {"discrete_scale", discrete_scale}};
  }
};

namespace detail {

inline double rel_dev(double lhs, double rhs) { return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)); }

inline std::vector<SpaceTimePoint> identity_samples(int n, std::mt19937_64& rng, std::size_t count) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<SpaceTimePoint> pts;
  for (std::size_t i = 0; i < count; ++i) {
    Vec x(n);
    for (int k = 0; k < n; ++k) x(k) = U(rng);
    pts.push_back({x, 0.55 + 0.45 * U(rng)});
  }
  return pts;
}

}  // namespace detail

/// residual(K u(a.,.)) = K residual(u)(a.,.) on f_3 and random trig fields,
/// and discrete coherence of the solver on the scaled domain with a common
/// time step.
inline IdentityCheck scaling_check(const Params& params, double a, std::uint64_t seed, std::size_t samples = 200) {
  std::mt19937_64 rng(seed);
  IdentityCheck c;
  c.factor = a;
  c.constant = scaling_constant(a, params);
  const double K = c.constant;
  const auto pts = detail::identity_samples(params.n, rng, samples);
  auto dev = [&](const ScalarField& f) {
    const ScalarField u = scale_field(f, a, params);
    // The gradient scales by K a; so does the singular-branch threshold.
    ResidualOptions ro;
    ro.eps_grad *= K * a;
    double d = 0.0;
    for (const auto& p : pts) {
      const double lhs = residual(u, p, params, ro).value;
      const double rhs = K * residual(f, {Vec(a * p.x), p.t}, params).value;
      d = std::max(d, detail::rel_dev(lhs, rhs));
    }
    return d;
  };
  c.analytic_exact = dev(flat_bottom_field(origin(params.n), 3.0, params));
  for (int m = 0; m < 3; ++m) c.analytic_random = std::max(c.analytic_random, dev(random_trig_field(rng, params.n)));

  auto dom = make_cylinder(Vec::Zero(params.n), 1.0, 0.0, 0.1);
  auto small = scale_domain(dom, 1.0 / a);
  auto g = random_trig_field(rng, params.n);
  auto ga = scale_field(g, a, params);
  SchemeConfig cfg, cfg_a;
  cfg.eps_grad = 1e-3;
  cfg_a.eps_grad = K * a * 1e-3;
  GridSpec grid = GridSpec::covering(dom, 1.0 / 16), grid_a = GridSpec::covering(small, 1.0 / (16 * a));
  const double tau =
      std::min(Stepper(dom, g, grid, params, cfg).tau(), Stepper(small, ga, grid_a, params, cfg_a).tau());
  grid.tau = grid_a.tau = tau;
  auto u = solve_dirichlet(dom, g, grid, params, cfg);
  auto v = solve_dirichlet(small, ga, grid_a, params, cfg_a);
  for (std::size_t k = 0; k < v.values.back().size(); ++k) {
    if (v.types.back()[k] != NodeType::interior) continue;
    auto base = u.value_near(u.last(), Vec(a * v.lat.coords(k)));
    if (!base) throw LabError(Errc::degenerate_grid, "scaled grid does not map onto the base grid");
    c.discrete = std::max(c.discrete, std::abs(v.values.back()[k] - K * *base));
    c.discrete_scale = std::max(c.discrete_scale, std::abs(K * *base));
  }
  return c;
}

/// residual_a(c u) = c^{q-1} residual(u) with a = c^{q-2}, and discrete
/// coherence: data c g with time coefficient a reproduce c times the base solve.
inline IdentityCheck multiplied_check(const Params& params, double cmul, std::uint64_t seed,
                                      std::size_t samples = 200) {
  std::mt19937_64 rng(seed);
  IdentityCheck c;
  c.factor = cmul;
  const auto pts = detail::identity_samples(params.n, rng, samples);
  auto dev = [&](const ScalarField& f) {
    auto [cu, a] = multiply_solution(f, cmul, params);
    c.constant = a;
    ResidualOptions ro;
    ro.eps_grad *= cmul;
    double d = 0.0;
    for (const auto& p : pts) {
      const double lhs = multiplied_residual(cu, p, params, a, ro).value;
      const double rhs = std::pow(cmul, params.q - 1.0) * residual(f, p, params).value;
      d = std::max(d, detail::rel_dev(lhs, rhs));
    }
    return d;
  };
  c.analytic_exact = dev(flat_bottom_field(origin(params.n), 3.0, params));
  for (int m = 0; m < 3; ++m) c.analytic_random = std::max(c.analytic_random, dev(random_trig_field(rng, params.n)));

  auto dom = make_cylinder(Vec::Zero(params.n), 1.0, 0.0, 0.1);
  auto g = random_trig_field(rng, params.n);
  GridSpec grid = GridSpec::covering(dom, 1.0 / 16);
  SchemeConfig base_cfg;
  base_cfg.eps_grad = 1e-3;
  SchemeConfig mult_cfg = base_cfg;
  mult_cfg.time_coefficient = c.constant;
  mult_cfg.eps_grad = cmul * 1e-3;
  grid.tau = std::min(Stepper(dom, g, grid, params, base_cfg).tau(),
                      Stepper(dom, scaled(g, cmul), grid, params, mult_cfg).tau());
  auto u = solve_dirichlet(dom, g, grid, params, base_cfg);
  auto v = solve_dirichlet(dom, scaled(g, cmul), grid, params, mult_cfg);
  for (std::size_t k = 0; k < u.values.back().size(); ++k) {
    if (u.types.back()[k] == NodeType::exterior) continue;
    c.discrete = std::max(c.discrete, std::abs(v.values.back()[k] - cmul * u.values.back()[k]));
    c.discrete_scale = std::max(c.discrete_scale, std::abs(cmul * u.values.back()[k]));
  }
  return c;
}

// --- counterexample reproduction --------------------------------------------------

struct CounterexampleStudy {
  VerificationReport irregularity_barrier;
  VerificationReport single_barrier;
  std::vector<PerronRung> lower;
  std::vector<BoundaryLimit> limits;
  /// f(0,0) - high endpoint, per rung.
  std::vector<double> gaps;
  double exponent = 0.0;
  std::vector<std::string> warnings;
};

/// Verifier on u and w, then the lower Perron ladder of f = u on the cusp,
/// read along x = 0 towards the origin.
inline CounterexampleStudy counterexample_study(const CounterexampleConfig& cfg, const PerronOptions& base,
                                                const VerifierOptions& vopt = {}) {
  CounterexampleStudy st;
  auto pair = make_counterexample_pair(cfg);
  const SpaceTimePoint xi0 = origin(cfg.params.n);
  st.irregularity_barrier = check_supersolution(pair.irregularity_barrier, pair.domain, cfg.params, vopt);
  st.single_barrier = check_barrier(pair.single_barrier, pair.domain, xi0, cfg.params, vopt);
  PerronOptions opt = base;
  Vec down = Vec::Zero(cfg.params.n + 1);
  down(cfg.params.n) = -1.0;
  opt.rays = {ApproachRay{down, {}, 1.0}};
  st.lower = approximate_perron(pair.domain, pair.irregularity_barrier, PerronSide::lower, cfg.params, opt, &xi0,
                                &st.warnings);
  // u(0, t) = -C (-t)^{1 - qs}: the approach exponent along x = 0.
  st.exponent = 1.0 - cfg.params.q * cfg.s;
  const double datum = pair.irregularity_barrier.value(xi0);
  for (const auto& rung : st.lower) {
    const BoundaryLimit* prev = st.limits.empty() ? nullptr : &st.limits.back();
    st.limits.push_back(boundary_limit(rung, opt, st.exponent, prev, datum, st.exponent));
    st.gaps.push_back(st.limits.back().conclusive ? datum - st.limits.back().high
                                                  : std::numeric_limits<double>::quiet_NaN());
  }
  return st;
}

/// Default probes plus the irregularity barrier's own data, datum 1.
inline std::vector<Probe> counterexample_probes(const CounterexampleConfig& cfg) {
  auto pair = make_counterexample_pair(cfg);
  const SpaceTimePoint xi0 = origin(cfg.params.n);
  auto probes = default_probes(pair.domain, xi0, cfg.params);
  probes.push_back({"irregularity_data", pair.irregularity_barrier, pair.irregularity_barrier.value(xi0), 0.5});
  return probes;
}

// --- classifier suite -------------------------------------------------------------

struct SuiteCase {
  std::string name;
  SpaceTimeDomain domain;
  SpaceTimePoint point;
  Params params;
  std::optional<Box> window;
  Regularity expected = Regularity::regular;
  /// Cylinder points, rerun for the multiplied equation.
  bool cylinder = false;
};

/// One-dimensional boundary points with known regularity: lateral and
/// earliest-time cylinder points, exterior-ball tangent points, north cusp
/// vertices with admissible l, and Petrovskii cusp origins for q < 2.
inline std::vector<SuiteCase> classifier_suite() {
  auto v1 = [](double a) { return Vec::Constant(1, a); };
  std::vector<SuiteCase> out;
  auto cyl = make_cylinder(v1(0.0), 1.0, 0.0, 1.0);
  const Box lateral_window{v1(0.0), v1(1.0), 0.25, 0.75};
  const Box bottom_window{v1(-1.0), v1(1.0), 0.0, 0.5};
  for (auto [p, q] : {std::pair{2.0, 1.5}, {2.0, 3.0}, {3.0, 1.5}, {4.0, 3.0}}) {
    out.push_back({"lateral p=" + fmt_num(p) + " q=" + fmt_num(q), cyl, {v1(1.0), 0.5}, Params(p, q, 1),
                   lateral_window, Regularity::regular, true});
  }
  for (double q : {1.5, 3.0})
    out.push_back({"earliest q=" + fmt_num(q), cyl, {v1(0.0), 0.0}, Params(2.0, q, 1), bottom_window,
                   Regularity::regular, true});
  const SpaceTimePoint x0{v1(0.0), 0.5};
  const double R1 = 0.5, phi = std::acos(-1.0) / 6.0;
  auto ball = make_ball_complement_cut({v1(-R1 * std::cos(phi)), 0.5 - R1 * std::sin(phi)}, R1,
                                       Box{v1(-1.0), v1(1.0), 0.0, 1.0});
  for (double q : {1.5, 3.0})
    out.push_back({"exterior ball q=" + fmt_num(q), ball, x0, Params(2.0, q, 1), Box{v1(-0.5), v1(0.5), 0.2, 0.7},
                   Regularity::regular, false});
  for (auto [q, l] : {std::pair{1.5, 3.0}, {3.0, 4.0}})
    out.push_back({"north cusp q=" + fmt_num(q) + " l=" + fmt_num(l), make_north_cusp({v1(0.0), 0.0}, 1.0, l),
                   {v1(0.0), 0.0}, Params(2.0, q, 1), Box{v1(-1.0), v1(1.0), -0.5, 0.0}, Regularity::regular, false});
  for (double s : {0.5, 0.4}) {
    Params pr(2.0, 1.5, 1);
    out.push_back({"petrovskii q=1.5 s=" + fmt_num(s), make_petrovskii_cusp(1.0, s, pr), {v1(0.0), 0.0}, pr,
                   std::nullopt, Regularity::irregular, false});
  }
  return out;
}

}  // namespace pqlab
