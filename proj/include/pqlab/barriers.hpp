#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geometry.hpp"
#include "operator.hpp"
#include "params.hpp"
#include "sampling.hpp"

namespace pqlab {

/// How the generated fields relate to the equation. Perron-type families
/// are built from subsolutions that minorize the actual barriers.
enum class FamilyRole { supersolution, subsolution_minorant };

/// Indexed family j -> field with touch point xi0.
struct BarrierFamily {
  std::string name;
  std::function<ScalarField(long long)> generator;
  SpaceTimeDomain domain;
  SpaceTimePoint touch_point;
  std::optional<ScalarField> strong_witness;
  long long first_index = 1;
  FamilyRole role = FamilyRole::supersolution;
  /// Derived constants, for reports.
  nlohmann::json info = nlohmann::json::object();

  ScalarField operator()(long long j) const { return generator(j); }
};

// --- generic transforms -----------------------------------------------------

/// min{outer, inner} on G and outer elsewhere. The jet follows the active
/// branch.
inline ScalarField paste(const ScalarField& outer, const ScalarField& inner, const SpaceTimeDomain& G) {
  ScalarField f;
  f.value = [outer, inner, G](const SpaceTimePoint& p) {
    const double o = outer.value(p);
    return G.contains(p) ? std::min(o, inner.value(p)) : o;
  };
  f.defined = outer.defined;
  if (outer.jet && inner.jet) {
    f.jet = [outer, inner, G](const SpaceTimePoint& p) {
      if (G.contains(p) && inner.value(p) < outer.value(p)) return inner.jet(p);
      return outer.jet(p);
    };
  }
  return f;
}

struct LscDiagnostic {
  std::size_t crossings = 0;
  double worst_drop = 0.0;
  bool ok = true;
};

/// Samples crossings of dG inside `enclosing`: at each crossing the pasted
/// value just inside G must not fall below the outer value just outside.
inline LscDiagnostic paste_lsc_diagnostic(const ScalarField& outer, const ScalarField& inner, const SpaceTimeDomain& G,
                                          const SpaceTimeDomain& enclosing, std::size_t samples, std::uint64_t seed,
                                          double tol = 1e-9) {
  Rng rng(seed);
  LscDiagnostic d;
  const auto in_g = sample_interior(intersect(G, enclosing), samples, rng);
  const auto out_pts = sample_interior(enclosing, 4 * samples, rng);
  std::size_t k = 0;
  for (const auto& a : in_g) {
    for (std::size_t tries = 0; tries < 8 && k < out_pts.size(); ++tries, ++k) {
      const auto& b = out_pts[k];
      if (G.contains(b)) continue;
      SpaceTimePoint lo = a, hi = b;
      for (int it = 0; it < 50; ++it) {
        SpaceTimePoint mid = (lo + hi) * 0.5;
        (G.contains(mid) ? lo : hi) = mid;
      }
      if (!enclosing.contains(hi) || !enclosing.contains(lo)) break;
      const double pasted = std::min(outer.value(lo), inner.value(lo));
      const double drop = outer.value(hi) - pasted;
      ++d.crossings;
      d.worst_drop = std::max(d.worst_drop, drop);
      break;
    }
  }
  d.ok = d.worst_drop <= tol;
  return d;
}

/// u(x,t) = K f(a x, t) with K = a^{-q/(q-2)}; residual(u) = K residual(f)(a x, t).
inline ScalarField scale_field(const ScalarField& f, double a, const Params& params) {
  if (params.q == 2.0) throw LabError(Errc::unsupported_exponent, "scaling needs q != 2");
  if (!(a > 0.0) || !std::isfinite(a)) throw LabError(Errc::invalid_scale, "scale factor must be positive");
  const double K = std::pow(a, -params.q / (params.q - 2.0));
  auto map = [a](const SpaceTimePoint& p) { return SpaceTimePoint{Vec(a * p.x), p.t}; };
  ScalarField g;
  g.value = [f, K, map](const SpaceTimePoint& p) { return K * f.value(map(p)); };
  if (f.defined) g.defined = [f, map](const SpaceTimePoint& p) { return f.defined(map(p)); };
  if (f.jet) {
    g.jet = [f, K, a, map](const SpaceTimePoint& p) {
      JetValue j = f.jet(map(p));
      return JetValue{K * j.value, K * a * j.grad, K * a * a * j.hess, K * j.dt};
    };
  }
  return g;
}

inline double scaling_constant(double a, const Params& params) {
  if (params.q == 2.0) throw LabError(Errc::unsupported_exponent, "scaling needs q != 2");
  return std::pow(a, -params.q / (params.q - 2.0));
}

/// (c u, a = c^{q-2}): c u solves a d_t v = Delta_pq v when u solves the base equation.
inline std::pair<ScalarField, double> multiply_solution(const ScalarField& f, double c, const Params& params) {
  if (!(c > 0.0) || !std::isfinite(c)) throw LabError(Errc::invalid_params, "multiplier must be positive");
  return {scaled(f, c), std::pow(c, params.q - 2.0)};
}

// --- building blocks ----------------------------------------------------------

/// A |x - x0|^{q/(q-1)} + B (t - t0) + D (t - t0)^2.
inline ScalarField radial_quadratic_field(const SpaceTimePoint& xi0, double A, double B, double D, const Params& params) {
  const double alpha = params.radial_exponent();
  const Vec x0 = xi0.x;
  const double t0 = xi0.t;
  ScalarField f;
  f.value = [=](const SpaceTimePoint& p) {
    const double s = p.t - t0;
    return A * std::pow((p.x - x0).norm(), alpha) + B * s + D * s * s;
  };
  f.jet = [=](const SpaceTimePoint& p) {
    JetValue r = radial_power_jet(p.x, x0, alpha);
    const double s = p.t - t0;
    return JetValue{A * r.value + B * s + D * s * s, A * r.grad, A * r.hess, B + 2.0 * D * s};
  };
  return f;
}

/// Exact solution j (q-1)/q |x - x0|^{q/(q-1)} + c j^{q-1} (t - t0).
inline ScalarField flat_bottom_field(const SpaceTimePoint& xi0, double j, const Params& params) {
  const double q = params.q;
  return radial_quadratic_field(xi0, j * (q - 1.0) / q, params.structure_constant() * std::pow(j, q - 1.0), 0.0,
                                params);
}

// --- catalog families ---------------------------------------------------------

/// psi_j = j (q-1)/q |x-x0|^{q/(q-1)} + j^{q-1} c /(2 diam) (t-t0)^2: subsolutions
/// on the domain, with witness d = psi_1 and psi_j >= min(j, j^{q-1}) d.
inline BarrierFamily make_perron_family(const SpaceTimeDomain& domain, const SpaceTimePoint& xi0,
                                        const Params& params) {
  params.validate();
  const double D = diam(domain);
  if (domain.contains(xi0) || !domain.bounding_box().contains(xi0, 1e-12))
    throw LabError(Errc::precondition, "touch point must lie on the domain boundary");
  const double q = params.q;
  const double c = params.structure_constant();
  auto gen = [xi0, params, q, c, D](long long j) {
    const double jd = static_cast<double>(j);
    return radial_quadratic_field(xi0, jd * (q - 1.0) / q, 0.0, std::pow(jd, q - 1.0) * c / (2.0 * D), params);
  };
  BarrierFamily fam{"perron", gen, domain, xi0, radial_quadratic_field(xi0, (q - 1.0) / q, 0.0, c / (2.0 * D), params),
                    1, FamilyRole::subsolution_minorant};
  fam.info = {{"diam", D}, {"structure_constant", c}};
  return fam;
}

/// Exact solutions f_j centred at xi0 on the cylinder B_1(x0) x (t0, t0 + 1).
inline BarrierFamily make_flat_bottom_family(const SpaceTimePoint& xi0, const Params& params) {
  params.validate();
  auto gen = [xi0, params](long long j) { return flat_bottom_field(xi0, static_cast<double>(j), params); };
  BarrierFamily fam{"flat_bottom", gen, make_cylinder(xi0.x, 1.0, xi0.t, xi0.t + 1.0), xi0, std::nullopt, 1,
                    FamilyRole::supersolution};
  fam.info = {{"structure_constant", params.structure_constant()}};
  return fam;
}

struct ExteriorBallConfig {
  SpaceTimePoint xi1;
  double R1 = 1.0;
  SpaceTimePoint xi0;
};

/// Constants of the exterior-ball construction, with xi0 moved to the origin.
struct ExteriorBallConstants {
  SpaceTimePoint xi2;  ///< relative to xi0
  double R2 = 0.0;
  double delta = 0.0;
  long long j0 = 1;
  double C0 = 0.0;
  double C1 = 0.0;
  double C1_as_printed = 0.0;
  bool truncation_active = false;
};

inline ExteriorBallConstants exterior_ball_constants(const ExteriorBallConfig& cfg, const Params& params) {
  params.validate();
  if (params.q == 2.0) throw LabError(Errc::unsupported_exponent, "exterior-ball family needs q != 2");
  if (!(cfg.R1 > 0.0)) throw LabError(Errc::invalid_domain, "exterior ball radius must be positive");
  if (cfg.xi1.dim() != params.n || cfg.xi0.dim() != params.n)
    throw LabError(Errc::invalid_params, "exterior ball dimension mismatch");
  if (std::abs(distance(cfg.xi0, cfg.xi1) - cfg.R1) > 1e-9 * std::max(1.0, cfg.R1))
    throw LabError(Errc::precondition, "touch point must lie on the exterior sphere");
  const double q = params.q, p = params.p;
  const int n = params.n;
  ExteriorBallConstants k;
  k.xi2 = (cfg.xi1 - cfg.xi0) * 0.5;
  k.R2 = 0.5 * cfg.R1;
  k.delta = 0.5 * k.xi2.x.norm();
  if (!(k.delta > 1e-14 * cfg.R1))
    throw LabError(Errc::pole_tangency, "touch point is a pole of the exterior ball; use the north-cusp family");
  k.j0 = static_cast<long long>(std::floor((p - 2.0 + n) / ((p - 1.0) * k.delta * k.delta))) + 1;
  if (k.j0 < 1) k.j0 = 1;
  k.C0 = q < 2.0 ? std::pow(2.0 * k.R2, q - 2.0) * k.delta * k.delta : std::pow(k.delta, q);
  // The supersolution inequality needs (p-1) here; taking the smaller of
  // (p-1) and (q-1) keeps the printed constant whenever it is sufficient.
  k.C1 = k.R2 / (std::pow(2.0, q - 3.0) * std::min(p - 1.0, q - 1.0) * k.C0);
  k.C1_as_printed = k.R2 / (std::pow(2.0, q - 3.0) * (q - 1.0) * k.C0);
  k.truncation_active = k.delta + k.R2 > 2.0 * k.R2;
  return k;
}

/// log(gamma e^{-j R2^2}), the amplitude of w_j.
inline double exterior_ball_log_amplitude(const ExteriorBallConstants& k, double j, const Params& params) {
  const double q = params.q;
  const double base = (std::log(k.C1) + (1.0 - q) * std::log(j)) / (q - 2.0);
  return q < 2.0 ? base : base + 3.0 * j * k.R2 * k.R2;
}

/// w_j = gamma (e^{-j R2^2} - e^{-j R^2}), R = |xi - xi2|, on the complement of
/// B_R1(xi1) localized to B_delta(xi0) and B_{2 R2}(xi2).
inline BarrierFamily make_exterior_ball_family(const ExteriorBallConfig& cfg, const Params& params) {
  const ExteriorBallConstants k = exterior_ball_constants(cfg, params);
  const SpaceTimePoint xi0 = cfg.xi0;
  const SpaceTimePoint xi2_abs = xi0 + k.xi2;
  SpaceTimeDomain dom = intersect(
      intersect(make_ball_complement_cut(cfg.xi1, cfg.R1, Box::around(xi0, k.delta)), make_spacetime_ball(xi0, k.delta)),
      make_spacetime_ball(xi2_abs, 2.0 * k.R2));
  auto gen = [k, xi0, params](long long jj) {
    const double j = static_cast<double>(jj);
    const double amp = std::exp(exterior_ball_log_amplitude(k, j, params));
    const SpaceTimePoint xi2 = k.xi2;
    // R^2 - R2^2 = |xi|^2 - 2 xi.xi2 relative to xi0.
    auto excess = [xi0, xi2](const SpaceTimePoint& p) {
      const SpaceTimePoint y = p - xi0;
      return y.x.squaredNorm() + y.t * y.t - 2.0 * (y.x.dot(xi2.x) + y.t * xi2.t);
    };
    ScalarField f;
    f.value = [amp, j, excess](const SpaceTimePoint& p) { return -amp * std::expm1(-j * excess(p)); };
    f.jet = [amp, j, excess, xi0, xi2](const SpaceTimePoint& p) {
      const SpaceTimePoint y = p - xi0;
      const double e = excess(p);
      const double g = amp * std::exp(-j * e);  // gamma e^{-j R^2}
      const Vec dx = y.x - xi2.x;
      const Eigen::Index n = dx.size();
      JetValue jv;
      jv.value = -amp * std::expm1(-j * e);
      jv.grad = 2.0 * j * g * dx;
      jv.hess = 2.0 * j * g * (Mat::Identity(n, n) - 2.0 * j * dx * dx.transpose());
      jv.dt = 2.0 * j * g * (y.t - xi2.t);
      return jv;
    };
    return f;
  };
  BarrierFamily fam{"exterior_ball", gen, dom, xi0, std::nullopt, k.j0, FamilyRole::supersolution};
  fam.info = {{"xi2", to_json(xi2_abs)},       {"R2", k.R2},
              {"delta", k.delta},               {"j0", k.j0},
              {"C0", k.C0},                     {"C1", k.C1},
              {"C1_as_printed", k.C1_as_printed}, {"truncation_active", k.truncation_active}};
  return fam;
}

struct NorthPoleConstants {
  double s = 0.0;
  double exponent_lead = 0.0;   ///< 1 - q/(s(q-1))
  double exponent_tail = 0.0;   ///< q - 1 - l/s
  long long j_min = 1;
};

/// Default auxiliary exponent s: 4 q/(q-1) for q < 2, the midpoint of
/// (q/(q-1), (l - q/(q-1))/(q-2)) for q > 2.
inline double north_pole_default_s(double l, const Params& params) {
  const double alpha = params.radial_exponent();
  if (params.q < 2.0) return 4.0 * alpha;
  return 0.5 * (alpha + (l - alpha) / (params.q - 2.0));
}

inline double north_pole_m(double j, double theta, double l, double s, const Params& params) {
  const double q = params.q;
  return (q - 1.0) / q * std::pow(j, 1.0 - q / (s * (q - 1.0))) -
         params.structure_constant() * theta * std::pow(j, q - 1.0 - l / s);
}

inline void check_north_pole_range(double theta, double l, const Params& params) {
  params.validate();
  if (!(theta > 0.0)) throw LabError(Errc::invalid_domain, "north cusp needs theta > 0");
  const double q = params.q;
  if (q == 2.0) throw LabError(Errc::out_of_theorem_range, "north-pole family is stated for q != 2");
  if (q < 2.0 && !(l >= params.radial_exponent()))
    throw LabError(Errc::out_of_theorem_range, "north-pole family needs l >= q/(q-1) when q < 2");
  if (q > 2.0 && !(l > q)) throw LabError(Errc::out_of_theorem_range, "north-pole family needs l > q when q > 2");
}

inline NorthPoleConstants north_pole_constants(double theta, double l, const Params& params,
                                               std::optional<double> s_override = std::nullopt) {
  check_north_pole_range(theta, l, params);
  const double q = params.q;
  const double alpha = params.radial_exponent();
  NorthPoleConstants k;
  k.s = s_override.value_or(north_pole_default_s(l, params));
  if (!(k.s > alpha) || !(l > k.s * (q - 2.0) + alpha))
    throw LabError(Errc::out_of_theorem_range, "auxiliary exponent s violates s > q/(q-1), l > s(q-2) + q/(q-1)");
  k.exponent_lead = 1.0 - q / (k.s * (q - 1.0));
  k.exponent_tail = q - 1.0 - l / k.s;
  // First j with m_j > 0 and f_j > 0 on G^j, i.e.
  // (q-1)/q r^alpha > c theta j^{q-2} r^l at r = j^{-1/s}.
  const double c = params.structure_constant();
  auto admissible = [&](double j) {
    const double r = std::pow(j, -1.0 / k.s);
    return north_pole_m(j, theta, l, k.s, params) > 0.0 &&
           (q - 1.0) / q * std::pow(r, alpha) > c * theta * std::pow(j, q - 2.0) * std::pow(r, l);
  };
  long long j = 1;
  while (!admissible(static_cast<double>(j)) && j < (1LL << 52)) j *= 2;
  long long lo = j / 2 + 1;
  while (lo < j) {
    long long mid = lo + (j - lo) / 2;
    if (admissible(static_cast<double>(mid)))
      j = mid;
    else
      lo = mid + 1;
  }
  k.j_min = j;
  return k;
}

/// h_j = min{f_j, m_j} on G^j = {|x| < j^{-1/s}, -theta j^{-l/s} < t < 0}, m_j
/// elsewhere, on the north cusp {t > -theta |x|^l, -1 < t < 0, |x| < 1} with
/// vertex at the origin.
inline BarrierFamily make_north_pole_family(double theta, double l, const Params& params,
                                            std::optional<double> s_override = std::nullopt) {
  const NorthPoleConstants k = north_pole_constants(theta, l, params, s_override);
  const SpaceTimePoint o = origin(params.n);
  SpaceTimeDomain dom = make_north_cusp(o, theta, l);
  auto gen = [k, theta, l, params, dom, o](long long jj) {
    const double j = static_cast<double>(jj);
    const double m = north_pole_m(j, theta, l, k.s, params);
    SpaceTimeDomain G = intersect(dom, make_cylinder(o.x, std::pow(j, -1.0 / k.s), -theta * std::pow(j, -l / k.s), 0.0));
    return paste(constant_field(m, params.n), flat_bottom_field(o, j, params), G);
  };
  BarrierFamily fam{"north_pole", gen, dom, o, std::nullopt, k.j_min, FamilyRole::supersolution};
  fam.info = {{"theta", theta}, {"l", l}, {"s", k.s}, {"exponent_lead", k.exponent_lead},
              {"exponent_tail", k.exponent_tail}, {"j_min", k.j_min}};
  return fam;
}

// --- counterexample -----------------------------------------------------------

struct CounterexampleConfig {
  Params params{2.0, 1.5, 1};
  double s = 0.5;
  double K = 1.0;
};

struct CounterexampleConstants {
  double B = 0.0;
  double M = 0.0;
};

inline CounterexampleConstants counterexample_constants(const CounterexampleConfig& cfg) {
  const Params& pr = cfg.params;
  pr.validate();
  if (!(pr.q > 1.0 && pr.q < 2.0)) throw LabError(Errc::out_of_theorem_range, "counterexample needs 1 < q < 2");
  if (!(cfg.s > 0.0 && cfg.s < 1.0 / pr.q)) throw LabError(Errc::out_of_theorem_range, "counterexample needs 0 < s < 1/q");
  if (!(cfg.K > 0.0)) throw LabError(Errc::invalid_domain, "counterexample needs K > 0");
  const double q = pr.q;
  CounterexampleConstants k;
  k.B = std::min(pr.structure_constant() * std::pow(pr.radial_exponent(), q - 1.0) * (2.0 - q), 1.0);
  k.M = std::pow(0.5 * k.B, 1.0 + (q - 1.0) / (cfg.s * q * (2.0 - q)));
  return k;
}

struct CounterexamplePair {
  ScalarField irregularity_barrier;  ///< u, with u(0,0) = 1
  ScalarField single_barrier;        ///< w = min{v, M} near the axis, M elsewhere
  SpaceTimeDomain domain;
  CounterexampleConstants constants;
};

/// u(x,t) = |x|^{q/(q-1)} (-t)^{-qs/(q-1)} - c/(1-qs) (q/(q-1))^{q-1} (-t)^{1-qs}.
inline ScalarField counterexample_u(const CounterexampleConfig& cfg) {
  const Params pr = cfg.params;
  const double q = pr.q, s = cfg.s;
  const double alpha = pr.radial_exponent();
  const double a1 = q * s / (q - 1.0);
  const double coef = pr.structure_constant() * std::pow(alpha, q - 1.0);
  const Vec zero = Vec::Zero(pr.n);
  ScalarField u;
  u.value = [=](const SpaceTimePoint& p) {
    if (p.t == 0.0 && p.x.norm() == 0.0) return 1.0;
    const double mt = -p.t;
    return std::pow(p.x.norm(), alpha) * std::pow(mt, -a1) - coef / (1.0 - q * s) * std::pow(mt, 1.0 - q * s);
  };
  u.jet = [=](const SpaceTimePoint& p) {
    const double mt = -p.t;
    JetValue r = radial_power_jet(p.x, zero, alpha);
    const double ta = std::pow(mt, -a1);
    JetValue j;
    j.value = r.value * ta - coef / (1.0 - q * s) * std::pow(mt, 1.0 - q * s);
    j.grad = ta * r.grad;
    j.hess = ta * r.hess;
    j.dt = a1 * r.value * std::pow(mt, -a1 - 1.0) + coef * std::pow(mt, -q * s);
    return j;
  };
  u.defined = [](const SpaceTimePoint& p) { return p.t < 0.0; };
  return u;
}

/// v(x,t) = (-t)^{1/(2-q)} (B - |x|^{q/(q-1)}).
inline ScalarField counterexample_v(const CounterexampleConfig& cfg, double B) {
  const Params pr = cfg.params;
  const double q = pr.q;
  const double alpha = pr.radial_exponent();
  const double e = 1.0 / (2.0 - q);
  const Vec zero = Vec::Zero(pr.n);
  ScalarField v;
  v.value = [=](const SpaceTimePoint& p) { return std::pow(-p.t, e) * (B - std::pow(p.x.norm(), alpha)); };
  v.jet = [=](const SpaceTimePoint& p) {
    const double mt = -p.t;
    JetValue r = radial_power_jet(p.x, zero, alpha);
    const double te = std::pow(mt, e);
    JetValue j;
    j.value = te * (B - r.value);
    j.grad = -te * r.grad;
    j.hess = -te * r.hess;
    j.dt = -e * std::pow(mt, e - 1.0) * (B - r.value);
    return j;
  };
  v.defined = [](const SpaceTimePoint& p) { return p.t < 0.0; };
  return v;
}

/// Irregularity barrier and single barrier at the origin of the Petrovskii
/// cusp {|x| <= K (-t)^s, -1 < t < 0}. For K != 1 the single barrier is the
/// K = 1 barrier transported by scale_field with a = 1/K.
inline CounterexamplePair make_counterexample_pair(const CounterexampleConfig& cfg) {
  const CounterexampleConstants k = counterexample_constants(cfg);
  const Params pr = cfg.params;
  const double alpha = pr.radial_exponent();
  SpaceTimeDomain dom = make_petrovskii_cusp(cfg.K, cfg.s, pr);
  SpaceTimeDomain unit = make_petrovskii_cusp(1.0, cfg.s, pr);
  const double B = k.B;
  SpaceTimeDomain inner{DomainKind::custom, pr.n, unit.bounding_box(),
                        [unit, B, alpha](const SpaceTimePoint& p) {
                          return unit.contains(p) && std::pow(p.x.norm(), alpha) < 0.5 * B;
                        },
                        {{"shape", "counterexample_inner"}, {"B", B}}};
  ScalarField w = paste(constant_field(k.M, pr.n), counterexample_v(cfg, B), inner);
  if (cfg.K != 1.0) w = scale_field(w, 1.0 / cfg.K, pr);
  return {counterexample_u(cfg), w, dom, k};
}

// --- catalog listing ------------------------------------------------------------

struct CatalogEntry {
  std::string name;
  std::string result;
  std::string constraints;
};

inline std::vector<CatalogEntry> barrier_catalog() {
  return {
      {"perron", "barrier family characterization of regularity (strong family with witness d)",
       "p > 1, q > 1; bounded domain; fields are subsolutions minorizing the barriers"},
      {"exterior_ball", "exterior ball condition", "q != 2; touch point not a pole of the ball (x1 != x0); j >= j0"},
      {"north_pole", "north cusp condition t - t0 > -theta |x - x0|^l",
       "theta > 0; l >= q/(q-1) if 1 < q < 2; l > q if q > 2"},
      {"flat_bottom", "earliest-time point (flat bottom)", "p > 1, q > 1; exact solutions"},
      {"counterexample", "single barrier at an irregular Petrovskii cusp origin", "1 < q < 2, 0 < s < 1/q, K > 0"},
  };
}

}  // namespace pqlab
