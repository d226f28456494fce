#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "barriers.hpp"
#include "geometry.hpp"
#include "operator.hpp"
#include "sampling.hpp"

namespace pqlab {

/// Radial gauge f(r) = r^beta and time gauge sigma(r) = r^2 of the admissible
/// test-function class.
struct AdmissibilityProfile {
  double beta = 4.0;

  AdmissibilityProfile() = default;
  AdmissibilityProfile(double beta_, const Params& params) : beta(beta_) { validate(params); }

  void validate(const Params& params) const {
    if (!(beta > std::max(params.radial_exponent(), 2.0)))
      throw LabError(Errc::invalid_params, "gauge exponent must exceed max(q/(q-1), 2)");
  }
  double f(double r) const { return std::pow(r, beta); }
  double sigma(double r) const { return r * r; }

  static AdmissibilityProfile for_params(const Params& params) {
    return AdmissibilityProfile(std::max(params.radial_exponent(), 2.0) + 1.0, params);
  }
};

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct Violation {
  SpaceTimePoint point;
  double residual = 0.0;
  bool singular = false;
  std::string condition;
};

struct VerificationReport {
  std::size_t checked_samples = 0;
  std::size_t skipped_samples = 0;
  std::size_t violation_count = 0;
  double min_residual = std::numeric_limits<double>::infinity();
  std::vector<Violation> violations;
  Verdict verdict = Verdict::pass;
  double tolerance = 0.0;
  std::map<int, long long> witnesses;
  nlohmann::json details = nlohmann::json::object();

  bool passed() const { return verdict == Verdict::pass; }

  double skipped_ratio() const {
    const std::size_t total = checked_samples + skipped_samples;
    return total == 0 ? 0.0 : static_cast<double>(skipped_samples) / static_cast<double>(total);
  }

  nlohmann::json to_json() const {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& x : violations)
      v.push_back({{"point", pqlab::to_json(x.point)},
                   {"residual", x.residual},
                   {"branch", x.singular ? "singular-gradient" : "regular"},
                   {"condition", x.condition}});
    nlohmann::json w = nlohmann::json::object();
    for (const auto& [k, j] : witnesses) w[std::to_string(k)] = j;
    return {{"verdict", to_string(verdict)},
            {"min_residual", std::isfinite(min_residual) ? nlohmann::json(min_residual) : nlohmann::json(nullptr)},
            {"samples", checked_samples},
            {"skipped", skipped_samples},
            {"tolerance", tolerance},
            {"violation_count", violation_count},
            {"violations", v},
            {"witnesses", w},
            {"details", details}};
  }
};

struct VerifierOptions {
  std::uint64_t seed = 12345;
  std::size_t samples = 10000;
  double tol = 1e-10;
  double eps_grad = 1e-8;
  double fd_h = 1e-4;
  double time_coefficient = 1.0;
  /// Tail bound for the limit at the touch point, relative to the largest
  /// field value on the approach shells.
  double theta_b = 1e-3;
  /// Positivity bound for limits at other boundary points, relative to the
  /// largest field value seen near the boundary.
  double theta_c = 1e-6;
  /// Boundary points closer than this to the touch point are not probed by
  /// the single-barrier positivity condition.
  double r_excl = 0.1;
  std::size_t boundary_samples = 200;
  ApproachOptions touch_approach{1, 40, 4, 400};
  ApproachOptions boundary_approach{6, 14, 2, 200};
  long long j_max = 1000000;
  std::size_t max_recorded_violations = 20;
  /// Gauge used at zero-gradient samples; defaults to the profile for params.
  std::optional<AdmissibilityProfile> profile;
};

enum class Gauge { admissible, not_admissible, unresolved };

/// Numeric gauge test at a zero-gradient point: the spatial deviation
/// |u(x + r e, t) - u(x, t)| must not outgrow f(r) = r^beta as r -> 0.
/// A deviation that grows relative to f along some axis means the field is
/// not an admissible test function there, so the zero-gradient condition
/// d_t >= 0 does not apply to it. Deviations lost in round-off along every
/// axis decide nothing.
inline Gauge gauge_test(const ScalarField& field, const SpaceTimePoint& p, const AdmissibilityProfile& profile) {
  static constexpr double kRadii[] = {1e-2, 1e-3, 1e-4};
  const double u0 = field.value(p);
  bool resolved = false;
  for (int i = 0; i < p.dim(); ++i) {
    for (double sgn : {-1.0, 1.0}) {
      double ratio[3];
      bool significant = true;
      for (int k = 0; k < 3; ++k) {
        SpaceTimePoint q = p;
        q.x(i) += sgn * kRadii[k];
        if (!field.is_defined(q)) {
          significant = false;
          break;
        }
        const double u = field.value(q);
        const double dev = std::abs(u - u0);
        if (!(dev > 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(u) + std::abs(u0)))) {
          significant = false;
          break;
        }
        ratio[k] = dev / profile.f(kRadii[k]);
      }
      if (!significant) continue;
      resolved = true;
      if (ratio[2] > 2.0 * ratio[1] && ratio[1] > 2.0 * ratio[0]) return Gauge::not_admissible;
    }
  }
  return resolved ? Gauge::admissible : Gauge::unresolved;
}

inline bool is_admissible_at(const ScalarField& field, const SpaceTimePoint& p, const AdmissibilityProfile& profile) {
  return gauge_test(field, p, profile) != Gauge::not_admissible;
}

/// Residual just off a zero-gradient point, along the first axis where the
/// gradient becomes resolvable. Used at points where the field is not an
/// admissible test function, so the residual is read as its limit. Analytic
/// jets with a small but nonzero gradient are evaluated in place.
inline std::optional<Residual> limiting_residual(const ScalarField& field, const SpaceTimePoint& p,
                                                 const Params& params, const ResidualOptions& ro) {
  if (field.has_derivatives()) {
    ResidualOptions exact = ro;
    exact.eps_grad = 0.0;
    try {
      Residual r = residual(field, p, params, exact);
      if (!r.singular && std::isfinite(r.value)) return r;
    } catch (const LabError&) {
    }
  }
  for (double rho = 1e-7; rho <= 1e-2; rho *= 4.0) {
    for (int i = 0; i < p.dim(); ++i) {
      for (double sgn : {1.0, -1.0}) {
        SpaceTimePoint q = p;
        q.x(i) += sgn * rho;
        if (!field.is_defined(q)) continue;
        Residual r;
        try {
          r = residual(field, q, params, ro);
        } catch (const LabError&) {
          continue;
        }
        if (!r.singular && std::isfinite(r.value)) return r;
      }
    }
  }
  return std::nullopt;
}

namespace detail {

inline void record(VerificationReport& r, const VerifierOptions& opt, Violation v) {
  ++r.violation_count;
  if (r.violations.size() < opt.max_recorded_violations) r.violations.push_back(std::move(v));
}

inline void finalize(VerificationReport& r) {
  if (r.verdict != Verdict::inconclusive) r.verdict = r.violation_count == 0 ? Verdict::pass : Verdict::fail;
}

inline void mark_inconclusive(VerificationReport& r, const VerifierOptions& opt, const SpaceTimePoint& at,
                              const std::string& why) {
  record(r, opt, {at, 0.0, false, "inconclusive: " + why});
  r.verdict = Verdict::inconclusive;
}

inline void merge(VerificationReport& into, const VerificationReport& from, const VerifierOptions& opt) {
  into.checked_samples += from.checked_samples;
  into.skipped_samples += from.skipped_samples;
  into.min_residual = std::min(into.min_residual, from.min_residual);
  for (const auto& v : from.violations) record(into, opt, v);
  into.violation_count += from.violation_count - from.violations.size();
  if (from.verdict == Verdict::inconclusive) into.verdict = Verdict::inconclusive;
}

}  // namespace detail

/// Two-branch pointwise supersolution test on rejection samples: residual >=
/// -tol where |grad| > eps_grad, d_t >= -tol where the gradient vanishes.
inline VerificationReport check_supersolution(const ScalarField& field, const SpaceTimeDomain& domain,
                                              const Params& params, const VerifierOptions& opt = {}) {
  if (opt.samples < 1) throw LabError(Errc::precondition, "at least one sample is required");
  VerificationReport r;
  r.tolerance = opt.tol;
  Rng rng(opt.seed);
  const auto pts = sample_interior(domain, opt.samples, rng);
  ResidualOptions ro{opt.eps_grad, opt.fd_h, opt.time_coefficient};
  const AdmissibilityProfile profile = opt.profile.value_or(AdmissibilityProfile::for_params(params));
  std::size_t singular_admissible = 0, singular_limit = 0;
  for (const auto& p : pts) {
    if (!field.is_defined(p)) {
      ++r.skipped_samples;
      continue;
    }
    Residual res;
    try {
      res = residual(field, p, params, ro);
    } catch (const LabError&) {
      ++r.skipped_samples;
      continue;
    }
    if (res.singular) {
      // Unresolved deviations: prefer the limit of the resolvable residual,
      // and fall back to the zero-gradient branch for fields flat to round-off.
      const Gauge g = gauge_test(field, p, profile);
      auto lim = g == Gauge::admissible ? std::nullopt : limiting_residual(field, p, params, ro);
      if (lim) {
        ++singular_limit;
        res.value = lim->value;
      } else if (g != Gauge::not_admissible) {
        ++singular_admissible;
      } else {
        ++r.skipped_samples;
        continue;
      }
    }
    if (!std::isfinite(res.value)) {
      ++r.skipped_samples;
      continue;
    }
    ++r.checked_samples;
    r.min_residual = std::min(r.min_residual, res.value);
    if (res.value < -opt.tol) detail::record(r, opt, {p, res.value, res.singular, "supersolution"});
  }
  r.skipped_samples += opt.samples - pts.size();
  r.details["singular_admissible"] = singular_admissible;
  r.details["singular_limit"] = singular_limit;
  if (r.checked_samples == 0) detail::mark_inconclusive(r, opt, origin(domain.dim()), "no evaluable samples");
  detail::finalize(r);
  return r;
}

/// Subsolution test: the supersolution test applied to -field.
inline VerificationReport check_subsolution(const ScalarField& field, const SpaceTimeDomain& domain,
                                            const Params& params, const VerifierOptions& opt = {}) {
  return check_supersolution(scaled(field, -1.0), domain, params, opt);
}

/// Sampled boundary point together with domain points approaching it.
struct BoundaryProbe {
  SpaceTimePoint point;
  double distance_to_touch = 0.0;
  std::vector<SpaceTimePoint> approach;
};

/// Boundary samples of the domain (excluding the touch point's r-ball) with
/// approach points drawn from the last three populated shells.
inline std::vector<BoundaryProbe> make_boundary_probes(const SpaceTimeDomain& domain, const SpaceTimePoint& xi0,
                                                       double r_min, const VerifierOptions& opt) {
  Rng rng(derive_seed(opt.seed, 1));
  std::vector<BoundaryProbe> probes;
  for (const auto& b : sample_boundary(domain, opt.boundary_samples, rng)) {
    const double d = distance(b, xi0);
    if (d < r_min) continue;
    auto shells = approach_shells(domain, b, rng, opt.boundary_approach);
    if (shells.empty()) continue;
    BoundaryProbe pr{b, d, {}};
    const std::size_t first = shells.size() > 3 ? shells.size() - 3 : 0;
    for (std::size_t i = first; i < shells.size(); ++i)
      pr.approach.insert(pr.approach.end(), shells[i].points.begin(), shells[i].points.end());
    probes.push_back(std::move(pr));
  }
  return probes;
}

/// Estimate of the lower limit of the field at a probed boundary point.
inline double liminf_estimate(const ScalarField& field, const BoundaryProbe& probe) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : probe.approach) {
    const double v = field.value(p);
    if (std::isnan(v)) continue;
    m = std::min(m, v);
  }
  return m;
}

struct TouchLimit {
  bool conclusive = false;
  double tail_max = 0.0;
  /// Largest |field| over all shells; positive multiples of a barrier are
  /// barriers, so the tail is judged against it.
  double scale = 0.0;
  std::size_t shells = 0;
  double finest_radius = 0.0;
};

/// Largest field value over the three finest populated approach shells.
inline TouchLimit touch_limit(const ScalarField& field, const SpaceTimeDomain& domain, const SpaceTimePoint& xi0,
                              const VerifierOptions& opt) {
  Rng rng(derive_seed(opt.seed, 2));
  auto shells = approach_shells(domain, xi0, rng, opt.touch_approach);
  TouchLimit t;
  t.shells = shells.size();
  if (shells.size() < 3) return t;
  t.conclusive = true;
  t.finest_radius = shells.back().radius;
  t.tail_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < shells.size(); ++i)
    for (const auto& p : shells[i].points) {
      const double v = std::abs(field.value(p));
      t.scale = std::max(t.scale, v);
      if (i + 3 >= shells.size()) t.tail_max = std::max(t.tail_max, v);
    }
  return t;
}

namespace detail {

inline void check_positive(VerificationReport& r, const ScalarField& field, const SpaceTimeDomain& domain,
                           const VerifierOptions& opt, std::uint64_t stream) {
  Rng rng(derive_seed(opt.seed, stream));
  std::size_t bad = 0;
  for (const auto& p : sample_interior(domain, std::max<std::size_t>(opt.samples / 10, 100), rng)) {
    if (!field.is_defined(p)) continue;
    const double v = field.value(p);
    if (!(v > 0.0)) {
      ++bad;
      record(r, opt, {p, v, false, "positivity"});
    }
  }
  r.details["positivity_failures"] = bad;
}

/// Returns the field scale seen on the approach shells (0 if none).
inline double check_touch(VerificationReport& r, const ScalarField& field, const SpaceTimeDomain& domain,
                          const SpaceTimePoint& xi0, const VerifierOptions& opt) {
  TouchLimit t = touch_limit(field, domain, xi0, opt);
  r.details["touch_shells"] = t.shells;
  if (!t.conclusive) {
    mark_inconclusive(r, opt, xi0, "no admissible approach to the touch point");
    return 0.0;
  }
  r.details["touch_tail_max"] = t.tail_max;
  r.details["touch_finest_radius"] = t.finest_radius;
  r.details["touch_scale"] = t.scale;
  const double rel = t.scale > 0.0 ? t.tail_max / t.scale : 0.0;
  r.details["touch_tail_relative"] = rel;
  if (!(rel < opt.theta_b)) record(r, opt, {xi0, t.tail_max, false, "limit at touch point"});
  return t.scale;
}

}  // namespace detail

/// Single-barrier test: supersolution, positive, limit 0 at xi0 and lower
/// limit >= theta_c at sampled boundary points at distance >= r_excl.
inline VerificationReport check_barrier(const ScalarField& field, const SpaceTimeDomain& domain,
                                        const SpaceTimePoint& xi0, const Params& params,
                                        const VerifierOptions& opt = {}) {
  VerificationReport r = check_supersolution(field, domain, params, opt);
  r.details["supersolution_min_residual"] = r.min_residual;
  detail::check_positive(r, field, domain, opt, 3);
  double scale = detail::check_touch(r, field, domain, xi0, opt);
  const auto probes = make_boundary_probes(domain, xi0, opt.r_excl, opt);
  for (const auto& pr : probes)
    for (const auto& p : pr.approach) {
      const double v = std::abs(field.value(p));
      if (std::isfinite(v)) scale = std::max(scale, v);
    }
  // Positive multiples of a barrier are barriers: the floor scales with the field.
  const double floor = opt.theta_c * (scale > 0.0 ? scale : 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& pr : probes) {
    const double v = liminf_estimate(field, pr);
    worst = std::min(worst, v);
    if (!(v >= floor)) detail::record(r, opt, {pr.point, v, false, "boundary lower limit"});
  }
  r.details["boundary_probes"] = probes.size();
  r.details["boundary_floor"] = floor;
  if (std::isfinite(worst)) r.details["boundary_liminf_min"] = worst;
  detail::finalize(r);
  return r;
}

namespace detail {

/// Smallest j in [lo, j_max] with pred(j), by doubling then bisection, or
/// nullopt. pred is assumed monotone in j.
template <class Pred>
std::optional<long long> search_index(long long lo, long long j_max, Pred pred) {
  if (lo > j_max) return std::nullopt;
  if (pred(lo)) return lo;
  long long bad = lo;
  long long j = std::max(lo + 1, 2 * lo);
  while (true) {
    if (j > j_max) j = j_max;
    if (pred(j)) break;
    if (j == j_max) return std::nullopt;
    bad = j;
    j *= 2;
  }
  while (j - bad > 1) {
    long long mid = bad + (j - bad) / 2;
    if (pred(mid))
      j = mid;
    else
      bad = mid;
  }
  return j;
}

}  // namespace detail

/// Barrier-family test: for each k <= k_max a witness j(k) <= j_max whose
/// lower limits at sampled boundary points at distance >= 1/k are >= k, and
/// each witness passes the pointwise (a) and limit (b) conditions.
inline VerificationReport check_barrier_family(const BarrierFamily& family, int k_max, const Params& params,
                                               const VerifierOptions& opt = {}) {
  if (k_max < 1) throw LabError(Errc::precondition, "k_max must be >= 1");
  VerificationReport r;
  r.tolerance = opt.tol;
  const auto probes = make_boundary_probes(family.domain, family.touch_point, 1.0 / k_max, opt);
  r.details["boundary_probes"] = probes.size();
  r.details["role"] = family.role == FamilyRole::supersolution ? "supersolution" : "subsolution_minorant";
  long long start = family.first_index;
  for (int k = 1; k <= k_max; ++k) {
    const double rk = 1.0 / k;
    auto ok = [&](long long j) {
      ScalarField f = family.generator(j);
      for (const auto& pr : probes) {
        if (pr.distance_to_touch < rk) continue;
        if (!(liminf_estimate(f, pr) >= k)) return false;
      }
      return true;
    };
    auto j = detail::search_index(start, opt.j_max, ok);
    if (!j) {
      detail::record(r, opt, {family.touch_point, static_cast<double>(k), false,
                              "no witness j <= j_max for k = " + std::to_string(k)});
      break;
    }
    r.witnesses[k] = *j;
    start = *j;
  }
  std::vector<long long> distinct;
  for (const auto& [k, j] : r.witnesses)
    if (distinct.empty() || distinct.back() != j) distinct.push_back(j);
  for (long long j : distinct) {
    ScalarField f = family.generator(j);
    VerifierOptions o = opt;
    o.seed = derive_seed(opt.seed, 100 + static_cast<std::uint64_t>(j));
    VerificationReport a = family.role == FamilyRole::supersolution ? check_supersolution(f, family.domain, params, o)
                                                                    : check_subsolution(f, family.domain, params, o);
    detail::merge(r, a, opt);
    detail::check_positive(r, f, family.domain, o, 3);
    detail::check_touch(r, f, family.domain, family.touch_point, o);
  }
  detail::finalize(r);
  return r;
}

/// Strong-family test: d > 0 on samples, d(xi0) = 0, and for every k <= k_max
/// some j with generator(j) >= k d on all samples.
inline VerificationReport check_strong_family(const BarrierFamily& family, int k_max, const VerifierOptions& opt = {}) {
  if (k_max < 1) throw LabError(Errc::precondition, "k_max must be >= 1");
  VerificationReport r;
  r.tolerance = opt.tol;
  if (!family.strong_witness) {
    detail::mark_inconclusive(r, opt, family.touch_point, "family has no strong witness");
    return r;
  }
  const ScalarField& d = *family.strong_witness;
  Rng rng(opt.seed);
  const auto pts = sample_interior(family.domain, opt.samples, rng);
  r.checked_samples = pts.size();
  std::vector<double> dv(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    dv[i] = d.value(pts[i]);
    if (!(dv[i] > 0.0)) detail::record(r, opt, {pts[i], dv[i], false, "witness vanishes away from touch point"});
  }
  const double d0 = d.value(family.touch_point);
  if (std::abs(d0) > opt.tol) detail::record(r, opt, {family.touch_point, d0, false, "witness nonzero at touch point"});
  if (r.violation_count == 0) {
    long long start = family.first_index;
    for (int k = 1; k <= k_max; ++k) {
      auto ok = [&](long long j) {
        ScalarField f = family.generator(j);
        for (std::size_t i = 0; i < pts.size(); ++i)
          if (!(f.value(pts[i]) >= k * dv[i])) return false;
        return true;
      };
      auto j = detail::search_index(start, opt.j_max, ok);
      if (!j) {
        detail::record(r, opt, {family.touch_point, static_cast<double>(k), false,
                                "no j with w_j >= k d for k = " + std::to_string(k)});
        break;
      }
      r.witnesses[k] = *j;
      start = *j;
    }
  }
  detail::finalize(r);
  return r;
}

}  // namespace pqlab
