#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "barriers.hpp"
#include "geometry.hpp"
#include "operator.hpp"
#include "solver.hpp"

namespace pqlab {

enum class PerronSide { upper, lower };

inline const char* to_string(PerronSide s) { return s == PerronSide::upper ? "upper" : "lower"; }

/// Approach path ξ0 + (r e_x, e_t r^k) sampled at increasing r; k = 1 gives a
/// straight ray, k > 1 a path tangent to the time slice of ξ0.
struct ApproachRay {
  Vec direction;                 ///< (e_x, e_t) in R^{n+1}, time last
  std::vector<double> distances;
  double time_power = 1.0;

  SpaceTimePoint at(const SpaceTimePoint& xi0, double r) const {
    const int n = xi0.dim();
    return {Vec(xi0.x + r * direction.head(n)), xi0.t + direction(n) * std::pow(r, time_power)};
  }

  nlohmann::json to_json() const { return {{"direction", vec_to_json(direction)}, {"time_power", time_power}}; }
};

/// Candidate paths: axes, time, space-time diagonals, and tangential paths
/// t - t0 = -+ r^k (k = 2, 4, 8) along each axis. Only paths whose every
/// sample lies in the domain are kept.
inline std::vector<ApproachRay> approach_rays(const SpaceTimeDomain& domain, const SpaceTimePoint& xi0,
                                              const std::vector<double>& distances) {
  const int n = xi0.dim();
  std::vector<std::pair<Vec, double>> cands;
  auto unit = [n](int i, double s) {
    Vec e = Vec::Zero(n + 1);
    e(i) = s;
    return e;
  };
  for (int i = 0; i <= n; ++i)
    for (double s : {1.0, -1.0}) cands.emplace_back(unit(i, s), 1.0);
  for (int i = 0; i < n; ++i) {
    for (double a : {1.0, -1.0}) {
      for (double b : {1.0, -1.0}) {
        Vec e = Vec::Zero(n + 1);
        e(i) = a;
        e(n) = b;
        cands.emplace_back(e.normalized(), 1.0);
      }
    }
  }
  for (double k : {2.0, 4.0, 8.0}) {
    for (int i = 0; i < n; ++i) {
      for (double a : {1.0, -1.0}) {
        for (double b : {-1.0, 1.0}) {
          Vec e = Vec::Zero(n + 1);
          e(i) = a;
          e(n) = b;
          cands.emplace_back(e, k);
        }
      }
    }
  }
  std::vector<ApproachRay> rays;
  for (const auto& [e, k] : cands) {
    ApproachRay ray{e, distances, k};
    bool inside = true;
    for (double r : distances) inside = inside && domain.contains(ray.at(xi0, r));
    if (inside) rays.push_back(ray);
  }
  // Tangential paths only when no straight ray reaches the point.
  const bool straight = std::any_of(rays.begin(), rays.end(), [](const ApproachRay& r) { return r.time_power == 1.0; });
  if (straight) std::erase_if(rays, [](const ApproachRay& r) { return r.time_power != 1.0; });
  return rays;
}

/// Values of one discrete solution at the samples of a set of rays.
struct RayTrace {
  std::vector<std::vector<double>> values;  ///< per ray, per distance; NaN if unavailable
};

struct PerronRung {
  double h = 0.0;
  DiscreteSolution solution;
  std::vector<ApproachRay> rays;
  RayTrace trace;
};

struct PerronOptions {
  std::vector<double> h_ladder{1.0 / 16, 1.0 / 32, 1.0 / 64};
  SchemeConfig scheme;
  /// Restricts the computation to this box intersected with the domain.
  std::optional<Box> window;
  /// Distances of ray samples in units of h.
  std::vector<double> ray_steps{1.0, 2.0, 4.0, 8.0};
  /// Explicit approach paths; empty means the automatic candidates.
  std::vector<ApproachRay> rays;
};

/// n-linear interpolation of a level; exterior corners fall back to the nearest
/// available corner.
inline double interpolate(const Lattice& lat, const std::vector<double>& u, const std::vector<NodeType>& type,
                          const Vec& x) {
  const int n = lat.n;
  std::vector<int> base(n);
  std::vector<double> frac(n);
  for (int i = 0; i < n; ++i) {
    const double s = (x(i) - lat.origin(i)) / lat.h;
    base[i] = std::clamp(static_cast<int>(std::floor(s)), 0, lat.dims[i] - 2);
    frac[i] = std::clamp(s - base[i], 0.0, 1.0);
  }
  double acc = 0.0, wsum = 0.0, nearest_w = -1.0, nearest_v = std::numeric_limits<double>::quiet_NaN();
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::size_t idx = 0;
    double w = 1.0;
    for (int i = n - 1; i >= 0; --i) {
      const int bit = (mask >> i) & 1;
      idx = idx * static_cast<std::size_t>(lat.dims[i]) + static_cast<std::size_t>(base[i] + bit);
      w *= bit ? frac[i] : 1.0 - frac[i];
    }
    if (type[idx] == NodeType::exterior) continue;
    acc += w * u[idx];
    wsum += w;
    if (w > nearest_w) {
      nearest_w = w;
      nearest_v = u[idx];
    }
  }
  if (wsum > 0.999999) return acc / wsum;
  return nearest_v;
}

/// Solves the Dirichlet problem on a refinement ladder of rasterized domains:
/// outer rasterization for the upper side, inner for the lower side, data
/// extended from the nearest crossing. Ray samples are read at every time
/// level. Rungs whose rasterization is empty are dropped.
inline std::vector<PerronRung> approximate_perron(const SpaceTimeDomain& domain, const ScalarField& f, PerronSide side,
                                                  const Params& params, const PerronOptions& opt,
                                                  const SpaceTimePoint* xi0 = nullptr,
                                                  std::vector<std::string>* warnings = nullptr) {
  for (std::size_t k = 1; k < opt.h_ladder.size(); ++k)
    if (!(opt.h_ladder[k] < opt.h_ladder[k - 1]))
      throw LabError(Errc::invalid_config, "h ladder must be strictly decreasing");
  SpaceTimeDomain dom = domain;
  Box box = domain.bounding_box();
  if (opt.window) {
    box = box.intersect(*opt.window);
    dom = intersect(domain, make_box(*opt.window));
  }
  SchemeConfig cfg = opt.scheme;
  cfg.raster = side == PerronSide::upper ? Raster::outer : Raster::inner;
  cfg.extension = Extension::nearest;
  std::vector<PerronRung> out;
  for (double h : opt.h_ladder) {
    PerronRung rung;
    rung.h = h;
    std::vector<ApproachRay> rays;
    std::vector<std::vector<double>> best_dt;
    if (xi0) {
      std::vector<double> d;
      for (double s : opt.ray_steps) d.push_back(s * h);
      if (opt.rays.empty()) {
        rays = approach_rays(dom, *xi0, d);
      } else {
        for (ApproachRay r : opt.rays) {
          r.distances = d;
          bool inside = true;
          for (double x : d) inside = inside && dom.contains(r.at(*xi0, x));
          if (inside) rays.push_back(r);
        }
      }
      rung.rays = rays;
      rung.trace.values.assign(rays.size(), std::vector<double>(d.size(), std::numeric_limits<double>::quiet_NaN()));
      best_dt.assign(rays.size(), std::vector<double>(d.size(), std::numeric_limits<double>::infinity()));
    }
    try {
      rung.solution = solve_dirichlet(dom, f, {h, 0.0, box}, params, cfg, [&](const Stepper& st) {
        if (!xi0) return;
        for (std::size_t r = 0; r < rays.size(); ++r) {
          for (std::size_t k = 0; k < rays[r].distances.size(); ++k) {
            const SpaceTimePoint p = rays[r].at(*xi0, rays[r].distances[k]);
            const double dt = std::abs(st.time() - p.t);
            if (dt > 0.5 * st.tau() + 1e-15 || dt >= best_dt[r][k]) continue;
            best_dt[r][k] = dt;
            rung.trace.values[r][k] = interpolate(st.context().lat, st.values(), st.types(), p.x);
          }
        }
      });
    } catch (const LabError& e) {
      if (e.code() != Errc::degenerate_grid) throw;
      if (warnings) warnings->push_back("rung h=" + std::to_string(h) + " dropped: " + e.what());
      continue;
    }
    out.push_back(std::move(rung));
  }
  return out;
}

struct BoundaryLimit {
  double low = std::numeric_limits<double>::quiet_NaN();
  double high = std::numeric_limits<double>::quiet_NaN();
  bool conclusive = false;
  /// +1 interval shrank towards the datum against the previous rung, -1 grew, 0 unknown.
  int trend = 0;
  std::size_t rays = 0;
  std::vector<double> per_ray;

  nlohmann::json to_json() const {
    return {{"low", low}, {"high", high}, {"conclusive", conclusive}, {"trend", trend}, {"rays", rays},
            {"per_ray", per_ray}};
  }
};

/// Least-squares limit c0 of c0 + c1 r^gamma through the ray samples.
inline std::optional<double> extrapolate_limit(const std::vector<double>& r, const std::vector<double>& v,
                                               double gamma) {
  double s1 = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!std::isfinite(v[k])) continue;
    const double x = std::pow(r[k], gamma);
    s1 += 1;
    sx += x;
    sy += v[k];
    sxx += x * x;
    sxy += x * v[k];
  }
  if (s1 < 2) return std::nullopt;
  const double det = s1 * sxx - sx * sx;
  if (std::abs(det) < 1e-300) return sy / s1;
  return (sxx * sy - sx * sxy) / det;
}

/// Exponent of the approach along a time-like ray for data behaving like
/// |ξ - ξ0|^gamma: self-similar balance of u/t against |u/x|^{q-2} u/x^2.
inline double parabolic_exponent(double gamma, double q) { return gamma / (2.0 - (gamma - 1.0) * (q - 2.0)); }

/// Interval of extrapolated approach values at ξ0 on one rung. Rays with a
/// linear time component are extrapolated with gamma_time, others with gamma.
/// Extrapolated limits are kept inside the range of the data the solve used,
/// widened to the datum.
inline BoundaryLimit boundary_limit(const PerronRung& rung, const PerronOptions& opt, double gamma = 1.0,
                                    const BoundaryLimit* previous = nullptr, double datum = 0.0,
                                    std::optional<double> gamma_time = std::nullopt) {
  BoundaryLimit b;
  std::vector<double> r;
  for (double s : opt.ray_steps) r.push_back(s * rung.h);
  for (std::size_t i = 0; i < rung.trace.values.size(); ++i) {
    const auto& vals = rung.trace.values[i];
    double g = gamma;
    if (gamma_time && i < rung.rays.size()) {
      const auto& ray = rung.rays[i];
      if (ray.time_power == 1.0 && ray.direction(ray.direction.size() - 1) != 0.0) g = *gamma_time;
    }
    auto c0 = extrapolate_limit(r, vals, g);
    if (!c0) continue;
    const double v = std::clamp(*c0, std::min(rung.solution.data_min, datum), std::max(rung.solution.data_max, datum));
    b.per_ray.push_back(v);
  }
  b.rays = b.per_ray.size();
  if (b.rays == 0) return b;
  b.conclusive = true;
  b.low = *std::min_element(b.per_ray.begin(), b.per_ray.end());
  b.high = *std::max_element(b.per_ray.begin(), b.per_ray.end());
  if (previous && previous->conclusive) {
    auto gap = [datum](const BoundaryLimit& x) { return std::max(std::abs(x.low - datum), std::abs(x.high - datum)); };
    b.trend = gap(b) < gap(*previous) ? 1 : (gap(b) > gap(*previous) ? -1 : 0);
  }
  return b;
}

/// Boundary data probing a point: f with the datum f(ξ0) and the spatial
/// exponent of its approach; time-like rays use parabolic_exponent(gamma, q).
struct Probe {
  std::string name;
  ScalarField f;
  double datum = 0.0;
  double gamma = 1.0;
};

/// -A |ξ - ξ0|^γ (space-time Euclidean distance).
inline Probe distance_probe(const SpaceTimePoint& xi0, double A, double gamma) {
  ScalarField f;
  f.value = [xi0, A, gamma](const SpaceTimePoint& p) { return -A * std::pow(distance(p, xi0), gamma); };
  return {"distance(A=" + std::to_string(A) + ",gamma=" + std::to_string(gamma) + ")", f, 0.0, gamma};
}

/// -ψ_j of the Perron family at ξ0 on the given domain.
inline Probe psi_probe(const SpaceTimeDomain& domain, const SpaceTimePoint& xi0, const Params& params, long long j) {
  const double D = diam(domain);
  const double A = static_cast<double>(j) * (params.q - 1.0) / params.q;
  const double T = std::pow(static_cast<double>(j), params.q - 1.0) * params.structure_constant() / (2.0 * D);
  ScalarField psi = radial_quadratic_field(xi0, A, 0.0, T, params);
  return {"psi_" + std::to_string(j), scaled(psi, -1.0), 0.0, 1.0};
}

/// Default probe set: distance-type functions and two ψ_j restrictions. For
/// q < 2 a steep distance probe -20 |ξ - ξ0|^{1/2} is added; it dominates the
/// data of the Petrovskii irregularity barrier near the origin.
inline std::vector<Probe> default_probes(const SpaceTimeDomain& domain, const SpaceTimePoint& xi0,
                                         const Params& params) {
  std::vector<Probe> out{distance_probe(xi0, 1.0, 1.0), psi_probe(domain, xi0, params, 1),
                         psi_probe(domain, xi0, params, 10)};
  if (params.q < 2.0) out.push_back(distance_probe(xi0, 20.0, 0.5));
  return out;
}

enum class Regularity { regular, irregular, indeterminate };

inline const char* to_string(Regularity r) {
  switch (r) {
    case Regularity::regular: return "regular";
    case Regularity::irregular: return "irregular";
    case Regularity::indeterminate: return "indeterminate";
  }
  return "?";
}

struct ClassifierThresholds {
  /// Gap (relative to the probe's data range near ξ0) accepted as attained.
  double regular_gap = 0.05;
  /// Gap (relative) that counts as a jump.
  double irregular_gap = 0.25;
  /// A persisting gap must not shrink below this fraction per refinement.
  double persist_ratio = 0.8;
  /// Gaps shrinking at least this fast per refinement count as attained once
  /// the finest one is below converging_gap.
  double converge_ratio = 0.75;
  double converging_gap = 0.15;
};

struct RegularityResult {
  Regularity verdict = Regularity::indeterminate;
  nlohmann::json evidence;
};

/// Upper Perron approximations for every probe; regular when all gaps at the
/// finest rung are small and not growing, or shrink geometrically; irregular
/// when some gap stays large over the last two refinements without shrinking
/// geometrically.
inline RegularityResult classify_regularity(const SpaceTimeDomain& domain, const SpaceTimePoint& xi0,
                                            const std::vector<Probe>& probes, const Params& params,
                                            const PerronOptions& opt, const ClassifierThresholds& th = {}) {
  if (domain.contains(xi0)) throw LabError(Errc::precondition, "classified point must lie on the domain boundary");
  RegularityResult res;
  res.evidence = nlohmann::json::object();
  res.evidence["point"] = to_json(xi0);
  res.evidence["ladder"] = opt.h_ladder;
  bool all_regular = !probes.empty();
  bool any_irregular = false;
  nlohmann::json pj = nlohmann::json::array();
  for (const auto& probe : probes) {
    std::vector<std::string> warnings;
    auto rungs = approximate_perron(domain, probe.f, PerronSide::upper, params, opt, &xi0, &warnings);
    std::vector<BoundaryLimit> limits;
    std::vector<double> gaps;
    // Data scale: oscillation of the probe over the sampled approach region.
    double scale = 0.0;
    for (const auto& rung : rungs) {
      const BoundaryLimit* prev = limits.empty() ? nullptr : &limits.back();
      limits.push_back(
          boundary_limit(rung, opt, probe.gamma, prev, probe.datum, parabolic_exponent(probe.gamma, params.q)));
      scale = std::max(scale, rung.solution.data_max - rung.solution.data_min);
    }
    if (!(scale > 0.0)) scale = 1.0;
    for (const auto& b : limits)
      gaps.push_back(b.conclusive ? std::max(std::abs(b.low - probe.datum), std::abs(b.high - probe.datum)) / scale
                                  : std::numeric_limits<double>::quiet_NaN());
    std::string status = "indeterminate";
    const std::size_t m = gaps.size();
    const bool usable = m >= 2 && std::isfinite(gaps[m - 1]) && std::isfinite(gaps[m - 2]);
    if (usable) {
      const double g1 = gaps[m - 2], g2 = gaps[m - 1];
      if (g2 <= th.regular_gap && g2 <= g1 * (1.0 + 1e-9) + 0.25 * th.regular_gap) status = "attained";
      bool converging = g2 <= th.converging_gap && g2 <= th.converge_ratio * g1;
      if (m >= 3 && std::isfinite(gaps[m - 3])) converging = converging && g1 <= th.converge_ratio * gaps[m - 3];
      if (converging) status = "attained";
      bool persists = g1 >= th.irregular_gap && g2 >= th.irregular_gap && g2 >= th.persist_ratio * g1;
      if (m >= 3 && std::isfinite(gaps[m - 3]))
        persists = persists && gaps[m - 3] >= th.irregular_gap && g1 >= th.persist_ratio * gaps[m - 3];
      if (persists) status = "jump";
    }
    if (status != "attained") all_regular = false;
    if (status == "jump") any_irregular = true;
    nlohmann::json lj = nlohmann::json::array();
    for (const auto& b : limits) lj.push_back(b.to_json());
    pj.push_back({{"probe", probe.name}, {"datum", probe.datum}, {"scale", scale}, {"limits", lj}, {"gaps", gaps},
                  {"status", status}, {"warnings", warnings}});
  }
  res.evidence["probes"] = pj;
  if (any_irregular) {
    res.verdict = Regularity::irregular;
  } else if (all_regular) {
    res.verdict = Regularity::regular;
  }
  res.evidence["verdict"] = to_string(res.verdict);
  return res;
}

}  // namespace pqlab
