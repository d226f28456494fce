#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "geometry.hpp"

namespace pqlab {

using Rng = std::mt19937_64;

/// Uniform point of the bounding box, optionally enlarged by `grow` times
/// its extent on every side.
inline SpaceTimePoint sample_in_box(const Box& box, Rng& rng, double grow = 0.0) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int n = box.dim();
  SpaceTimePoint p{Vec(n), 0.0};
  for (int i = 0; i < n; ++i) {
    const double w = box.hi(i) - box.lo(i);
    p.x(i) = box.lo(i) - grow * w + (1.0 + 2.0 * grow) * w * U(rng);
  }
  const double w = box.t_hi - box.t_lo;
  p.t = box.t_lo - grow * w + (1.0 + 2.0 * grow) * w * U(rng);
  return p;
}

/// Rejection sampling of domain points. Returns fewer than `count` points
/// when the acceptance rate is too low for `max_tries`.
inline std::vector<SpaceTimePoint> sample_interior(const SpaceTimeDomain& domain, std::size_t count, Rng& rng,
                                                   std::size_t max_tries = 0) {
  if (max_tries == 0) max_tries = 1000 * count + 10000;
  std::vector<SpaceTimePoint> out;
  out.reserve(count);
  for (std::size_t tries = 0; out.size() < count && tries < max_tries; ++tries) {
    SpaceTimePoint p = sample_in_box(domain.bounding_box(), rng);
    if (domain.contains(p)) out.push_back(std::move(p));
  }
  return out;
}

/// Point on the segment [inside, outside] where membership changes,
/// located by bisection. The returned point is the last one still inside.
inline SpaceTimePoint bisect_boundary(const SpaceTimeDomain& domain, SpaceTimePoint inside, SpaceTimePoint outside,
                                      int iterations = 60) {
  for (int i = 0; i < iterations; ++i) {
    SpaceTimePoint mid = (inside + outside) * 0.5;
    if (domain.contains(mid))
      inside = mid;
    else
      outside = mid;
  }
  return inside;
}

/// Boundary points found by bisecting between interior samples and points
/// of a slightly enlarged bounding box that fail membership.
inline std::vector<SpaceTimePoint> sample_boundary(const SpaceTimeDomain& domain, std::size_t count, Rng& rng,
                                                   std::size_t max_tries = 0) {
  if (max_tries == 0) max_tries = 1000 * count + 10000;
  std::vector<SpaceTimePoint> out;
  out.reserve(count);
  std::optional<SpaceTimePoint> anchor;
  for (std::size_t tries = 0; out.size() < count && tries < max_tries; ++tries) {
    SpaceTimePoint a = sample_in_box(domain.bounding_box(), rng);
    if (!domain.contains(a)) continue;
    SpaceTimePoint b = sample_in_box(domain.bounding_box(), rng, 0.05);
    if (domain.contains(b)) continue;
    out.push_back(bisect_boundary(domain, a, b));
  }
  return out;
}

/// Uniform direction on the unit sphere of R^{n+1}.
inline SpaceTimePoint random_direction(int n, Rng& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec v(n + 1);
  do {
    for (int i = 0; i <= n; ++i) v(i) = N(rng);
  } while (v.norm() < 1e-12);
  v /= v.norm();
  return SpaceTimePoint::from_stacked(v);
}

struct ApproachShell {
  double radius = 0.0;
  std::vector<SpaceTimePoint> points;
};

struct ApproachOptions {
  int first_shell = 1;
  int last_shell = 40;
  int points_per_shell = 4;
  int tries_per_shell = 400;
};

/// Domain points at geometric distances 2^{-m} from a boundary point.
///
/// Each shell first tries isotropic boxes; if the domain is too thin there,
/// it retries with boxes whose time (then space) half-width is r^k for
/// increasing k, which reaches cusp-shaped regions such as
/// {t > -theta |x|^l}. Shells that yield no point are omitted.
inline std::vector<ApproachShell> approach_shells(const SpaceTimeDomain& domain, const SpaceTimePoint& xi,
                                                  Rng& rng, const ApproachOptions& opt = {}) {
  static constexpr double kAspect[] = {1.0, 2.0, 3.0, 4.0, 6.0, 8.0};
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int n = xi.dim();
  std::vector<ApproachShell> shells;
  for (int m = opt.first_shell; m <= opt.last_shell; ++m) {
    const double r = std::ldexp(1.0, -m);
    ApproachShell shell{r, {}};
    for (int mode = 0; mode < 2 * 6 && shell.points.empty(); ++mode) {
      const double k = kAspect[mode % 6];
      if (mode == 6) continue;  // isotropic case already tried
      const double space_w = mode < 6 ? r : std::pow(r, k);
      const double time_w = mode < 6 ? std::pow(r, k) : r;
      for (int tries = 0; tries < opt.tries_per_shell && static_cast<int>(shell.points.size()) < opt.points_per_shell;
           ++tries) {
        SpaceTimePoint p = xi;
        for (int i = 0; i < n; ++i) p.x(i) += space_w * U(rng);
        p.t += time_w * U(rng);
        if (domain.contains(p)) shell.points.push_back(p);
      }
    }
    if (!shell.points.empty()) shells.push_back(std::move(shell));
  }
  return shells;
}

/// Seed for worker `index` derived from a base seed (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace pqlab
