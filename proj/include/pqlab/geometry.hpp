#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "params.hpp"

namespace pqlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point (x, t) of R^n x R.
struct SpaceTimePoint {
  Vec x;
  double t = 0.0;

  SpaceTimePoint() = default;
  SpaceTimePoint(Vec x_, double t_) : x(std::move(x_)), t(t_) {}
  SpaceTimePoint(std::initializer_list<double> xs, double t_) : x(static_cast<Eigen::Index>(xs.size())), t(t_) {
    Eigen::Index i = 0;
    for (double v : xs) x(i++) = v;
  }

  int dim() const { return static_cast<int>(x.size()); }

  /// Coordinates flattened as (x_1, ..., x_n, t).
  Vec stacked() const {
    Vec v(x.size() + 1);
    v.head(x.size()) = x;
    v(x.size()) = t;
    return v;
  }

  static SpaceTimePoint from_stacked(const Vec& v) {
    return {Vec(v.head(v.size() - 1)), v(v.size() - 1)};
  }

  SpaceTimePoint operator+(const SpaceTimePoint& o) const { return {Vec(x + o.x), t + o.t}; }
  SpaceTimePoint operator-(const SpaceTimePoint& o) const { return {Vec(x - o.x), t - o.t}; }
  SpaceTimePoint operator*(double a) const { return {Vec(a * x), a * t}; }
  double norm() const { return std::sqrt(x.squaredNorm() + t * t); }
};

inline SpaceTimePoint origin(int n) { return {Vec::Zero(n), 0.0}; }

inline double distance(const SpaceTimePoint& a, const SpaceTimePoint& b) { return (a - b).norm(); }

/// Axis-aligned box in R^{n+1}; the time interval is kept separately.
struct Box {
  Vec lo;
  Vec hi;
  double t_lo = 0.0;
  double t_hi = 0.0;

  int dim() const { return static_cast<int>(lo.size()); }

  bool bounded() const {
    return lo.allFinite() && hi.allFinite() && std::isfinite(t_lo) && std::isfinite(t_hi);
  }

  bool contains(const SpaceTimePoint& p, double slack = 0.0) const {
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (p.x(i) < lo(i) - slack || p.x(i) > hi(i) + slack) return false;
    return p.t >= t_lo - slack && p.t <= t_hi + slack;
  }

  double diagonal() const {
    double dt = t_hi - t_lo;
    return std::sqrt((hi - lo).squaredNorm() + dt * dt);
  }

  SpaceTimePoint lower() const { return {lo, t_lo}; }
  SpaceTimePoint upper() const { return {hi, t_hi}; }

  Box intersect(const Box& o) const {
    Box b{lo.cwiseMax(o.lo), hi.cwiseMin(o.hi), std::max(t_lo, o.t_lo), std::min(t_hi, o.t_hi)};
    return b;
  }

  static Box around(const SpaceTimePoint& c, double r) {
    Vec d = Vec::Constant(c.x.size(), r);
    return {Vec(c.x - d), Vec(c.x + d), c.t - r, c.t + r};
  }
};

enum class DomainKind { cylinder, petrovskii_cusp, north_cusp, ball_complement_cut, custom };

inline const char* to_string(DomainKind k) {
  switch (k) {
    case DomainKind::cylinder: return "cylinder";
    case DomainKind::petrovskii_cusp: return "petrovskii_cusp";
    case DomainKind::north_cusp: return "north_cusp";
    case DomainKind::ball_complement_cut: return "ball_complement_cut";
    case DomainKind::custom: return "custom";
  }
  return "custom";
}

inline nlohmann::json vec_to_json(const Vec& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Vec vec_from_json(const nlohmann::json& j) {
  auto xs = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

inline nlohmann::json to_json(const SpaceTimePoint& p) { return {{"x", vec_to_json(p.x)}, {"t", p.t}}; }

inline SpaceTimePoint point_from_json(const nlohmann::json& j) {
  return {vec_from_json(j.at("x")), j.at("t").get<double>()};
}

inline nlohmann::json to_json(const Box& b) {
  return {{"lo", vec_to_json(b.lo)}, {"hi", vec_to_json(b.hi)}, {"t_lo", b.t_lo}, {"t_hi", b.t_hi}};
}

inline Box box_from_json(const nlohmann::json& j) {
  return {vec_from_json(j.at("lo")), vec_from_json(j.at("hi")), j.at("t_lo").get<double>(),
          j.at("t_hi").get<double>()};
}

/// Open subset of space-time given by a membership predicate and a bounding box.
///
/// Named kinds carry their defining parameters; `description()` is the JSON
/// form {kind, parameters, bbox} and is enough to rebuild the domain with
/// `domain_from_json`. Values are immutable after construction.
class SpaceTimeDomain {
 public:
  using Predicate = std::function<bool(const SpaceTimePoint&)>;

  SpaceTimeDomain(DomainKind kind, int n, Box bbox, Predicate member, nlohmann::json parameters)
      : kind_(kind), n_(n), bbox_(std::move(bbox)), member_(std::move(member)), parameters_(std::move(parameters)) {}

  bool contains(const SpaceTimePoint& p) const { return bbox_.contains(p) && member_(p); }

  DomainKind kind() const { return kind_; }
  int dim() const { return n_; }
  const Box& bounding_box() const { return bbox_; }
  const nlohmann::json& parameters() const { return parameters_; }
  double parameter(const std::string& key) const { return parameters_.at(key).get<double>(); }

  nlohmann::json description() const {
    return {{"kind", to_string(kind_)}, {"n", n_}, {"parameters", parameters_}, {"bbox", to_json(bbox_)}};
  }

 private:
  DomainKind kind_;
  int n_;
  Box bbox_;
  Predicate member_;
  nlohmann::json parameters_;
};

// --- named domains ---------------------------------------------------------

/// B_radius(center) x (t1, t2).
inline SpaceTimeDomain make_cylinder(const Vec& center, double radius, double t1, double t2) {
  if (!(radius > 0.0)) throw LabError(Errc::invalid_domain, "cylinder radius must be positive");
  if (!(t1 < t2)) throw LabError(Errc::invalid_domain, "cylinder needs t1 < t2");
  if (center.size() < 1) throw LabError(Errc::invalid_domain, "cylinder needs n >= 1");
  Vec r = Vec::Constant(center.size(), radius);
  Box box{Vec(center - r), Vec(center + r), t1, t2};
  auto pred = [center, radius, t1, t2](const SpaceTimePoint& p) {
    return (p.x - center).norm() < radius && p.t > t1 && p.t < t2;
  };
  nlohmann::json par = {{"center", vec_to_json(center)}, {"radius", radius}, {"t1", t1}, {"t2", t2}};
  return {DomainKind::cylinder, static_cast<int>(center.size()), box, pred, par};
}

/// {|x| <= K (-t)^s, -1 < t < 0}. The origin is a boundary point.
///
/// Refuses parameters outside 1 < q < 2, 0 < s < 1/q: that is the range
/// where the origin is known to be irregular yet to admit a single barrier.
inline SpaceTimeDomain make_petrovskii_cusp(double K, double s, const Params& params) {
  params.validate();
  if (!(K > 0.0)) throw LabError(Errc::invalid_domain, "cusp constant K must be positive");
  if (!(params.q > 1.0 && params.q < 2.0))
    throw LabError(Errc::out_of_theorem_range, "Petrovskii cusp requires 1 < q < 2");
  if (!(s > 0.0 && s < 1.0 / params.q))
    throw LabError(Errc::out_of_theorem_range, "Petrovskii cusp requires 0 < s < 1/q");
  const int n = params.n;
  Box box{Vec::Constant(n, -K), Vec::Constant(n, K), -1.0, 0.0};
  auto pred = [K, s](const SpaceTimePoint& p) {
    return p.t > -1.0 && p.t < 0.0 && p.x.norm() <= K * std::pow(-p.t, s);
  };
  nlohmann::json par = {{"K", K}, {"s", s}, {"q", params.q}};
  return {DomainKind::petrovskii_cusp, n, box, pred, par};
}

/// {|x - x0| < radius, t0 - depth < t < t0, t - t0 > -theta |x - x0|^l}:
/// a domain lying above a downward cusp with vertex (x0, t0), cut to a
/// bounded neighbourhood.
inline SpaceTimeDomain make_north_cusp(const SpaceTimePoint& vertex, double theta, double l, double radius = 1.0,
                                       double depth = 1.0) {
  if (!(theta > 0.0) || !(l > 0.0)) throw LabError(Errc::invalid_domain, "north cusp needs theta > 0 and l > 0");
  if (!(radius > 0.0) || !(depth > 0.0)) throw LabError(Errc::invalid_domain, "north cusp needs a positive cut");
  const Vec x0 = vertex.x;
  const double t0 = vertex.t;
  Vec r = Vec::Constant(x0.size(), radius);
  Box box{Vec(x0 - r), Vec(x0 + r), t0 - depth, t0};
  auto pred = [x0, t0, theta, l, radius, depth](const SpaceTimePoint& p) {
    double d = (p.x - x0).norm();
    return d < radius && p.t < t0 && p.t > t0 - depth && p.t - t0 > -theta * std::pow(d, l);
  };
  nlohmann::json par = {{"vertex", to_json(vertex)}, {"theta", theta}, {"l", l}, {"radius", radius}, {"depth", depth}};
  return {DomainKind::north_cusp, vertex.dim(), box, pred, par};
}

/// Points of `cut` outside the closed space-time ball B_R1(xi1).
inline SpaceTimeDomain make_ball_complement_cut(const SpaceTimePoint& xi1, double R1, const Box& cut) {
  if (!(R1 > 0.0)) throw LabError(Errc::invalid_domain, "exterior ball radius must be positive");
  if (cut.dim() != xi1.dim()) throw LabError(Errc::invalid_domain, "cut box dimension mismatch");
  auto pred = [xi1, R1](const SpaceTimePoint& p) { return distance(p, xi1) > R1; };
  nlohmann::json par = {{"xi1", to_json(xi1)}, {"R1", R1}};
  return {DomainKind::ball_complement_cut, xi1.dim(), cut, pred, par};
}

/// Open axis-aligned box.
inline SpaceTimeDomain make_box(const Box& box) {
  auto pred = [box](const SpaceTimePoint& p) {
    for (Eigen::Index i = 0; i < box.lo.size(); ++i)
      if (!(p.x(i) > box.lo(i) && p.x(i) < box.hi(i))) return false;
    return p.t > box.t_lo && p.t < box.t_hi;
  };
  return {DomainKind::custom, box.dim(), box, pred, {{"shape", "box"}}};
}

/// Open Euclidean ball in R^{n+1}.
inline SpaceTimeDomain make_spacetime_ball(const SpaceTimePoint& center, double radius) {
  if (!(radius > 0.0)) throw LabError(Errc::invalid_domain, "ball radius must be positive");
  auto pred = [center, radius](const SpaceTimePoint& p) { return distance(p, center) < radius; };
  return {DomainKind::custom, center.dim(), Box::around(center, radius), pred,
          {{"shape", "ball"}, {"center", to_json(center)}, {"radius", radius}}};
}

inline SpaceTimeDomain intersect(const SpaceTimeDomain& a, const SpaceTimeDomain& b) {
  if (a.dim() != b.dim()) throw LabError(Errc::invalid_domain, "intersecting domains of different dimension");
  Box box = a.bounding_box().intersect(b.bounding_box());
  auto pred = [a, b](const SpaceTimePoint& p) { return a.contains(p) && b.contains(p); };
  return {DomainKind::custom, a.dim(), box, pred,
          {{"shape", "intersection"}, {"parts", nlohmann::json::array({a.description(), b.description()})}}};
}

/// {(a x, t) : (x, t) in domain}.
inline SpaceTimeDomain scale_domain(const SpaceTimeDomain& domain, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw LabError(Errc::invalid_scale, "scale factor must be positive");
  const auto& par = domain.parameters();
  switch (domain.kind()) {
    case DomainKind::cylinder:
      return make_cylinder(a * vec_from_json(par.at("center")), a * par.at("radius").get<double>(),
                           par.at("t1").get<double>(), par.at("t2").get<double>());
    case DomainKind::petrovskii_cusp: {
      Params pr(2.0, par.at("q").get<double>(), domain.dim());
      return make_petrovskii_cusp(a * par.at("K").get<double>(), par.at("s").get<double>(), pr);
    }
    case DomainKind::north_cusp: {
      SpaceTimePoint v = point_from_json(par.at("vertex"));
      double l = par.at("l").get<double>();
      return make_north_cusp({Vec(a * v.x), v.t}, par.at("theta").get<double>() * std::pow(a, -l), l,
                             a * par.at("radius").get<double>(), par.at("depth").get<double>());
    }
    default: break;
  }
  const Box& b = domain.bounding_box();
  Box box{Vec(a * b.lo), Vec(a * b.hi), b.t_lo, b.t_hi};
  auto pred = [domain, a](const SpaceTimePoint& p) { return domain.contains({Vec(p.x / a), p.t}); };
  return {DomainKind::custom, domain.dim(), box, pred,
          {{"shape", "scaled"}, {"a", a}, {"base", domain.description()}}};
}

inline SpaceTimeDomain domain_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto& par = j.at("parameters");
  if (kind == "cylinder")
    return make_cylinder(vec_from_json(par.at("center")), par.at("radius").get<double>(), par.at("t1").get<double>(),
                         par.at("t2").get<double>());
  if (kind == "petrovskii_cusp") {
    int n = j.at("n").get<int>();
    return make_petrovskii_cusp(par.at("K").get<double>(), par.at("s").get<double>(),
                                Params(2.0, par.at("q").get<double>(), n));
  }
  if (kind == "north_cusp")
    return make_north_cusp(point_from_json(par.at("vertex")), par.at("theta").get<double>(), par.at("l").get<double>(),
                           par.value("radius", 1.0), par.value("depth", 1.0));
  if (kind == "ball_complement_cut")
    return make_ball_complement_cut(point_from_json(par.at("xi1")), par.at("R1").get<double>(),
                                    box_from_json(j.at("bbox")));
  if (kind == "custom") {
    const std::string shape = par.value("shape", "");
    if (shape == "box") return make_box(box_from_json(j.at("bbox")));
    if (shape == "ball") return make_spacetime_ball(point_from_json(par.at("center")), par.at("radius").get<double>());
    if (shape == "intersection")
      return intersect(domain_from_json(par.at("parts").at(0)), domain_from_json(par.at("parts").at(1)));
    if (shape == "scaled") return scale_domain(domain_from_json(par.at("base")), par.at("a").get<double>());
    throw LabError(Errc::invalid_domain, "custom domain shape '" + shape + "' cannot be rebuilt from JSON");
  }
  throw LabError(Errc::invalid_domain, "unknown domain kind '" + kind + "'");
}

/// Euclidean diameter bound in R^{n+1}: the bounding-box diagonal.
inline double diam(const SpaceTimeDomain& domain) {
  const Box& b = domain.bounding_box();
  if (!b.bounded()) throw LabError(Errc::unbounded_domain, "domain has an unbounded bounding box");
  return b.diagonal();
}

// --- boundary classification ----------------------------------------------

enum class CylinderRegion { inside, initial, lateral, top, outside };

inline bool is_parabolic(CylinderRegion r) { return r == CylinderRegion::initial || r == CylinderRegion::lateral; }

/// Locates a point relative to a cylinder B x (t1, t2). Edge points on
/// dB x {t1} and dB x {t2} belong to the lateral (parabolic) part.
inline CylinderRegion classify_cylinder(const SpaceTimeDomain& cyl, const SpaceTimePoint& p, double tol = 1e-12) {
  if (cyl.kind() != DomainKind::cylinder) throw LabError(Errc::invalid_domain, "not a cylinder");
  const auto& par = cyl.parameters();
  const double r = (p.x - vec_from_json(par.at("center"))).norm();
  const double R = par.at("radius").get<double>();
  const double t1 = par.at("t1").get<double>();
  const double t2 = par.at("t2").get<double>();
  const bool in_ball = r < R - tol;
  const bool on_sphere = std::abs(r - R) <= tol;
  const bool in_time = p.t > t1 + tol && p.t < t2 - tol;
  const bool on_t1 = std::abs(p.t - t1) <= tol;
  const bool on_t2 = std::abs(p.t - t2) <= tol;
  if (in_ball && in_time) return CylinderRegion::inside;
  if (on_sphere && (in_time || on_t1 || on_t2)) return CylinderRegion::lateral;
  if (in_ball && on_t1) return CylinderRegion::initial;
  if (in_ball && on_t2) return CylinderRegion::top;
  return CylinderRegion::outside;
}

enum class PointClass { inside, boundary, outside };

/// Predicate domains carry no exact boundary: a point is "boundary" when
/// membership flips somewhere on the axis and diagonal stencil of size eps.
inline PointClass classify_point(const SpaceTimeDomain& domain, const SpaceTimePoint& p, double eps) {
  const bool self = domain.contains(p);
  const int d = p.dim() + 1;
  const Vec c = p.stacked();
  auto probe = [&](const Vec& offset) { return domain.contains(SpaceTimePoint::from_stacked(c + offset)) != self; };
  for (int i = 0; i < d; ++i) {
    for (double sgn : {-1.0, 1.0}) {
      Vec e = Vec::Zero(d);
      e(i) = sgn * eps;
      if (probe(e)) return PointClass::boundary;
    }
  }
  for (int i = 0; i < d; ++i)
    for (int k = i + 1; k < d; ++k)
      for (double si : {-1.0, 1.0})
        for (double sk : {-1.0, 1.0}) {
          Vec e = Vec::Zero(d);
          e(i) = si * eps / std::sqrt(2.0);
          e(k) = sk * eps / std::sqrt(2.0);
          if (probe(e)) return PointClass::boundary;
        }
  return self ? PointClass::inside : PointClass::outside;
}

}  // namespace pqlab
