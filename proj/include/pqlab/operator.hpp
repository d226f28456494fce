#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "geometry.hpp"
#include "params.hpp"

namespace pqlab {

/// Pointwise derivative data of a field: value, spatial gradient and
/// Hessian, time derivative.
struct JetValue {
  double value = 0.0;
  Vec grad;
  Mat hess;
  double dt = 0.0;
};

/// Evaluable space-time function. `jet` is optional; fields without it go
/// through the finite-difference path. `defined` is optional and marks where
/// the formula may be evaluated at all (used by stencil checks).
struct ScalarField {
  std::function<double(const SpaceTimePoint&)> value;
  std::function<JetValue(const SpaceTimePoint&)> jet;
  std::function<bool(const SpaceTimePoint&)> defined;

  double operator()(const SpaceTimePoint& p) const { return value(p); }
  bool has_derivatives() const { return static_cast<bool>(jet); }
  bool is_defined(const SpaceTimePoint& p) const { return !defined || defined(p); }
};

/// Builds a field from separately supplied derivative callbacks.
inline ScalarField make_field(std::function<double(const SpaceTimePoint&)> value,
                              std::function<Vec(const SpaceTimePoint&)> gradient,
                              std::function<Mat(const SpaceTimePoint&)> hessian,
                              std::function<double(const SpaceTimePoint&)> time_derivative) {
  ScalarField f;
  f.value = value;
  if (gradient && hessian && time_derivative) {
    f.jet = [value, gradient, hessian, time_derivative](const SpaceTimePoint& p) {
      return JetValue{value(p), gradient(p), hessian(p), time_derivative(p)};
    };
  }
  return f;
}

inline ScalarField constant_field(double c, int n) {
  ScalarField f;
  f.value = [c](const SpaceTimePoint&) { return c; };
  f.jet = [c, n](const SpaceTimePoint&) { return JetValue{c, Vec::Zero(n), Mat::Zero(n, n), 0.0}; };
  return f;
}

/// Drops analytic derivatives, forcing the finite-difference path.
inline ScalarField value_only(const ScalarField& f) {
  ScalarField g;
  g.value = f.value;
  g.defined = f.defined;
  return g;
}

/// c * f.
inline ScalarField scaled(const ScalarField& f, double c) {
  ScalarField g;
  g.value = [f, c](const SpaceTimePoint& p) { return c * f.value(p); };
  g.defined = f.defined;
  if (f.jet) {
    g.jet = [f, c](const SpaceTimePoint& p) {
      JetValue j = f.jet(p);
      return JetValue{c * j.value, c * j.grad, c * j.hess, c * j.dt};
    };
  }
  return g;
}

/// Value, gradient and Hessian of |x - x0|^alpha. At x = x0 the gradient is
/// zero (alpha > 1) and the Hessian is reported as zero.
inline JetValue radial_power_jet(const Vec& x, const Vec& x0, double alpha) {
  const Eigen::Index n = x.size();
  JetValue j;
  const Vec y = x - x0;
  const double r = y.norm();
  j.grad = Vec::Zero(n);
  j.hess = Mat::Zero(n, n);
  if (r == 0.0) {
    j.value = 0.0;
    return j;
  }
  j.value = std::pow(r, alpha);
  const double rm2 = std::pow(r, alpha - 2.0);
  j.grad = alpha * rm2 * y;
  const Vec e = y / r;
  j.hess = alpha * rm2 * (Mat::Identity(n, n) + (alpha - 2.0) * e * e.transpose());
  return j;
}

/// F(eta, X) = |eta|^{q-2} (Tr X + (p-2) <X eta, eta>/|eta|^2), X symmetrized.
inline double eval_F(const Vec& eta, const Mat& X, const Params& params) {
  const double g2 = eta.squaredNorm();
  if (!(g2 > 0.0)) throw LabError(Errc::singular_gradient, "F is undefined at eta = 0");
  const Mat S = 0.5 * (X + X.transpose());
  const double normal = eta.dot(S * eta) / g2;
  return std::pow(g2, 0.5 * (params.q - 2.0)) * (S.trace() + (params.p - 2.0) * normal);
}

inline double delta_pq(const ScalarField& field, const SpaceTimePoint& p, const Params& params) {
  if (!field.has_derivatives()) throw LabError(Errc::needs_derivatives, "field has no analytic derivatives");
  JetValue j = field.jet(p);
  return eval_F(j.grad, j.hess, params);
}

/// Central-difference jet of a value-only field with step h in every
/// coordinate, time included.
inline JetValue fd_jet(const ScalarField& field, const SpaceTimePoint& p, double h) {
  if (!(h > 0.0)) throw LabError(Errc::invalid_params, "finite-difference step must be positive");
  const int n = p.dim();
  auto at = [&](const Vec& x, double t) {
    SpaceTimePoint q{x, t};
    if (!field.is_defined(q)) throw LabError(Errc::out_of_domain, "finite-difference stencil leaves the field domain");
    return field.value(q);
  };
  JetValue j;
  j.value = at(p.x, p.t);
  j.grad = Vec::Zero(n);
  j.hess = Mat::Zero(n, n);
  std::vector<double> plus(n), minus(n);
  for (int i = 0; i < n; ++i) {
    Vec xp = p.x, xm = p.x;
    xp(i) += h;
    xm(i) -= h;
    plus[i] = at(xp, p.t);
    minus[i] = at(xm, p.t);
    j.grad(i) = (plus[i] - minus[i]) / (2.0 * h);
    j.hess(i, i) = (plus[i] - 2.0 * j.value + minus[i]) / (h * h);
  }
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      Vec a = p.x, b = p.x, c = p.x, d = p.x;
      a(i) += h, a(k) += h;
      b(i) += h, b(k) -= h;
      c(i) -= h, c(k) += h;
      d(i) -= h, d(k) -= h;
      const double v = (at(a, p.t) - at(b, p.t) - at(c, p.t) + at(d, p.t)) / (4.0 * h * h);
      j.hess(i, k) = v;
      j.hess(k, i) = v;
    }
  }
  j.dt = (at(p.x, p.t + h) - at(p.x, p.t - h)) / (2.0 * h);
  return j;
}

/// Regularized operator value used where the gradient may vanish: the
/// prefactor is max(|eta|, eps)^{q-2} and the normalization uses |eta|^2 + eps^2.
inline double eval_F_regularized(const Vec& eta, const Mat& X, const Params& params, double eps) {
  const double g = eta.norm();
  if (g > eps) return eval_F(eta, X, params);
  const Mat S = 0.5 * (X + X.transpose());
  const double normal = eta.dot(S * eta) / (g * g + eps * eps);
  return std::pow(std::max(g, eps), params.q - 2.0) * (S.trace() + (params.p - 2.0) * normal);
}

inline double delta_pq_fd(const ScalarField& field, const SpaceTimePoint& p, const Params& params, double h,
                          double eps_grad = 1e-8) {
  JetValue j = fd_jet(value_only(field), p, h);
  return eval_F_regularized(j.grad, j.hess, params, eps_grad);
}

/// Closed form of the operator on v = C |x|^{q/(q-1)} t^beta:
/// (C q/(q-1))^{q-1} (n + (p-q)/(q-1)) t^{beta (q-1)}.
inline double prototype_delta_pq(double C, double beta, const Params& params, double t) {
  params.validate();
  if (!(C > 0.0)) throw LabError(Errc::invalid_params, "prototype constant C must be positive");
  if (!(t > 0.0)) throw LabError(Errc::invalid_params, "prototype closed form needs t > 0");
  const double q = params.q;
  return std::pow(C * params.radial_exponent(), q - 1.0) * params.structure_constant() *
         std::pow(t, beta * (q - 1.0));
}

/// v = C |x|^{q/(q-1)} t^beta on t > 0, with analytic derivatives.
inline ScalarField make_prototype_field(double C, double beta, const Params& params) {
  const double alpha = params.radial_exponent();
  const Vec zero = Vec::Zero(params.n);
  ScalarField f;
  f.value = [=](const SpaceTimePoint& p) { return C * std::pow(p.x.norm(), alpha) * std::pow(p.t, beta); };
  f.jet = [=](const SpaceTimePoint& p) {
    JetValue r = radial_power_jet(p.x, zero, alpha);
    const double tb = std::pow(p.t, beta);
    JetValue j;
    j.value = C * r.value * tb;
    j.grad = C * tb * r.grad;
    j.hess = C * tb * r.hess;
    j.dt = C * r.value * beta * std::pow(p.t, beta - 1.0);
    return j;
  };
  f.defined = [](const SpaceTimePoint& p) { return p.t > 0.0; };
  return f;
}

struct ResidualOptions {
  double eps_grad = 1e-8;
  /// Step for the finite-difference path when the field has no jet.
  double fd_h = 1e-4;
  /// Coefficient a of the multiplied equation a d_t u = Delta_pq u.
  double time_coefficient = 1.0;
};

struct Residual {
  /// a d_t u - Delta_pq u, or a d_t u alone on the singular branch.
  double value = 0.0;
  bool singular = false;
  double dt = 0.0;
  double grad_norm = 0.0;
};

/// Parabolic residual a d_t u - Delta_pq u. At |grad| <= eps_grad only the
/// time derivative is returned and the singular flag is set.
inline Residual residual(const ScalarField& field, const SpaceTimePoint& p, const Params& params,
                         const ResidualOptions& opt = {}) {
  JetValue j = field.has_derivatives() ? field.jet(p) : fd_jet(field, p, opt.fd_h);
  Residual r;
  r.dt = j.dt;
  r.grad_norm = j.grad.norm();
  if (r.grad_norm <= opt.eps_grad) {
    r.singular = true;
    r.value = opt.time_coefficient * j.dt;
    return r;
  }
  r.value = opt.time_coefficient * j.dt - eval_F(j.grad, j.hess, params);
  return r;
}

/// Residual of the multiplied equation a d_t u - Delta_pq u.
inline Residual multiplied_residual(const ScalarField& field, const SpaceTimePoint& p, const Params& params, double a,
                                    ResidualOptions opt = {}) {
  opt.time_coefficient = a;
  return residual(field, p, params, opt);
}

}  // namespace pqlab
