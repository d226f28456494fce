#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace pqlab {

/// Error categories raised by the library. Each maps onto one failure mode
/// a caller can reasonably react to (the CLI maps them onto exit codes).
enum class Errc {
  invalid_params,
  invalid_domain,
  invalid_scale,
  out_of_theorem_range,
  unbounded_domain,
  singular_gradient,
  needs_derivatives,
  out_of_domain,
  unsupported_exponent,
  pole_tangency,
  cfl_violation,
  degenerate_grid,
  precondition,
  invalid_config,
  parse_error,
};

inline const char* to_string(Errc e) {
  switch (e) {
    case Errc::invalid_params: return "invalid-params";
    case Errc::invalid_domain: return "invalid-domain";
    case Errc::invalid_scale: return "invalid-scale";
    case Errc::out_of_theorem_range: return "parameter-out-of-theorem-range";
    case Errc::unbounded_domain: return "unbounded-domain";
    case Errc::singular_gradient: return "singular-gradient";
    case Errc::needs_derivatives: return "needs-derivatives";
    case Errc::out_of_domain: return "out-of-domain";
    case Errc::unsupported_exponent: return "unsupported-exponent";
    case Errc::pole_tangency: return "pole-tangency";
    case Errc::cfl_violation: return "cfl-violation";
    case Errc::degenerate_grid: return "degenerate-grid";
    case Errc::precondition: return "precondition";
    case Errc::invalid_config: return "invalid-config";
    case Errc::parse_error: return "parse-error";
  }
  return "unknown";
}

class LabError : public std::runtime_error {
 public:
  LabError(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Exponents of the equation  d_t u = |Du|^{q-2} (Lap u + (p-2) Lap_inf^N u)
/// together with the space dimension.
struct Params {
  double p = 2.0;
  double q = 2.0;
  int n = 1;

  Params() = default;
  Params(double p_, double q_, int n_) : p(p_), q(q_), n(n_) { validate(); }

  void validate() const {
    if (!(p > 1.0) || !std::isfinite(p)) throw LabError(Errc::invalid_params, "p must be > 1");
    if (!(q > 1.0) || !std::isfinite(q)) throw LabError(Errc::invalid_params, "q must be > 1");
    if (n < 1) throw LabError(Errc::invalid_params, "n must be >= 1");
  }

  /// q/(q-1): the radial exponent of the prototype solutions.
  double radial_exponent() const { return q / (q - 1.0); }

  /// n + (p-q)/(q-1). Strictly positive for every admissible (p, q, n).
  double structure_constant() const { return n + (p - q) / (q - 1.0); }

  bool operator==(const Params&) const = default;
};

}  // namespace pqlab
