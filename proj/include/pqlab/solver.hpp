#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "operator.hpp"
#include "params.hpp"

namespace pqlab {

/// Uniform space-time grid: spatial step h over the spatial part of `box`,
/// time step tau over [box.t_lo, box.t_hi]. tau = 0 means "largest stable".
struct GridSpec {
  double h = 0.1;
  double tau = 0.0;
  Box box;

  /// Grid over the bounding box of a domain.
  static GridSpec covering(const SpaceTimeDomain& d, double h, double tau = 0.0) {
    return {h, tau, d.bounding_box()};
  }
};

enum class Raster : std::uint8_t {
  /// Interior nodes: members whose whole stencil is made of members.
  inner,
  /// Interior nodes: members, or nodes with a member among their axis neighbours.
  outer,
};

enum class Extension : std::uint8_t {
  /// Boundary data evaluated at the node itself.
  evaluate,
  /// Off-domain nodes take the data at the crossing towards the nearest
  /// in-domain stencil node.
  nearest,
};

enum class EpsRule : std::uint8_t {
  /// eps = max(h, 1e-8).
  mesh,
  /// eps = max(h^{max(1, 1/(q-1))}, 1e-8): for q < 2 the clamped region
  /// around a flat spot shrinks to about one cell.
  flat_spot,
};

struct SchemeConfig {
  /// Gradient regularization; 0 selects it from `eps_rule`.
  double eps_grad = 0.0;
  EpsRule eps_rule = EpsRule::mesh;
  /// Max-norm radius of the direction stencil.
  int stencil_width = 1;
  double cfl = 0.2;
  /// Coefficient a of a d_t u = Delta_pq u.
  double time_coefficient = 1.0;
  Raster raster = Raster::inner;
  Extension extension = Extension::evaluate;
  std::size_t max_stored_levels = 64;
  /// Refuse user time steps above the stability bound.
  bool enforce_cfl = true;
};

enum class NodeType : std::uint8_t { exterior = 0, boundary = 1, interior = 2 };

/// Index arithmetic of the padded node array.
struct Lattice {
  int n = 1;
  double h = 0.1;
  int pad = 2;
  Vec origin;                      ///< coordinates of padded index 0
  std::vector<int> dims;           ///< padded sizes
  std::vector<std::ptrdiff_t> stride;
  std::size_t size = 0;

  Lattice() = default;
  Lattice(const Box& box, double h_, int pad_) : n(box.dim()), h(h_), pad(pad_) {
    if (!(h > 0.0)) throw LabError(Errc::degenerate_grid, "grid step must be positive");
    if (!box.bounded()) throw LabError(Errc::unbounded_domain, "grid box must be bounded");
    origin = box.lo - Vec::Constant(n, pad * h);
    dims.resize(n);
    stride.resize(n);
    size = 1;
    for (int i = 0; i < n; ++i) {
      const double cells = (box.hi(i) - box.lo(i)) / h;
      const int core = static_cast<int>(std::ceil(cells - 1e-9)) + 1;
      dims[i] = core + 2 * pad;
      stride[i] = static_cast<std::ptrdiff_t>(size);
      size *= static_cast<std::size_t>(dims[i]);
    }
    if (size > (std::size_t{1} << 28)) throw LabError(Errc::degenerate_grid, "grid too large");
  }

  void multi(std::size_t idx, int* out) const {
    for (int i = 0; i < n; ++i) {
      out[i] = static_cast<int>(idx % static_cast<std::size_t>(dims[i]));
      idx /= static_cast<std::size_t>(dims[i]);
    }
  }

  Vec coords(std::size_t idx) const {
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      x(i) = origin(i) + h * static_cast<double>(idx % static_cast<std::size_t>(dims[i]));
      idx /= static_cast<std::size_t>(dims[i]);
    }
    return x;
  }

  /// Distance in cells to the array edge.
  int edge_distance(std::size_t idx) const {
    int m[8];
    std::vector<int> big;
    int* k = m;
    if (n > 8) {
      big.resize(n);
      k = big.data();
    }
    multi(idx, k);
    int d = std::numeric_limits<int>::max();
    for (int i = 0; i < n; ++i) d = std::min({d, k[i], dims[i] - 1 - k[i]});
    return d;
  }

  std::ptrdiff_t offset(const std::vector<int>& v) const {
    std::ptrdiff_t o = 0;
    for (int i = 0; i < n; ++i) o += v[i] * stride[i];
    return o;
  }

  /// Padded index of the node nearest to x, or nullopt when outside.
  std::optional<std::size_t> nearest(const Vec& x) const {
    std::size_t idx = 0;
    for (int i = n - 1; i >= 0; --i) {
      const long k = std::lround((x(i) - origin(i)) / h);
      if (k < 0 || k >= dims[i]) return std::nullopt;
      idx = idx * static_cast<std::size_t>(dims[i]) + static_cast<std::size_t>(k);
    }
    return idx;
  }
};

/// A stencil direction with its orthogonal completion.
struct Direction {
  std::vector<int> v;
  double len2 = 1.0;
  std::ptrdiff_t offset = 0;
  std::vector<std::ptrdiff_t> perp_offset;
  std::vector<double> perp_len2;
};

/// Directions of the wide stencil. n = 1: the axis. n = 2: primitive integer
/// vectors of max-norm <= width, each paired with its rotation. n >= 3: axes
/// and face diagonals e_i +- e_j.
inline std::vector<Direction> make_directions(const Lattice& lat, int width) {
  const int n = lat.n;
  std::vector<std::vector<int>> vs;
  std::vector<std::vector<std::vector<int>>> perps;
  auto axis = [n](int i, int s = 1) {
    std::vector<int> e(n, 0);
    e[i] = s;
    return e;
  };
  if (n == 1) {
    vs.push_back({1});
    perps.push_back({});
  } else if (n == 2) {
    for (int a = 0; a <= width; ++a) {
      for (int b = -width; b <= width; ++b) {
        if (a == 0 && b <= 0) continue;
        if (std::gcd(a, std::abs(b)) != 1) continue;
        vs.push_back({a, b});
        perps.push_back({{-b, a}});
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      vs.push_back(axis(i));
      std::vector<std::vector<int>> pp;
      for (int k = 0; k < n; ++k)
        if (k != i) pp.push_back(axis(k));
      perps.push_back(pp);
    }
    if (width >= 1) {
      for (int i = 0; i < n; ++i) {
        for (int k = i + 1; k < n; ++k) {
          for (int s : {1, -1}) {
            std::vector<int> v(n, 0), w(n, 0);
            v[i] = 1, v[k] = s;
            w[i] = 1, w[k] = -s;
            std::vector<std::vector<int>> pp{w};
            for (int m = 0; m < n; ++m)
              if (m != i && m != k) pp.push_back(axis(m));
            vs.push_back(v);
            perps.push_back(pp);
          }
        }
      }
    }
  }
  std::vector<Direction> out;
  for (std::size_t d = 0; d < vs.size(); ++d) {
    Direction dir;
    dir.v = vs[d];
    dir.len2 = 0.0;
    for (int c : dir.v) dir.len2 += c * c;
    dir.offset = lat.offset(dir.v);
    for (const auto& w : perps[d]) {
      double l2 = 0.0;
      for (int c : w) l2 += c * c;
      dir.perp_offset.push_back(lat.offset(w));
      dir.perp_len2.push_back(l2);
    }
    out.push_back(std::move(dir));
  }
  return out;
}

/// Everything the node update needs, fixed for a solve.
struct SchemeContext {
  Lattice lat;
  Params params;
  std::vector<Direction> dirs;
  double eps = 1e-8;
  double g_max = std::numeric_limits<double>::infinity();
  double tau = 0.0;
  double time_coefficient = 1.0;
  int reach = 1;  ///< largest stencil offset in cells
};

/// Explicit update at one node of the padded array:
///   u + (tau/a) P(G) L,
/// L = c_v D_v + c_perp sum D_b along the direction best aligned with the
/// central gradient and its orthogonal completion, with
/// c_v = 1 + (p-2)(w + (1-w)/n), c_perp = 1 + (p-2)(1-w)/n,
/// w = |grad|^2/(|grad|^2 + eps^2), and P(G) = clamp(G, eps, g_max)^{q-2}.
/// G = max(|grad_frame|, lambda h |L|) with the gradient taken on the same
/// frame as L and lambda = |q-2| max|b| / (2 min c); this keeps P(G) L
/// nondecreasing in every neighbour value while staying central away from
/// flat spots.
inline double scheme_update(const double* u, std::size_t idx, const SchemeContext& ctx) {
  const int n = ctx.lat.n;
  const double h = ctx.lat.h;
  const double u0 = u[idx];
  const double p = ctx.params.p, q = ctx.params.q;
  const double h2 = h * h;
  auto D = [&](std::ptrdiff_t off, double len2) { return (u[idx + off] + u[idx - off] - 2.0 * u0) / (h2 * len2); };
  auto slope2 = [&](std::ptrdiff_t off, double len2) {
    const double s = u[idx + off] - u[idx - off];
    return s * s / (4.0 * h2 * len2);
  };
  double L = 0.0, G2 = 0.0, lambda = 0.0;
  if (p == 2.0 || n == 1) {
    const double c = n == 1 ? p - 1.0 : 1.0;
    for (int i = 0; i < n; ++i) {
      L += D(ctx.lat.stride[i], 1.0);
      G2 += slope2(ctx.lat.stride[i], 1.0);
    }
    L *= c;
    lambda = std::abs(q - 2.0) / (2.0 * c);
  } else {
    double gc[8];
    std::vector<double> gc_big;
    double* g = gc;
    if (n > 8) {
      gc_big.resize(n);
      g = gc_big.data();
    }
    double gc2 = 0.0;
    for (int i = 0; i < n; ++i) {
      g[i] = (u[idx + ctx.lat.stride[i]] - u[idx - ctx.lat.stride[i]]) / (2.0 * h);
      gc2 += g[i] * g[i];
    }
    const Direction* best = &ctx.dirs[0];
    if (gc2 > 0.0) {
      double best_score = -1.0;
      for (const auto& d : ctx.dirs) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += d.v[i] * g[i];
        const double score = dot * dot / d.len2;
        if (score > best_score) {
          best_score = score;
          best = &d;
        }
      }
    }
    const double w = gc2 / (gc2 + ctx.eps * ctx.eps);
    const double cv = 1.0 + (p - 2.0) * (w + (1.0 - w) / n);
    const double cp = 1.0 + (p - 2.0) * (1.0 - w) / n;
    L = cv * D(best->offset, best->len2);
    G2 = slope2(best->offset, best->len2);
    double ratio = std::sqrt(best->len2) / cv;
    for (std::size_t k = 0; k < best->perp_offset.size(); ++k) {
      L += cp * D(best->perp_offset[k], best->perp_len2[k]);
      G2 += slope2(best->perp_offset[k], best->perp_len2[k]);
      ratio = std::max(ratio, std::sqrt(best->perp_len2[k]) / cp);
    }
    lambda = std::abs(q - 2.0) * ratio / 2.0;
  }
  double P = 1.0;
  if (q != 2.0) {
    double G = std::max(std::sqrt(G2), lambda * h * std::abs(L));
    G = std::clamp(G, ctx.eps, std::max(ctx.eps, ctx.g_max));
    P = std::pow(G, q - 2.0);
  }
  return u0 + ctx.tau / ctx.time_coefficient * P * L;
}

inline double regularization(double h, double q, EpsRule rule) {
  const double k = rule == EpsRule::flat_spot && q < 2.0 ? 1.0 / (q - 1.0) : 1.0;
  return std::max(std::pow(h, k), 1e-8);
}

/// Largest stable time step for the given regularization and gradient cap.
inline double stable_tau(const Params& params, const SchemeConfig& cfg, double h, double eps, double g_cap) {
  const double L = params.q < 2.0 ? eps : std::max(eps, g_cap);
  const double prefactor = params.q == 2.0 ? 1.0 : std::pow(L, params.q - 2.0);
  return cfg.time_coefficient * cfg.cfl * h * h / (prefactor * (1.0 + std::abs(params.p - 2.0)) * (2.0 * params.n));
}

/// Grid values over the stored time levels.
struct DiscreteSolution {
  Lattice lat;
  GridSpec grid;
  Params params;
  SchemeConfig config;
  double tau = 0.0;
  std::size_t steps = 0;
  double eps = 0.0;
  double g_max = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<NodeType>> types;
  /// Extremes of the boundary data and of the computed interior values over
  /// all levels, stored or not.
  double data_min = std::numeric_limits<double>::infinity();
  double data_max = -std::numeric_limits<double>::infinity();
  double interior_min = std::numeric_limits<double>::infinity();
  double interior_max = -std::numeric_limits<double>::infinity();
  std::size_t interior_updates = 0;

  std::size_t levels() const { return times.size(); }
  std::size_t last() const { return times.size() - 1; }

  SpaceTimePoint node_point(std::size_t level, std::size_t idx) const { return {lat.coords(idx), times[level]}; }

  /// Value at the grid node nearest to x on a stored level, if that node is
  /// interior or boundary.
  std::optional<double> value_near(std::size_t level, const Vec& x) const {
    auto idx = lat.nearest(x);
    if (!idx || types[level][*idx] == NodeType::exterior) return std::nullopt;
    return values[level][*idx];
  }

  /// Stored level closest to time t.
  std::size_t level_at(double t) const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < times.size(); ++k)
      if (std::abs(times[k] - t) < std::abs(times[best] - t)) best = k;
    return best;
  }
};

/// Level-by-level time marching for a Dirichlet problem.
class Stepper {
 public:
  Stepper(const SpaceTimeDomain& domain, ScalarField g, const GridSpec& grid, const Params& params,
          const SchemeConfig& cfg)
      : domain_(domain), g_(std::move(g)), grid_(grid), cfg_(cfg) {
    params.validate();
    if (!(grid.h > 0.0)) throw LabError(Errc::degenerate_grid, "grid step must be positive");
    if (!(grid.box.t_hi > grid.box.t_lo)) throw LabError(Errc::degenerate_grid, "empty time interval");
    if (cfg.stencil_width < 1) throw LabError(Errc::invalid_params, "stencil width must be >= 1");
    if (!(cfg.time_coefficient > 0.0)) throw LabError(Errc::invalid_params, "time coefficient must be positive");
    ctx_.params = params;
    ctx_.reach = params.n == 2 ? cfg.stencil_width : 1;
    ctx_.lat = Lattice(grid.box, grid.h, ctx_.reach + 1);
    ctx_.dirs = make_directions(ctx_.lat, params.n == 2 ? cfg.stencil_width : 1);
    ctx_.eps = cfg.eps_grad > 0.0 ? cfg.eps_grad : regularization(grid.h, params.q, cfg.eps_rule);
    ctx_.time_coefficient = cfg.time_coefficient;
    for (const auto& d : ctx_.dirs) {
      stencil_.push_back(d.offset);
      for (auto o : d.perp_offset) stencil_.push_back(o);
    }
    for (int i = 0; i < params.n; ++i) stencil_.push_back(ctx_.lat.stride[i]);

    const std::size_t N = ctx_.lat.size;
    coords_.resize(N);
    for (std::size_t k = 0; k < N; ++k) coords_[k] = ctx_.lat.coords(k);

    // Gradient cap for q > 2 from the data on the first and last slices.
    ctx_.g_max = std::numeric_limits<double>::infinity();
    if (params.q > 2.0) ctx_.g_max = std::max(ctx_.eps, data_gradient_bound());

    const double T = grid.box.t_hi - grid.box.t_lo;
    const double tau_max = stable_tau(params, cfg, grid.h, ctx_.eps, ctx_.g_max);
    double tau = grid.tau;
    if (tau <= 0.0) {
      tau = tau_max;
    } else if (cfg.enforce_cfl && tau > tau_max * (1.0 + 1e-12)) {
      throw LabError(Errc::cfl_violation, "time step exceeds the stability bound; admissible tau <= " +
                                              std::to_string(tau_max));
    }
    steps_ = static_cast<std::size_t>(std::ceil(T / tau - 1e-9));
    if (steps_ == 0) steps_ = 1;
    ctx_.tau = T / static_cast<double>(steps_);

    // Cylinder sections do not move while the grid stays inside its time span.
    static_ = domain.kind() == DomainKind::cylinder && grid.box.t_lo >= domain.parameter("t1") &&
              grid.box.t_hi <= domain.parameter("t2");
    u_.assign(N, 0.0);
    next_.assign(N, 0.0);
    type_.assign(N, NodeType::exterior);
    have_.assign(N, 0);

    // Level 0: every node active in the first step is pinned to the data.
    classify(grid.box.t_lo + 0.5 * ctx_.tau);
    const double t0 = grid.box.t_lo;
    for (std::size_t k = 0; k < N; ++k) {
      if (type_[k] == NodeType::exterior) continue;
      u_[k] = data(k, t0);
      have_[k] = 1;
      track_data(u_[k]);
    }
    for (std::size_t k = 0; k < N; ++k)
      if (type_[k] != NodeType::exterior) type_[k] = NodeType::boundary;
    any_interior_ = false;
  }

  std::size_t steps() const { return steps_; }
  std::size_t level() const { return level_; }
  bool done() const { return level_ >= steps_; }
  double time() const { return grid_.box.t_lo + static_cast<double>(level_) * ctx_.tau; }
  double tau() const { return ctx_.tau; }
  const SchemeContext& context() const { return ctx_; }
  const std::vector<double>& values() const { return u_; }
  const std::vector<NodeType>& types() const { return type_; }
  const Vec& coords(std::size_t idx) const { return coords_[idx]; }
  bool had_interior() const { return any_interior_; }
  double data_min() const { return data_min_; }
  double data_max() const { return data_max_; }
  double interior_min() const { return interior_min_; }
  double interior_max() const { return interior_max_; }
  std::size_t interior_updates() const { return updates_; }

  /// Advances one time level.
  void advance() {
    const double t_prev = time();
    const double t_next = grid_.box.t_lo + static_cast<double>(level_ + 1) * ctx_.tau;
    if (!static_ || level_ == 0) classify(t_next - 0.5 * ctx_.tau);
    const std::size_t N = ctx_.lat.size;
    // Missing level-m values on the stencil of new interior nodes come from the data.
    for (std::size_t k : interior_) {
      for (auto o : stencil_) {
        for (std::size_t nb : {k + o, k - o}) {
          if (!have_[nb]) {
            u_[nb] = data(nb, t_prev);
            have_[nb] = 1;
          }
        }
      }
      if (!have_[k]) {
        u_[k] = data(k, t_prev);
        have_[k] = 1;
      }
    }
    const double* u = u_.data();
    const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(interior_.size());
#pragma omp parallel for schedule(static) if (count > 4096)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const std::size_t k = interior_[static_cast<std::size_t>(i)];
      next_[k] = scheme_update(u, k, ctx_);
    }
    for (std::size_t k : interior_) {
      interior_min_ = std::min(interior_min_, next_[k]);
      interior_max_ = std::max(interior_max_, next_[k]);
    }
    updates_ += interior_.size();
    if (!interior_.empty()) any_interior_ = true;
    for (std::size_t k : interior_) u_[k] = next_[k];
    for (std::size_t k : band_) {
      u_[k] = data(k, t_next);
      track_data(u_[k]);
    }
    std::fill(have_.begin(), have_.end(), 0);
    for (std::size_t k = 0; k < N; ++k)
      if (type_[k] != NodeType::exterior) have_[k] = 1;
    ++level_;
  }

 private:
  void track_data(double v) {
    data_min_ = std::min(data_min_, v);
    data_max_ = std::max(data_max_, v);
  }

  bool member(std::size_t k, double t) const { return domain_.contains({coords_[k], t}); }

  double data(std::size_t k, double t) const {
    SpaceTimePoint p{coords_[k], t};
    if (cfg_.extension == Extension::evaluate || domain_.contains(p)) return g_.value(p);
    // Crossing towards the nearest in-domain node along the stencil lines
    // (up to three cells), searched at the level time and then at the
    // membership time of the step.
    for (double ts : {t, t - 0.5 * ctx_.tau}) {
      SpaceTimePoint q{coords_[k], ts};
      double best = std::numeric_limits<double>::infinity();
      std::optional<SpaceTimePoint> target;
      for (int m = 1; m <= 3 && !target; ++m) {
        for (auto o : stencil_) {
          for (std::ptrdiff_t s : {m, -m}) {
            const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(k) + s * o;
            if (nb < 0 || nb >= static_cast<std::ptrdiff_t>(ctx_.lat.size)) continue;
            SpaceTimePoint c{coords_[static_cast<std::size_t>(nb)], ts};
            const double d = (c.x - q.x).squaredNorm();
            if (d < best && domain_.contains(c)) {
              best = d;
              target = c;
            }
          }
        }
      }
      if (!target) continue;
      SpaceTimePoint in = *target, out = q;
      for (int it = 0; it < 40; ++it) {
        SpaceTimePoint mid = (in + out) * 0.5;
        (domain_.contains(mid) ? in : out) = mid;
      }
      return g_.value(in);
    }
    double v = g_.value(p);
    if (!std::isfinite(v)) v = g_.value({coords_[k], t - 0.5 * ctx_.tau});
    if (!std::isfinite(v)) throw LabError(Errc::precondition, "boundary data are not finite on the boundary band");
    return v;
  }

  double data_gradient_bound() const {
    double gmax = 0.0;
    const double h = ctx_.lat.h;
    const int n = ctx_.lat.n;
    for (double t : {grid_.box.t_lo, grid_.box.t_hi}) {
      for (std::size_t k = 0; k < ctx_.lat.size; ++k) {
        if (ctx_.lat.edge_distance(k) < 1) continue;
        SpaceTimePoint p{coords_[k], t};
        if (!g_.is_defined(p)) continue;
        const double v = g_.value(p);
        double s2 = 0.0;
        bool ok = std::isfinite(v);
        for (int i = 0; i < n && ok; ++i) {
          SpaceTimePoint a = p, b = p;
          a.x(i) += h;
          b.x(i) -= h;
          if (!g_.is_defined(a) || !g_.is_defined(b)) {
            ok = false;
            break;
          }
          const double d = std::max(std::abs(g_.value(a) - v), std::abs(g_.value(b) - v));
          s2 += d * d;
        }
        if (ok) gmax = std::max(gmax, std::sqrt(s2) / h);
      }
    }
    return gmax;
  }

  void classify(double t) {
    const std::size_t N = ctx_.lat.size;
    std::vector<std::uint8_t> in(N, 0);
    for (std::size_t k = 0; k < N; ++k) in[k] = member(k, t) ? 1 : 0;
    const int margin = ctx_.reach + 1;
    auto stencil_inside = [&](std::size_t k) {
      for (auto o : stencil_)
        if (!in[k + o] || !in[k - o]) return false;
      return true;
    };
    std::vector<NodeType> type(N, NodeType::exterior);
    interior_.clear();
    for (std::size_t k = 0; k < N; ++k) {
      if (ctx_.lat.edge_distance(k) < margin) continue;
      bool is_int = false;
      if (cfg_.raster == Raster::inner) {
        is_int = in[k] && stencil_inside(k);
      } else {
        is_int = in[k] != 0;
        for (int i = 0; i < ctx_.lat.n && !is_int; ++i)
          is_int = in[k + ctx_.lat.stride[i]] || in[k - ctx_.lat.stride[i]];
      }
      if (is_int) {
        type[k] = NodeType::interior;
        interior_.push_back(k);
      }
    }
    band_.clear();
    for (std::size_t k : interior_) {
      for (auto o : stencil_) {
        for (std::size_t nb : {k + o, k - o}) {
          if (type[nb] == NodeType::exterior) {
            type[nb] = NodeType::boundary;
            band_.push_back(nb);
          }
        }
      }
    }
    type_ = std::move(type);
  }

  SpaceTimeDomain domain_;
  ScalarField g_;
  GridSpec grid_;
  SchemeConfig cfg_;
  SchemeContext ctx_;
  std::vector<std::ptrdiff_t> stencil_;
  std::vector<Vec> coords_;
  std::vector<double> u_, next_;
  std::vector<NodeType> type_;
  std::vector<std::uint8_t> have_;
  std::vector<std::size_t> interior_, band_;
  std::size_t steps_ = 0;
  std::size_t level_ = 0;
  bool static_ = false;
  bool any_interior_ = false;
  double data_min_ = std::numeric_limits<double>::infinity();
  double data_max_ = -std::numeric_limits<double>::infinity();
  double interior_min_ = std::numeric_limits<double>::infinity();
  double interior_max_ = -std::numeric_limits<double>::infinity();
  std::size_t updates_ = 0;
};

using LevelObserver = std::function<void(const Stepper&)>;

/// Time-marches the scheme from the first slice with boundary nodes pinned
/// to g. Stores about `max_stored_levels` levels, always the last one.
inline DiscreteSolution solve_dirichlet(const SpaceTimeDomain& domain, const ScalarField& g, const GridSpec& grid,
                                        const Params& params, const SchemeConfig& cfg = {},
                                        const LevelObserver& observer = nullptr) {
  Stepper st(domain, g, grid, params, cfg);
  DiscreteSolution sol;
  sol.lat = st.context().lat;
  sol.grid = grid;
  sol.params = params;
  sol.config = cfg;
  sol.tau = st.tau();
  sol.steps = st.steps();
  sol.eps = st.context().eps;
  sol.g_max = st.context().g_max;
  const std::size_t stride = std::max<std::size_t>(1, (st.steps() + cfg.max_stored_levels - 1) /
                                                          std::max<std::size_t>(1, cfg.max_stored_levels));
  auto store = [&] {
    sol.times.push_back(st.time());
    sol.values.push_back(st.values());
    sol.types.push_back(st.types());
  };
  store();
  if (observer) observer(st);
  while (!st.done()) {
    st.advance();
    if (observer) observer(st);
    if (st.level() % stride == 0 || st.done()) store();
  }
  if (!st.had_interior()) throw LabError(Errc::degenerate_grid, "rasterized domain has no interior nodes");
  sol.data_min = st.data_min();
  sol.data_max = st.data_max();
  sol.interior_min = st.interior_min();
  sol.interior_max = st.interior_max();
  sol.interior_updates = st.interior_updates();
  return sol;
}

struct ComparisonResult {
  bool ordered = true;
  double max_violation = 0.0;
  std::size_t nodes_compared = 0;
};

/// Solves with data g1 and g2 side by side and compares every node of every
/// level. Requires g1 <= g2 on every boundary node used.
inline ComparisonResult discrete_comparison_check(const SpaceTimeDomain& domain, const ScalarField& g1,
                                                  const ScalarField& g2, const GridSpec& grid, const Params& params,
                                                  SchemeConfig cfg = {}, double tol = 1e-12) {
  // Both solves must share the time step.
  Stepper probe1(domain, g1, grid, params, cfg);
  Stepper probe2(domain, g2, grid, params, cfg);
  GridSpec shared = grid;
  shared.tau = std::min(probe1.tau(), probe2.tau());
  cfg.enforce_cfl = false;
  Stepper a(domain, g1, shared, params, cfg);
  Stepper b(domain, g2, shared, params, cfg);
  ComparisonResult r;
  auto compare = [&] {
    const auto& ta = a.types();
    for (std::size_t k = 0; k < ta.size(); ++k) {
      if (ta[k] == NodeType::exterior) continue;
      const double d = a.values()[k] - b.values()[k];
      if (ta[k] == NodeType::boundary && d > tol)
        throw LabError(Errc::precondition, "boundary data are not ordered (g1 > g2 at a boundary node)");
      ++r.nodes_compared;
      if (d > tol) {
        r.ordered = false;
        r.max_violation = std::max(r.max_violation, d);
      }
    }
  };
  compare();
  while (!a.done()) {
    a.advance();
    b.advance();
    compare();
  }
  return r;
}

}  // namespace pqlab
