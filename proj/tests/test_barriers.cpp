#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pqlab/barriers.hpp"

using namespace pqlab;

namespace {

std::vector<SpaceTimePoint> interior(const SpaceTimeDomain& d, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  return sample_interior(d, count, rng);
}

}  // namespace

TEST(FlatBottom, ExactSolution) {
  for (double q : {1.4, 2.0, 3.0}) {
    Params pr(2.5, q, 2);
    SpaceTimePoint xi0{{0.2, -0.1}, 0.3};
    auto fam = make_flat_bottom_family(xi0, pr);
    for (long long j : {1LL, 4LL, 25LL}) {
      ScalarField f = fam(j);
      EXPECT_EQ(f(xi0), 0.0);
      for (const auto& p : interior(fam.domain, 1000, 1)) {
        Residual r = residual(f, p, pr);
        const double scale = std::pow(double(j), q - 1.0) * pr.structure_constant();
        EXPECT_NEAR(r.value, 0.0, 1e-12 * scale);
      }
    }
  }
}

TEST(FlatBottom, DivergenceLowerBound) {
  Params pr(3.0, 1.5, 1);
  ScalarField f = flat_bottom_field(origin(1), 7.0, pr);
  const double c = 1.0 + 1.5 / 0.5;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double r = 0.01 + U(rng);
    const double sign = U(rng) < 0.5 ? -1.0 : 1.0;
    SpaceTimePoint p{{sign * (r + U(rng))}, r + U(rng)};
    const double bound = 7.0 * (0.5 / 1.5) * std::pow(r, 3.0) + c * std::sqrt(7.0) * r;
    EXPECT_GE(f(p), bound * (1.0 - 1e-14));
  }
}

TEST(Perron, ClosedFormResidual) {
  for (double q : {1.5, 2.0, 3.0}) {
    Params pr(2.0, q, 1);
    auto dom = make_cylinder(Vec::Zero(1), 1.0, 0.0, 1.0);
    SpaceTimePoint xi0{{1.0}, 0.5};
    auto fam = make_perron_family(dom, xi0, pr);
    const double D = std::sqrt(5.0);
    const double c = 1.0 + (2.0 - q) / (q - 1.0);
    for (long long j : {1LL, 2LL, 9LL}) {
      ScalarField psi = fam(j);
      EXPECT_EQ(psi(xi0), 0.0);
      for (const auto& p : interior(dom, 1000, 3)) {
        const double want = std::pow(double(j), q - 1.0) * c * ((p.t - 0.5) / D - 1.0);
        Residual r = residual(psi, p, pr);
        if (r.singular) continue;
        EXPECT_NEAR(r.value, want, 1e-10 * std::abs(want));
        EXPECT_LE(r.value, 0.0);
      }
    }
  }
}

TEST(Perron, DominatesWitness) {
  Params pr(3.0, 1.6, 2);
  auto dom = make_cylinder(Vec::Zero(2), 1.0, 0.0, 1.0);
  auto fam = make_perron_family(dom, {{0.0, 0.0}, 0.0}, pr);
  ASSERT_TRUE(fam.strong_witness.has_value());
  for (long long j : {1LL, 3LL, 50LL}) {
    const double m = std::min(double(j), std::pow(double(j), 0.6));
    ScalarField psi = fam(j);
    for (const auto& p : interior(dom, 1000, 4)) EXPECT_GE(psi(p), m * (*fam.strong_witness)(p) * (1.0 - 1e-12));
  }
}

TEST(Perron, RequiresBoundaryTouchPoint) {
  auto dom = make_cylinder(Vec::Zero(1), 1.0, 0.0, 1.0);
  EXPECT_THROW(make_perron_family(dom, {{0.0}, 0.5}, Params(2.0, 2.0, 1)), LabError);
}

TEST(ExteriorBall, Constants) {
  Params pr(3.0, 1.5, 2);
  ExteriorBallConfig cfg{{{1.0, 0.0}, 0.0}, 1.0, origin(2)};
  auto k = exterior_ball_constants(cfg, pr);
  EXPECT_NEAR(k.delta, 0.25, 1e-15);
  EXPECT_NEAR(k.R2, 0.5, 1e-15);
  // (p - 2 + n)/((p - 1) delta^2) = 3/(2/16) = 24, so j0 = 25.
  EXPECT_EQ(k.j0, 25);
  EXPECT_NEAR(k.C0, std::pow(1.0, -0.5) * 0.0625, 1e-15);
  EXPECT_FALSE(k.truncation_active);
  // q < p: the printed constant is used unchanged.
  EXPECT_DOUBLE_EQ(k.C1, k.C1_as_printed);
}

TEST(ExteriorBall, RefusesPoleAndQ2) {
  ExteriorBallConfig pole{{{0.0, 0.0}, 1.0}, 1.0, origin(2)};
  try {
    make_exterior_ball_family(pole, Params(3.0, 1.5, 2));
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.code(), Errc::pole_tangency);
  }
  ExteriorBallConfig ok{{{1.0, 0.0}, 0.0}, 1.0, origin(2)};
  try {
    make_exterior_ball_family(ok, Params(3.0, 2.0, 2));
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.code(), Errc::unsupported_exponent);
  }
}

TEST(ExteriorBall, SupersolutionAndTouchValue) {
  Params pr(3.0, 1.5, 2);
  ExteriorBallConfig cfg{{{1.0, 0.0}, 0.0}, 1.0, origin(2)};
  auto fam = make_exterior_ball_family(cfg, pr);
  for (long long j : {fam.first_index, fam.first_index + 5}) {
    ScalarField w = fam(j);
    EXPECT_NEAR(w(origin(2)), 0.0, 1e-14);
    for (const auto& p : interior(fam.domain, 1000, 5)) {
      EXPECT_GT(w(p), 0.0);
      EXPECT_GE(residual(w, p, pr).value, 0.0);
    }
  }
}

TEST(ExteriorBall, DistanceEstimate) {
  Params pr(3.0, 2.5, 2);
  ExteriorBallConfig cfg{{{0.6, 0.3}, -0.2}, std::sqrt(0.49), origin(2)};
  auto fam = make_exterior_ball_family(cfg, pr);
  SpaceTimePoint xi2{{0.3, 0.15}, -0.1};
  const double R2 = 0.35;
  for (const auto& p : interior(fam.domain, 1000, 6)) {
    const double R = std::sqrt((p.x - xi2.x).squaredNorm() + (p.t - xi2.t) * (p.t - xi2.t));
    EXPECT_GE(R * R - R2 * R2, 0.5 * (p.x.squaredNorm() + p.t * p.t) - 1e-14);
  }
}

TEST(ExteriorBall, SupersolutionForDegenerateExponent) {
  Params pr(2.5, 3.0, 1);
  ExteriorBallConfig cfg{{{-0.8}, 0.6}, 1.0, origin(1)};
  auto fam = make_exterior_ball_family(cfg, pr);
  ScalarField w = fam(fam.first_index);
  for (const auto& p : interior(fam.domain, 1000, 7)) EXPECT_GE(residual(w, p, pr).value, 0.0);
}

TEST(NorthPole, GrowthExponentsWithMinimalS) {
  Params pr(2.0, 1.5, 1);
  const double s = 3.1;  // q/(q-1) + 0.1
  auto k = north_pole_constants(1.0, 3.0, pr, s);
  EXPECT_GT(k.exponent_lead, 0.0);
  EXPECT_GT(k.exponent_lead, k.exponent_tail);
  double prev = -1e300;
  for (double j = 10.0; j <= 1e5; j *= 1.5) {
    const double m = north_pole_m(j, 1.0, 3.0, s, pr);
    EXPECT_GT(m, prev);
    prev = m;
  }
}

TEST(NorthPole, ParameterRange) {
  EXPECT_THROW(make_north_pole_family(1.0, 2.5, Params(2.0, 1.5, 1)), LabError);  // l < 3
  EXPECT_THROW(make_north_pole_family(1.0, 3.0, Params(2.0, 3.0, 1)), LabError);  // l = q
  EXPECT_NO_THROW(make_north_pole_family(1.0, 3.0, Params(2.0, 1.5, 1)));
  EXPECT_NO_THROW(make_north_pole_family(1.0, 3.5, Params(2.0, 3.0, 1)));
}

TEST(NorthPole, PastedStructure) {
  Params pr(3.0, 1.5, 1);
  auto fam = make_north_pole_family(0.5, 3.0, pr);
  const long long j = fam.first_index * 4;
  const double s = fam.info["s"].get<double>();
  ScalarField h = fam(j);
  const double m = north_pole_m(double(j), 0.5, 3.0, s, pr);
  EXPECT_GT(m, 0.0);
  const double rj = std::pow(double(j), -1.0 / s);
  for (const auto& p : interior(fam.domain, 2000, 8)) {
    const bool in_g = std::abs(p.x(0)) < rj && p.t > -0.5 * std::pow(double(j), -3.0 / s);
    if (!in_g) EXPECT_EQ(h(p), m);
    EXPECT_LE(h(p), m);
    EXPECT_GT(h(p), 0.0);
    EXPECT_GE(residual(h, p, pr).value, -1e-10);
  }
}

TEST(Counterexample, ConstantsForReferenceCase) {
  CounterexampleConfig cfg{Params(2.0, 1.5, 1), 0.5, 1.0};
  auto k = counterexample_constants(cfg);
  // c = 1 + 0.5/0.5 = 2, (q/(q-1))^{q-1} = sqrt 3, 2 sqrt 3 * 0.5 > 1.
  EXPECT_EQ(k.B, 1.0);
  EXPECT_NEAR(k.M, std::pow(0.5, 1.0 + 4.0 / 3.0), 1e-15);
  EXPECT_NEAR(k.M, 0.198425131496025, 1e-13);
}

TEST(Counterexample, RefusesOutsideRange) {
  EXPECT_THROW(counterexample_constants({Params(2.0, 2.5, 1), 0.2, 1.0}), LabError);
  EXPECT_THROW(counterexample_constants({Params(2.0, 1.5, 1), 0.7, 1.0}), LabError);
}

TEST(Counterexample, IrregularityBarrier) {
  CounterexampleConfig cfg{Params(2.0, 1.5, 1), 0.5, 1.0};
  auto pair = make_counterexample_pair(cfg);
  const ScalarField& u = pair.irregularity_barrier;
  EXPECT_EQ(u(origin(1)), 1.0);
  // u(0,t) = -c/(1-qs) (q/(q-1))^{q-1} (-t)^{1-qs} = -8 sqrt 3 (-t)^{1/4}.
  for (double t : {-0.5, -1e-3, -1e-8}) EXPECT_NEAR(u({{0.0}, t}), -8.0 * std::sqrt(3.0) * std::pow(-t, 0.25), 1e-12);
  EXPECT_GT(u({{0.0}, -1e-12}), -0.02);
  for (const auto& p : interior(pair.domain, 1000, 9)) {
    const double want = 1.5 * std::pow(std::abs(p.x(0)), 3.0) / std::pow(-p.t, 2.5);
    Residual r = residual(u, p, cfg.params);
    if (!r.singular) EXPECT_NEAR(r.value, want, 1e-9 * std::max(1.0, want));
    EXPECT_GE(r.value, 0.0);
  }
}

TEST(Counterexample, SingleBarrier) {
  CounterexampleConfig cfg{Params(2.0, 1.5, 1), 0.5, 1.0};
  auto pair = make_counterexample_pair(cfg);
  const ScalarField& w = pair.single_barrier;
  const double M = pair.constants.M;
  ScalarField v = counterexample_v(cfg, 1.0);
  for (const auto& p : interior(pair.domain, 2000, 10)) {
    EXPECT_GT(w(p), 0.0);
    EXPECT_LE(w(p), M);
    if (std::pow(std::abs(p.x(0)), 3.0) >= 0.5) EXPECT_EQ(w(p), M);
    // (sqrt 3 * 2 - B/(2-q)) (-t)^{(q-1)/(2-q)} with B = 1.
    Residual r = residual(v, p, cfg.params);
    if (!r.singular) EXPECT_GE(r.value, (2.0 * std::sqrt(3.0) - 2.0) * (-p.t) - 1e-12);
    EXPECT_GE(residual(w, p, cfg.params).value, 0.0);
  }
  EXPECT_LT(w({{0.0}, -1e-10}), 1e-15);
}

TEST(Counterexample, GeneralKUsesScaling) {
  CounterexampleConfig cfg{Params(3.0, 1.5, 2), 0.4, 2.0};
  auto pair = make_counterexample_pair(cfg);
  for (const auto& p : interior(pair.domain, 1000, 11)) {
    EXPECT_GT(pair.single_barrier(p), 0.0);
    EXPECT_GE(residual(pair.single_barrier, p, cfg.params).value, -1e-10);
  }
}

TEST(Paste, DominatingInnerGivesOuter) {
  ScalarField outer = constant_field(1.0, 1);
  ScalarField inner = constant_field(2.0, 1);
  auto G = make_cylinder(Vec::Zero(1), 0.5, 0.0, 1.0);
  ScalarField w = paste(outer, inner, G);
  for (double x : {-0.9, -0.2, 0.0, 0.3, 0.8}) EXPECT_EQ(w({{x}, 0.5}), 1.0);
}

TEST(Paste, LscDiagnostic) {
  auto enclosing = make_cylinder(Vec::Zero(1), 1.0, 0.0, 1.0);
  auto G = make_cylinder(Vec::Zero(1), 0.5, 0.0, 1.0);
  ScalarField outer = constant_field(1.0, 1);
  ScalarField good = make_field([](const SpaceTimePoint& p) { return 0.5 + 4.0 * p.x(0) * p.x(0); }, nullptr, nullptr,
                                nullptr);
  ScalarField bad = constant_field(0.2, 1);
  EXPECT_TRUE(paste_lsc_diagnostic(outer, good, G, enclosing, 200, 1).ok);
  auto d = paste_lsc_diagnostic(outer, bad, G, enclosing, 200, 1);
  EXPECT_FALSE(d.ok);
  EXPECT_GT(d.crossings, 0u);
  EXPECT_NEAR(d.worst_drop, 0.8, 1e-12);
}

TEST(ScaleField, Constants) {
  EXPECT_DOUBLE_EQ(scaling_constant(2.0, Params(2.0, 3.0, 1)), 0.125);
  EXPECT_DOUBLE_EQ(scaling_constant(1.0, Params(2.0, 1.5, 1)), 1.0);
  EXPECT_THROW(scale_field(constant_field(1.0, 1), 2.0, Params(2.0, 2.0, 1)), LabError);
}

TEST(ScaleField, ResidualIdentityAndRoundTrip) {
  for (double q : {1.5, 3.0}) {
    Params pr(2.5, q, 2);
    ScalarField f = make_prototype_field(0.8, 1.3, pr);
    for (double a : {0.5, 2.0}) {
      const double K = scaling_constant(a, pr);
      ScalarField u = scale_field(f, a, pr);
      ScalarField back = scale_field(u, 1.0 / a, pr);
      std::mt19937_64 rng(12);
      std::uniform_real_distribution<double> U(-1.0, 1.0);
      for (int i = 0; i < 200; ++i) {
        SpaceTimePoint p{{U(rng), U(rng)}, 1.0 + U(rng) * 0.5};
        SpaceTimePoint ap{Vec(a * p.x), p.t};
        const double lhs = residual(u, p, pr).value;
        const double rhs = K * residual(f, ap, pr).value;
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
        EXPECT_NEAR(back(p), f(p), 1e-12 * std::max(1.0, std::abs(f(p))));
      }
      auto fj = scale_field(flat_bottom_field(origin(2), 3.0, pr), a, pr);
      for (int i = 0; i < 100; ++i) EXPECT_NEAR(residual(fj, {{U(rng), U(rng)}, U(rng)}, pr).value, 0.0, 1e-10);
    }
  }
}

TEST(Multiply, ExponentAndResidualIdentity) {
  EXPECT_DOUBLE_EQ(multiply_solution(constant_field(1.0, 1), 2.0, Params(2.0, 4.0, 1)).second, 4.0);
  EXPECT_DOUBLE_EQ(multiply_solution(constant_field(1.0, 1), 1.0, Params(2.0, 1.5, 1)).second, 1.0);
  EXPECT_DOUBLE_EQ(multiply_solution(constant_field(1.0, 1), 5.0, Params(2.0, 2.0, 1)).second, 1.0);
  Params pr(3.0, 1.7, 2);
  ScalarField f = make_prototype_field(1.1, 0.7, pr);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double c : {0.3, 2.0, 5.0}) {
    auto [cu, a] = multiply_solution(f, c, pr);
    for (int i = 0; i < 100; ++i) {
      SpaceTimePoint p{{U(rng), U(rng)}, 1.0 + 0.5 * U(rng)};
      const double want = std::pow(c, pr.q - 1.0) * residual(f, p, pr).value;
      EXPECT_NEAR(multiplied_residual(cu, p, pr, a).value, want, 1e-10 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(Catalog, ListsConstraints) {
  auto cat = barrier_catalog();
  auto find = [&](const std::string& name) {
    for (const auto& e : cat)
      if (e.name == name) return e;
    return CatalogEntry{};
  };
  EXPECT_NE(find("exterior_ball").constraints.find("q != 2"), std::string::npos);
  EXPECT_NE(find("counterexample").constraints.find("0 < s < 1/q"), std::string::npos);
  EXPECT_NE(find("north_pole").constraints.find("l > q if q > 2"), std::string::npos);
  EXPECT_EQ(cat.size(), 5u);
}
