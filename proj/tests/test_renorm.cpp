#include <doctest.h>

#include <cmath>
#include <random>

#include "henon/oracle1d.hpp"
#include "henon/renorm.hpp"
#include "henon/util.hpp"

using namespace henon;

namespace {
std::shared_ptr<const HenonLike2D> share(HenonLike2D m) {
  return std::make_shared<HenonLike2D>(std::move(m));
}
std::shared_ptr<const HenonLike3D> share(HenonLike3D m) {
  return std::make_shared<HenonLike3D>(std::move(m));
}
}  // namespace

TEST_CASE("degenerate 2D renormalization reduces to the 1D operator") {
  HenonLike2D m = build_family_2d(1.401155189, 0.0);
  auto r = renormalize<2>(share(m));
  CHECK(r.map->eps.value.sup_estimate() < 1e-12);  // degeneracy preserved
  Unimodal1D r1d = renormalize_1d(m.f);
  for (int i = 0; i <= 20; ++i) {
    const double x = -1.55 + 3.1 * i / 20.0;
    CHECK(r.map->f(x) == doctest::Approx(r1d(x)).epsilon(1e-11));
  }
  CHECK(r.step.lambda < -0.35);
  CHECK(r.step.lambda > -0.45);
  CHECK(r.step.s < -1.0);
}

TEST_CASE("1D doubling fixed point is fixed by the 2D machinery") {
  const auto fp = solve_doubling_fixed_point();
  MapOptions mo;
  Field2 eps0 = Field2::zero({24, 24}, mo.box2());
  HenonLike2D m = make_henon_2d(fp.f_star, eps0, 0.1);
  auto r = renormalize<2>(share(m));
  for (int i = 0; i <= 20; ++i) {
    const double x = -1.55 + 3.1 * i / 20.0;
    CHECK(std::abs(r.map->f(x) - fp.f_star(x)) < 1e-8);
  }
}

TEST_CASE("factored kernel matches the direct composition at moderate eps") {
  const double b = 0.05;
  double c = tune_family_2d(b, 3);
  auto m = share(build_family_2d(c, b));
  auto r = renormalize<2>(*&m);
  // direct pre-renormalization: G = H o F^2 o H^{-1}
  Horizontal<2> h = horizontal<2>(m);
  const double lam = r.step.lambda, s = r.step.s;
  std::mt19937_64 rng = rng_for(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng), y = u(rng);
    const Point<2> w(lam * x, lam * y);
    const Point<2> p2 = apply(*m, apply(*m, h.h_inv(w), 0.04), 0.04);
    const double g1 = m->f(p2[0], 0.04) - m->eps(Point<2>(p2[0], p2[1]), 0.04);
    const double rf_naive = s * g1;
    const double rf_field = r.map->f(x) - r.map->eps(Point<2>(x, y));
    CHECK(std::abs(rf_field - rf_naive) < 1e-10);
  }
}

TEST_CASE("toy model projection and closure") {
  const double b1 = 1e-2, b2 = 1e-4, cpl = 1e-3;
  double c = tune_family_2d(b1, 7);
  auto toy = share(build_toy_preset(c, b1, b2, cpl));
  auto m2 = share(build_family_2d(c, b1));
  auto r3 = renormalize<3>(toy);
  auto r2 = renormalize<2>(m2);
  CHECK(r3.map->is_toy());  // closure: partial_z eps1 identically 0
  // pi_xy o R F_mod = R F_2d, bit-level shared path
  std::mt19937_64 rng = rng_for(12);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_real_distribution<double> uz(-0.9, 0.9);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Point<3> p(u(rng), u(rng), uz(rng));
    const Point<3> q3 = apply(*r3.map, p);
    const Point<2> q2 = apply(*r2.map, Point<2>(p[0], p[1]));
    worst = std::max(worst, std::max(std::abs(q3[0] - q2[0]), std::abs(q3[1] - q2[1])));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("tower: conjugacy defect and super-exponential eps decay") {
  const double b = 1e-3;
  double c = tune_family_2d(b, 7);
  Tower<2> t = build_tower(build_family_2d(c, b), 6);
  REQUIRE(t.depth() == 6);
  for (int k = 0; k < t.depth(); ++k) CHECK(t.step(k).conjugacy_defect <= 1e-8);
  for (int k = 0; k + 1 < t.depth(); ++k) {
    if (t.step(k).eps_norm <= 1e-2 && t.step(k).eps_norm > 1e-200)
      CHECK(t.step(k + 1).eps_norm <= std::pow(t.step(k).eps_norm, 1.5));
  }
  // norms decrease after the first level
  for (int k = 1; k + 1 < t.depth(); ++k)
    CHECK(t.step(k + 1).eps_norm < t.step(k).eps_norm);
}

TEST_CASE("renorm_depth basics") {
  // c below the first period-doubling window: not renormalizable
  CHECK(renorm_depth(build_family_2d(0.7, 0.0), 0.1, 5) == 0);
  // degenerate map at the 1D fixed point: renormalizable up to the cap
  const auto fp = solve_doubling_fixed_point();
  MapOptions mo;
  HenonLike2D mstar = make_henon_2d(fp.f_star, Field2::zero({24, 24}, mo.box2()), 0.1);
  CHECK(renorm_depth(mstar, 0.1, 10) == 10);
}

TEST_CASE("tuning matches the 1D bisection oracle at b = 0") {
  const double c_tuned = tune_family_2d(0.0, 12);
  const double c_oracle = feigenbaum_accumulation(13);
  CHECK(std::abs(c_tuned - c_oracle) < 1e-6);
}

TEST_CASE("tuning reaches requested depth at positive b") {
  for (double b : {1e-3, 1e-2}) {
    const double c = tune_family_2d(b, 6);
    CHECK(renorm_depth(build_family_2d(c, b), 0.1, 6) == 6);
  }
}

TEST_CASE("toy-model tower stays toy and tracks the 2D tower") {
  const double b1 = 1e-2, b2 = 1e-4;
  double c = tune_family_2d(b1, 7);
  Tower<3> t3 = build_tower(build_toy_preset(c, b1, b2, 1e-3), 4);
  Tower<2> t2 = build_tower(build_family_2d(c, b1), 4);
  REQUIRE(t3.depth() == 4);
  std::mt19937_64 rng = rng_for(14);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 1; k <= 4; ++k) {
    CHECK(t3.level(k).is_toy());
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      Point<3> p(u(rng), u(rng), 0.5 * u(rng));
      const Point<3> q3 = apply(t3.level(k), p);
      const Point<2> q2 = apply(t2.level(k), Point<2>(p[0], p[1]));
      worst = std::max(worst, std::max(std::abs(q3[0] - q2[0]), std::abs(q3[1] - q2[1])));
    }
    CHECK(worst < 1e-9);
  }
}
