#include <doctest.h>

#include <cmath>
#include <random>

#include "henon/maps.hpp"
#include "henon/util.hpp"

using namespace henon;

TEST_CASE("build_family_2d basics") {
  const double c = 1.401155, b = 1e-3;
  HenonLike2D m = build_family_2d(c, b);
  // degenerate map
  HenonLike2D m0 = build_family_2d(c, 0.0);
  CHECK(m0.eps.value.sup_estimate() < 1e-14);
  // constant Jacobian b
  std::mt19937_64 rng = rng_for(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 20; ++i) {
    Point<2> p(u(rng), u(rng));
    CHECK(jacobian(m, p).determinant() == doctest::Approx(b).epsilon(1e-10));
    CHECK(std::exp(log_jacobian(m, p)) == doctest::Approx(b).epsilon(1e-10));
  }
  // budget: b above the configured budget is rejected
  CHECK_THROWS_AS(build_family_2d(c, 0.2), BudgetError);
}

TEST_CASE("toy model block structure and Jacobian product") {
  const double b1 = 1e-2, b2 = 1e-4, cpl = 1e-3;
  HenonLike3D toy = build_toy_preset(1.401155, b1, b2, cpl);
  CHECK(toy.is_toy());
  std::mt19937_64 rng = rng_for(4);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  std::uniform_real_distribution<double> uz(-0.9, 0.9);
  for (int i = 0; i < 20; ++i) {
    Point<3> p(u(rng), u(rng), uz(rng));
    const Mat<3> j = jacobian(toy, p);
    CHECK(j(0, 2) == 0.0);  // (1,3) entry identically zero for toy models
    CHECK(j.determinant() == doctest::Approx(b1 * b2).epsilon(1e-8));
  }
  // delta == 0 gives a degenerate third coordinate
  Field3 zero_delta = Field3::zero({2, 2, 1}, toy.box);
  HenonLike3D degen = make_henon_3d(toy.f, toy.eps.value, zero_delta, 0.1);
  Point<3> p(0.3, -0.2, 0.5);
  CHECK(jacobian(degen, p).determinant() == 0.0);
}

TEST_CASE("apply/jacobian consistency by central differences") {
  HenonLike3D toy = build_toy_preset(1.401155, 1e-2, 1e-4, 1e-3);
  std::mt19937_64 rng = rng_for(5);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  std::uniform_real_distribution<double> uz(-0.9, 0.9);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    Point<3> p(u(rng), u(rng), uz(rng));
    const Mat<3> j = jacobian(toy, p);
    for (int a = 0; a < 3; ++a) {
      Point<3> pp = p, pm = p;
      pp[a] += h;
      pm[a] -= h;
      const Point<3> fd = (apply(toy, pp) - apply(toy, pm)) / (2.0 * h);
      for (int r = 0; r < 3; ++r) CHECK(std::abs(fd[r] - j(r, a)) < 1e-6);
    }
  }
}

TEST_CASE("orientation: 2D block determinant positive where eps_y > 0") {
  HenonLike2D m = build_family_2d(1.401155, 1e-2);
  for (double x : {-1.0, 0.0, 1.0})
    for (double y : {-1.0, 0.0, 1.0}) {
      Point<2> p(x, y);
      CHECK(jacobian(m, p).determinant() > 0.0);
    }
}

TEST_CASE("build_family_t perturbs the first coordinate linearly in z") {
  HenonLike3D toy = build_toy_preset(1.401155, 1e-2, 1e-4, 1e-3);
  const double t = 1e-6;
  HenonLike3D ft = build_family_t(toy, t);
  CHECK_FALSE(ft.is_toy());
  // t = 0 leaves the map unchanged
  HenonLike3D f0 = build_family_t(toy, 0.0);
  Point<3> p(0.4, -0.3, 0.6);
  CHECK(apply(f0, p) == apply(toy, p));
  CHECK(ft.eps.partial(2, p) == doctest::Approx(-t).epsilon(1e-10));
  CHECK(apply(ft, p)[0] == doctest::Approx(apply(toy, p)[0] + t * p[2]).epsilon(1e-12));
  CHECK_THROWS_AS(build_family_t(toy, 0.5), std::range_error);
}

TEST_CASE("fixed points of the degenerate map match the quadratic formula") {
  const double c = 1.401155;
  HenonLike2D m = build_family_2d(c, 0.0);
  auto fp = fixed_points(m);
  const double xplus = (-1.0 + std::sqrt(1.0 + 4.0 * c)) / 2.0;
  const double xminus = (-1.0 - std::sqrt(1.0 + 4.0 * c)) / 2.0;
  CHECK(fp.beta1[0] == doctest::Approx(xplus).epsilon(1e-9));
  CHECK(fp.beta1[1] == doctest::Approx(xplus).epsilon(1e-9));
  CHECK(fp.beta0[0] == doctest::Approx(xminus).epsilon(1e-9));
}

TEST_CASE("fixed points: dissipativity and third eigenvalue") {
  const double b = 1e-3;
  HenonLike2D m = build_family_2d(1.4, b);
  auto fp = fixed_points(m);
  CHECK(std::abs(fp.eig0[0] * fp.eig0[1]) == doctest::Approx(b).epsilon(1e-8));
  CHECK(std::abs(fp.eig1[0] * fp.eig1[1]) == doctest::Approx(b).epsilon(1e-8));
  CHECK(fp.sectionally_dissipative);

  HenonLike3D toy = build_toy_preset(1.401155, 1e-2, 1e-4, 1e-3);
  auto fp3 = fixed_points(toy);
  auto closest_to = [&](const std::array<std::complex<double>, 3>& eigs, double target) {
    double best = 1e300;
    for (const auto& e : eigs) best = std::min(best, std::abs(e - target));
    return best;
  };
  const double dz0 = toy.delta.partial(2, fp3.beta0, 0.12);
  const double dz1 = toy.delta.partial(2, fp3.beta1, 0.12);
  CHECK(closest_to(fp3.eig0, dz0) < 1e-4 * std::abs(dz0) + 1e-10);
  CHECK(closest_to(fp3.eig1, dz1) < 1e-4 * std::abs(dz1) + 1e-10);
  CHECK(fp3.sectionally_dissipative);
}

TEST_CASE("fixed points satisfy F(beta) = beta to 1e-10") {
  HenonLike3D toy = build_toy_preset(1.401155, 1e-2, 1e-4, 1e-3);
  auto fp = fixed_points(toy);
  CHECK((apply(toy, fp.beta0, 0.12) - fp.beta0).norm() < 1e-10);
  CHECK((apply(toy, fp.beta1, 0.12) - fp.beta1).norm() < 1e-10);
}

TEST_CASE("horizontal map: H o H^{-1} = id and toy phi_inv is z-independent") {
  auto toy = std::make_shared<HenonLike3D>(build_toy_preset(1.401155, 1e-2, 1e-4, 1e-3));
  Horizontal<3> h = horizontal<3>(toy);
  std::mt19937_64 rng = rng_for(6);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int i = 0; i < 200; ++i) {
    Point<3> w(u(rng), u(rng), u(rng) * 0.5);
    const Point<3> back = h.h_forward(h.h_inv(w));
    CHECK((back - w).norm() < 1e-10);
    Point<3> w2 = w;
    w2[2] = u(rng) * 0.5;
    CHECK(h.phi_inv(w) == doctest::Approx(h.phi_inv(w2)).epsilon(1e-12));
  }
  auto m0 = std::make_shared<HenonLike2D>(build_family_2d(1.401155, 0.0));
  Horizontal<2> h0 = horizontal<2>(m0);
  Point<2> w(0.3, 0.1);
  CHECK(h0.phi_inv(w) == doctest::Approx(m0->f.inverse_right(0.3)).epsilon(1e-10));
}

TEST_CASE("horizontal inverse jacobian matches finite differences") {
  auto toy = std::make_shared<HenonLike3D>(build_toy_preset(1.401155, 1e-2, 1e-4, 1e-3));
  Horizontal<3> h = horizontal<3>(toy);
  const double step = 1e-6;
  std::mt19937_64 rng = rng_for(7);
  std::uniform_real_distribution<double> u(-0.55, 0.55);
  for (int i = 0; i < 20; ++i) {
    Point<3> w(u(rng), u(rng), 0.4 * u(rng));
    const Mat<3> j = h.h_inv_jacobian(w);
    for (int a = 0; a < 3; ++a) {
      Point<3> wp = w, wm = w;
      wp[a] += step;
      wm[a] -= step;
      const Point<3> fd = (h.h_inv(wp) - h.h_inv(wm)) / (2.0 * step);
      for (int r = 0; r < 3; ++r) CHECK(std::abs(fd[r] - j(r, a)) < 2e-5);
    }
  }
}

TEST_CASE("map JSON round trip") {
  HenonLike3D toy = build_toy_preset(1.401155, 1e-2, 1e-4, 1e-3);
  auto j = to_json(toy);
  CHECK(j.at("kind") == "toy");
  HenonLike3D back = henon3d_from_json(j);
  Point<3> p(0.3, 0.2, -0.4);
  CHECK((apply(back, p) - apply(toy, p)).norm() < 1e-13);
}
