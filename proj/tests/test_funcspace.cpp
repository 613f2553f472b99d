#include <doctest.h>

#include <cmath>
#include <random>

#include "henon/field.hpp"
#include "henon/roots.hpp"
#include "henon/util.hpp"

using namespace henon;

namespace {
const Interval unit{-1.0, 1.0};
const Box2 unit2{{unit, unit}};
}  // namespace

TEST_CASE("constant and polynomial evaluation") {
  Field1 c3 = fit_function([](double) { return 3.0; }, 4, unit);
  CHECK(c3(Point<1>(0.123)) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(c3(Point<1>(-0.9)) == doctest::Approx(3.0).epsilon(1e-14));

  Field1 sq = fit_function([](double x) { return x * x; }, 8, unit);
  CHECK(sq(Point<1>(0.3)) == doctest::Approx(0.09).epsilon(1e-13));

  const double c = 1.401155;
  Field1 fc = fit_function([c](double x) { return c - x * x; }, 48, Interval{-1.6, 1.6});
  CHECK(fc(Point<1>(0.0)) == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("fit reproduces linear and bilinear samplers exactly") {
  Field1 ident = fit_function([](double x) { return x; }, 1, unit);
  CHECK(ident(Point<1>(0.731)) == doctest::Approx(0.731).epsilon(1e-15));

  const double b = 0.37;
  Field2 bl = Field2::fit([b](const Point<2>& p) { return b * p[1]; }, {1, 1}, unit2);
  CHECK(bl(Point<2>(0.5, -0.25)) == doctest::Approx(-b * 0.25).epsilon(1e-14));
}

TEST_CASE("domain error outside margin") {
  Field1 sq = fit_function([](double x) { return x * x; }, 8, unit);
  CHECK_NOTHROW(sq(Point<1>(1.03)));  // inside the 2% width margin (width 2)
  CHECK_THROWS_AS(sq(Point<1>(1.05)), DomainError);
}

TEST_CASE("fit rejects non-finite samples") {
  CHECK_THROWS_AS(fit_function([](double x) { return 1.0 / (x - x); }, 4, unit), FitError);
}

TEST_CASE("differentiate is the exact polynomial derivative") {
  Field1 sq = fit_function([](double x) { return x * x; }, 8, unit);
  Field1 d = sq.derivative(0);
  CHECK(d(Point<1>(0.4)) == doctest::Approx(0.8).epsilon(1e-13));

  const double b = -1.7;
  Field2 by = Field2::fit([b](const Point<2>& p) { return b * p[1]; }, {3, 3}, unit2);
  Field2 dy = by.derivative(1);
  CHECK(dy(Point<2>(0.2, 0.9)) == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("differentiate commutes across axes") {
  Field2 f = Field2::fit([](const Point<2>& p) { return std::sin(p[0] + 2.0 * p[1]); }, {20, 20},
                         unit2);
  Field2 dxy = f.derivative(0).derivative(1);
  Field2 dyx = f.derivative(1).derivative(0);
  std::mt19937_64 rng = rng_for(7);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  for (int i = 0; i < 50; ++i) {
    Point<2> p(u(rng), u(rng));
    CHECK(dxy(p) == doctest::Approx(dyx(p)).epsilon(1e-10));
  }
}

TEST_CASE("fit/eval round trip at low degree polynomials") {
  // any polynomial below the fitted degree survives refit to 1e-12 relative
  Field2 f = Field2::fit(
      [](const Point<2>& p) { return 2.0 + p[0] - 0.5 * p[0] * p[1] + p[1] * p[1]; }, {6, 6},
      unit2);
  Field2 refit = Field2::fit([&](const Point<2>& p) { return f(p); }, {9, 9}, unit2);
  std::mt19937_64 rng = rng_for(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Point<2> p(u(rng), u(rng));
    CHECK(refit(p) == doctest::Approx(f(p)).epsilon(1e-12));
  }
}

TEST_CASE("divided-difference evaluation matches finite difference and stays stable") {
  Field1 f = fit_function([](double x) { return std::exp(x) * std::cos(2 * x); }, 40, unit);
  // moderate separation: matches (f(a)-f(b))/(a-b)
  const double a = 0.4, b = -0.2;
  const double dd = f.dd_eval(0, Point<1>(a), b);
  CHECK(dd == doctest::Approx((f(Point<1>(a)) - f(Point<1>(b))) / (a - b)).epsilon(1e-12));
  // tiny separation: converges to the derivative
  Field1 fp = f.derivative(0);
  const double h = 1e-13;
  const double dd2 = f.dd_eval(0, Point<1>(0.3 + h), 0.3);
  CHECK(dd2 == doctest::Approx(fp(Point<1>(0.3 + h / 2))).epsilon(1e-9));
}

TEST_CASE("invert_monotone") {
  RootOptions opts;
  const double r = invert_monotone([](double x) { return x * x * x; }, 8.0, Interval{0.0, 2.0},
                                   opts, [](double x) { return 3.0 * x * x; });
  CHECK(r == doctest::Approx(2.0).epsilon(1e-12));

  CHECK(invert_monotone([](double x) { return x; }, 0.37, Interval{0.0, 1.0}) ==
        doctest::Approx(0.37).epsilon(1e-12));

  const double c = 1.401155;
  auto fc = [c](double x) { return c - x * x; };
  const double x = invert_monotone(fc, 0.5, Interval{0.2, 1.2}, opts,
                                   [](double x_) { return -2.0 * x_; });
  CHECK(x == doctest::Approx(std::sqrt(c - 0.5)).epsilon(1e-12));

  CHECK_THROWS_AS(invert_monotone([](double x) { return x * x; }, -1.0, Interval{0.0, 1.0}),
                  BracketError);
}

TEST_CASE("invert_monotone round trip on random targets") {
  const double c = 1.401155;
  auto fc = [c](double x) { return c - x * x; };
  auto dfc = [](double x) { return -2.0 * x; };
  std::mt19937_64 rng = rng_for(21);
  std::uniform_real_distribution<double> u(0.21, 1.19);
  RootOptions opts;
  for (int i = 0; i < 100; ++i) {
    const double x0 = u(rng);
    const double r = invert_monotone(fc, fc(x0), Interval{0.2, 1.2}, opts, dfc);
    CHECK(r == doctest::Approx(x0).epsilon(1e-10));
  }
}

TEST_CASE("json round trip") {
  Field2 f = Field2::fit([](const Point<2>& p) { return p[0] + 3.0 * p[1] * p[1]; }, {5, 5}, unit2);
  Field2 g = Field2::from_json(f.to_json());
  CHECK(g(Point<2>(0.3, -0.8)) == doctest::Approx(f(Point<2>(0.3, -0.8))).epsilon(1e-15));
  CHECK(g.domain() == f.domain());
}

TEST_CASE("tail indicator small for analytic fit") {
  Field1 f = fit_function([](double x) { return std::sin(3.0 * x); }, 40, unit);
  CHECK(f.tail_indicator() < 1e-10);
}
