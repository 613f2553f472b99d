#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "henon/boxes.hpp"

namespace henon {

class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RootOptions {
  double tol = 1e-12;     // on |g(r) - target|
  int max_iters = 50;
  double seed = std::numeric_limits<double>::quiet_NaN();  // optional initial guess
};

// Root of g(x) = target for g continuous and strictly monotone on the bracket.
// Newton steps (when a derivative is supplied) guarded by bisection.
inline double invert_monotone(const std::function<double(double)>& g, double target,
                              Interval bracket, const RootOptions& opts = {},
                              const std::function<double(double)>& dg = nullptr) {
  double a = bracket.lo, b = bracket.hi;
  double fa = g(a) - target, fb = g(b) - target;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::signbit(fa) == std::signbit(fb))
    throw BracketError("invert_monotone: no sign change on bracket");

  double x = std::isfinite(opts.seed) && bracket.contains(opts.seed) ? opts.seed
                                                                     : 0.5 * (a + b);
  double fx = g(x) - target;
  for (int it = 0; it < opts.max_iters; ++it) {
    if (std::abs(fx) <= opts.tol) return x;
    // shrink the bracket
    if (std::signbit(fx) == std::signbit(fa)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    double x_next = std::numeric_limits<double>::quiet_NaN();
    if (dg) {
      const double d = dg(x);
      if (d != 0.0) x_next = x - fx / d;
    } else {
      // secant on the current bracket
      const double denom = fb - fa;
      if (denom != 0.0) x_next = a - fa * (b - a) / denom;
    }
    if (!std::isfinite(x_next) || x_next <= a || x_next >= b)
      x_next = 0.5 * (a + b);
    x = x_next;
    fx = g(x) - target;
  }
  if (std::abs(fx) <= opts.tol) return x;
  throw ConvergenceError("invert_monotone: iteration cap exceeded");
}

// Newton iteration for a scalar equation without a bracket; used where a
// high-quality seed is available (fixed points, critical points).
inline double newton_scalar(const std::function<double(double)>& f,
                            const std::function<double(double)>& df, double seed,
                            double tol = 1e-13, int max_iters = 60) {
  double x = seed;
  for (int it = 0; it < max_iters; ++it) {
    const double fx = f(x);
    const double d = df(x);
    if (d == 0.0) throw ConvergenceError("newton_scalar: vanishing derivative");
    const double step = fx / d;
    x -= step;
    if (std::abs(step) <= tol * (1.0 + std::abs(x))) return x;
  }
  throw ConvergenceError("newton_scalar: iteration cap exceeded");
}

}  // namespace henon
