#pragma once

#include <cmath>
#include <stdexcept>

#include "henon/field.hpp"
#include "henon/roots.hpp"

namespace henon {

class NotHenonLikeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unimodal map stored as a 1-D spectral field together with its critical
// point. The maps in this lab are concave with the critical point near 0.
class Unimodal1D {
 public:
  Unimodal1D() = default;

  static Unimodal1D from_field(Field1 f, double crit_seed = 0.0) {
    Unimodal1D u;
    u.f_ = std::move(f);
    u.fp_ = u.f_.derivative(0);
    u.fpp_ = u.fp_.derivative(0);
    const Interval dom = u.domain();
    u.crit_ = newton_scalar([&](double x) { return u.fp_(Point<1>(x)); },
                            [&](double x) { return u.fpp_(Point<1>(x)); },
                            crit_seed, 1e-14);
    if (!dom.contains(u.crit_, 0.0))
      throw NotHenonLikeError("Unimodal1D: critical point escapes the domain");
    u.validate();
    return u;
  }

  double operator()(double x, double margin = kEvalMargin) const {
    return f_(Point<1>(x), margin);
  }
  double deriv(double x, double margin = kEvalMargin) const {
    return fp_(Point<1>(x), margin);
  }
  double second_deriv(double x, double margin = kEvalMargin) const {
    return fpp_(Point<1>(x), margin);
  }
  // (f(a) - f(b)) / (a - b), cancellation-free.
  double dd(double a, double b, double margin = kEvalMargin) const {
    return f_.dd_eval(0, Point<1>(a), b, margin);
  }

  double critical_point() const { return crit_; }
  double critical_value() const { return f_(Point<1>(crit_)); }
  const Interval& domain() const { return f_.domain().axis(0); }
  const Field1& field() const { return f_; }
  const Field1& deriv_field() const { return fp_; }

  // Inverse on the decreasing branch right of the critical point.
  double inverse_right(double y, double margin = kEvalMargin, double seed = std::numeric_limits<double>::quiet_NaN()) const {
    const Interval dom = domain();
    Interval bracket{crit_ + 1e-9 * dom.width(), dom.hi + margin * dom.width()};
    RootOptions opts;
    opts.seed = seed;
    return invert_monotone([&](double x) { return f_(Point<1>(x), 2.0 * margin + 0.01); }, y,
                           bracket, opts,
                           [&](double x) { return fp_(Point<1>(x), 2.0 * margin + 0.01); });
  }

  void validate() const {
    const Interval dom = domain();
    if (std::abs(fp_(Point<1>(crit_))) > 1e-8)
      throw NotHenonLikeError("Unimodal1D: derivative at critical point not ~0");
    // exactly one sign change of f' across the domain; values near the
    // critical point are below the noise floor and do not count
    const int grid = 65;
    double scale = 0.0;
    for (int i = 0; i < grid; ++i) {
      const double x = dom.lo + dom.width() * i / (grid - 1.0);
      scale = std::max(scale, std::abs(fp_(Point<1>(x))));
    }
    const double solid = 1e-9 * scale;
    int changes = 0;
    double prev = 0.0;
    for (int i = 0; i < grid; ++i) {
      const double x = dom.lo + dom.width() * i / (grid - 1.0);
      const double cur = fp_(Point<1>(x));
      if (std::abs(cur) <= solid) continue;
      if (prev != 0.0 && std::signbit(cur) != std::signbit(prev)) ++changes;
      prev = cur;
    }
    if (changes != 1)
      throw NotHenonLikeError("Unimodal1D: f' must change sign exactly once");
  }

 private:
  Field1 f_, fp_, fpp_;
  double crit_ = 0.0;
};

}  // namespace henon
