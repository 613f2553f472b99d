#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace henon {

// Phase-space coordinates are plain Eigen vectors.
template <int D>
using Point = Eigen::Matrix<double, D, 1>;
template <int D>
using Mat = Eigen::Matrix<double, D, D>;

struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  double half_width() const { return 0.5 * (hi - lo); }

  // Maps x to the reference coordinate in [-1, 1].
  double to_unit(double x) const { return (2.0 * x - lo - hi) / (hi - lo); }
  double from_unit(double t) const { return center() + half_width() * t; }

  // margin is a fraction of the interval width.
  bool contains(double x, double margin = 0.0) const {
    const double m = margin * width();
    return x >= lo - m && x <= hi + m;
  }

  void validate() const {
    if (!(lo < hi)) throw std::invalid_argument("Interval: lo must be < hi");
  }
};

template <int D>
struct Box {
  static_assert(D >= 1 && D <= 3);
  std::array<Interval, D> axes;

  const Interval& axis(int a) const { return axes[static_cast<size_t>(a)]; }
  Interval& axis(int a) { return axes[static_cast<size_t>(a)]; }

  bool contains(const Point<D>& p, double margin = 0.0) const {
    for (int a = 0; a < D; ++a)
      if (!axes[static_cast<size_t>(a)].contains(p[a], margin)) return false;
    return true;
  }

  double volume() const {
    double v = 1.0;
    for (const auto& ax : axes) v *= ax.width();
    return v;
  }

  void validate() const {
    for (const auto& ax : axes) ax.validate();
  }

  Point<D> center() const {
    Point<D> c;
    for (int a = 0; a < D; ++a) c[a] = axes[static_cast<size_t>(a)].center();
    return c;
  }
};

using Box2 = Box<2>;
using Box3 = Box<3>;

inline bool operator==(const Interval& a, const Interval& b) {
  return a.lo == b.lo && a.hi == b.hi;
}
template <int D>
bool operator==(const Box<D>& a, const Box<D>& b) {
  for (int i = 0; i < D; ++i)
    if (!(a.axes[static_cast<size_t>(i)] == b.axes[static_cast<size_t>(i)])) return false;
  return true;
}

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace henon
