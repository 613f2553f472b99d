#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "henon/field.hpp"
#include "henon/unimodal.hpp"

namespace henon {

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Field bundled with its first partial derivatives.
template <int D>
struct GradField {
  Field<D> value;
  std::array<Field<D>, D> grad;

  static GradField make(Field<D> v) {
    GradField g;
    for (int a = 0; a < D; ++a) g.grad[static_cast<size_t>(a)] = v.derivative(a);
    g.value = std::move(v);
    return g;
  }

  double operator()(const Point<D>& p, double margin = kEvalMargin) const {
    return value(p, margin);
  }
  double partial(int axis, const Point<D>& p, double margin = kEvalMargin) const {
    return grad[static_cast<size_t>(axis)](p, margin);
  }
};

struct MapOptions {
  double halfwidth_xy = 1.6;
  double halfwidth_z = 1.0;
  int deg_f = 48;
  int deg_eps = 24;
  int deg_eps_z = 24;      // 0 for toy models
  int deg_delta = 24;
  int deg_delta_z = 24;
  double eps_budget = 0.1;  // on sup|eps| / halfwidth_xy
  double t_range = 1e-3;    // |t| bound for build_family_t

  Box2 box2() const {
    return Box2{{Interval{-halfwidth_xy, halfwidth_xy}, Interval{-halfwidth_xy, halfwidth_xy}}};
  }
  Box3 box3() const {
    return Box3{{Interval{-halfwidth_xy, halfwidth_xy}, Interval{-halfwidth_xy, halfwidth_xy},
                 Interval{-halfwidth_z, halfwidth_z}}};
  }
};

template <int D>
struct HenonLike;

template <>
struct HenonLike<2> {
  static constexpr int dim = 2;
  Unimodal1D f;
  GradField<2> eps;
  Box2 box;
  double eps_budget = 0.1;

  double budget_measure() const { return eps.value.sup_estimate() / box.axis(0).half_width(); }
  bool is_toy() const { return false; }
};

template <>
struct HenonLike<3> {
  static constexpr int dim = 3;
  Unimodal1D f;
  GradField<3> eps;
  GradField<3> delta;
  Box3 box;
  double eps_budget = 0.1;

  double budget_measure() const {
    return std::max(eps.value.sup_estimate(), delta.value.sup_estimate()) /
           box.axis(0).half_width();
  }
  bool is_toy() const { return eps.value.degree(2) == 0; }
};

using HenonLike2D = HenonLike<2>;
using HenonLike3D = HenonLike<3>;

template <int D>
Point<D> apply(const HenonLike<D>& m, const Point<D>& p, double margin = kEvalMargin) {
  Point<D> q;
  q[0] = m.f(p[0], margin) - m.eps(p, margin);
  q[1] = p[0];
  if constexpr (D == 3) q[2] = m.delta(p, margin);
  return q;
}

template <int D>
Mat<D> jacobian(const HenonLike<D>& m, const Point<D>& p, double margin = kEvalMargin) {
  Mat<D> j;
  const double fp = m.f.deriv(p[0], margin);
  if constexpr (D == 2) {
    j << fp - m.eps.partial(0, p, margin), -m.eps.partial(1, p, margin), 1.0, 0.0;
  } else {
    j << fp - m.eps.partial(0, p, margin), -m.eps.partial(1, p, margin),
        -m.eps.partial(2, p, margin), 1.0, 0.0, 0.0, m.delta.partial(0, p, margin),
        m.delta.partial(1, p, margin), m.delta.partial(2, p, margin);
  }
  return j;
}

// log det DF, stable across the super-exponentially small scales met along
// renormalization towers. Requires an orientation-positive determinant.
template <int D>
double log_jacobian(const HenonLike<D>& m, const Point<D>& p, double margin = kEvalMargin) {
  if constexpr (D == 2) {
    const double ey = m.eps.partial(1, p, margin);
    if (!(ey > 0.0)) throw std::runtime_error("log_jacobian: det DF <= 0");
    return std::log(ey);
  } else {
    const double ey = m.eps.partial(1, p, margin);
    const double ez = m.eps.partial(2, p, margin);
    const double dy = m.delta.partial(1, p, margin);
    const double dz = m.delta.partial(2, p, margin);
    if (!(ey > 0.0) || !(dz > 0.0)) throw std::runtime_error("log_jacobian: degenerate block");
    const double cross = (ez / ey) * (dy / dz);
    if (!(cross < 1.0)) throw std::runtime_error("log_jacobian: det DF <= 0");
    return std::log(ey) + std::log(dz) + std::log1p(-cross);
  }
}

template <int D>
struct FixedPointPair {
  Point<D> beta0, beta1;  // regular saddle / flip saddle
  std::array<std::complex<double>, D> eig0, eig1;
  bool sectionally_dissipative = true;
};

namespace detail {

template <int D>
Point<D> polish_fixed_point(const HenonLike<D>& m, Point<D> p, double margin) {
  for (int it = 0; it < 40; ++it) {
    const Point<D> g = apply(m, p, margin) - p;
    const Mat<D> j = jacobian(m, p, margin) - Mat<D>::Identity();
    const Point<D> step = j.fullPivLu().solve(g);
    p -= step;
    if (step.norm() <= 1e-14 * (1.0 + p.norm())) return p;
  }
  throw NotHenonLikeError("fixed point Newton did not converge");
}

template <int D>
std::array<std::complex<double>, D> eigenvalues(const Mat<D>& j) {
  Eigen::EigenSolver<Mat<D>> es(j);
  std::array<std::complex<double>, D> out;
  for (int i = 0; i < D; ++i) out[static_cast<size_t>(i)] = es.eigenvalues()[i];
  return out;
}

}  // namespace detail

// The two fixed points of a renormalizable-shaped map, found on the diagonal
// of the degenerate limit and Newton-corrected in full dimension.
template <int D>
FixedPointPair<D> fixed_points(const HenonLike<D>& m, double margin = 0.1) {
  const Interval dom = m.box.axis(0);
  auto diag = [&](double x) {
    Point<D> p;
    p[0] = x;
    p[1] = x;
    if constexpr (D == 3) p[2] = 0.0;
    return m.f(x, margin) - m.eps(p, margin) - x;
  };
  // locate the two diagonal roots by sign scan
  const int grid = 257;
  const double lo = dom.lo - margin * dom.width(), hi = dom.hi + margin * dom.width();
  std::vector<double> roots;
  double prev = diag(lo);
  for (int i = 1; i < grid; ++i) {
    const double x = lo + (hi - lo) * i / (grid - 1.0);
    const double cur = diag(x);
    if (std::signbit(cur) != std::signbit(prev)) {
      RootOptions opts;
      roots.push_back(invert_monotone(diag, 0.0, Interval{lo + (hi - lo) * (i - 1) / (grid - 1.0), x}, opts));
    }
    prev = cur;
  }
  if (roots.size() != 2)
    throw NotHenonLikeError("fixed_points: expected exactly two diagonal fixed points");

  FixedPointPair<D> out;
  Point<D> p0, p1;
  p0[0] = roots[0];
  p0[1] = roots[0];
  p1[0] = roots[1];
  p1[1] = roots[1];
  if constexpr (D == 3) {
    p0[2] = 0.0;
    p1[2] = 0.0;
    for (int it = 0; it < 8; ++it) {
      p0[2] = m.delta(p0, margin);
      p1[2] = m.delta(p1, margin);
    }
  }
  p0 = detail::polish_fixed_point(m, p0, margin);
  p1 = detail::polish_fixed_point(m, p1, margin);
  // beta0 carries the positive unstable multiplier (left root), beta1 flips.
  if (p0[0] > p1[0]) std::swap(p0, p1);
  out.beta0 = p0;
  out.beta1 = p1;
  out.eig0 = detail::eigenvalues(jacobian(m, p0, margin));
  out.eig1 = detail::eigenvalues(jacobian(m, p1, margin));
  out.sectionally_dissipative = true;
  for (const auto& eigs : {out.eig0, out.eig1})
    for (int i = 0; i < D; ++i)
      for (int j = i + 1; j < D; ++j)
        if (std::abs(eigs[static_cast<size_t>(i)] * eigs[static_cast<size_t>(j)]) >= 1.0)
          out.sectionally_dissipative = false;
  return out;
}

// ---------------------------------------------------------------------------
// builders

// Degree 2 is exact here; higher degrees only add a rounding tail that gets
// amplified when the field is extrapolated (fixed points sit slightly
// outside the box).
inline Unimodal1D quadratic_unimodal(double c, const MapOptions& opts = {}) {
  const Interval iv{-opts.halfwidth_xy, opts.halfwidth_xy};
  return Unimodal1D::from_field(fit_function([c](double x) { return c - x * x; }, 2, iv));
}

inline HenonLike2D make_henon_2d(Unimodal1D f, Field2 eps, double budget) {
  HenonLike2D m;
  m.box = eps.domain();
  m.f = std::move(f);
  m.eps = GradField<2>::make(std::move(eps));
  m.eps_budget = budget;
  if (m.budget_measure() > budget * (1.0 + 1e-9))
    throw BudgetError("HenonLike2D: eps exceeds budget");
  return m;
}

inline HenonLike3D make_henon_3d(Unimodal1D f, Field3 eps, Field3 delta, double budget) {
  HenonLike3D m;
  m.box = eps.domain();
  m.f = std::move(f);
  m.eps = GradField<3>::make(std::move(eps));
  m.delta = GradField<3>::make(std::move(delta));
  m.eps_budget = budget;
  if (m.budget_measure() > budget * (1.0 + 1e-9))
    throw BudgetError("HenonLike3D: eps/delta exceeds budget");
  return m;
}

// F(x,y) = (c - x^2 - b*y, x); constant Jacobian b.
inline HenonLike2D build_family_2d(double c, double b, const MapOptions& opts = {}) {
  if (b < 0.0) throw BudgetError("build_family_2d: b must be >= 0");
  const Box2 box = opts.box2();
  Field2 eps = Field2::fit([b](const Point<2>& p) { return b * p[1]; },
                           {opts.deg_eps, opts.deg_eps}, box);
  return make_henon_2d(quadratic_unimodal(c, opts), std::move(eps), opts.eps_budget);
}

// Lift a plane field to a z-independent 3-D field (exact toy-model shape).
inline Field3 lift_to_3d(const Field2& eps2, const Interval& zaxis) {
  Box3 box{{eps2.domain().axis(0), eps2.domain().axis(1), zaxis}};
  return Field3::from_coeffs(eps2.coeffs(), {eps2.degree(0), eps2.degree(1), 0}, box);
}

inline HenonLike3D build_toy_model(Unimodal1D f, const Field2& eps2d, Field3 delta,
                                   const MapOptions& opts = {}) {
  Field3 eps = lift_to_3d(eps2d, delta.domain().axis(2));
  return make_henon_3d(std::move(f), std::move(eps), std::move(delta), opts.eps_budget);
}

// Standard toy preset: eps = b1*y, delta = b2*z + coupling*y.
inline HenonLike3D build_toy_preset(double c, double b1, double b2, double coupling,
                                    const MapOptions& opts = {}) {
  const Box3 box = opts.box3();
  Field2 eps2 = Field2::fit([b1](const Point<2>& p) { return b1 * p[1]; },
                            {opts.deg_eps, opts.deg_eps}, opts.box2());
  Field3 delta = Field3::fit(
      [b2, coupling](const Point<3>& p) { return b2 * p[2] + coupling * p[1]; },
      {opts.deg_delta, opts.deg_delta, opts.deg_delta_z}, box);
  return build_toy_model(quadratic_unimodal(c, opts), eps2, std::move(delta), opts);
}

// Perturbation (f(x) - eps(x,y) + t z, x, delta(x,y,z)) of a toy model.
inline HenonLike3D build_family_t(const HenonLike3D& toy, double t, const MapOptions& opts = {}) {
  if (std::abs(t) >= opts.t_range)
    throw std::range_error("build_family_t: |t| out of configured range");
  const Field3& e = toy.eps.value;
  const int zdeg = std::max(e.degree(2), 1);
  std::array<int, 3> deg{e.degree(0), e.degree(1), zdeg};
  Field3 eps = Field3::zero(deg, e.domain());
  // copy existing coefficients
  const int n0 = e.degree(0) + 1, n1 = e.degree(1) + 1, n2 = e.degree(2) + 1;
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j)
      for (int k = 0; k < n2; ++k)
        eps.coeffs()[(i * n1 + j) * (zdeg + 1) + k] = e.coeffs()[(i * n1 + j) * n2 + k];
  // minus t*z in the first coordinate means eps -= t*z
  const Interval zax = e.domain().axis(2);
  if (std::abs(zax.center()) > 1e-14)
    throw std::invalid_argument("build_family_t: z axis must be centred at 0");
  eps.coeffs()[0 * (zdeg + 1) + 1] -= t * zax.half_width();
  return make_henon_3d(toy.f, std::move(eps), toy.delta.value, toy.eps_budget);
}

// ---------------------------------------------------------------------------
// horizontal-like change of variables

// H(x,y) = (f(x) - eps(x,y), y)                      (2-D)
// H(x,y,z) = (f(x) - eps(x,y,z), y, z - d(y)),       (3-D)
// with d(y) = delta(y, f^{-1}(y), 0) on the decreasing branch of f.
template <int D>
struct Horizontal {
  std::shared_ptr<const HenonLike<D>> map;
  Field1 d, d_prime;  // 3-D only

  static Horizontal make(std::shared_ptr<const HenonLike<D>> m) {
    Horizontal h;
    h.map = std::move(m);
    if constexpr (D == 3) {
      const Unimodal1D& f = h.map->f;
      const Interval dom = f.domain();
      const double c = f.critical_point();
      const double v0 = f.critical_value();
      // keep the fit nodes inside the range reachable by the right branch
      const double reach_lo = f(dom.hi + 0.03 * dom.width(), 0.04) + 0.02 * dom.width();
      const Interval ddom{std::max(dom.lo, reach_lo), c + 0.8 * (v0 - c)};
      h.d = fit_function(
          [&](double y) {
            Point<3> p;
            p[0] = y;
            p[1] = f.inverse_right(y, 0.035);
            p[2] = 0.0;
            return h.map->delta(p, 0.05);
          },
          32, ddom);
      h.d_prime = h.d.derivative(0);
    }
    return h;
  }

  double d_at(double y) const {
    if constexpr (D == 3) return d(Point<1>(y), 0.01);
    return 0.0;
  }

  // First coordinate of H^{-1}: solves f(u) - eps(u, y, zeta) = x on the
  // branch right of the critical point.
  double phi_inv(const Point<D>& w, double seed = std::numeric_limits<double>::quiet_NaN()) const {
    const Unimodal1D& f = map->f;
    const Interval dom = f.domain();
    Point<D> q = w;  // q[0] will carry the running u
    if constexpr (D == 3) q[2] = w[2] + d_at(w[1]);
    auto g = [&](double u) {
      Point<D> e = q;
      e[0] = u;
      return f(u, 0.05) - map->eps(e, 0.05);
    };
    auto dg = [&](double u) {
      Point<D> e = q;
      e[0] = u;
      return f.deriv(u, 0.05) - map->eps.partial(0, e, 0.05);
    };
    Interval bracket{f.critical_point() + 1e-9 * dom.width(), dom.hi + 0.04 * dom.width()};
    RootOptions opts;
    opts.seed = seed;
    return invert_monotone(g, w[0], bracket, opts, dg);
  }

  Point<D> h_inv(const Point<D>& w, double seed = std::numeric_limits<double>::quiet_NaN()) const {
    Point<D> out;
    if constexpr (D == 2) {
      out[0] = phi_inv(w, seed);
      out[1] = w[1];
    } else {
      const double zeta = w[2] + d_at(w[1]);
      Point<D> v = w;
      v[2] = w[2];
      out[0] = phi_inv(w, seed);
      out[1] = w[1];
      out[2] = zeta;
    }
    return out;
  }

  Mat<D> h_inv_jacobian(const Point<D>& w) const {
    const Point<D> u = h_inv(w);
    const Unimodal1D& f = map->f;
    const double denom = f.deriv(u[0], 0.05) - map->eps.partial(0, u, 0.05);
    Mat<D> j = Mat<D>::Identity();
    if constexpr (D == 2) {
      j(0, 0) = 1.0 / denom;
      j(0, 1) = map->eps.partial(1, u, 0.05) / denom;
    } else {
      const double dp = d_prime(Point<1>(w[1]), 0.01);
      const double ey = map->eps.partial(1, u, 0.05);
      const double ez = map->eps.partial(2, u, 0.05);
      j(0, 0) = 1.0 / denom;
      j(0, 1) = (ey + ez * dp) / denom;
      j(0, 2) = ez / denom;
      j(2, 1) = dp;
    }
    return j;
  }

  Point<D> h_forward(const Point<D>& w) const {
    Point<D> out;
    out[0] = map->f(w[0], 0.05) - map->eps(w, 0.05);
    out[1] = w[1];
    if constexpr (D == 3) out[2] = w[2] - d_at(w[1]);
    return out;
  }
};

template <int D>
Horizontal<D> horizontal(std::shared_ptr<const HenonLike<D>> m) {
  return Horizontal<D>::make(std::move(m));
}

// ---------------------------------------------------------------------------
// serialization

inline nlohmann::json to_json(const HenonLike2D& m) {
  return {{"kind", "2d"}, {"f", m.f.field().to_json()}, {"eps", m.eps.value.to_json()}};
}

inline nlohmann::json to_json(const HenonLike3D& m) {
  return {{"kind", m.is_toy() ? "toy" : "3d"},
          {"f", m.f.field().to_json()},
          {"eps", m.eps.value.to_json()},
          {"delta", m.delta.value.to_json()}};
}

inline HenonLike2D henon2d_from_json(const nlohmann::json& j) {
  return make_henon_2d(Unimodal1D::from_field(Field1::from_json(j.at("f"))),
                       Field2::from_json(j.at("eps")), 1e9);
}

inline HenonLike3D henon3d_from_json(const nlohmann::json& j) {
  return make_henon_3d(Unimodal1D::from_field(Field1::from_json(j.at("f"))),
                       Field3::from_json(j.at("eps")), Field3::from_json(j.at("delta")), 1e9);
}

}  // namespace henon
