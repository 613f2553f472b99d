#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "henon/maps.hpp"
#include "henon/util.hpp"

namespace henon {

class NotRenormalizableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TuningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RenormOptions {
  int deg_f = 48;
  int deg_eps = 24;
  int deg_eps_z = -1;  // -1: inherit (0 stays 0, so toy models stay toy)
  int deg_delta = 24;
  int deg_delta_z = 24;
  double budget = 0.1;
  double lambda_lo = -0.999;  // admissible window for the scaling ratio
  double lambda_hi = -1e-4;
  int conj_samples = 200;
  std::uint64_t seed = 20240901;
  bool check_conjugacy = true;
};

struct RenormStep {
  double s = 0.0;       // dilation, s < -1
  double lambda = 0.0;  // 1/s
  double eps_norm = 0.0;    // sup|eps_out| / halfwidth
  double delta_norm = 0.0;  // sup|delta_out| / halfwidth (3-D)
  double conjugacy_defect = 0.0;
};

// ---------------------------------------------------------------------------
// Pre-renormalization kernel.
//
// G = H o F^2 o H^{-1} on the dilated box. The first coordinate of the
// renormalized map is split as f1(x) - eps1(x,y[,z]) with
//   f1(x)   = s * G1(lambda x, 0, 0)
//   eps1(w) = s * [G1(lambda x, 0, 0) - G1(lambda x, lambda y, lambda z)].
// The difference is evaluated in factored form: every cancellation-prone
// subtraction is routed through divided differences of the stored fields, so
// the result keeps full relative accuracy even when ||eps|| has decayed to
// 1e-100 along a tower. The same treatment produces delta1 = s * G3.
template <int D>
class RenormKernel {
 public:
  RenormKernel(std::shared_ptr<const HenonLike<D>> map, const RenormOptions& opts)
      : m_(std::move(map)), h_(Horizontal<D>::make(m_)), opts_(opts) {
    v0_ = m_->f.critical_value();
    if constexpr (D == 3) zeta0_ = h_.d_at(0.0);
    // critical point of the pre-renormalized 1-D part, then the scaling ratio
    double xc = 0.0;
    const double fd = 1e-5;
    for (int it = 0; it < 30; ++it) {
      const double pm = g1_zero(xc - fd), p0 = g1_zero(xc), pp = g1_zero(xc + fd);
      const double d1 = (pp - pm) / (2.0 * fd);
      const double d2 = (pp - 2.0 * p0 + pm) / (fd * fd);
      if (d2 == 0.0) break;
      const double step = d1 / d2;
      xc -= step;
      if (std::abs(step) < 1e-9) break;
    }
    xc_ = xc;
    lambda_ = g1_zero(xc_) / v0_;
    if (!(lambda_ >= opts.lambda_lo && lambda_ <= opts.lambda_hi))
      throw NotRenormalizableError("renormalize: scaling ratio " + std::to_string(lambda_) +
                                   " outside admissible window");
    s_ = 1.0 / lambda_;
  }

  double lambda() const { return lambda_; }
  double s() const { return s_; }
  const Horizontal<D>& horiz() const { return h_; }

  // first pre-renormalized coordinate on the (y,z) = 0 slice
  double g1_zero(double xhat) const { return slice(xhat).g10; }

  double f_value(double x) const { return s_ * slice(lambda_ * x).g10; }

  double eps_value(const Point<D>& node) const {
    const ZeroSlice& z0 = slice(lambda_ * node[0]);
    PerPoint pp = per_point(z0, node);
    // G1(xhat,0,0) - G1(xhat,yhat,zhat) =
    //   [f(X0) - f(X)] - [eps(X0,xhat,w0) - eps(X,xhat,w)]
    const double dd_f = m_->f.dd(z0.x_img, pp.x_img, 0.05);
    const double dd_e0 =
        m_->eps.value.dd_eval(0, point(z0.x_img, z0.xhat, z0.w0), pp.x_img, 0.05);
    double diff = dd_f * pp.delta_a - dd_e0 * pp.delta_a;
    if constexpr (D == 3) {
      const double w = z0.w0 + pp.delta_w;
      const double dd_e2 = m_->eps.value.dd_eval(2, point(pp.x_img, z0.xhat, w), z0.w0, 0.05);
      diff += dd_e2 * pp.delta_w;
    }
    return s_ * diff;
  }

  double delta_value(const Point<D>& node) const {
    static_assert(D == 3);
    const ZeroSlice& z0 = slice(lambda_ * node[0]);
    PerPoint pp = per_point(z0, node);
    return s_ * (z0.g3_base + pp.delta_w);
  }

 private:
  struct ZeroSlice {
    double xhat = std::numeric_limits<double>::quiet_NaN();
    double q = 0.0;      // f^{-1}(xhat), right branch
    double u0 = 0.0;     // phi^{-1} on the (y,z) = 0 slice
    double v30 = 0.0;    // delta(u0, 0, zeta0)
    double a0 = 0.0;     // eps(xhat, u0, v30)
    double x_img = 0.0;  // f(xhat) - a0
    double w0 = 0.0;     // delta(xhat, u0, v30)
    double g10 = 0.0;    // first pre-renormalized coordinate on the slice
    double g3_base = 0.0;  // w0 - d(xhat), factored (3-D)
  };

  struct PerPoint {
    double delta_a = 0.0;  // eps(xhat,u,v3) - eps(xhat,u0,v30)
    double delta_w = 0.0;  // delta(xhat,u,v3) - delta(xhat,u0,v30)
    double x_img = 0.0;    // f(xhat) - A
  };

  static Point<D> point(double a, double b, double c) {
    Point<D> p;
    p[0] = a;
    p[1] = b;
    if constexpr (D == 3) p[2] = c;
    return p;
  }

  // Newton for the gap g satisfying  f(base+g) - f(base) = rhs(g), written in
  // divided-difference form so that g keeps relative accuracy at any scale.
  template <typename Rhs, typename RhsPrime>
  double gap_newton(double base, double g_seed, Rhs rhs, RhsPrime rhs_prime) const {
    double g = g_seed;
    for (int it = 0; it < 12; ++it) {
      const double k = m_->f.dd(base + g, base, 0.05) * g - rhs(g);
      const double kp = m_->f.deriv(base + g, 0.05) - rhs_prime(g);
      const double step = k / kp;
      g -= step;
      if (std::abs(step) <= 1e-13 * std::abs(g) + 1e-300) break;
    }
    return g;
  }

  const ZeroSlice& slice(double xhat) const {
    if (xhat == cache_.xhat) return cache_;
    ZeroSlice z;
    z.xhat = xhat;
    z.q = m_->f.inverse_right(xhat, 0.035);
    // u0 = q + gap, f(q+gap) - f(q) = eps(q+gap, 0, zeta0)
    auto eps_at = [&](double u) { return m_->eps(point(u, 0.0, zeta0_), 0.05); };
    auto eps_x_at = [&](double u) { return m_->eps.partial(0, point(u, 0.0, zeta0_), 0.05); };
    const double gap0 = eps_at(z.q) / m_->f.deriv(z.q, 0.05);
    const double gap = gap_newton(z.q, gap0, [&](double g) { return eps_at(z.q + g); },
                                  [&](double g) { return eps_x_at(z.q + g); });
    z.u0 = z.q + gap;
    if constexpr (D == 3) {
      z.v30 = m_->delta(point(z.u0, 0.0, zeta0_), 0.05);
      z.a0 = m_->eps(point(xhat, z.u0, z.v30), 0.05);
      z.w0 = m_->delta(point(xhat, z.u0, z.v30), 0.05);
    } else {
      z.a0 = m_->eps(point(xhat, z.u0, 0.0), 0.05);
    }
    z.x_img = m_->f(xhat, 0.05) - z.a0;
    z.g10 = m_->f(z.x_img, 0.05) - m_->eps(point(z.x_img, xhat, z.w0), 0.05);
    if constexpr (D == 3) {
      // w0 - d(xhat) = [delta(xhat,u0,v30) - delta(xhat,q,v30)]
      //              + [delta(xhat,q,v30) - delta(xhat,q,0)]
      const double dd1 = m_->delta.value.dd_eval(1, point(xhat, z.u0, z.v30), z.q, 0.05);
      const double dd2 = m_->delta.value.dd_eval(2, point(xhat, z.q, z.v30), 0.0, 0.05);
      z.g3_base = dd1 * gap + dd2 * z.v30;
    }
    cache_ = z;
    return cache_;
  }

  PerPoint per_point(const ZeroSlice& z0, const Point<D>& node) const {
    PerPoint out;
    const double yhat = lambda_ * node[1];
    double zeta = 0.0;
    if constexpr (D == 3) zeta = lambda_ * node[2] + h_.d_at(yhat);
    auto eps_at = [&](double u) {
      return m_->eps(point(u, yhat, zeta), 0.05) - m_->eps(point(z0.u0, 0.0, zeta0_), 0.05);
    };
    auto eps_x_at = [&](double u) { return m_->eps.partial(0, point(u, yhat, zeta), 0.05); };
    const double du0 = eps_at(z0.u0) / m_->f.deriv(z0.u0, 0.05);
    const double du = gap_newton(z0.u0, du0, [&](double g) { return eps_at(z0.u0 + g); },
                                 [&](double g) { return eps_x_at(z0.u0 + g); });
    const double u = z0.u0 + du;
    double v3 = 0.0, dv3 = 0.0;
    if constexpr (D == 3) {
      v3 = m_->delta(point(u, yhat, zeta), 0.05);
      dv3 = v3 - z0.v30;
    }
    // delta_a = [eps(xhat,u,v3) - eps(xhat,u0,v3)] + [eps(xhat,u0,v3) - eps(xhat,u0,v30)]
    double delta_a = m_->eps.value.dd_eval(1, point(z0.xhat, u, v3), z0.u0, 0.05) * du;
    if constexpr (D == 3)
      delta_a += m_->eps.value.dd_eval(2, point(z0.xhat, z0.u0, v3), z0.v30, 0.05) * dv3;
    out.delta_a = delta_a;
    out.x_img = z0.x_img - delta_a;
    if constexpr (D == 3) {
      out.delta_w = m_->delta.value.dd_eval(1, point(z0.xhat, u, v3), z0.u0, 0.05) * du +
                    m_->delta.value.dd_eval(2, point(z0.xhat, z0.u0, v3), z0.v30, 0.05) * dv3;
    }
    return out;
  }

  std::shared_ptr<const HenonLike<D>> m_;
  Horizontal<D> h_;
  RenormOptions opts_;
  double v0_ = 0.0, zeta0_ = 0.0, xc_ = 0.0, lambda_ = 0.0, s_ = 0.0;
  mutable ZeroSlice cache_;
};

// ---------------------------------------------------------------------------

template <int D>
struct RenormResult {
  std::shared_ptr<const HenonLike<D>> map;
  RenormStep step;
};

template <int D>
RenormResult<D> renormalize(std::shared_ptr<const HenonLike<D>> m,
                            const RenormOptions& opts = {}) {
  RenormKernel<D> kernel(m, opts);
  const Box<D>& box = m->box;
  const double hw = box.axis(0).half_width();

  Unimodal1D f1 = Unimodal1D::from_field(
      fit_function([&](double x) { return kernel.f_value(x); }, opts.deg_f, box.axis(0)));

  std::array<int, D> eps_deg;
  eps_deg[0] = opts.deg_eps;
  eps_deg[1] = opts.deg_eps;
  if constexpr (D == 3) {
    const int in_z = m->eps.value.degree(2);
    eps_deg[2] = opts.deg_eps_z >= 0 ? opts.deg_eps_z : (in_z == 0 ? 0 : std::max(in_z, 8));
  }
  Field<D> eps1 = Field<D>::fit([&](const Point<D>& p) { return kernel.eps_value(p); }, eps_deg,
                                box);

  RenormResult<D> out;
  out.step.s = kernel.s();
  out.step.lambda = kernel.lambda();
  out.step.eps_norm = eps1.sup_estimate() / hw;

  std::shared_ptr<HenonLike<D>> next;
  try {
    if constexpr (D == 2) {
      next = std::make_shared<HenonLike<D>>(make_henon_2d(f1, std::move(eps1), opts.budget));
    } else {
      Field<D> delta1 = Field<D>::fit([&](const Point<D>& p) { return kernel.delta_value(p); },
                                      {opts.deg_delta, opts.deg_delta, opts.deg_delta_z}, box);
      out.step.delta_norm = delta1.sup_estimate() / hw;
      next = std::make_shared<HenonLike<D>>(
          make_henon_3d(f1, std::move(eps1), std::move(delta1), opts.budget));
    }
  } catch (const BudgetError& e) {
    throw NotRenormalizableError(std::string("renormalize: ") + e.what());
  }

  if (opts.check_conjugacy) {
    // sup over samples of | Psi(RF(w)) - F^2(Psi(w)) |, Psi = H^{-1} Lambda^{-1}
    std::mt19937_64 rng = rng_for(opts.seed, 17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    const Horizontal<D>& h = kernel.horiz();
    for (int i = 0; i < opts.conj_samples; ++i) {
      Point<D> w;
      for (int a = 0; a < D; ++a) w[a] = u(rng) * box.axis(a).half_width();
      const Point<D> lhs = h.h_inv(kernel.lambda() * apply(*next, w, 0.02));
      const Point<D> mid = h.h_inv(kernel.lambda() * w);
      const Point<D> rhs = apply(*m, apply(*m, mid, 0.04), 0.04);
      worst = std::max(worst, (lhs - rhs).template lpNorm<Eigen::Infinity>());
    }
    out.step.conjugacy_defect = worst;
  }
  out.map = next;
  return out;
}

// ---------------------------------------------------------------------------
// towers

template <int D>
struct Tower {
  std::vector<std::shared_ptr<const HenonLike<D>>> levels;  // levels[k] = R^k F
  std::vector<std::shared_ptr<const Horizontal<D>>> horizontals;  // per step
  std::vector<RenormStep> steps;
  std::string failure;  // why deepening stopped; empty if the cap was reached
  RenormOptions opts;

  int depth() const { return static_cast<int>(steps.size()); }
  const HenonLike<D>& level(int k) const { return *levels[static_cast<size_t>(k)]; }
  std::shared_ptr<const HenonLike<D>> level_ptr(int k) const {
    return levels[static_cast<size_t>(k)];
  }
  const RenormStep& step(int k) const { return steps[static_cast<size_t>(k)]; }

  // A tower whose deepest levels are numerically at the degenerate 1-D
  // limit can be continued by reusing its deepest link.
  bool tail_converged() const {
    if (depth() < 2) return false;
    return steps.back().eps_norm < 1e-13 &&
           (depth() < 3 || std::abs(steps.back().lambda - steps[steps.size() - 2].lambda) < 1e-6);
  }
};

template <int D>
Tower<D> build_tower(const HenonLike<D>& base, int cap, const RenormOptions& opts = {}) {
  Tower<D> t;
  t.opts = opts;
  t.levels.push_back(std::make_shared<HenonLike<D>>(base));
  for (int k = 0; k < cap; ++k) {
    try {
      RenormResult<D> r = renormalize<D>(t.levels.back(), opts);
      t.horizontals.push_back(
          std::make_shared<Horizontal<D>>(Horizontal<D>::make(t.levels.back())));
      t.levels.push_back(r.map);
      t.steps.push_back(r.step);
    } catch (const std::exception& e) {
      t.failure = e.what();
      break;
    }
  }
  return t;
}

// Largest N <= cap with budgets and step invariants satisfied on levels 0..N.
template <int D>
int renorm_depth(const HenonLike<D>& m, double budget, int cap, RenormOptions opts = {}) {
  opts.budget = budget;
  if (m.budget_measure() > budget * (1.0 + 1e-9)) return 0;
  Tower<D> t = build_tower(m, cap, opts);
  int n = 0;
  while (n < t.depth() && t.step(n).eps_norm <= budget &&
         (!opts.check_conjugacy || t.step(n).conjugacy_defect <= 1e-8))
    ++n;
  return n;
}

// ---------------------------------------------------------------------------
// parameter tuning
//
// Bisection on the renormalization cascade: at the first level where the
// tower stops being renormalizable, the scaling ratio tells on which side of
// the depth-N window the parameter sits (lambda >= 0 side: too small; escape
// side: too large).

namespace detail {

enum class TuneSide { kLow, kHigh, kDeepEnough };

template <int D>
TuneSide classify_for_tuning(const HenonLike<D>& m, int want_depth, const RenormOptions& opts) {
  // cheap pre-classification from the critical orbit of the 1-D part
  {
    const Interval dom = m.f.domain();
    const double v0 = m.f.critical_value();
    if (v0 > dom.hi + 0.03 * dom.width()) return TuneSide::kHigh;
    const double lambda_raw = m.f(v0, 0.04) / v0;
    if (lambda_raw >= 0.0) return TuneSide::kLow;
    if (lambda_raw <= -1.0) return TuneSide::kHigh;
  }
  std::shared_ptr<const HenonLike<D>> cur = std::make_shared<HenonLike<D>>(m);
  double last_lambda = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < want_depth; ++k) {
    // classify from the raw scaling ratio before the admissibility window
    double lambda;
    try {
      RenormOptions probe = opts;
      probe.lambda_lo = -10.0;
      probe.lambda_hi = 10.0;
      probe.check_conjugacy = false;
      RenormKernel<D> kernel(cur, probe);
      lambda = kernel.lambda();
    } catch (const std::exception&) {
      // the 1-D part broke down entirely: decide from the previous ratio
      if (std::isfinite(last_lambda) && last_lambda < -0.5) return TuneSide::kHigh;
      return TuneSide::kLow;
    }
    if (lambda >= opts.lambda_hi) return TuneSide::kLow;    // not yet flipped
    if (lambda <= opts.lambda_lo) return TuneSide::kHigh;   // escaping
    try {
      RenormOptions step_opts = opts;
      step_opts.check_conjugacy = false;
      RenormResult<D> r = renormalize<D>(cur, step_opts);
      cur = r.map;
      last_lambda = lambda;
    } catch (const std::exception&) {
      return (lambda < -0.5) ? TuneSide::kHigh : TuneSide::kLow;
    }
  }
  return TuneSide::kDeepEnough;
}

}  // namespace detail

// c with renorm_depth(family(c)) >= want_depth, by cascade bisection.
template <int D>
double tune_parameter(const std::function<HenonLike<D>(double)>& family, int want_depth,
                      double c_lo = 0.9, double c_hi = 2.0, RenormOptions opts = {}) {
  opts.check_conjugacy = false;
  auto classify = [&](double c) { return detail::classify_for_tuning(family(c), want_depth, opts); };
  detail::TuneSide lo_side = classify(c_lo);
  if (lo_side == detail::TuneSide::kDeepEnough) return c_lo;
  if (lo_side != detail::TuneSide::kLow) throw TuningError("tune_parameter: left bracket not low");
  detail::TuneSide hi_side = classify(c_hi);
  if (hi_side == detail::TuneSide::kDeepEnough) return c_hi;
  if (hi_side != detail::TuneSide::kHigh)
    throw TuningError("tune_parameter: right bracket not high");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (c_lo + c_hi);
    const detail::TuneSide side = classify(mid);
    if (side == detail::TuneSide::kDeepEnough) return mid;
    if (side == detail::TuneSide::kLow)
      c_lo = mid;
    else
      c_hi = mid;
    if (c_hi - c_lo < 1e-15) break;
  }
  throw TuningError("tune_parameter: bisection exhausted without reaching requested depth");
}

inline double tune_family_2d(double b, int want_depth, const MapOptions& mopts = {},
                             RenormOptions ropts = {}) {
  return tune_parameter<2>(
      [&](double c) { return build_family_2d(c, b, mopts); }, want_depth, 0.9, 2.0, ropts);
}

}  // namespace henon
