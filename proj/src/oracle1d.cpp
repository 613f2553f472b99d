#include "henon/oracle1d.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "henon/chebyshev.hpp"
#include "henon/roots.hpp"

namespace henon {

namespace {

// Even Chebyshev series on [-hw, hw]: f(x) = sum a_k T_{2k}(x / hw).
struct EvenSeries {
  double hw;
  Eigen::VectorXd a;

  double eval(double x) const {
    const double t = x / hw;
    const double u = 2.0 * t * t - 1.0;  // T_{2k}(t) = T_k(2t^2 - 1)
    double b1 = 0.0, b2 = 0.0;
    for (Eigen::Index k = a.size() - 1; k >= 1; --k) {
      const double b0 = 2.0 * u * b1 - b2 + a[k];
      b2 = b1;
      b1 = b0;
    }
    return u * b1 - b2 + a[0];
  }
};

Eigen::VectorXd residual(const EvenSeries& f, const Eigen::VectorXd& coll, double v0) {
  const double fv = f.eval(0.0);
  const double lambda = f.eval(fv) / fv;
  Eigen::VectorXd r(coll.size() + 1);
  r[0] = fv - v0;
  for (Eigen::Index i = 0; i < coll.size(); ++i) {
    const double x = coll[i];
    r[i + 1] = f.eval(f.eval(lambda * x)) / lambda - f.eval(x);
  }
  return r;
}

}  // namespace

DoublingFixedPoint solve_doubling_fixed_point(double v0, int degree, double halfwidth) {
  // Solve in the g(0) = 1 normalization on [-hw_g, hw_g], hw_g slightly
  // larger than halfwidth / v0, then rescale to the tower normalization.
  const double hw_g = 1.02 * halfwidth / v0;
  const int n_even = degree / 2 + 1;
  EvenSeries f{hw_g, Eigen::VectorXd::Zero(n_even)};

  // seed: classical truncated Feigenbaum profile, transformed by a DCT on
  // the u = 2 (x/hw)^2 - 1 grid
  {
    auto seed = [](double x) {
      const double u = x * x;
      return 1.0 - 1.5276330 * u + 0.1048152 * u * u + 0.0267057 * u * u * u -
             0.0035274 * u * u * u * u;
    };
    Eigen::VectorXd us = cheb::nodes(n_even);
    Eigen::VectorXd vals(n_even);
    for (int i = 0; i < n_even; ++i)
      vals[i] = seed(hw_g * std::sqrt(0.5 * (1.0 + us[i])));
    f.a = cheb::value_to_coeff(n_even) * vals;
  }

  // collocation points in (0, hw_g)
  Eigen::VectorXd coll(n_even - 1);
  for (int i = 0; i < n_even - 1; ++i)
    coll[i] = hw_g * std::sqrt(0.5 * (1.0 + std::cos(M_PI * (i + 0.5) / (n_even - 1.0))));

  Eigen::VectorXd r = residual(f, coll, 1.0);
  for (int it = 0; it < 80 && r.cwiseAbs().maxCoeff() > 1e-13; ++it) {
    Eigen::MatrixXd jac(n_even, n_even);
    for (int k = 0; k < n_even; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(f.a[k]));
      EvenSeries fp = f;
      fp.a[k] += h;
      jac.col(k) = (residual(fp, coll, 1.0) - r) / h;
    }
    const Eigen::VectorXd step = jac.fullPivLu().solve(r);
    double scale = 1.0;
    const double r0 = r.cwiseAbs().maxCoeff();
    for (int half = 0; half < 12; ++half) {
      EvenSeries trial = f;
      trial.a -= scale * step;
      Eigen::VectorXd rt = residual(trial, coll, 1.0);
      if (rt.cwiseAbs().maxCoeff() < r0) {
        f = trial;
        r = rt;
        break;
      }
      scale *= 0.5;
    }
  }
  if (r.cwiseAbs().maxCoeff() > 1e-10)
    throw ConvergenceError("solve_doubling_fixed_point: Newton stalled");

  DoublingFixedPoint out;
  out.v0 = v0;
  out.residual = r.cwiseAbs().maxCoeff();
  out.f_star = Unimodal1D::from_field(fit_function(
      [&](double x) { return v0 * f.eval(x / v0); }, degree, Interval{-halfwidth, halfwidth}));
  out.lambda = f.eval(f.eval(0.0)) / f.eval(0.0);
  out.tip = v0;

  // v-link chi(x) = f*^{-1}(lambda x); tip is its fixed point. The universal
  // diffeomorphism solves v(x) = v(chi_hat(x)) / alpha with the recentered
  // link chi_hat(x) = chi(x + tip) - tip; iterate with the v(0)=0, v'(0)=1
  // normalization re-imposed each round (the constant and linear modes of the
  // transfer operator are neutral or expanding).
  const Unimodal1D& fs = out.f_star;
  out.alpha_link = out.lambda / fs.deriv(out.tip);
  const Interval vdom{-halfwidth - out.tip, halfwidth - out.tip};
  RootOptions tight;
  tight.tol = 1e-15;
  auto chi_hat = [&](double x) {
    const Interval dom = fs.domain();
    Interval bracket{fs.critical_point() + 1e-9 * dom.width(), dom.hi + 0.04 * dom.width()};
    return invert_monotone([&](double u) { return fs(u, 0.05); }, out.lambda * (x + out.tip),
                           bracket, tight, [&](double u) { return fs.deriv(u, 0.05); }) -
           out.tip;
  };
  Field1 v = fit_function([](double x) { return x; }, 44, vdom);
  for (int it = 0; it < 80; ++it) {
    Field1 next = fit_function([&](double x) { return v(Point<1>(chi_hat(x))) / out.alpha_link; },
                               44, vdom);
    const double c0 = next(Point<1>(0.0));
    const double c1 = next.derivative(0)(Point<1>(0.0));
    next = fit_function([&](double x) { return (next(Point<1>(x)) - c0) / c1; }, 44, vdom);
    double diff = 0.0;
    for (int i = 0; i <= 24; ++i) {
      const double x = vdom.lo + vdom.width() * i / 24.0;
      diff = std::max(diff, std::abs(next(Point<1>(x)) - v(Point<1>(x))));
    }
    v = next;
    if (diff < 1e-13) break;
  }
  out.v_star = v;
  out.v_star_prime = out.v_star.derivative(0);
  return out;
}

Field1 universal_a_profile(const DoublingFixedPoint& fp) {
  const Interval dom = fp.f_star.domain();
  return fit_function(
      [&](double x) {
        const double num = fp.v_star_prime(Point<1>(x - fp.tip));
        const double den = fp.v_star_prime(Point<1>(fp.f_star(x) - fp.tip));
        return num / den;
      },
      48, dom);
}

namespace {

double critical_orbit(double c, long iters) {
  double x = 0.0;
  for (long i = 0; i < iters; ++i) x = c - x * x;
  return x;
}

}  // namespace

std::vector<double> superstable_parameters(int n) {
  std::vector<double> s;
  s.reserve(static_cast<size_t>(n));
  s.push_back(1.0);  // f_c^2(0) = c - c^2 = 0
  double gap_prev = 1.0;
  for (int k = 2; k <= n; ++k) {
    const long period = 1L << k;
    const double predict = s.back() + gap_prev / 4.6692;
    double lo = s.back() + 0.25 * (predict - s.back());
    double hi = predict + 1.2 * (predict - s.back());
    auto h = [&](double c) { return critical_orbit(c, period); };
    double flo = h(lo), fhi = h(hi);
    int expand = 0;
    while (std::signbit(flo) == std::signbit(fhi) && expand++ < 40) {
      hi += 0.5 * (hi - lo);
      fhi = h(hi);
    }
    if (std::signbit(flo) == std::signbit(fhi))
      throw ConvergenceError("superstable_parameters: bracket not found");
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::abs(hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (std::signbit(h(mid)) == std::signbit(flo)) {
        lo = mid;
        flo = h(mid);
      } else {
        hi = mid;
      }
    }
    gap_prev = 0.5 * (lo + hi) - s.back();
    s.push_back(0.5 * (lo + hi));
  }
  return s;
}

double feigenbaum_delta(const std::vector<double>& s) {
  const size_t n = s.size();
  if (n < 3) throw std::invalid_argument("feigenbaum_delta: need >= 3 superstables");
  return (s[n - 2] - s[n - 3]) / (s[n - 1] - s[n - 2]);
}

double feigenbaum_accumulation(int n) {
  const std::vector<double> s = superstable_parameters(n);
  const double delta = feigenbaum_delta(s);
  return s.back() + (s.back() - s[s.size() - 2]) / (delta - 1.0);
}

Unimodal1D renormalize_1d(const Unimodal1D& f, int degree) {
  const double xc = f.critical_point();
  const double v0 = f.critical_value();
  const double p_crit = f(f(xc));
  const double lambda = p_crit / v0;
  if (!(lambda < -1e-4 && lambda > -0.999))
    throw NotHenonLikeError("renormalize_1d: scaling ratio outside (-1, 0)");
  const double s = 1.0 / lambda;
  return Unimodal1D::from_field(
      fit_function([&](double x) { return s * f(f(lambda * x)); }, degree, f.domain()));
}

}  // namespace henon
