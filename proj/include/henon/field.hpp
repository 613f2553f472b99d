#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>
#include <json.hpp>

#include "henon/boxes.hpp"
#include "henon/chebyshev.hpp"

namespace henon {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Default extrapolation margin, as a fraction of the box width per axis.
inline constexpr double kEvalMargin = 0.02;

// Tensor Chebyshev series over an interval / rectangle / cuboid.
// Coefficients are stored row-major (last axis fastest).
template <int D>
class Field {
 public:
  using PointD = Point<D>;

  Field() = default;

  static Field from_coeffs(Eigen::VectorXd coeffs, std::array<int, D> degrees,
                           const Box<D>& dom) {
    Field f;
    f.dom_ = dom;
    f.deg_ = degrees;
    f.coef_ = std::move(coeffs);
    dom.validate();
    if (f.coef_.size() != f.coeff_count())
      throw std::invalid_argument("Field: coefficient count mismatch");
    return f;
  }

  static Field zero(std::array<int, D> degrees, const Box<D>& dom) {
    Field f;
    f.dom_ = dom;
    f.deg_ = degrees;
    f.coef_ = Eigen::VectorXd::Zero(f.coeff_count());
    return f;
  }

  static Field fit(const std::function<double(const PointD&)>& sampler,
                   std::array<int, D> degrees, const Box<D>& dom) {
    Field f;
    f.dom_ = dom;
    f.deg_ = degrees;
    dom.validate();
    std::array<Eigen::VectorXd, D> ax_nodes;
    for (int a = 0; a < D; ++a)
      ax_nodes[static_cast<size_t>(a)] =
          cheb::nodes(degrees[static_cast<size_t>(a)] + 1, dom.axis(a));

    Eigen::VectorXd values(f.coeff_count());
    std::array<int, D> idx{};
    PointD p;
    for (Eigen::Index flat = 0; flat < values.size(); ++flat) {
      f.unflatten(flat, idx);
      for (int a = 0; a < D; ++a) p[a] = ax_nodes[static_cast<size_t>(a)][idx[static_cast<size_t>(a)]];
      const double v = sampler(p);
      if (!std::isfinite(v)) throw FitError("Field::fit: sampler returned non-finite value");
      values[flat] = v;
    }
    f.coef_ = f.transform_values(values);
    return f;
  }

  double operator()(const PointD& p, double margin = kEvalMargin) const {
    check_domain(p, margin);
    return eval_unchecked(p);
  }

  double eval_unchecked(const PointD& p) const {
    std::array<Eigen::VectorXd, D> tv;
    for (int a = 0; a < D; ++a) {
      tv[static_cast<size_t>(a)].resize(n(a));
      cheb::t_values(dom_.axis(a).to_unit(p[a]), tv[static_cast<size_t>(a)]);
    }
    return contract(coef_, tv);
  }

  // Divided difference along one axis: returns q such that
  //   field(p) - field(p with p[axis] = b) == q * (p[axis] - b),
  // evaluated without cancellation even when |p[axis] - b| is tiny.
  double dd_eval(int axis, const PointD& p, double b, double margin = kEvalMargin) const {
    check_domain(p, margin);
    if (!dom_.axis(axis).contains(b, margin))
      throw DomainError("Field::dd_eval: second point outside domain");
    Eigen::VectorXd line = coeff_line(axis, p);
    const Interval& iv = dom_.axis(axis);
    Eigen::VectorXd dd(line.size());
    cheb::t_divided_differences(iv.to_unit(p[axis]), iv.to_unit(b), dd);
    // d(unit)/dx = 2 / width
    return line.dot(dd) * 2.0 / iv.width();
  }

  Field derivative(int axis) const {
    Field g;
    g.dom_ = dom_;
    g.deg_ = deg_;
    g.deg_[static_cast<size_t>(axis)] = std::max(deg_[static_cast<size_t>(axis)] - 1, 0);
    g.coef_.resize(g.coeff_count());
    const double scale = 2.0 / dom_.axis(axis).width();
    // Apply the 1-D derivative recurrence to every coefficient line.
    const Eigen::Index stride = line_stride(axis);
    const Eigen::Index lines = coeff_count() / n(axis);
    Eigen::VectorXd in(n(axis));
    std::array<int, D> idx{};
    for (Eigen::Index l = 0; l < lines; ++l) {
      const Eigen::Index base = line_base(axis, l, idx);
      for (int k = 0; k < n(axis); ++k) in[k] = coef_[base + k * stride];
      Eigen::VectorXd out = cheb::derivative_coeffs(in) * scale;
      const Eigen::Index gstride = g.line_stride(axis);
      const Eigen::Index gbase = g.line_base_from_idx(axis, idx);
      for (int k = 0; k < g.n(axis); ++k) g.coef_[gbase + k * gstride] = out[k];
    }
    return g;
  }

  // Interpolated values at the tensor fit nodes (row-major flat order).
  Eigen::VectorXd values_at_nodes() const {
    Eigen::VectorXd v = coef_;
    for (int a = D - 1; a >= 0; --a) {
      const int na = n(a);
      Eigen::MatrixXd synth(na, na);  // synth(i,k) = T_k(x_i)
      Eigen::VectorXd tv(na);
      Eigen::VectorXd xs = cheb::nodes(na);
      for (int i = 0; i < na; ++i) {
        cheb::t_values(xs[i], tv);
        synth.row(i) = tv.transpose();
      }
      v = apply_axis_matrix(v, synth, a);
    }
    return v;
  }

  double sup_estimate() const { return values_at_nodes().cwiseAbs().maxCoeff(); }

  // Largest coefficient in the top decile of degrees, relative to the
  // overall largest coefficient.
  double tail_indicator() const {
    const double lead = coef_.cwiseAbs().maxCoeff();
    if (lead == 0.0) return 0.0;
    double tail = 0.0;
    std::array<int, D> idx{};
    for (Eigen::Index flat = 0; flat < coef_.size(); ++flat) {
      unflatten(flat, idx);
      bool in_tail = false;
      for (int a = 0; a < D; ++a) {
        const int da = deg_[static_cast<size_t>(a)];
        if (da >= 5 && idx[static_cast<size_t>(a)] > da - std::max(1, da / 10)) in_tail = true;
      }
      if (in_tail) tail = std::max(tail, std::abs(coef_[flat]));
    }
    return tail / lead;
  }

  const Box<D>& domain() const { return dom_; }
  const std::array<int, D>& degrees() const { return deg_; }
  int degree(int axis) const { return deg_[static_cast<size_t>(axis)]; }
  const Eigen::VectorXd& coeffs() const { return coef_; }
  Eigen::VectorXd& coeffs() { return coef_; }

  Eigen::Index coeff_count() const {
    Eigen::Index c = 1;
    for (int a = 0; a < D; ++a) c *= n(a);
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json dom = nlohmann::json::array();
    for (int a = 0; a < D; ++a)
      dom.push_back({dom_.axis(a).lo, dom_.axis(a).hi});
    nlohmann::json degrees = nlohmann::json::array();
    for (int a = 0; a < D; ++a) degrees.push_back(deg_[static_cast<size_t>(a)]);
    std::vector<double> c(coef_.data(), coef_.data() + coef_.size());
    return {{"domain", dom}, {"degrees", degrees}, {"coefficients", c}};
  }

  static Field from_json(const nlohmann::json& j) {
    Box<D> dom;
    for (int a = 0; a < D; ++a) {
      dom.axis(a).lo = j.at("domain").at(a).at(0).get<double>();
      dom.axis(a).hi = j.at("domain").at(a).at(1).get<double>();
    }
    std::array<int, D> deg{};
    for (int a = 0; a < D; ++a) deg[static_cast<size_t>(a)] = j.at("degrees").at(a).get<int>();
    const auto c = j.at("coefficients").get<std::vector<double>>();
    Eigen::VectorXd coef = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    return from_coeffs(std::move(coef), deg, dom);
  }

 private:
  int n(int axis) const { return deg_[static_cast<size_t>(axis)] + 1; }

  void check_domain(const PointD& p, double margin) const {
    if (!dom_.contains(p, margin))
      throw DomainError("Field: evaluation point outside domain (+margin)");
  }

  void unflatten(Eigen::Index flat, std::array<int, D>& idx) const {
    for (int a = D - 1; a >= 0; --a) {
      idx[static_cast<size_t>(a)] = static_cast<int>(flat % n(a));
      flat /= n(a);
    }
  }

  Eigen::Index line_stride(int axis) const {
    Eigen::Index s = 1;
    for (int a = D - 1; a > axis; --a) s *= n(a);
    return s;
  }

  // Base flat index of the l-th coefficient line along `axis`; fills idx with
  // the multi-index of that base point (idx[axis] == 0).
  Eigen::Index line_base(int axis, Eigen::Index l, std::array<int, D>& idx) const {
    for (int a = D - 1; a >= 0; --a) {
      if (a == axis) {
        idx[static_cast<size_t>(a)] = 0;
        continue;
      }
      idx[static_cast<size_t>(a)] = static_cast<int>(l % n(a));
      l /= n(a);
    }
    return line_base_from_idx(axis, idx);
  }

  Eigen::Index line_base_from_idx(int axis, const std::array<int, D>& idx) const {
    Eigen::Index flat = 0;
    for (int a = 0; a < D; ++a) {
      flat *= n(a);
      flat += (a == axis) ? 0 : idx[static_cast<size_t>(a)];
    }
    return flat;
  }

  // Contract one axis with a matrix acting on that axis' coefficients.
  Eigen::VectorXd apply_axis_matrix(const Eigen::VectorXd& data, const Eigen::MatrixXd& m,
                                    int axis) const {
    const Eigen::Index stride = line_stride(axis);
    const Eigen::Index na = n(axis);
    const Eigen::Index lines = data.size() / na;
    Eigen::VectorXd out(data.size());
    Eigen::VectorXd in(na);
    std::array<int, D> idx{};
    for (Eigen::Index l = 0; l < lines; ++l) {
      const Eigen::Index base = line_base(axis, l, idx);
      for (Eigen::Index k = 0; k < na; ++k) in[k] = data[base + k * stride];
      Eigen::VectorXd o = m * in;
      for (Eigen::Index k = 0; k < na; ++k) out[base + k * stride] = o[k];
    }
    return out;
  }

  static double contract(const Eigen::VectorXd& data, const std::array<Eigen::VectorXd, D>& tv) {
    if constexpr (D == 1) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < data.size(); ++i) acc += data[i] * tv[0][i];
      return acc;
    } else if constexpr (D == 2) {
      const Eigen::Index n0 = tv[0].size(), n1 = tv[1].size();
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
          data.data(), n0, n1);
      if (n1 == 1) return m.col(0).dot(tv[0]);
      return tv[0].dot(m * tv[1]);
    } else {
      const Eigen::Index n0 = tv[0].size(), n1 = tv[1].size(), n2 = tv[2].size();
      Eigen::VectorXd partial(n0 * n1);
      if (n2 == 1) {
        partial = data;
      } else {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
            data.data(), n0 * n1, n2);
        partial = m * tv[2];
      }
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m01(
          partial.data(), n0, n1);
      if (n1 == 1) return m01.col(0).dot(tv[0]);
      return tv[0].dot(m01 * tv[1]);
    }
  }

  // Coefficient series along `axis` with all other axes contracted at p.
  Eigen::VectorXd coeff_line(int axis, const PointD& p) const {
    std::array<Eigen::VectorXd, D> tv;
    for (int a = 0; a < D; ++a) {
      if (a == axis) continue;
      tv[static_cast<size_t>(a)].resize(n(a));
      cheb::t_values(dom_.axis(a).to_unit(p[a]), tv[static_cast<size_t>(a)]);
    }
    const Eigen::Index stride = line_stride(axis);
    const Eigen::Index na = n(axis);
    Eigen::VectorXd line = Eigen::VectorXd::Zero(na);
    std::array<int, D> idx{};
    const Eigen::Index lines = coeff_count() / na;
    for (Eigen::Index l = 0; l < lines; ++l) {
      const Eigen::Index base = line_base(axis, l, idx);
      double w = 1.0;
      for (int a = 0; a < D; ++a)
        if (a != axis) w *= tv[static_cast<size_t>(a)][idx[static_cast<size_t>(a)]];
      for (Eigen::Index k = 0; k < na; ++k) line[k] += w * coef_[base + k * stride];
    }
    return line;
  }

  Eigen::VectorXd transform_values(const Eigen::VectorXd& values) const {
    Eigen::VectorXd c = values;
    for (int a = 0; a < D; ++a) c = apply_axis_matrix(c, cheb::value_to_coeff(n(a)), a);
    return c;
  }

  Box<D> dom_;
  std::array<int, D> deg_{};
  Eigen::VectorXd coef_;
};

using Field1 = Field<1>;
using Field2 = Field<2>;
using Field3 = Field<3>;

// Convenience for 1-D fields.
inline Field1 fit_function(const std::function<double(double)>& f, int degree, const Interval& iv) {
  Box<1> b{{iv}};
  return Field1::fit([&](const Point<1>& p) { return f(p[0]); }, {degree}, b);
}

}  // namespace henon
