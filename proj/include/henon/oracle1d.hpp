#pragma once

#include <vector>

#include "henon/field.hpp"
#include "henon/unimodal.hpp"

namespace henon {

// Period-doubling fixed point of the 1-D operator
//   (Rf)(x) = (1/lambda) f(f(lambda x)),  lambda = f(f(0)) / f(0),
// solved in a truncated even Chebyshev space, normalized by f(0) = v0.
// Everything downstream (scaling sigma, universal profiles) is measured
// against this object.
struct DoublingFixedPoint {
  Unimodal1D f_star;
  double v0 = 0.0;       // critical value, preserved by the operator
  double lambda = 0.0;   // ~ -0.39953528
  double tip = 0.0;      // fixed point of x -> f^{-1}(lambda x); equals v0
  double alpha_link = 0.0;  // derivative of the v-link at the tip (~ sigma^2)
  Field1 v_star;         // universal diffeomorphism, v(0)=0, v'(0)=1
  Field1 v_star_prime;
  double residual = 0.0;  // fixed-point equation residual on a check grid
};

DoublingFixedPoint solve_doubling_fixed_point(double v0 = 1.4011551890920506,
                                              int degree = 40, double halfwidth = 1.6);

// Universal Jacobian profile a(x) = v*'(x - tip) / v*'(f*(x) - tip) on the
// reference interval.
Field1 universal_a_profile(const DoublingFixedPoint& fp);

// Superstable parameters s_1..s_n of c - x^2 (period 2^k critical orbits),
// found by bisection on the critical orbit.
std::vector<double> superstable_parameters(int n);

// delta estimate from successive superstable gaps.
double feigenbaum_delta(const std::vector<double>& s);

// Accumulation parameter of the doubling cascade of c - x^2, by superstable
// bisection plus geometric extrapolation.
double feigenbaum_accumulation(int n = 13);

// One step of the 1-D doubling operator in the tower normalization.
Unimodal1D renormalize_1d(const Unimodal1D& f, int degree = 48);

}  // namespace henon
