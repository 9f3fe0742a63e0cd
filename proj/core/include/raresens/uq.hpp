#pragma once

// Distribution-change bounds for rare events: given P(A) = exp(-m) under a
// base P, bound log Q(A) for an alternative Q. The optimal bounds run along
// the geometric interpolation between P and Q; the raw bounds fix a single
// Renyi order instead of optimizing it.

#include "raresens/optimize.hpp"
#include "raresens/renyi.hpp"

namespace raresens {

struct UqBoundReport {
  double m = 0.0;
  double lower = 0.0;  // bounds on log Q(A)
  double upper = 0.0;
  bool upper_is_trivial = false;  // true iff m < R(Q||P): upper bound is 0
  // Positive optimizer parameters (+inf in plateau cases): the optimal
  // lower bound is attained along the curve at P_{-alpha_minus}, the upper
  // at P_{alpha_plus} with alpha_plus >= 1.
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double kl_qp = 0.0;           // R(Q||P)
  double threshold_ratio = 0.0;  // kl_qp / m
};

// P_a with density proportional to q^a p^(1-a); defined on the common
// support. P_0 = P and P_1 = Q under mutual absolute continuity.
DiscreteDist geometric_interpolation(const DiscreteDist& p, const DiscreteDist& q, double a);

// H(a) = log E_P[(dQ/dP)^a], the CGF of log dQ/dP under P. Requires mutual
// absolute continuity.
Cgf interpolation_cgf(const DiscreteDist& p, const DiscreteDist& q);

struct RawBounds {
  double lower = 0.0;  // on log Q(A) - log P(A)
  double upper = 0.0;
};

// Single-order bounds at Renyi order alpha + 1 (alpha > 0).
RawBounds raw_bounds(const DiscreteDist& p, const DiscreteDist& q, double m, double alpha);

// Order-optimized bounds on log Q(A); requires mutual absolute continuity
// and m >= 0.
UqBoundReport optimal_bounds(const DiscreteDist& p, const DiscreteDist& q, double m);

struct CrudeBounds {
  double lower = 0.0;  // on log Q(A) - log P(A), event-free
  double upper = 0.0;
};

// (inf log dQ/dP, sup log dQ/dP): the order -> inf limit of the raw bounds.
CrudeBounds crude_bounds(const DiscreteDist& p, const DiscreteDist& q);

}  // namespace raresens
