#pragma once

// Renyi divergences of finite distributions under the 1/(a(a-1)) scaling
// convention, computed by exact summation. Orders may be negative; orders
// 0 and 1 are excluded (relative entropy is provided separately as the
// order -> 1 limit).

#include "raresens/distributions.hpp"

namespace raresens {

// R_order(Q || P). Absolute-continuity failures yield +inf per the
// definition, never an exception: order > 1 requires Q << P, order < 0
// requires P << Q; orders in (0,1) are always finite.
double renyi_divergence(const DiscreteDist& q, const DiscreteDist& p, double order);

// R(Q || P) = sum q log(q/p); +inf when Q is not absolutely continuous
// with respect to P.
double relative_entropy(const DiscreteDist& q, const DiscreteDist& p);

// Worst-case regret sup_{q > 0} log(q/p): the order -> inf limit of
// order * R_order(Q || P).
double worst_case_regret(const DiscreteDist& q, const DiscreteDist& p);

// Slack of the Renyi change-of-measure inequality at exponents
// (beta, gamma): requires beta < gamma and beta, gamma nonzero; the result
// is nonnegative, +inf when the divergence term is infinite.
double variational_gap(const DiscreteDist& q, const DiscreteDist& p, const Vec& f,
                       double beta, double gamma);

}  // namespace raresens
