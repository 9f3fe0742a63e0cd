#pragma once

// Rare-event sensitivity indices: the variational index pair bracketing the
// conditional score mean of any event of probability at least exp(-m),
// together with the exact conditional oracle, the Cramer-Rao style
// baseline, and the concentration-inequality surrogates that trade
// tightness for closed forms.

#include <vector>

#include "raresens/optimize.hpp"

namespace raresens {

struct SensitivityReport {
  double m = 0.0;
  Vec v;
  // Signed bounds: index_minus <= S(A) <= index_plus for every event A with
  // P(A) >= exp(-m), where S(A) is the conditional score mean. For m > 0,
  // index_minus <= 0 <= index_plus.
  double index_minus = 0.0;
  double index_plus = 0.0;
  double alpha_minus = 0.0;  // positive optimizer parameters (+inf on plateaus)
  double alpha_plus = 0.0;
  BoundCase case_minus = BoundCase::ZeroM;
  BoundCase case_plus = BoundCase::ZeroM;
  // Tilted-mean recomputation E[v.W under the +/-alpha tilt]; must match
  // the indices for interior cases (self-consistency diagnostic).
  double tilted_mean_minus = 0.0;
  double tilted_mean_plus = 0.0;
  bool flagged = false;  // interior tilted-mean discrepancy above 1e-6
};

// Indices from a prepared score CGF handle (the direction is recorded in
// the report verbatim).
SensitivityReport sensitivity_indices(const Cgf& h, const Vec& v, double m);
SensitivityReport sensitivity_indices(const ExpFamModel& model, const Vec& v, double m);
// Finite sample space with per-atom score vectors; v.W must have mean zero
// under dist (it is a score).
SensitivityReport sensitivity_indices(const DiscreteDist& dist, const std::vector<Vec>& scores,
                                      const Vec& v, double m);

// Exact conditional score mean E[v.W | A]: the quantity the index pair
// brackets. Event given as atom indices.
double exact_index(const DiscreteDist& dist, const std::vector<Vec>& scores,
                   const std::vector<std::size_t>& event, const Vec& v);

// sqrt((1 - pA)/pA) * sqrt(fisher_quad): the variance-based baseline that
// blows up like pA^{-1/2} where the variational indices stay O(sqrt(m)).
double cramer_rao_baseline(double fisher_quad, double p_a);

struct ConcentrationParams {
  double b = 0.0;       // upper bound of v.W (here: its supremum)
  double sigma2 = 0.0;  // variance of v.W (Fisher quadratic form)
};

// Throws UnboundedScoreError when sup v.W is infinite (or unknown), and
// std::invalid_argument on a degenerate direction (zero variance).
ConcentrationParams concentration_params(const ExpFamModel& model, const Vec& v);

// Mean-zero, variance sigma2 two-point law {b, -sigma2/b}: the extremal
// distribution behind the Bennett bound.
DiscreteDist bennett_surrogate(double b, double sigma2);
// g values of the surrogate's atoms, in the same order.
Vec bennett_surrogate_values(double b, double sigma2);

// b m + sqrt(2 sigma2 m).
double bernstein_bound(const ConcentrationParams& params, double m);
// inf_{a>0} (H_s(a) + m)/a for the two-point surrogate CGF H_s; tighter
// than Bernstein everywhere and saturating at b as m grows.
double bennett_bound(const ConcentrationParams& params, double m);
// sqrt(2 fisher_quad m): the small-m expansion shared by all the bounds.
double linearized_index(double fisher_quad, double m);

}  // namespace raresens
