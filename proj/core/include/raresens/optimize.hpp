#pragma once

// Variational bound minimization. Everything here rests on one fact: for a
// CGF H, the map a -> a H'(a) - H(a) is nondecreasing (it equals the
// relative entropy of the a-tilted measure from the base), so the
// stationarity condition of inf_{a>0} (H(a)+m)/a is a monotone root-finding
// problem. The same machinery drives the Legendre transform.

#include <optional>

#include "raresens/cgf.hpp"
#include "raresens/errors.hpp"

namespace raresens {

enum class Sign { Plus, Minus };

enum class BoundCase {
  ZeroM,           // m = 0: the infimum degenerates to H'(0) at a = 0
  Interior,        // stationary point a* in the open domain
  DomainBoundary,  // finite CGF endpoint reached before saturation
  EssSupPlateau,   // m at or above the saturation level; value = slope limit
};

struct BoundResult {
  // inf_{a>0} (H(sign * a) + m) / a. Always the positive-oriented infimum;
  // for Sign::Minus the signed lower index is the negation of this value.
  double value = 0.0;
  double alpha_star = 0.0;  // +inf on the plateau
  BoundCase kind = BoundCase::Interior;
  // R(P_{a*} || P) at the optimum: equals m in the interior, the
  // saturation level on the plateau / at the boundary, 0 at m = 0.
  double kl_at_optimum = 0.0;
  // Saturation level (the largest m with an interior solution) when the
  // solve had to determine it; unset for plain interior solves.
  std::optional<double> m_threshold;
  // Set when an empirical handle was evaluated outside its trust region.
  bool trust_warning = false;
};

// Requires m >= 0 and a non-degenerate observable (deriv2(0) > 0 or
// distinct slope bounds); throws ConstantObservableError otherwise.
BoundResult minimize_bound(const Cgf& h, double m, Sign sign);

// Same contract as minimize_bound, but locates the root of the exactly
// summed relative entropy R(tilt(dist, g, a) || dist) = m instead of the
// CGF identity a H'(a) - H(a) = m. Used to cross-validate the CGF path.
// Throws NoFiniteRootError when m is at or above the saturation level.
BoundResult solve_by_kl(const DiscreteDist& dist, const Vec& g, double m, Sign sign);

struct LegendreResult {
  double delta = 0.0;
  double value = 0.0;   // +inf when delta is outside the attainable slopes
  double argmax = 0.0;  // +/-inf when the supremum is approached in a limit
  bool infinite = false;
};

// L(delta) = sup_a { a delta - H(a) } over the full domain (both signs of a).
LegendreResult legendre(const Cgf& h, double delta);

// Small-m linearization sqrt(2 * variance * m).
double linearized_value(double variance, double m);

}  // namespace raresens
