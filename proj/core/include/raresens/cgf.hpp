#pragma once

// Cumulant generating functions H(a) = log E[exp(a g)] of a scalar
// observable g, packaged with domain, tail, and boundary-limit information
// so downstream optimizers can classify interior, boundary, and plateau
// solutions without knowing where the handle came from.

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>

#include "raresens/distributions.hpp"

namespace raresens {

struct CgfDomain {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = +std::numeric_limits<double>::infinity();
  // Whether a finite endpoint itself belongs to the domain.
  bool lo_closed = false;
  bool hi_closed = false;
};

// One-sided limits of H and H' at a finite domain endpoint. A +/-inf entry
// means the limit diverges; nullopt means the endpoint is infinite (no
// boundary) or the limit was not determined.
struct CgfLimits {
  std::optional<double> value_hi, deriv_hi;
  std::optional<double> value_lo, deriv_lo;
};

class Cgf {
 public:
  double value(double a) const;   // +inf outside the domain
  double deriv1(double a) const;
  double deriv2(double a) const;
  const CgfDomain& domain() const { return dom_; }

  // Asymptotic slope bounds: ess sup / ess inf of g when they exist (for
  // eigenvalue-backed handles, the max/min mean-cycle value, which plays
  // the same role).
  std::optional<double> ess_sup() const { return ess_hi_; }
  std::optional<double> ess_inf() const { return ess_lo_; }

  const CgfLimits& limits() const { return limits_; }

  // Handle for the observable -g: value(a) = H(-a), mirrored domain,
  // swapped and negated slope bounds and limits.
  Cgf negated() const;

  bool empirical() const { return empirical_; }
  // Effective-sample-size trust region for empirical handles; +/-inf
  // otherwise.
  double trust_lo() const { return trust_lo_; }
  double trust_hi() const { return trust_hi_; }

  // H_v(a) = F(theta + a v) - F(theta) - a v.grad F(theta): the CGF of the
  // directional score v.W under the model.
  static Cgf from_expfam(const ExpFamModel& model, const Vec& v);
  // Exact log-sum-exp over the atoms; g is indexed like the atoms.
  static Cgf from_discrete(const DiscreteDist& dist, const Vec& g);
  // Empirical CGF of a sample of g draws; min_ess controls the trust
  // region |a| <= a_max where the tilted effective sample size stays
  // above min_ess.
  static Cgf from_samples(std::span<const double> g_samples, double min_ess = 30.0);
  // Fully explicit handle (synthetic or eigenvalue-backed). Finite-endpoint
  // limits are probed automatically when not supplied.
  static Cgf from_functions(std::function<double(double)> value,
                            std::function<double(double)> deriv1,
                            std::function<double(double)> deriv2,
                            CgfDomain dom,
                            std::optional<double> ess_lo = std::nullopt,
                            std::optional<double> ess_hi = std::nullopt,
                            std::optional<CgfLimits> limits = std::nullopt);

 private:
  Cgf() = default;
  void probe_limits();

  std::function<double(double)> value_, d1_, d2_;
  CgfDomain dom_;
  std::optional<double> ess_lo_, ess_hi_;
  CgfLimits limits_;
  bool empirical_ = false;
  double trust_lo_ = -std::numeric_limits<double>::infinity();
  double trust_hi_ = +std::numeric_limits<double>::infinity();
};

// Exponential tilt of a finite distribution by observable g at parameter a:
// p_a(i) proportional to p(i) exp(a g(i)). Atoms of probability zero stay
// at zero.
DiscreteDist tilt(const DiscreteDist& dist, const Vec& g, double a);

double tilted_mean(const DiscreteDist& dist, const Vec& g, double a);
double tilted_variance(const DiscreteDist& dist, const Vec& g, double a);

}  // namespace raresens
