#include "raresens/uq.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "raresens/errors.hpp"
#include "raresens/linalg.hpp"

namespace raresens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_space(const DiscreteDist& p, const DiscreteDist& q, const char* who) {
  if (p.size() != q.size())
    throw std::invalid_argument(std::string(who) + ": distributions live on different atom spaces");
}

void check_mutual_ac(const DiscreteDist& p, const DiscreteDist& q, const char* who) {
  check_same_space(p, q, who);
  for (std::size_t i = 0; i < p.size(); ++i)
    if ((p.prob(i) > 0.0) != (q.prob(i) > 0.0))
      throw std::invalid_argument(std::string(who) +
                                  ": supports differ; mutual absolute continuity required");
}

}  // namespace

DiscreteDist geometric_interpolation(const DiscreteDist& p, const DiscreteDist& q, double a) {
  check_same_space(p, q, "geometric_interpolation");
  const std::size_t n = p.size();
  Vec logw(n, -kInf);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (p.prob(i) > 0.0 && q.prob(i) > 0.0) {
      logw[i] = a * std::log(q.prob(i)) + (1.0 - a) * std::log(p.prob(i));
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("geometric_interpolation: disjoint supports");
  const double lse = log_sum_exp(logw);
  Vec probs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (std::isfinite(logw[i])) probs[i] = std::exp(logw[i] - lse);
  return DiscreteDist(p.atoms(), probs);
}

Cgf interpolation_cgf(const DiscreteDist& p, const DiscreteDist& q) {
  check_mutual_ac(p, q, "interpolation_cgf");
  Vec g(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.prob(i) > 0.0) g[i] = std::log(q.prob(i)) - std::log(p.prob(i));
  return Cgf::from_discrete(p, g);
}

RawBounds raw_bounds(const DiscreteDist& p, const DiscreteDist& q, double m, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("raw_bounds: alpha must be positive");
  if (!(m >= 0.0)) throw std::invalid_argument("raw_bounds: m must be nonnegative");
  // The scaling convention folds 1/(order (order-1)) into the divergence,
  // so the order-(alpha+1) bounds need no extra normalization beyond these
  // prefactors.
  RawBounds b;
  b.lower = -(alpha + 1.0) * renyi_divergence(p, q, alpha + 1.0) - m / alpha;
  b.upper = alpha * renyi_divergence(q, p, alpha + 1.0) + m / (alpha + 1.0);
  return b;
}

UqBoundReport optimal_bounds(const DiscreteDist& p, const DiscreteDist& q, double m) {
  if (!(m >= 0.0)) throw std::invalid_argument("optimal_bounds: m must be nonnegative");
  const Cgf h = interpolation_cgf(p, q);

  UqBoundReport r;
  r.m = m;
  r.kl_qp = relative_entropy(q, p);
  r.threshold_ratio = m > 0.0 ? r.kl_qp / m : (r.kl_qp > 0.0 ? kInf : 0.0);

  try {
    const BoundResult lo = minimize_bound(h, m, Sign::Minus);
    r.lower = -lo.value - m;
    r.alpha_minus = lo.alpha_star;
    if (m < r.kl_qp) {
      // The order-constrained upper problem has its unconstrained optimum
      // below order 1; the infimum over admissible orders is approached at
      // 1 and reduces to the trivial bound log Q(A) <= 0.
      r.upper = 0.0;
      r.upper_is_trivial = true;
      r.alpha_plus = 1.0;
    } else {
      const BoundResult up = minimize_bound(h, m, Sign::Plus);
      r.upper = up.value - m;
      r.alpha_plus = up.alpha_star;
    }
  } catch (const ConstantObservableError&) {
    // Q = P on the common support: log Q(A) = log P(A) exactly.
    r.lower = -m;
    r.upper = -m;
    r.alpha_minus = 0.0;
    r.alpha_plus = 1.0;
  }
  return r;
}

CrudeBounds crude_bounds(const DiscreteDist& p, const DiscreteDist& q) {
  CrudeBounds b;
  b.lower = -worst_case_regret(p, q);
  b.upper = worst_case_regret(q, p);
  return b;
}

}  // namespace raresens
