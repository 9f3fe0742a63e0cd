#include "raresens/sensitivity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "raresens/errors.hpp"

namespace raresens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The tilted-mean diagnostic only makes sense where the optimizer stopped
// at a finite interior point; elsewhere echo the index itself.
double tilted_mean_at(const Cgf& h, const BoundResult& r, double signed_alpha, double index) {
  if (r.kind == BoundCase::Interior || r.kind == BoundCase::ZeroM) return h.deriv1(signed_alpha);
  return index;
}

}  // namespace

SensitivityReport sensitivity_indices(const Cgf& h, const Vec& v, double m) {
  const BoundResult up = minimize_bound(h, m, Sign::Plus);
  const BoundResult lo = minimize_bound(h, m, Sign::Minus);

  SensitivityReport r;
  r.m = m;
  r.v = v;
  r.index_plus = up.value;
  r.index_minus = -lo.value;
  r.alpha_plus = up.alpha_star;
  r.alpha_minus = lo.alpha_star;
  r.case_plus = up.kind;
  r.case_minus = lo.kind;
  r.tilted_mean_plus = tilted_mean_at(h, up, up.alpha_star, r.index_plus);
  r.tilted_mean_minus = tilted_mean_at(h, lo, -lo.alpha_star, r.index_minus);
  const double tol = 1e-6;
  if (up.kind == BoundCase::Interior && std::fabs(r.tilted_mean_plus - r.index_plus) > tol)
    r.flagged = true;
  if (lo.kind == BoundCase::Interior && std::fabs(r.tilted_mean_minus - r.index_minus) > tol)
    r.flagged = true;
  return r;
}

SensitivityReport sensitivity_indices(const ExpFamModel& model, const Vec& v, double m) {
  return sensitivity_indices(Cgf::from_expfam(model, v), v, m);
}

SensitivityReport sensitivity_indices(const DiscreteDist& dist, const std::vector<Vec>& scores,
                                      const Vec& v, double m) {
  if (scores.size() != dist.size())
    throw std::invalid_argument("sensitivity_indices: one score vector per atom required");
  Vec g(dist.size(), 0.0);
  double mean = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    g[i] = dot(v, scores[i]);
    mean += dist.prob(i) * g[i];
    scale = std::max(scale, std::fabs(g[i]));
  }
  if (std::fabs(mean) > 1e-8 * std::max(1.0, scale))
    throw std::invalid_argument("sensitivity_indices: v.W must have mean zero (score property)");
  return sensitivity_indices(Cgf::from_discrete(dist, g), v, m);
}

double exact_index(const DiscreteDist& dist, const std::vector<Vec>& scores,
                   const std::vector<std::size_t>& event, const Vec& v) {
  return exact_conditional_score_mean(dist, scores, event, v);
}

double cramer_rao_baseline(double fisher_quad, double p_a) {
  if (!(fisher_quad >= 0.0))
    throw std::invalid_argument("cramer_rao_baseline: fisher_quad must be nonnegative");
  if (!(p_a > 0.0) || !(p_a < 1.0))
    throw std::domain_error("cramer_rao_baseline: requires 0 < pA < 1");
  return std::sqrt((1.0 - p_a) / p_a) * std::sqrt(fisher_quad);
}

ConcentrationParams concentration_params(const ExpFamModel& model, const Vec& v) {
  const std::optional<double> sup = model.score_sup(v);
  if (!sup.has_value() || !std::isfinite(*sup))
    throw UnboundedScoreError("concentration bounds need sup v.W finite for this direction");
  const double sigma2 = quad_form(model.fisher_information(), v);
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("concentration_params: degenerate direction (zero variance)");
  return ConcentrationParams{*sup, sigma2};
}

DiscreteDist bennett_surrogate(double b, double sigma2) {
  if (!(b > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("bennett_surrogate: requires b > 0 and sigma2 > 0");
  const double denom = b * b + sigma2;
  return DiscreteDist({"low", "high"}, {b * b / denom, sigma2 / denom});
}

Vec bennett_surrogate_values(double b, double sigma2) {
  if (!(b > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("bennett_surrogate: requires b > 0 and sigma2 > 0");
  return Vec{-sigma2 / b, b};
}

double bernstein_bound(const ConcentrationParams& params, double m) {
  if (!(m >= 0.0)) throw std::invalid_argument("bernstein_bound: m must be nonnegative");
  return params.b * m + std::sqrt(2.0 * params.sigma2 * m);
}

double bennett_bound(const ConcentrationParams& params, double m) {
  if (!(m >= 0.0)) throw std::invalid_argument("bennett_bound: m must be nonnegative");
  const Cgf h = Cgf::from_discrete(bennett_surrogate(params.b, params.sigma2),
                                   bennett_surrogate_values(params.b, params.sigma2));
  return minimize_bound(h, m, Sign::Plus).value;
}

double linearized_index(double fisher_quad, double m) {
  return linearized_value(fisher_quad, m);
}

}  // namespace raresens
