#include "raresens/cgf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace raresens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Weighted {
  double log_norm;  // log sum p_i exp(a g_i) relative to the stored log p
  double mean;
  double var;
};

// Stable tilted moments for atom data (log_p, g): weights w_i proportional
// to exp(log_p_i + a g_i).
Weighted tilted_moments(const std::vector<double>& log_p, const std::vector<double>& g, double a) {
  double shift = -kInf;
  for (std::size_t i = 0; i < g.size(); ++i) shift = std::max(shift, log_p[i] + a * g[i]);
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double w = std::exp(log_p[i] + a * g[i] - shift);
    s0 += w;
    s1 += w * g[i];
  }
  double mean = s1 / s0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double w = std::exp(log_p[i] + a * g[i] - shift);
    double c = g[i] - mean;
    s2 += w * c * c;
  }
  return {shift + std::log(s0), mean, s2 / s0};
}

struct AtomData {
  std::vector<double> log_p;  // normalized: logsumexp(log_p) = 0
  std::vector<double> g;
};

std::shared_ptr<AtomData> make_atom_data(const Vec& probs, const Vec& g_all) {
  auto d = std::make_shared<AtomData>();
  double total = 0.0;
  for (double p : probs) total += p;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) {
      d->log_p.push_back(std::log(probs[i]) - std::log(total));
      d->g.push_back(g_all[i]);
    }
  }
  if (d->log_p.empty()) throw std::invalid_argument("cgf: distribution has no support");
  return d;
}

}  // namespace

double Cgf::value(double a) const {
  const bool below = a < dom_.lo || (a == dom_.lo && !dom_.lo_closed && std::isfinite(dom_.lo));
  const bool above = a > dom_.hi || (a == dom_.hi && !dom_.hi_closed && std::isfinite(dom_.hi));
  if (below || above) return kInf;
  return value_(a);
}

double Cgf::deriv1(double a) const { return d1_(a); }

double Cgf::deriv2(double a) const { return d2_(a); }

Cgf Cgf::negated() const {
  Cgf n;
  auto v = value_;
  auto d1 = d1_;
  auto d2 = d2_;
  n.value_ = [v](double a) { return v(-a); };
  n.d1_ = [d1](double a) { return -d1(-a); };
  n.d2_ = [d2](double a) { return d2(-a); };
  n.dom_ = {-dom_.hi, -dom_.lo, dom_.hi_closed, dom_.lo_closed};
  if (ess_lo_) n.ess_hi_ = -*ess_lo_;
  if (ess_hi_) n.ess_lo_ = -*ess_hi_;
  if (limits_.value_lo) n.limits_.value_hi = *limits_.value_lo;
  if (limits_.deriv_lo) n.limits_.deriv_hi = -*limits_.deriv_lo;
  if (limits_.value_hi) n.limits_.value_lo = *limits_.value_hi;
  if (limits_.deriv_hi) n.limits_.deriv_lo = -*limits_.deriv_hi;
  n.empirical_ = empirical_;
  n.trust_lo_ = -trust_hi_;
  n.trust_hi_ = -trust_lo_;
  return n;
}

void Cgf::probe_limits() {
  // One-sided limits by the schedule d (1 - 10^-k); monotone convergence
  // stabilizes quickly when the limit is finite, otherwise the values blow
  // up and the limit is recorded as +/-inf.
  auto probe = [&](double endpoint, bool closed, bool from_below, std::optional<double>& out_val,
                   std::optional<double>& out_der) {
    if (!std::isfinite(endpoint) || out_val) return;
    if (closed) {
      double hv = value_(endpoint);
      if (std::isfinite(hv)) {
        out_val = hv;
        out_der = d1_(endpoint);
        return;
      }
    }
    double prev_v = 0.0, prev_d = 0.0;
    bool have_prev = false;
    double lim_v = kInf, lim_d = kInf;
    bool settled_v = false, settled_d = false;
    for (int k = 4; k <= 13; ++k) {
      // The schedule endpoint*(1 - 10^-k) stays strictly inside the domain
      // on the correct side: CGF domains contain a neighborhood of 0, so
      // hi > 0 > lo.
      double a = endpoint * (1.0 - std::pow(10.0, -k));
      double hv = value_(a);
      double hd = d1_(a);
      if (have_prev) {
        if (!settled_v && std::isfinite(hv) && std::fabs(hv - prev_v) <= 1e-9 * std::max(1.0, std::fabs(hv))) {
          lim_v = hv;
          settled_v = true;
        }
        if (!settled_d && std::isfinite(hd) && std::fabs(hd - prev_d) <= 1e-9 * std::max(1.0, std::fabs(hd))) {
          lim_d = hd;
          settled_d = true;
        }
      }
      prev_v = hv;
      prev_d = hd;
      have_prev = true;
      if (settled_v && settled_d) break;
    }
    // Convexity with H(0) = 0 rules out divergence to -inf at either
    // endpoint: H sits above its tangent at 0.
    if (!settled_v) lim_v = kInf;
    if (!settled_d) lim_d = from_below ? kInf : -kInf;
    out_val = lim_v;
    out_der = lim_d;
  };
  probe(dom_.hi, dom_.hi_closed, true, limits_.value_hi, limits_.deriv_hi);
  probe(dom_.lo, dom_.lo_closed, false, limits_.value_lo, limits_.deriv_lo);
}

Cgf Cgf::from_expfam(const ExpFamModel& model, const Vec& v) {
  if (v.size() != model.dim()) throw std::invalid_argument("from_expfam: direction size mismatch");
  auto m = std::make_shared<ExpFamModel>(model);
  auto dir = std::make_shared<Vec>(v);
  const double f0 = model.log_normalizer(model.theta());
  const double slope0 = dot(v, model.grad_log_normalizer(model.theta()));

  auto shifted = [m, dir](double a) {
    Vec th = m->theta();
    for (std::size_t k = 0; k < th.size(); ++k) th[k] += a * (*dir)[k];
    return th;
  };

  Cgf h;
  h.value_ = [m, shifted, f0, slope0](double a) {
    return m->log_normalizer(shifted(a)) - f0 - a * slope0;
  };
  h.d1_ = [m, dir, shifted, slope0](double a) {
    Vec th = shifted(a);
    if (!m->in_domain(th)) return kInf;
    return dot(*dir, m->grad_log_normalizer(th)) - slope0;
  };
  h.d2_ = [m, dir, shifted](double a) {
    Vec th = shifted(a);
    if (!m->in_domain(th)) return kInf;
    return quad_form(m->hessian_log_normalizer(th), *dir);
  };
  h.dom_ = {model.direction_domain_lo(v), model.direction_domain_hi(v), false, false};
  h.ess_lo_ = model.score_inf(v);
  h.ess_hi_ = model.score_sup(v);
  h.probe_limits();
  return h;
}

Cgf Cgf::from_discrete(const DiscreteDist& dist, const Vec& g) {
  if (g.size() != dist.size()) throw std::invalid_argument("from_discrete: g size mismatch");
  auto d = make_atom_data(dist.probs(), g);

  Cgf h;
  h.value_ = [d](double a) { return tilted_moments(d->log_p, d->g, a).log_norm; };
  h.d1_ = [d](double a) { return tilted_moments(d->log_p, d->g, a).mean; };
  h.d2_ = [d](double a) { return tilted_moments(d->log_p, d->g, a).var; };
  h.dom_ = {};  // all of R
  h.ess_lo_ = *std::min_element(d->g.begin(), d->g.end());
  h.ess_hi_ = *std::max_element(d->g.begin(), d->g.end());
  return h;
}

Cgf Cgf::from_samples(std::span<const double> g_samples, double min_ess) {
  if (g_samples.empty()) throw std::invalid_argument("from_samples: empty sample");
  auto d = std::make_shared<AtomData>();
  const double n = static_cast<double>(g_samples.size());
  d->log_p.assign(g_samples.size(), -std::log(n));
  d->g.assign(g_samples.begin(), g_samples.end());

  Cgf h;
  h.value_ = [d](double a) { return tilted_moments(d->log_p, d->g, a).log_norm; };
  h.d1_ = [d](double a) { return tilted_moments(d->log_p, d->g, a).mean; };
  h.d2_ = [d](double a) { return tilted_moments(d->log_p, d->g, a).var; };
  h.dom_ = {};
  h.ess_lo_ = *std::min_element(d->g.begin(), d->g.end());
  h.ess_hi_ = *std::max_element(d->g.begin(), d->g.end());
  h.empirical_ = true;

  // Tilted effective sample size (sum w)^2 / sum w^2 with w_i = exp(a g_i);
  // the trust region is where it stays above min_ess.
  auto ess_at = [d](double a) {
    double shift = -kInf;
    for (double gi : d->g) shift = std::max(shift, a * gi);
    double s1 = 0.0, s2 = 0.0;
    for (double gi : d->g) {
      double w = std::exp(a * gi - shift);
      s1 += w;
      s2 += w * w;
    }
    return s1 * s1 / s2;
  };
  auto trust_edge = [&](double direction) {
    if (ess_at(0.0) < min_ess) return 0.0;
    double good = 0.0, bad = direction;
    int k = 0;
    while (ess_at(bad) >= min_ess) {
      good = bad;
      bad *= 2.0;
      if (++k > 60) return direction * kInf;
    }
    for (int i = 0; i < 60; ++i) {
      double mid = 0.5 * (good + bad);
      (ess_at(mid) >= min_ess ? good : bad) = mid;
    }
    return good;
  };
  h.trust_hi_ = trust_edge(1.0);
  h.trust_lo_ = trust_edge(-1.0);
  return h;
}

Cgf Cgf::from_functions(std::function<double(double)> value,
                        std::function<double(double)> deriv1,
                        std::function<double(double)> deriv2,
                        CgfDomain dom,
                        std::optional<double> ess_lo,
                        std::optional<double> ess_hi,
                        std::optional<CgfLimits> limits) {
  if (!value || !deriv1 || !deriv2)
    throw std::invalid_argument("from_functions: all three evaluators required");
  if (!(dom.lo < 0.0 && dom.hi > 0.0))
    throw std::invalid_argument("from_functions: domain must contain a neighborhood of 0");
  Cgf h;
  h.value_ = std::move(value);
  h.d1_ = std::move(deriv1);
  h.d2_ = std::move(deriv2);
  h.dom_ = dom;
  h.ess_lo_ = ess_lo;
  h.ess_hi_ = ess_hi;
  if (limits) h.limits_ = *limits;
  h.probe_limits();
  return h;
}

DiscreteDist tilt(const DiscreteDist& dist, const Vec& g, double a) {
  if (g.size() != dist.size()) throw std::invalid_argument("tilt: g size mismatch");
  double shift = -kInf;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist.prob(i) > 0.0) shift = std::max(shift, std::log(dist.prob(i)) + a * g[i]);
  Vec w(dist.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.prob(i) > 0.0) {
      w[i] = std::exp(std::log(dist.prob(i)) + a * g[i] - shift);
      total += w[i];
    }
  }
  for (double& x : w) x /= total;
  return DiscreteDist(dist.atoms(), w);
}

double tilted_mean(const DiscreteDist& dist, const Vec& g, double a) {
  auto d = make_atom_data(dist.probs(), g);
  return tilted_moments(d->log_p, d->g, a).mean;
}

double tilted_variance(const DiscreteDist& dist, const Vec& g, double a) {
  auto d = make_atom_data(dist.probs(), g);
  return tilted_moments(d->log_p, d->g, a).var;
}

}  // namespace raresens
