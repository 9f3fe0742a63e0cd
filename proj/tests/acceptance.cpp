// Release gate: ten numbered end-to-end checks, one printed line each, with
// wall-clock budgets where the check is enumeration-heavy. Exit status is
// the number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "raresens/cgf.hpp"
#include "raresens/ldp.hpp"
#include "raresens/renyi.hpp"
#include "raresens/sensitivity.hpp"
#include "raresens/uq.hpp"
#include "oracles.hpp"

using namespace raresens;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, x);
  return buf;
}

// 1. Index pair brackets the exact conditional score mean over every event
//    of >= 50 randomized finite models.
Outcome sandwich_enumeration(double budget_s, double* secs) {
  const auto t0 = std::chrono::steady_clock::now();
  oracles::Rng rng(101);
  long events = 0;
  double worst = 0.0;
  const int n_models = 52;
  for (int rep = 0; rep < n_models; ++rep) {
    const std::size_t n = 8 + static_cast<std::size_t>(rep % 5);
    const std::size_t dim = 1 + static_cast<std::size_t>(rep % 3);
    DiscreteDist dist = oracles::random_dist(rng, n);
    std::vector<Vec> scores = oracles::random_scores(rng, dist, dim);
    Vec v = oracles::random_vec(rng, dim, -1.0, 1.0);
    v[0] += v[0] >= 0.0 ? 0.5 : -0.5;  // keep the direction away from zero

    Vec g(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) g[i] = dot(v, scores[i]);
    const Cgf h = Cgf::from_discrete(dist, g);

    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
      const auto atoms = oracles::event_atoms(mask, n);
      const double m = std::max(0.0, -std::log(event_probability(dist, atoms)));
      const SensitivityReport r = sensitivity_indices(h, v, m);
      const double s = exact_index(dist, scores, atoms, v);
      worst = std::max(worst, r.index_minus - s);
      worst = std::max(worst, s - r.index_plus);
      ++events;
    }
  }
  *secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  o.pass = worst <= 1e-8 && *secs < budget_s;
  o.detail = std::to_string(n_models) + " models, " + std::to_string(events) +
             " events, worst violation " + fmt("%.2e", worst);
  return o;
}

// 2. Interior optimality conditions on >= 200 randomized instances.
Outcome optimality_conditions() {
  oracles::Rng rng(102);
  int instances = 0;
  double worst_res = 0.0, worst_kl = 0.0, worst_val = 0.0;
  bool all_interior = true;
  for (int rep = 0; rep < 120; ++rep) {
    const std::size_t n = 4 + rng.index(6);
    DiscreteDist dist = oracles::random_dist(rng, n);
    Vec g = oracles::random_vec(rng, n, -2.0, 2.0);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += dist.prob(i) * g[i];
    for (double& x : g) x -= mean;
    const Cgf h = Cgf::from_discrete(dist, g);

    for (Sign sign : {Sign::Plus, Sign::Minus}) {
      const Cgf hs = sign == Sign::Plus ? h : h.negated();
      const double sat = 12.0 * hs.deriv1(12.0) - hs.value(12.0);
      const double m = rng.uniform(0.05, 0.95) * sat;  // strictly below saturation
      const BoundResult r = minimize_bound(h, m, sign);
      all_interior = all_interior && r.kind == BoundCase::Interior;
      const double a = r.alpha_star;
      worst_res = std::max(worst_res, std::fabs(a * hs.deriv1(a) - hs.value(a) - m));
      const double signed_a = sign == Sign::Plus ? a : -a;
      worst_kl = std::max(worst_kl, std::fabs(relative_entropy(tilt(dist, g, signed_a), dist) - m));
      worst_val = std::max(worst_val, std::fabs(r.value - hs.deriv1(a)));
      ++instances;
    }
  }
  Outcome o;
  o.pass = all_interior && worst_res < 1e-10 && worst_kl < 1e-8 && worst_val < 1e-8;
  o.detail = std::to_string(instances) + " instances, stationarity " + fmt("%.1e", worst_res) +
             ", entropy " + fmt("%.1e", worst_kl) + ", slope " + fmt("%.1e", worst_val);
  return o;
}

// 3. Gaussian closed form through the generic pipeline.
Outcome gaussian_closed_form() {
  double worst = 0.0;
  for (double sigma : {0.5, 1.0, 2.0}) {
    ExpFamModel model = ExpFamModel::gaussian_mean(0.0, sigma * sigma);
    for (double m : {0.5, 1.0, 2.0, 5.0, 10.0}) {
      const SensitivityReport r = sensitivity_indices(model, {1.0}, m);
      const double expect = sigma * std::sqrt(2.0 * m);
      worst = std::max(worst, std::fabs(r.index_plus - expect) / expect);
      worst = std::max(worst, std::fabs(r.index_minus + expect) / expect);
    }
  }
  Outcome o;
  o.pass = worst <= 1e-9;
  o.detail = "15 (sigma, M) pairs, worst relative deviation " + fmt("%.2e", worst);
  return o;
}

// 4. Distribution-change bounds sound on every event, with the trivial
//    branch continuous at the threshold m = R(Q||P).
Outcome uq_soundness(double budget_s, double* secs) {
  const auto t0 = std::chrono::steady_clock::now();
  oracles::Rng rng(104);
  long events = 0;
  double worst = 0.0, worst_thr = 0.0;
  bool threshold_ok = true;
  for (int rep = 0; rep < 24; ++rep) {
    const std::size_t n = 3 + rng.index(5);
    DiscreteDist p = oracles::random_dist(rng, n);
    DiscreteDist q = oracles::random_dist(rng, n);
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
      const auto atoms = oracles::event_atoms(mask, n);
      const double log_qa = std::log(event_probability(q, atoms));
      const double m = std::max(0.0, -std::log(event_probability(p, atoms)));
      const UqBoundReport r = optimal_bounds(p, q, m);
      worst = std::max(worst, r.lower - log_qa);
      worst = std::max(worst, log_qa - r.upper);
      ++events;
    }
    const double kl = relative_entropy(q, p);
    const UqBoundReport below = optimal_bounds(p, q, kl * (1.0 - 1e-6));
    const UqBoundReport above = optimal_bounds(p, q, kl * (1.0 + 1e-6));
    threshold_ok = threshold_ok && below.upper_is_trivial && below.upper == 0.0 &&
                   below.alpha_plus == 1.0 && !above.upper_is_trivial && above.upper <= 0.0 &&
                   above.alpha_plus >= 1.0;
    worst_thr = std::max(worst_thr, std::fabs(above.upper - below.upper));
  }
  *secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  o.pass = worst <= 1e-9 && threshold_ok && worst_thr <= 1e-7 && *secs < budget_s;
  o.detail = "24 pairs, " + std::to_string(events) + " events, worst violation " +
             fmt("%.2e", worst) + ", threshold jump " + fmt("%.2e", worst_thr);
  return o;
}

// 5. index_plus <= bennett <= bernstein across a Bernoulli grid.
Outcome concentration_ordering() {
  double worst = 0.0;
  int points = 0;
  for (int pi = 0; pi < 10; ++pi) {
    const double p = 0.05 + 0.1 * pi;
    ExpFamModel model = ExpFamModel::bernoulli(p);
    const ConcentrationParams cp = concentration_params(model, {1.0});
    for (int mi = 0; mi < 20; ++mi) {
      const double m = 0.1 + (10.0 - 0.1) * mi / 19.0;
      const SensitivityReport r = sensitivity_indices(model, {1.0}, m);
      const double bennett = bennett_bound(cp, m);
      worst = std::max(worst, r.index_plus - bennett);
      worst = std::max(worst, bennett - bernstein_bound(cp, m));
      ++points;
    }
  }
  Outcome o;
  o.pass = worst <= 1e-9;
  o.detail = std::to_string(points) + " (p, M) points, worst ordering violation " +
             fmt("%.2e", worst);
  return o;
}

// 6. |index_plus - sqrt(2 v'Fv M)| / M stays within a 2x band as M -> 0 on
//    three families with skewed scores.
Outcome linearization_regime() {
  Outcome o;
  o.pass = true;
  double worst_ratio = 0.0;
  const ExpFamModel fams[] = {ExpFamModel::bernoulli(0.3), ExpFamModel::poisson(1.0),
                              ExpFamModel::centered_laplace(-1.0)};
  for (const ExpFamModel& model : fams) {
    const double fq = quad_form(model.fisher_information(), {1.0});
    double lo = oracles::kInf, hi = 0.0;
    for (double m : {1e-2, 1e-3, 1e-4}) {
      const SensitivityReport r = sensitivity_indices(model, {1.0}, m);
      const double gap = std::fabs(r.index_plus - std::sqrt(2.0 * fq * m)) / m;
      lo = std::min(lo, gap);
      hi = std::max(hi, gap);
    }
    const double ratio = hi / lo;
    worst_ratio = std::max(worst_ratio, ratio);
    o.pass = o.pass && ratio < 2.0;
  }
  o.detail = "3 families, worst gap ratio across M grid " + fmt("%.3f", worst_ratio);
  return o;
}

// 7. Finite-horizon DP sensitivity enclosed by the index pair on the
//    5-state chain, 20-point z grid, all unit directions.
Outcome markov_enclosure(double budget_s, double* secs) {
  const auto t0 = std::chrono::steady_clock::now();
  MarkovModel m = birth_death({0.2, 0.5, 0.7});
  Vec grid(20);
  for (int i = 0; i < 20; ++i) grid[i] = -1.33 + 2.66 * i / 19.0;
  const std::size_t n = 500;
  const double tau = 0.05;
  double worst = -oracles::kInf;
  int enclosures = 0;
  bool ok = true;
  for (std::size_t k = 0; k < 3; ++k) {
    Vec v(3, 0.0);
    v[k] = 1.0;
    const FdSweep sweep = fd_sensitivity_sweep(m, v, n, grid);
    for (std::size_t i = 0; i < sweep.fd.size(); ++i) {
      const LdpReport rep = markov_sensitivity(m, v, sweep.z_snapped[i]);
      const double breach =
          std::max(rep.index_minus - tau - sweep.fd[i], sweep.fd[i] - rep.index_plus - tau);
      worst = std::max(worst, breach);
      ok = ok && breach <= 0.0;
      ++enclosures;
    }
  }
  *secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  o.pass = ok && *secs < budget_s;
  o.detail = std::to_string(enclosures) + " (z, v) enclosures at n=500, worst margin breach " +
             fmt("%.2e", worst);
  return o;
}

// 8. Legendre value at the dual point equals the twisted-kernel entropy
//    objective; rate vanishes at the stationary mean.
Outcome eigen_duality() {
  oracles::Rng rng(108);
  double worst_dual = 0.0, worst_zero = 0.0;
  int chains = 0;
  for (int rep = 0; rep < 22; ++rep) {
    const std::size_t n = 3 + rng.index(3);
    MarkovModel m;
    m.pi = Mat(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      DiscreteDist row = oracles::random_dist(rng, n);
      for (std::size_t j = 0; j < n; ++j) m.pi(i, j) = row.prob(j);
    }
    m.f = oracles::random_vec(rng, n, -1.0, 2.0);
    m.f[0] += 1.0;  // keep the observable clearly non-constant
    m.initial_state = 0;
    validate(m);

    const Cgf h = markov_observable_cgf(m);
    const Mat g = edge_observable(m);
    for (double a : {-0.8, 0.6}) {
      const double z = h.deriv1(a);
      const double rate = markov_rate(m, z);
      const Mat ka = twisted_kernel(m, a, g);
      const Vec l = stationary_distribution(ka);
      double obj = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (ka(i, j) > 0.0) obj += l[i] * ka(i, j) * std::log(ka(i, j) / m.pi(i, j));
      worst_dual = std::max(worst_dual, std::fabs(rate - obj));
    }

    const Vec st = stationary_distribution(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += st[i] * m.f[i];
    worst_zero = std::max(worst_zero, std::fabs(markov_rate(m, mean)));
    ++chains;
  }
  Outcome o;
  o.pass = worst_dual <= 1e-7 && worst_zero <= 1e-10;
  o.detail = std::to_string(chains) + " chains, duality gap " + fmt("%.2e", worst_dual) +
             ", rate at mean " + fmt("%.2e", worst_zero);
  return o;
}

// 9. Fixed-order bounds widen monotonically to the likelihood-ratio regret
//    window, within 1e-3 at order 1e3.
Outcome regret_limits() {
  oracles::Rng rng(109);
  bool monotone = true;
  double worst_gap = 0.0;
  for (int rep = 0; rep < 25; ++rep) {
    const double p0 = rng.uniform(0.38, 0.62);
    const double q0 = rng.uniform(0.38, 0.62);
    DiscreteDist p({p0, 1.0 - p0});
    DiscreteDist q({q0, 1.0 - q0});
    const CrudeBounds cb = crude_bounds(p, q);
    double prev_lo = oracles::kInf, prev_hi = -oracles::kInf;
    RawBounds rb;
    for (double a : {10.0, 100.0, 1000.0}) {
      rb = raw_bounds(p, q, 0.0, a);
      monotone = monotone && rb.lower <= prev_lo + 1e-12 && rb.upper >= prev_hi - 1e-12;
      prev_lo = rb.lower;
      prev_hi = rb.upper;
    }
    worst_gap = std::max(worst_gap, std::fabs(rb.lower - cb.lower));
    worst_gap = std::max(worst_gap, std::fabs(rb.upper - cb.upper));
  }
  Outcome o;
  o.pass = monotone && worst_gap <= 1e-3;
  o.detail = "25 pairs, worst gap to regret window at order 1e3: " + fmt("%.2e", worst_gap);
  return o;
}

// 10. Variance baseline blows up like P(A)^(-1/2) while the index grows
//     like sqrt(M).
Outcome baseline_blowup() {
  ExpFamModel model = ExpFamModel::gaussian_mean(0.0, 1.0);
  const double fq = quad_form(model.fisher_information(), {1.0});
  double prev = 0.0, at15 = 0.0;
  bool monotone = true;
  for (double m : {5.0, 10.0, 15.0, 20.0}) {
    const SensitivityReport r = sensitivity_indices(model, {1.0}, m);
    const double ratio = cramer_rao_baseline(fq, std::exp(-m)) / r.index_plus;
    monotone = monotone && ratio > prev;
    if (m == 15.0) at15 = ratio;
    prev = ratio;
  }
  Outcome o;
  o.pass = monotone && at15 > 10.0;
  o.detail = "ratio grows to " + fmt("%.3g", prev) + " at M=20; " + fmt("%.3g", at15) +
             " at M=15";
  return o;
}

}  // namespace

int main() {
  struct Row {
    int num;
    const char* title;
    Outcome out;
    double secs;
  };
  std::vector<Row> rows;
  double secs = 0.0;

  auto timed = [&rows](int num, const char* title, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = fn();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back({num, title, std::move(o), s});
  };

  timed(1, "event-enumeration sandwich", [&] { return sandwich_enumeration(60.0, &secs); });
  timed(2, "interior optimality conditions", [] { return optimality_conditions(); });
  timed(3, "Gaussian closed form", [] { return gaussian_closed_form(); });
  timed(4, "distribution-change soundness", [&] { return uq_soundness(60.0, &secs); });
  timed(5, "concentration ordering", [] { return concentration_ordering(); });
  timed(6, "linearization regime", [] { return linearization_regime(); });
  timed(7, "Markov DP enclosure", [&] { return markov_enclosure(300.0, &secs); });
  timed(8, "eigenvalue-Legendre duality", [] { return eigen_duality(); });
  timed(9, "worst-case regret limits", [] { return regret_limits(); });
  timed(10, "variance-baseline blowup", [] { return baseline_blowup(); });

  int failures = 0;
  for (const Row& r : rows) {
    failures += r.out.pass ? 0 : 1;
    std::printf("[criterion %2d] %s  %-32s %s (%.2f s)\n", r.num, r.out.pass ? "PASS" : "FAIL",
                r.title, r.out.detail.c_str(), r.secs);
  }
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures;
}
