#include "raresens/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "raresens/cgf.hpp"
#include "raresens/distributions.hpp"
#include "raresens/errors.hpp"
#include "raresens/ldp.hpp"
#include "raresens/optimize.hpp"
#include "raresens/renyi.hpp"
#include "raresens/sensitivity.hpp"
#include "raresens/uq.hpp"

namespace raresens {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// xorshift64* -- deterministic, seed-stable across platforms.
struct Rng {
  std::uint64_t s;
  explicit Rng(std::uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next() {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    return s * 0x2545F4914F6CDD1DULL;
  }
  double uniform() {  // in (0, 1)
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

DiscreteDist random_dist(Rng& rng, std::size_t n) {
  Vec p(n);
  double s = 0.0;
  for (double& x : p) {
    x = rng.uniform(0.05, 1.0);
    s += x;
  }
  for (double& x : p) x /= s;
  return DiscreteDist(std::move(p));
}

Vec random_vec(Rng& rng, std::size_t n, double lo, double hi) {
  Vec g(n);
  for (double& x : g) x = rng.uniform(lo, hi);
  return g;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

CheckResult tol_check(std::string name, double worst, double tol, std::string detail = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.discrepancy = worst;
  r.pass = std::isfinite(worst) && worst <= tol;
  r.detail = detail.empty() ? "worst " + fmt(worst) + " vs tol " + fmt(tol) : std::move(detail);
  return r;
}

CheckResult bool_check(std::string name, bool ok, std::string detail) {
  CheckResult r;
  r.name = std::move(name);
  r.pass = ok;
  r.discrepancy = ok ? 0.0 : 1.0;
  r.detail = std::move(detail);
  return r;
}

// Independent minimizer of (H(a) + m) / a over a > 0: dense log-spaced grid
// followed by golden-section refinement around the best grid point. Only
// meaningful for instances whose minimizer is interior and below a_cap.
double oracle_min_bound(const Cgf& h, double m, double a_cap = 64.0) {
  double ahi = a_cap;
  if (std::isfinite(h.domain().hi)) ahi = std::min(ahi, h.domain().hi * (1.0 - 1e-12));
  const double alo = 1e-8;
  auto obj = [&](double a) { return (h.value(a) + m) / a; };
  const int grid_n = 4000;
  double best = kInf, best_a = alo;
  for (int i = 0; i <= grid_n; ++i) {
    const double a = std::exp(std::log(alo) + (std::log(ahi) - std::log(alo)) * i / grid_n);
    const double val = obj(a);
    if (val < best) {
      best = val;
      best_a = a;
    }
  }
  double lo = std::max(alo, best_a * 0.97);
  double hi = std::min(ahi, best_a * 1.03);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = obj(x1), f2 = obj(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = obj(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = obj(x2);
    }
  }
  return std::min({best, f1, f2});
}

// Independent Legendre transform: uniform grid over both signs plus golden
// refinement of a(z) = a z - H(a).
double oracle_legendre(const Cgf& h, double z, double a_cap = 40.0) {
  double lo_d = -a_cap, hi_d = a_cap;
  if (std::isfinite(h.domain().lo)) lo_d = std::max(lo_d, h.domain().lo * (1.0 - 1e-12));
  if (std::isfinite(h.domain().hi)) hi_d = std::min(hi_d, h.domain().hi * (1.0 - 1e-12));
  auto obj = [&](double a) { return h.value(a) - a * z; };  // minimized
  const int grid_n = 8000;
  double best = kInf, best_a = 0.0;
  for (int i = 0; i <= grid_n; ++i) {
    const double a = lo_d + (hi_d - lo_d) * i / grid_n;
    const double val = obj(a);
    if (val < best) {
      best = val;
      best_a = a;
    }
  }
  const double step = (hi_d - lo_d) / grid_n;
  double lo = std::max(lo_d, best_a - 2 * step), hi = std::min(hi_d, best_a + 2 * step);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = obj(x1), f2 = obj(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::fabs(best_a) + 1.0); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = obj(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = obj(x2);
    }
  }
  return -std::min({best, f1, f2});
}

std::vector<std::size_t> event_atoms(std::size_t mask, std::size_t n) {
  std::vector<std::size_t> atoms;
  for (std::size_t i = 0; i < n; ++i)
    if (mask & (std::size_t{1} << i)) atoms.push_back(i);
  return atoms;
}

// ---------------------------------------------------------------------------
// cgf

CheckResult check_cgf_normalization() {
  Rng rng(11);
  double worst = 0.0;
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 2 + rng.index(7);
    DiscreteDist d = random_dist(rng, n);
    Cgf h = Cgf::from_discrete(d, random_vec(rng, n, -2.0, 2.0));
    worst = std::max(worst, std::fabs(h.value(0.0)));
  }
  return tol_check("cgf/normalization", worst, 1e-14);
}

CheckResult check_cgf_tilt_moments() {
  Rng rng(12);
  double worst = 0.0;
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = 2 + rng.index(7);
    DiscreteDist d = random_dist(rng, n);
    Vec g = random_vec(rng, n, -2.0, 2.0);
    Cgf h = Cgf::from_discrete(d, g);
    for (double a : {-3.0, -0.7, 0.0, 0.4, 1.9, 5.0}) {
      worst = std::max(worst, std::fabs(h.deriv1(a) - tilted_mean(d, g, a)));
      worst = std::max(worst, std::fabs(h.deriv2(a) - tilted_variance(d, g, a)));
    }
  }
  return tol_check("cgf/tilt-moments", worst, 1e-10);
}

CheckResult check_cgf_bernoulli_closure() {
  ExpFamModel model = ExpFamModel::bernoulli(0.3);
  Cgf h = Cgf::from_expfam(model, {1.0});
  auto sig = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
  const double theta = model.theta()[0];
  double worst = 0.0;
  for (double a : {-4.0, -1.0, 0.0, 0.5, 2.0, 6.0}) {
    const double mean_shift = sig(theta + a) - sig(theta);
    worst = std::max(worst, std::fabs(h.deriv1(a) - mean_shift));
    const double value = std::log(1.0 + std::exp(theta + a)) - std::log(1.0 + std::exp(theta)) -
                         a * sig(theta);
    worst = std::max(worst, std::fabs(h.value(a) - value));
  }
  return tol_check("cgf/bernoulli-closure", worst, 1e-11);
}

// ---------------------------------------------------------------------------
// optimize

CheckResult check_interior_kl_identity() {
  Rng rng(21);
  double worst = 0.0;
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 3 + rng.index(6);
    DiscreteDist d = random_dist(rng, n);
    Vec g = random_vec(rng, n, -2.0, 2.0);
    Cgf h = Cgf::from_discrete(d, g);
    for (Sign sign : {Sign::Plus, Sign::Minus}) {
      const double sgn = sign == Sign::Plus ? 1.0 : -1.0;
      // Half the saturation level reached by a = 12 keeps the root interior.
      const double m = 0.5 * (12.0 * sgn * h.deriv1(sgn * 12.0) - h.value(sgn * 12.0));
      BoundResult r = minimize_bound(h, m, sign);
      if (r.kind != BoundCase::Interior) return bool_check("optimize/interior-kl-identity", false, "expected interior case");
      worst = std::max(worst, std::fabs(r.kl_at_optimum - m) / std::max(1.0, m));
      const double kl = relative_entropy(tilt(d, g, sgn * r.alpha_star), d);
      worst = std::max(worst, std::fabs(kl - m) / std::max(1.0, m));
      worst = std::max(worst, std::fabs(r.value - sgn * h.deriv1(sgn * r.alpha_star)));
    }
  }
  return tol_check("optimize/interior-kl-identity", worst, 1e-9);
}

CheckResult check_grid_oracle() {
  Rng rng(22);
  double worst = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 3 + rng.index(6);
    DiscreteDist d = random_dist(rng, n);
    Vec g = random_vec(rng, n, -2.0, 2.0);
    Cgf h = Cgf::from_discrete(d, g);
    for (Sign sign : {Sign::Plus, Sign::Minus}) {
      const double sgn = sign == Sign::Plus ? 1.0 : -1.0;
      const double m = 0.5 * (12.0 * sgn * h.deriv1(sgn * 12.0) - h.value(sgn * 12.0));
      const double got = minimize_bound(h, m, sign).value;
      const double ref = oracle_min_bound(sign == Sign::Plus ? h : h.negated(), m);
      worst = std::max(worst, std::fabs(got - ref) / std::max(1.0, std::fabs(ref)));
    }
  }
  return tol_check("optimize/grid-oracle", worst, 1e-10);
}

CheckResult check_kl_path_agreement() {
  Rng rng(23);
  double worst = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 3 + rng.index(6);
    DiscreteDist d = random_dist(rng, n);
    Vec g = random_vec(rng, n, -2.0, 2.0);
    Cgf h = Cgf::from_discrete(d, g);
    for (Sign sign : {Sign::Plus, Sign::Minus}) {
      const double sgn = sign == Sign::Plus ? 1.0 : -1.0;
      const double m = 0.5 * (9.0 * sgn * h.deriv1(sgn * 9.0) - h.value(sgn * 9.0));
      BoundResult a = minimize_bound(h, m, sign);
      BoundResult b = solve_by_kl(d, g, m, sign);
      worst = std::max(worst, std::fabs(a.value - b.value) / std::max(1.0, std::fabs(a.value)));
      worst = std::max(worst, std::fabs(a.alpha_star - b.alpha_star) /
                                  std::max(1.0, a.alpha_star));
    }
  }
  return tol_check("optimize/kl-path-agreement", worst, 1e-7);
}

CheckResult check_case_classification() {
  std::ostringstream bad;
  // Zero level: value degenerates to the mean.
  DiscreteDist d({0.9, 0.1});
  Vec g = {-0.1, 0.9};  // mean zero, sup 0.9, saturation -log 0.1
  Cgf h = Cgf::from_discrete(d, g);
  BoundResult r0 = minimize_bound(h, 0.0, Sign::Plus);
  if (r0.kind != BoundCase::ZeroM || std::fabs(r0.value) > 1e-14 || r0.alpha_star != 0.0)
    bad << "zero-m case misclassified; ";
  // Plateau: m above -log P(g = sup g).
  BoundResult rp = minimize_bound(h, 5.0, Sign::Plus);
  if (rp.kind != BoundCase::EssSupPlateau || std::fabs(rp.value - 0.9) > 1e-12 ||
      rp.alpha_star != kInf)
    bad << "plateau case misclassified; ";
  if (!rp.m_threshold || std::fabs(*rp.m_threshold + std::log(0.1)) > 1e-8)
    bad << "plateau threshold off; ";
  // Finite closed endpoint with the stationarity level out of reach:
  // H = a^2/2 on [-1, 1], saturation phi(1) = 1/2, so m = 2 pins a* = 1.
  Cgf hq = Cgf::from_functions([](double a) { return 0.5 * a * a; },
                               [](double a) { return a; }, [](double) { return 1.0; },
                               CgfDomain{-1.0, 1.0, true, true});
  BoundResult rb = minimize_bound(hq, 2.0, Sign::Plus);
  if (rb.kind != BoundCase::DomainBoundary || std::fabs(rb.value - 2.5) > 1e-9 ||
      std::fabs(rb.alpha_star - 1.0) > 1e-9)
    bad << "boundary case misclassified; ";
  // Same handle, small m: interior root of a^2/2 = m.
  BoundResult ri = minimize_bound(hq, 0.02, Sign::Plus);
  if (ri.kind != BoundCase::Interior || std::fabs(ri.alpha_star - 0.2) > 1e-9)
    bad << "interior quadratic root off; ";
  // Degenerate observable is rejected.
  try {
    minimize_bound(Cgf::from_discrete(DiscreteDist({0.4, 0.6}), {1.0, 1.0}), 1.0, Sign::Plus);
    bad << "constant observable accepted; ";
  } catch (const ConstantObservableError&) {
  }
  const std::string msg = bad.str();
  return bool_check("optimize/case-classification", msg.empty(),
                    msg.empty() ? "zero-m, interior, boundary, plateau, degenerate all classified"
                                : msg);
}

CheckResult check_gaussian_closed_form() {
  double worst = 0.0;
  for (double sigma : {0.5, 1.0, 2.0}) {
    ExpFamModel model = ExpFamModel::gaussian_mean(0.7, sigma * sigma);
    for (double m : {0.5, 1.0, 2.0, 5.0, 10.0}) {
      SensitivityReport r = sensitivity_indices(model, {1.0}, m);
      const double exact = sigma * std::sqrt(2.0 * m);
      worst = std::max(worst, std::fabs(r.index_plus - exact));
      worst = std::max(worst, std::fabs(r.index_minus + exact));
    }
  }
  return tol_check("optimize/gaussian-closed-form", worst, 1e-9);
}

CheckResult check_laplace_interior() {
  ExpFamModel model = ExpFamModel::centered_laplace(-1.0);
  Cgf h = Cgf::from_expfam(model, {1.0});
  double worst = 0.0;
  for (double m : {0.5, 3.0, 10.0}) {
    BoundResult r = minimize_bound(h, m, Sign::Plus);
    if (r.kind != BoundCase::Interior)
      return bool_check("optimize/laplace-interior", false,
                        "expected an interior solution at m=" + fmt(m));
    const double ref = oracle_min_bound(h, m);
    worst = std::max(worst, std::fabs(r.value - ref) / std::max(1.0, std::fabs(ref)));
  }
  return tol_check("optimize/laplace-interior", worst, 1e-9,
                   "soft domain edge never pins the optimizer; worst " + fmt(worst));
}

CheckResult check_legendre_grid_oracle() {
  Rng rng(24);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 3 + rng.index(5);
    DiscreteDist d = random_dist(rng, n);
    Vec g = random_vec(rng, n, -2.0, 2.0);
    Cgf h = Cgf::from_discrete(d, g);
    const double mean = h.deriv1(0.0);
    LegendreResult at_mean = legendre(h, mean);
    worst = std::max(worst, std::fabs(at_mean.value));
    for (double a : {-2.5, -0.8, 0.7, 3.0}) {
      const double z = h.deriv1(a);
      LegendreResult r = legendre(h, z);
      worst = std::max(worst, std::fabs(r.value - oracle_legendre(h, z)));
      // Lattice duality: L(H'(a)) = a H'(a) - H(a).
      worst = std::max(worst, std::fabs(r.value - (a * z - h.value(a))));
    }
  }
  return tol_check("optimize/legendre-grid-oracle", worst, 1e-9);
}

// ---------------------------------------------------------------------------
// renyi

CheckResult check_renyi_skew_symmetry() {
  Rng rng(31);
  double worst = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rng.index(7);
    DiscreteDist q = random_dist(rng, n), p = random_dist(rng, n);
    for (double a : {-1.5, -0.4, 0.3, 0.62, 2.0, 7.0}) {
      const double lhs = renyi_divergence(q, p, a);
      const double rhs = renyi_divergence(p, q, 1.0 - a);
      worst = std::max(worst, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(lhs)));
    }
  }
  return tol_check("renyi/skew-symmetry", worst, 1e-12);
}

CheckResult check_renyi_order_monotonicity() {
  Rng rng(32);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + rng.index(7);
    DiscreteDist q = random_dist(rng, n), p = random_dist(rng, n);
    double prev = -kInf;
    for (double a = -4.0; a < 8.01; a += 0.25) {
      if (std::fabs(a) < 1e-9 || std::fabs(a - 1.0) < 1e-9) continue;
      const double standard = a * renyi_divergence(q, p, a);  // 1/(a-1) log sum q^a p^(1-a)
      worst = std::max(worst, prev - standard);
      prev = standard;
    }
  }
  return tol_check("renyi/order-monotonicity", worst, 1e-12,
                   "order-scaled divergence nondecreasing; worst backslide " + fmt(worst));
}

CheckResult check_renyi_limits() {
  Rng rng(33);
  double worst = 0.0;
  for (int rep = 0; rep < 15; ++rep) {
    const std::size_t n = 2 + rng.index(7);
    DiscreteDist q = random_dist(rng, n), p = random_dist(rng, n);
    const double kl = relative_entropy(q, p);
    worst = std::max(worst, std::fabs(renyi_divergence(q, p, 1.0 + 1e-7) - kl));
    worst = std::max(worst, std::fabs(renyi_divergence(q, p, 1.0 - 1e-7) - kl));
    const double regret = worst_case_regret(q, p);
    const double far = 1e5 * renyi_divergence(q, p, 1e5);
    worst = std::max(worst, std::fabs(far - regret) / std::max(1.0, std::fabs(regret)) * 1e-2);
    // scaled: the order->inf approach is O(1/order), so only 1e-3 accuracy is demanded there
  }
  return tol_check("renyi/kl-and-regret-limits", worst, 1e-5);
}

CheckResult check_variational_gap() {
  Rng rng(34);
  double worst = 0.0;  // most negative gap seen
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rng.index(7);
    DiscreteDist q = random_dist(rng, n), p = random_dist(rng, n);
    Vec f = random_vec(rng, n, -2.0, 2.0);
    double beta = rng.uniform(-3.0, 3.0), gamma = rng.uniform(-3.0, 3.0);
    if (std::fabs(beta) < 0.05) beta = 0.05;
    if (std::fabs(gamma) < 0.05) gamma = -0.05;
    if (beta > gamma) std::swap(beta, gamma);
    if (beta == gamma) gamma += 0.1;
    const double gap = variational_gap(q, p, f, beta, gamma);
    if (std::isfinite(gap)) worst = std::max(worst, -gap);
  }
  return tol_check("renyi/variational-gap", worst, 1e-12,
                   "change-of-measure slack stays nonnegative; worst negative part " + fmt(worst));
}

// ---------------------------------------------------------------------------
// uq

CheckResult check_interpolation_endpoints() {
  Rng rng(41);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + rng.index(7);
    DiscreteDist p = random_dist(rng, n), q = random_dist(rng, n);
    DiscreteDist p0 = geometric_interpolation(p, q, 0.0);
    DiscreteDist p1 = geometric_interpolation(p, q, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::fabs(p0.prob(i) - p.prob(i)));
      worst = std::max(worst, std::fabs(p1.prob(i) - q.prob(i)));
    }
    Cgf h = interpolation_cgf(p, q);
    worst = std::max(worst, std::fabs(h.value(0.0)));
    worst = std::max(worst, std::fabs(h.value(1.0)));
  }
  return tol_check("uq/interpolation-endpoints", worst, 1e-13);
}

CheckResult check_uq_derivative_identity() {
  Rng rng(42);
  double worst = 0.0;
  for (int rep = 0; rep < 15; ++rep) {
    const std::size_t n = 2 + rng.index(7);
    DiscreteDist p = random_dist(rng, n), q = random_dist(rng, n);
    Cgf h = interpolation_cgf(p, q);
    for (double a : {-1.5, -0.3, 0.25, 0.8, 1.6, 3.0}) {
      DiscreteDist pa = geometric_interpolation(p, q, a);
      const double rhs = relative_entropy(pa, p) - relative_entropy(pa, q);
      worst = std::max(worst, std::fabs(h.deriv1(a) - rhs));
    }
  }
  return tol_check("uq/derivative-identity", worst, 1e-9);
}

CheckResult check_uq_event_soundness() {
  Rng rng(43);
  double worst = -kInf;  // worst bound violation (negative = slack everywhere)
  int events = 0;
  for (int rep = 0; rep < 8; ++rep) {
    const std::size_t n = 3 + rng.index(5);
    DiscreteDist p = random_dist(rng, n), q = random_dist(rng, n);
    CrudeBounds crude = crude_bounds(p, q);
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
      const auto atoms = event_atoms(mask, n);
      const double pa = event_probability(p, atoms);
      const double qa = event_probability(q, atoms);
      const double log_qa = std::log(qa), log_pa = std::log(pa);
      // Sum roundoff can push P(full space) an ulp above 1.
      UqBoundReport r = optimal_bounds(p, q, std::max(0.0, -log_pa));
      worst = std::max(worst, r.lower - log_qa);
      worst = std::max(worst, log_qa - r.upper);
      worst = std::max(worst, crude.lower - (log_qa - log_pa));
      worst = std::max(worst, (log_qa - log_pa) - crude.upper);
      ++events;
    }
  }
  return tol_check("uq/event-soundness", std::max(worst, 0.0), 1e-9,
                   fmt(events) + " events; worst violation " + fmt(worst));
}

CheckResult check_uq_raw_soundness() {
  Rng rng(44);
  double worst = -kInf;
  for (int rep = 0; rep < 8; ++rep) {
    const std::size_t n = 3 + rng.index(4);
    DiscreteDist p = random_dist(rng, n), q = random_dist(rng, n);
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
      const auto atoms = event_atoms(mask, n);
      const double diff = std::log(event_probability(q, atoms)) -
                          std::log(event_probability(p, atoms));
      const double m = std::max(0.0, -std::log(event_probability(p, atoms)));
      for (double alpha : {0.5, 1.0, 2.0, 8.0}) {
        RawBounds rb = raw_bounds(p, q, m, alpha);
        worst = std::max(worst, rb.lower - diff);
        worst = std::max(worst, diff - rb.upper);
      }
    }
  }
  return tol_check("uq/raw-bounds-soundness", std::max(worst, 0.0), 1e-9,
                   "worst violation " + fmt(worst));
}

CheckResult check_uq_threshold_continuity() {
  Rng rng(45);
  double worst = 0.0;
  for (int rep = 0; rep < 12; ++rep) {
    const std::size_t n = 3 + rng.index(5);
    DiscreteDist p = random_dist(rng, n), q = random_dist(rng, n);
    const double kl = relative_entropy(q, p);
    UqBoundReport at = optimal_bounds(p, q, kl);
    worst = std::max(worst, std::fabs(at.alpha_plus - 1.0));
    worst = std::max(worst, std::fabs(at.upper));
    UqBoundReport below = optimal_bounds(p, q, kl * (1.0 - 1e-6));
    UqBoundReport above = optimal_bounds(p, q, kl * (1.0 + 1e-6));
    if (!below.upper_is_trivial || above.upper_is_trivial)
      return bool_check("uq/threshold-continuity", false,
                        "trivial-branch flag wrong around m = KL(Q||P)");
    worst = std::max(worst, std::fabs(above.upper - below.upper));
  }
  return tol_check("uq/threshold-continuity", worst, 1e-7,
                   "upper bound and its optimizer are continuous across m = KL(Q||P)");
}

// ---------------------------------------------------------------------------
// sensitivity

CheckResult check_sensitivity_event_sandwich() {
  Rng rng(51);
  double worst = -kInf;
  int events = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 3 + rng.index(5);
    const std::size_t dim = 1 + rng.index(3);
    DiscreteDist d = random_dist(rng, n);
    std::vector<Vec> scores(n);
    for (auto& w : scores) w = random_vec(rng, dim, -2.0, 2.0);
    for (std::size_t k = 0; k < dim; ++k) {  // center each component under d
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += d.prob(i) * scores[i][k];
      for (std::size_t i = 0; i < n; ++i) scores[i][k] -= mean;
    }
    Vec v = random_vec(rng, dim, -1.0, 1.0);
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
      const auto atoms = event_atoms(mask, n);
      const double m = std::max(0.0, -std::log(event_probability(d, atoms)));
      const double exact = exact_index(d, scores, atoms, v);
      SensitivityReport r = sensitivity_indices(d, scores, v, m);
      worst = std::max(worst, r.index_minus - exact);
      worst = std::max(worst, exact - r.index_plus);
      if (r.flagged)
        return bool_check("sensitivity/event-sandwich", false, "interior self-check flagged");
      ++events;
    }
  }
  return tol_check("sensitivity/event-sandwich", std::max(worst, 0.0), 1e-9,
                   fmt(events) + " events; worst violation " + fmt(worst));
}

CheckResult check_concentration_ordering() {
  double worst = -kInf;
  for (double p : {0.1, 0.3, 0.5, 0.8}) {
    ExpFamModel model = ExpFamModel::bernoulli(p);
    ConcentrationParams params = concentration_params(model, {1.0});
    for (int i = 0; i < 20; ++i) {
      const double m = 0.1 + (10.0 - 0.1) * i / 19.0;
      const double index = sensitivity_indices(model, {1.0}, m).index_plus;
      const double bennett = bennett_bound(params, m);
      const double bernstein = bernstein_bound(params, m);
      worst = std::max(worst, index - bennett);
      worst = std::max(worst, bennett - bernstein);
    }
  }
  return tol_check("sensitivity/concentration-ordering", std::max(worst, 0.0), 1e-9,
                   "index <= bennett <= bernstein; worst violation " + fmt(worst));
}

CheckResult check_bennett_asymptote() {
  ConcentrationParams params{1.0, 0.25};
  const double b100 = bennett_bound(params, 100.0);
  const double rel = std::fabs(b100 - params.b) / params.b;
  return tol_check("sensitivity/bennett-asymptote", rel, 0.05,
                   "bennett(m=100) = " + fmt(b100) + " vs cap b = 1");
}

CheckResult check_linearized_limit() {
  ExpFamModel model = ExpFamModel::bernoulli(0.3);
  const double fisher = model.fisher_information()(0, 0);
  double prev = kInf;
  double last = kInf;
  for (double m : {1e-1, 1e-2, 1e-3}) {
    const double index = sensitivity_indices(model, {1.0}, m).index_plus;
    const double rel = std::fabs(index / linearized_index(fisher, m) - 1.0);
    if (rel > prev + 1e-12)
      return bool_check("sensitivity/linearized-limit", false,
                        "relative gap must shrink with m");
    prev = rel;
    last = rel;
  }
  return tol_check("sensitivity/linearized-limit", last, 0.05,
                   "index/sqrt(2 sigma2 m) -> 1; gap at m=1e-3 is " + fmt(last));
}

CheckResult check_baseline_crossover() {
  ExpFamModel model = ExpFamModel::bernoulli(0.3);
  const double fisher = model.fisher_information()(0, 0);
  const double m = 10.0;
  const double baseline = cramer_rao_baseline(fisher, std::exp(-m));
  const double index = sensitivity_indices(model, {1.0}, m).index_plus;
  return bool_check("sensitivity/baseline-crossover", baseline > 5.0 * index,
                    "variance baseline " + fmt(baseline) + " vs variational index " +
                        fmt(index) + " at m = 10");
}

// ---------------------------------------------------------------------------
// markov

MarkovModel five_state_chain() { return birth_death({0.2, 0.5, 0.7}); }

CheckResult check_markov_iid_reduction() {
  // Rank-one kernel: the chain draws IID from r, so the Perron CGF must
  // coincide with the scalar log-sum-exp CGF of f under r.
  const Vec r = {0.3, 0.2, 0.5};
  MarkovModel m;
  m.pi = Mat(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m.pi(i, j) = r[j];
  m.f = {-1.0, 0.0, 2.0};
  Cgf hm = markov_observable_cgf(m);
  Cgf hd = Cgf::from_discrete(DiscreteDist(r), m.f);
  double worst = 0.0;
  for (double a : {-3.0, -1.0, -0.2, 0.0, 0.5, 1.5, 4.0}) {
    worst = std::max(worst, std::fabs(hm.value(a) - hd.value(a)));
    worst = std::max(worst, std::fabs(hm.deriv1(a) - hd.deriv1(a)));
  }
  return tol_check("markov/iid-reduction", worst, 1e-9);
}

CheckResult check_markov_two_state_closed_form() {
  MarkovModel m;
  m.pi = Mat(2, 2);
  m.pi(0, 0) = 0.7;
  m.pi(0, 1) = 0.3;
  m.pi(1, 0) = 0.4;
  m.pi(1, 1) = 0.6;
  m.f = {0.0, 1.0};
  Mat g(2, 2);
  g(0, 0) = 0.3;
  g(0, 1) = -1.2;
  g(1, 0) = 0.7;
  g(1, 1) = 0.1;
  Cgf h = markov_edge_cgf(m, g);
  double worst = 0.0;
  for (double a : {-3.0, -1.0, -0.3, 0.5, 2.0, 4.0}) {
    auto lam = [&](double aa) {
      const double a00 = 0.7 * std::exp(aa * 0.3), a01 = 0.3 * std::exp(-aa * 1.2);
      const double a10 = 0.4 * std::exp(aa * 0.7), a11 = 0.6 * std::exp(aa * 0.1);
      const double tr = a00 + a11, det = a00 * a11 - a01 * a10;
      return 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
    };
    worst = std::max(worst, std::fabs(h.value(a) - std::log(lam(a))));
    const double e = 1e-6 * std::max(1.0, std::fabs(a));
    const double fd = (std::log(lam(a + e)) - std::log(lam(a - e))) / (2.0 * e);
    worst = std::max(worst, std::fabs(h.deriv1(a) - fd) / 1e3);  // fd itself is O(1e-9) accurate
  }
  return tol_check("markov/two-state-closed-form", worst, 1e-9);
}

CheckResult check_markov_entropy_duality() {
  Rng rng(61);
  double worst = 0.0;
  for (int rep = 0; rep < 12; ++rep) {
    const std::size_t n = 3 + rng.index(3);
    MarkovModel m;
    m.pi = Mat(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        m.pi(i, j) = rng.uniform(0.05, 1.0);
        s += m.pi(i, j);
      }
      for (std::size_t j = 0; j < n; ++j) m.pi(i, j) /= s;
    }
    m.f = Vec(n);
    for (std::size_t i = 0; i < n; ++i) m.f[i] = static_cast<double>(i) - 1.0;
    Mat g = edge_observable(m);
    Cgf h = markov_observable_cgf(m);
    const double a = rng.uniform(-2.0, 2.0);
    Mat t = twisted_kernel(m, a, g);
    Vec l = stationary_distribution(t);
    double phi_direct = 0.0, mean_g = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (t(i, j) > 0.0) {
          phi_direct += l[i] * t(i, j) * std::log(t(i, j) / m.pi(i, j));
          mean_g += l[i] * t(i, j) * g(i, j);
        }
    const double phi_cgf = a * h.deriv1(a) - h.value(a);
    worst = std::max(worst, std::fabs(phi_direct - phi_cgf));
    // The twisted mean is where the rate function takes the value phi.
    worst = std::max(worst, std::fabs(mean_g - h.deriv1(a)));
    worst = std::max(worst, std::fabs(markov_rate(m, mean_g) - phi_direct));
  }
  return tol_check("markov/entropy-duality", worst, 1e-7);
}

CheckResult check_markov_rate_at_mean() {
  MarkovModel m = five_state_chain();
  Vec pi_bar = stationary_distribution(m);
  double zbar = 0.0;
  for (std::size_t i = 0; i < m.n_states(); ++i) zbar += pi_bar[i] * m.f[i];
  const double rate = markov_rate(m, zbar);
  return tol_check("markov/rate-at-mean", std::fabs(rate), 1e-10,
                   "I(stationary mean " + fmt(zbar) + ") = " + fmt(rate));
}

CheckResult check_markov_karp_range() {
  MarkovModel m = five_state_chain();
  Mat g = edge_observable(m);
  double worst = std::fabs(max_mean_cycle(m.pi, g) - 1.5);
  worst = std::max(worst, std::fabs(min_mean_cycle(m.pi, g) + 1.5));
  // Unit direction on the first parameter: cycles 1<->2 at mean (1/q0)/2 and
  // 0<->1 at mean (-1/(1-q0))/2 are the extremes.
  Mat gs = edge_score(m, {1.0, 0.0, 0.0});
  worst = std::max(worst, std::fabs(max_mean_cycle(m.pi, gs) - 0.5 / 0.2));
  worst = std::max(worst, std::fabs(min_mean_cycle(m.pi, gs) + 0.5 / 0.8));
  return tol_check("markov/karp-slope-range", worst, 1e-12);
}

CheckResult check_markov_dp_binomial() {
  MarkovModel m;
  m.pi = Mat(2, 2, 0.5);
  m.f = {-1.0, 1.0};
  m.initial_state = 0;
  const double got = dp_probability(m, 10, 0.0);
  const double exact = 252.0 / 1024.0;  // C(10,5) / 2^10
  return tol_check("markov/dp-binomial", std::fabs(got - exact), 1e-15,
                   "P(S_10 = 0) = " + fmt(got) + " for the fair +/-1 coin");
}

CheckResult check_markov_dp_rate_consistency() {
  MarkovModel m = five_state_chain();
  const double z = 1.0;
  const double rate = markov_rate(m, z);
  const std::size_t n = 400;
  const double emp = -dp_log_probability(m, n, z) / static_cast<double>(n);
  return tol_check("markov/dp-rate-consistency", std::fabs(emp - rate), 0.03,
                   "-(1/n) log P_n = " + fmt(emp) + " vs I(z) = " + fmt(rate) +
                       " at n = 400 (gap is the O(log n / n) prefactor)");
}

CheckResult check_markov_fd_sandwich() {
  MarkovModel m = five_state_chain();
  const Vec v = {1.0, 0.0, 0.0};
  const Vec z_grid = {-0.9, -0.3, 0.5, 1.1};
  FdSweep sweep = fd_sensitivity_sweep(m, v, 300, z_grid);
  double worst = -kInf;
  for (std::size_t i = 0; i < z_grid.size(); ++i) {
    LdpReport r = markov_sensitivity(m, v, sweep.z_snapped[i]);
    worst = std::max(worst, r.index_minus - sweep.fd[i]);
    worst = std::max(worst, sweep.fd[i] - r.index_plus);
  }
  return tol_check("markov/fd-sandwich", std::max(worst, 0.0), 0.05,
                   "finite-difference sensitivities inside the index pair; worst slack " +
                       fmt(worst));
}

CheckResult check_markov_degenerate_direction() {
  MarkovModel m = five_state_chain();
  try {
    markov_sensitivity(m, {0.0, 0.0, 0.0}, 0.3);
    return bool_check("markov/degenerate-direction", false, "zero direction accepted");
  } catch (const ConstantObservableError&) {
    return bool_check("markov/degenerate-direction", true,
                      "zero direction rejected as a constant observable");
  }
}

}  // namespace

std::vector<CheckResult> run_selfchecks() {
  std::vector<CheckResult> out;
  out.push_back(check_cgf_normalization());
  out.push_back(check_cgf_tilt_moments());
  out.push_back(check_cgf_bernoulli_closure());
  out.push_back(check_interior_kl_identity());
  out.push_back(check_grid_oracle());
  out.push_back(check_kl_path_agreement());
  out.push_back(check_case_classification());
  out.push_back(check_gaussian_closed_form());
  out.push_back(check_laplace_interior());
  out.push_back(check_legendre_grid_oracle());
  out.push_back(check_renyi_skew_symmetry());
  out.push_back(check_renyi_order_monotonicity());
  out.push_back(check_renyi_limits());
  out.push_back(check_variational_gap());
  out.push_back(check_interpolation_endpoints());
  out.push_back(check_uq_derivative_identity());
  out.push_back(check_uq_event_soundness());
  out.push_back(check_uq_raw_soundness());
  out.push_back(check_uq_threshold_continuity());
  out.push_back(check_sensitivity_event_sandwich());
  out.push_back(check_concentration_ordering());
  out.push_back(check_bennett_asymptote());
  out.push_back(check_linearized_limit());
  out.push_back(check_baseline_crossover());
  out.push_back(check_markov_iid_reduction());
  out.push_back(check_markov_two_state_closed_form());
  out.push_back(check_markov_entropy_duality());
  out.push_back(check_markov_rate_at_mean());
  out.push_back(check_markov_karp_range());
  out.push_back(check_markov_dp_binomial());
  out.push_back(check_markov_dp_rate_consistency());
  out.push_back(check_markov_fd_sandwich());
  out.push_back(check_markov_degenerate_direction());
  return out;
}

}  // namespace raresens
