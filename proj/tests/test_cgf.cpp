#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "raresens/cgf.hpp"
#include "oracles.hpp"

using namespace raresens;

TEST_CASE("exponential-family directional CGFs") {
  // Quadratic log-normalizer: H(a) = sigma2 a^2 / 2.
  Cgf g = Cgf::from_expfam(ExpFamModel::gaussian_mean(0.0, 1.0), {1.0});
  CHECK(g.value(2.0) == doctest::Approx(2.0).epsilon(1e-12));

  Cgf b = Cgf::from_expfam(ExpFamModel::bernoulli(0.5), {1.0});
  const double expect = std::log(1.0 + std::exp(1.0)) - std::log(2.0) - 0.5;
  CHECK(b.value(1.0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(0.12011).epsilon(1e-4));

  // Laplace blows up logarithmically at the domain edge d+ = 1.
  Cgf lap = Cgf::from_expfam(ExpFamModel::centered_laplace(-1.0), {1.0});
  CHECK(lap.domain().hi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lap.value(1.0 - 1e-9) > 15.0);
  CHECK(lap.value(2.0) == oracles::kInf);
}

TEST_CASE("discrete CGFs") {
  DiscreteDist d({0.3, 0.7});
  Cgf hc = Cgf::from_discrete(d, {2.5, 2.5});
  for (double a : {-3.0, 0.0, 0.7, 10.0})
    CHECK(hc.value(a) == doctest::Approx(2.5 * a).epsilon(1e-13));

  DiscreteDist half({0.5, 0.5});
  Cgf h = Cgf::from_discrete(half, {1.0, -1.0});
  CHECK(h.value(1.0) == doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-13));
  CHECK(h.value(0.0) == doctest::Approx(0.0));
  CHECK(h.ess_sup().value() == doctest::Approx(1.0));
  CHECK(h.ess_inf().value() == doctest::Approx(-1.0));
}

TEST_CASE("empirical CGFs") {
  std::vector<double> flat(50, 2.5);
  Cgf hc = Cgf::from_samples(flat);
  CHECK(hc.value(3.0) == doctest::Approx(7.5).epsilon(1e-13));

  std::vector<double> pm = {1.0, -1.0};
  Cgf h = Cgf::from_samples(pm, 1.0);
  DiscreteDist half({0.5, 0.5});
  Cgf ref = Cgf::from_discrete(half, {1.0, -1.0});
  for (double a : {-2.0, -0.3, 0.9})
    CHECK(h.value(a) == doctest::Approx(ref.value(a)).epsilon(1e-12));
  CHECK(h.empirical());

  // Large standard-normal sample approximates the quadratic CGF.
  const auto xs = ExpFamModel::gaussian_mean(0.0, 1.0).sample(100000, 11);
  Cgf hs = Cgf::from_samples(xs);
  CHECK(std::fabs(hs.value(0.5) - 0.125) < 0.01);
}

TEST_CASE("empirical trust region tracks the effective sample size") {
  const auto xs = ExpFamModel::gaussian_mean(0.0, 1.0).sample(2000, 5);
  Cgf h = Cgf::from_samples(xs, 30.0);
  CHECK(h.trust_hi() > 0.0);
  CHECK(h.trust_lo() < 0.0);
  CHECK(std::isfinite(h.trust_hi()));

  // ESS at the trust edge is pinned near the requested floor: recompute
  // the tilted effective sample size independently.
  const double a = h.trust_hi();
  double num = 0.0, den = 0.0;
  double hmax = -oracles::kInf;
  for (double x : xs) hmax = std::max(hmax, a * x);
  for (double x : xs) {
    const double w = std::exp(a * x - hmax);
    num += w;
    den += w * w;
  }
  const double ess = num * num / den;
  CHECK(ess == doctest::Approx(30.0).epsilon(0.05));
}

TEST_CASE("exponential tilting") {
  DiscreteDist half({0.5, 0.5});
  Vec g = {1.0, -1.0};

  DiscreteDist same = tilt(half, g, 0.0);
  CHECK(same.prob(0) == doctest::Approx(0.5).epsilon(1e-15));

  DiscreteDist far = tilt(half, g, 50.0);
  CHECK(far.prob(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(far.prob(1) == doctest::Approx(0.0));

  DiscreteDist one = tilt(half, g, 1.0);
  const double e2 = std::exp(2.0);
  CHECK(one.prob(0) == doctest::Approx(e2 / (e2 + 1.0)).epsilon(1e-14));
  CHECK(one.prob(1) == doctest::Approx(1.0 / (e2 + 1.0)).epsilon(1e-14));

  // Zero-probability atoms stay at zero under any tilt.
  DiscreteDist z({0.0, 0.4, 0.6});
  DiscreteDist zt = tilt(z, {5.0, 1.0, -1.0}, 3.0);
  CHECK(zt.prob(0) == 0.0);
}

TEST_CASE("tilted moments match CGF derivatives") {
  oracles::Rng rng(9);
  DiscreteDist d = oracles::random_dist(rng, 6);
  Vec g = oracles::random_vec(rng, 6, -2.0, 2.0);
  Cgf h = Cgf::from_discrete(d, g);
  for (double a : {-1.5, 0.0, 0.8, 3.0}) {
    CHECK(h.deriv1(a) == doctest::Approx(tilted_mean(d, g, a)).epsilon(1e-12));
    CHECK(h.deriv2(a) == doctest::Approx(tilted_variance(d, g, a)).epsilon(1e-10));
  }
}

TEST_CASE("exponential-family tilt closure") {
  // Tilting the score CGF by a moves the natural parameter to theta + a v.
  ExpFamModel m = ExpFamModel::bernoulli(0.3);
  Cgf h = Cgf::from_expfam(m, {1.0});
  for (double a : {-2.0, 0.5, 1.7}) {
    const Vec shifted = {m.theta()[0] + a};
    const double tilted_mean_exact =
        m.grad_log_normalizer(shifted)[0] - m.grad_log_normalizer(m.theta())[0];
    CHECK(h.deriv1(a) == doctest::Approx(tilted_mean_exact).epsilon(1e-12));
  }
}

TEST_CASE("negated handle mirrors everything") {
  DiscreteDist d({0.2, 0.8});
  Cgf h = Cgf::from_discrete(d, {1.0, -0.25});
  Cgf n = h.negated();
  for (double a : {-2.0, 0.3, 1.1}) {
    CHECK(n.value(a) == doctest::Approx(h.value(-a)).epsilon(1e-14));
    CHECK(n.deriv1(a) == doctest::Approx(-h.deriv1(-a)).epsilon(1e-13));
  }
  CHECK(n.ess_sup().value() == doctest::Approx(0.25));
  CHECK(n.ess_inf().value() == doctest::Approx(-1.0));
}
