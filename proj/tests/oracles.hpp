#pragma once

// Test-local oracles, deliberately independent of the library's own
// optimizers: dense-grid + golden-section minimization, exhaustive event
// enumeration, deterministic instance generation, and a small Richardson
// fit. Tests compare library results against these, never against the
// library itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "raresens/distributions.hpp"

namespace oracles {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Rng {
  std::uint64_t s;
  explicit Rng(std::uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next() {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    return s * 0x2545F4914F6CDD1DULL;
  }
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

inline raresens::DiscreteDist random_dist(Rng& rng, std::size_t n, double floor = 0.05) {
  raresens::Vec p(n);
  double s = 0.0;
  for (double& x : p) {
    x = rng.uniform(floor, 1.0);
    s += x;
  }
  for (double& x : p) x /= s;
  return raresens::DiscreteDist(std::move(p));
}

inline raresens::Vec random_vec(Rng& rng, std::size_t n, double lo, double hi) {
  raresens::Vec g(n);
  for (double& x : g) x = rng.uniform(lo, hi);
  return g;
}

// Per-atom score vectors with every component exactly centered under dist.
inline std::vector<raresens::Vec> random_scores(Rng& rng, const raresens::DiscreteDist& dist,
                                                std::size_t dim) {
  std::vector<raresens::Vec> w(dist.size());
  for (auto& row : w) row = random_vec(rng, dim, -2.0, 2.0);
  for (std::size_t k = 0; k < dim; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) mean += dist.prob(i) * w[i][k];
    for (std::size_t i = 0; i < dist.size(); ++i) w[i][k] -= mean;
  }
  return w;
}

inline std::vector<std::size_t> event_atoms(std::size_t mask, std::size_t n) {
  std::vector<std::size_t> atoms;
  for (std::size_t i = 0; i < n; ++i)
    if (mask & (std::size_t{1} << i)) atoms.push_back(i);
  return atoms;
}

// Golden-section minimum of fn over [lo, hi].
inline double golden_min(const std::function<double(double)>& fn, double lo, double hi) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < 250 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = fn(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = fn(x2);
    }
  }
  return std::min(f1, f2);
}

// Dense log-grid + golden-section value of inf_{a in (0, a_cap)} fn(a).
inline double grid_min_positive(const std::function<double(double)>& fn, double a_cap) {
  const double alo = 1e-8;
  const int n = 4000;
  double best = kInf, best_a = alo;
  for (int i = 0; i <= n; ++i) {
    const double a = std::exp(std::log(alo) + (std::log(a_cap) - std::log(alo)) * i / n);
    const double v = fn(a);
    if (v < best) {
      best = v;
      best_a = a;
    }
  }
  return std::min(best, golden_min(fn, std::max(alo, best_a * 0.97),
                                   std::min(a_cap, best_a * 1.03)));
}

// Least-squares-free exact fit of a_n = c0 + c1 log(n)/n + c2 / n through
// three horizons; returns c0 (the extrapolated limit).
inline double richardson_log_fit(const std::vector<std::pair<double, double>>& pts) {
  // Solve the 3x3 system by Cramer's rule; pts = {(n, a_n)}.
  double m[3][3], y[3];
  for (int r = 0; r < 3; ++r) {
    const double n = pts[r].first;
    m[r][0] = 1.0;
    m[r][1] = std::log(n) / n;
    m[r][2] = 1.0 / n;
    y[r] = pts[r].second;
  }
  auto det3 = [](const double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double d = det3(m);
  double m0[3][3];
  for (int r = 0; r < 3; ++r) {
    m0[r][0] = y[r];
    m0[r][1] = m[r][1];
    m0[r][2] = m[r][2];
  }
  return det3(m0) / d;
}

}  // namespace oracles
