#include "raresens/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "raresens/errors.hpp"
#include "raresens/linalg.hpp"

namespace raresens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::vector<std::size_t>> support_adjacency(const Mat& pi, bool reversed) {
  std::vector<std::vector<std::size_t>> adj(pi.rows);
  for (std::size_t i = 0; i < pi.rows; ++i)
    for (std::size_t j = 0; j < pi.cols; ++j)
      if (pi(i, j) > 0.0) adj[reversed ? j : i].push_back(reversed ? i : j);
  return adj;
}

bool all_reachable(const std::vector<std::vector<std::size_t>>& adj, std::size_t src) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<std::size_t> stack{src};
  seen[src] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t w : adj[u])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count == adj.size();
}

void check_irreducible(const Mat& pi, const char* who) {
  if (!all_reachable(support_adjacency(pi, false), 0) ||
      !all_reachable(support_adjacency(pi, true), 0))
    throw std::invalid_argument(std::string(who) + ": chain is not irreducible");
}

void check_square(const Mat& m, std::size_t n, const char* who) {
  if (m.rows != n || m.cols != n)
    throw std::invalid_argument(std::string(who) + ": matrix shape mismatch");
}

// ---- Perron machinery ------------------------------------------------
//
// Everything runs in log space on the balanced similarity D^-1 A D, which
// keeps strongly tilted matrices (entries spanning hundreds of orders of
// magnitude) exact and keeps the power iteration's contraction governed by
// the genuine spectral gap rather than by row-scale disparity.

struct TiltedPerron {
  double shift = 0.0;           // max over support of a g(i,j)
  Mat logA;                     // log pi + a g - shift; -inf off support
  Vec off;                      // balancing offsets (log of D's diagonal)
  Vec lw, lu;                   // log right/left Perron vectors, balanced coords
  double log_lambda_bar = 0.0;  // log Perron root of logA
  double log_lambda() const { return shift + log_lambda_bar; }
};

Mat log_tilted(const Mat& pi, const Mat& g, double a, double* shift_out) {
  const std::size_t n = pi.rows;
  double shift = kNegInf;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (pi(i, j) > 0.0) shift = std::max(shift, a * g(i, j));
  Mat logA(n, n, kNegInf);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (pi(i, j) > 0.0) logA(i, j) = std::log(pi(i, j)) + a * g(i, j) - shift;
  *shift_out = shift;
  return logA;
}

// Osborne balancing in log space: equalize each node's balanced row and
// column sums (off-diagonal). Correctness never depends on the quality of
// the balance; it only speeds up the power iteration.
Vec balance_offsets(const Mat& logA) {
  const std::size_t n = logA.rows;
  Vec off(n, 0.0);
  Vec row, col;
  const int sweeps = std::max<int>(50, 4 * static_cast<int>(n));
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      row.clear();
      col.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        if (logA(i, j) != kNegInf) row.push_back(logA(i, j) + off[j] - off[i]);
        if (logA(j, i) != kNegInf) col.push_back(logA(j, i) + off[i] - off[j]);
      }
      if (row.empty() || col.empty()) continue;
      const double delta = 0.5 * (log_sum_exp(row) - log_sum_exp(col));
      off[i] += delta;
      worst = std::max(worst, std::fabs(delta));
    }
    if (worst < 1e-3) break;
  }
  return off;
}

// One multiply by the balanced matrix (or its transpose) in log space.
Vec log_matvec(const Mat& logA, const Vec& off, bool transposed, const Vec& lx) {
  const std::size_t n = logA.rows;
  Vec out(n, kNegInf);
  Vec terms;
  terms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    terms.clear();
    for (std::size_t j = 0; j < n; ++j) {
      const double e = transposed ? logA(j, i) + off[i] - off[j] : logA(i, j) + off[j] - off[i];
      if (e == kNegInf || lx[j] == kNegInf) continue;
      terms.push_back(e + lx[j]);
    }
    out[i] = log_sum_exp(terms);
  }
  return out;
}

// Power iteration on B = Abal/s + I (s = max balanced row sum): the +I
// shift makes periodic supports (e.g. birth-death chains) converge.
// Returns the log Perron vector, normalized so its log-sum-exp is 0.
Vec power_vector(const Mat& logA, const Vec& off, double log_s, bool transposed) {
  const std::size_t n = logA.rows;
  Vec lv(n, -std::log(static_cast<double>(n)));
  double prev_mu = kInf, delta = kInf;
  for (long iter = 0; iter < 100000; ++iter) {
    Vec t = log_matvec(logA, off, transposed, lv);
    for (std::size_t i = 0; i < n; ++i) t[i] = log_add_exp(t[i] - log_s, lv[i]);
    const double log_mu = log_sum_exp(t);
    for (double& x : t) x -= log_mu;
    lv = std::move(t);
    const double mu = std::exp(log_mu);
    delta = std::fabs(mu - prev_mu);
    if (delta < 1e-13) return lv;
    prev_mu = mu;
  }
  throw std::runtime_error("markov: power iteration did not converge (residual " +
                           std::to_string(delta) + ")");
}

TiltedPerron tilt_perron(const Mat& pi, const Mat& g, double a) {
  TiltedPerron T;
  T.logA = log_tilted(pi, g, a, &T.shift);
  T.off = balance_offsets(T.logA);
  const std::size_t n = pi.rows;

  double log_s = kNegInf;
  Vec terms;
  for (std::size_t i = 0; i < n; ++i) {
    terms.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (T.logA(i, j) != kNegInf) terms.push_back(T.logA(i, j) + T.off[j] - T.off[i]);
    log_s = std::max(log_s, log_sum_exp(terms));
  }
  if (log_s == kNegInf) throw std::invalid_argument("markov: empty support");

  T.lw = power_vector(T.logA, T.off, log_s, false);
  T.lu = power_vector(T.logA, T.off, log_s, true);

  // Two-sided Rayleigh polish: lambda = u.(A w) / u.w kills the first-order
  // error of the individual vectors.
  Vec num, den;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (T.logA(i, j) != kNegInf)
        num.push_back(T.lu[i] + T.logA(i, j) + T.off[j] - T.off[i] + T.lw[j]);
    den.push_back(T.lu[i] + T.lw[i]);
  }
  T.log_lambda_bar = log_sum_exp(num) - log_sum_exp(den);
  return T;
}

// H'(a) = u.((G o A) w) / u.(A w), computed with signed log accumulation.
double perron_deriv(const TiltedPerron& T, const Mat& g) {
  const std::size_t n = T.logA.rows;
  Vec pos, neg, den;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (T.logA(i, j) == kNegInf) continue;
      const double t = T.lu[i] + T.logA(i, j) + T.off[j] - T.off[i] + T.lw[j];
      den.push_back(t);
      const double w = g(i, j);
      if (w > 0.0)
        pos.push_back(t + std::log(w));
      else if (w < 0.0)
        neg.push_back(t + std::log(-w));
    }
  const double ld = log_sum_exp(den);
  double out = 0.0;
  if (!pos.empty()) out += std::exp(log_sum_exp(pos) - ld);
  if (!neg.empty()) out -= std::exp(log_sum_exp(neg) - ld);
  return out;
}

}  // namespace

void validate(const MarkovModel& model) {
  const std::size_t n = model.f.size();
  if (n == 0) throw std::invalid_argument("markov: model has no states");
  check_square(model.pi, n, "markov");
  if (model.initial_state >= n)
    throw std::invalid_argument("markov: initial state out of range");
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (model.pi(i, j) < 0.0)
        throw std::invalid_argument("markov: negative transition probability");
      s += model.pi(i, j);
    }
    if (std::fabs(s - 1.0) > 1e-12)
      throw std::invalid_argument("markov: rows of pi must sum to 1");
  }
  for (const Mat& w : model.score) {
    check_square(w, n, "markov score");
    for (std::size_t i = 0; i < n; ++i) {
      double mean = 0.0, scale = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (model.pi(i, j) == 0.0 && w(i, j) != 0.0)
          throw std::invalid_argument("markov: score must vanish off the support");
        mean += model.pi(i, j) * w(i, j);
        scale = std::max(scale, std::fabs(w(i, j)));
      }
      if (std::fabs(mean) > 1e-10 * std::max(1.0, scale))
        throw std::invalid_argument("markov: score rows must be centered under pi");
    }
  }
  check_irreducible(model.pi, "markov");
}

MarkovModel birth_death(const Vec& q, Vec f, std::optional<std::size_t> initial_state) {
  if (q.empty()) throw std::invalid_argument("birth_death: need at least one interior state");
  for (double qi : q)
    if (!(qi > 0.0 && qi < 1.0))
      throw std::invalid_argument("birth_death: q entries must lie in (0,1)");
  const std::size_t n = q.size() + 2;

  MarkovModel m;
  m.pi = Mat(n, n);
  m.score.assign(q.size(), Mat(n, n));
  m.theta = q;
  m.pi(0, 1) = 1.0;
  m.pi(n - 1, n - 2) = 1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const std::size_t k = i - 1;
    m.pi(i, i + 1) = q[k];
    m.pi(i, i - 1) = 1.0 - q[k];
    m.score[k](i, i + 1) = 1.0 / q[k];
    m.score[k](i, i - 1) = -1.0 / (1.0 - q[k]);
  }
  if (f.empty()) {
    const double c = std::floor((static_cast<double>(n) - 1.0) / 2.0);
    f.resize(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = static_cast<double>(i) - c;
  } else if (f.size() != n) {
    throw std::invalid_argument("birth_death: f must have one entry per state");
  }
  m.f = std::move(f);
  m.initial_state = initial_state.value_or(n / 2);
  validate(m);
  return m;
}

MarkovModel perturbed(const MarkovModel& model, const Vec& v, double eps) {
  validate(model);
  const Mat g = edge_score(model, v);
  const std::size_t n = model.n_states();

  MarkovModel out = model;
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (model.pi(i, j) > 0.0) {
        out.pi(i, j) = model.pi(i, j) * std::exp(eps * g(i, j));
        z += out.pi(i, j);
      }
    }
    for (std::size_t j = 0; j < n; ++j) out.pi(i, j) /= z;
  }
  // Recenter scores under the new kernel so the result is again a valid
  // model; exact zeros off-support are preserved.
  for (Mat& w : out.score) {
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0;
      for (std::size_t j = 0; j < n; ++j) c += out.pi(i, j) * w(i, j);
      for (std::size_t j = 0; j < n; ++j)
        if (out.pi(i, j) > 0.0) w(i, j) -= c;
    }
  }
  if (out.theta.size() == v.size())
    for (std::size_t k = 0; k < v.size(); ++k) out.theta[k] += eps * v[k];
  validate(out);
  return out;
}

Mat edge_score(const MarkovModel& model, const Vec& v) {
  if (v.size() != model.param_dim())
    throw std::invalid_argument("edge_score: direction dimension mismatch");
  const std::size_t n = model.n_states();
  Mat g(n, n);
  for (std::size_t k = 0; k < v.size(); ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (model.pi(i, j) > 0.0) g(i, j) += v[k] * model.score[k](i, j);
  return g;
}

Mat edge_observable(const MarkovModel& model) {
  const std::size_t n = model.n_states();
  Mat g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (model.pi(i, j) > 0.0) g(i, j) = model.f[j];
  return g;
}

double max_mean_cycle(const Mat& pi, const Mat& g) {
  const std::size_t n = pi.rows;
  check_square(pi, n, "mean_cycle");
  check_square(g, n, "mean_cycle");
  // Karp: d[k][v] = max weight of a k-edge walk from node 0 to v.
  std::vector<Vec> d(n + 1, Vec(n, kNegInf));
  d[0][0] = 0.0;
  for (std::size_t k = 1; k <= n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (d[k - 1][i] == kNegInf) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (pi(i, j) > 0.0) d[k][j] = std::max(d[k][j], d[k - 1][i] + g(i, j));
    }
  double best = kNegInf;
  for (std::size_t v = 0; v < n; ++v) {
    if (d[n][v] == kNegInf) continue;
    double worst = kInf;
    for (std::size_t k = 0; k < n; ++k) {
      if (d[k][v] == kNegInf) continue;
      worst = std::min(worst, (d[n][v] - d[k][v]) / static_cast<double>(n - k));
    }
    best = std::max(best, worst);
  }
  if (best == kNegInf)
    throw std::invalid_argument("mean_cycle: no cycle reachable from node 0");
  return best;
}

double min_mean_cycle(const Mat& pi, const Mat& g) {
  Mat neg = g;
  for (double& x : neg.data) x = -x;
  return -max_mean_cycle(pi, neg);
}

Cgf markov_edge_cgf(const MarkovModel& model, const Mat& g) {
  validate(model);
  check_square(g, model.n_states(), "markov_edge_cgf");
  const double ess_lo = min_mean_cycle(model.pi, g);
  const double ess_hi = max_mean_cycle(model.pi, g);

  struct Data {
    Mat pi, g;
  };
  auto d = std::make_shared<const Data>(Data{model.pi, g});
  auto value = [d](double a) { return tilt_perron(d->pi, d->g, a).log_lambda(); };
  auto deriv1 = [d](double a) { return perron_deriv(tilt_perron(d->pi, d->g, a), d->g); };
  auto deriv2 = [deriv1](double a) {
    const double h = 1e-5 * std::max(1.0, std::fabs(a));
    return (deriv1(a + h) - deriv1(a - h)) / (2.0 * h);
  };
  return Cgf::from_functions(value, deriv1, deriv2, CgfDomain{}, ess_lo, ess_hi);
}

Cgf markov_cgf(const MarkovModel& model, const Vec& v) {
  return markov_edge_cgf(model, edge_score(model, v));
}

Cgf markov_observable_cgf(const MarkovModel& model) {
  return markov_edge_cgf(model, edge_observable(model));
}

Vec stationary_distribution(const Mat& pi) {
  const std::size_t n = pi.rows;
  check_square(pi, n, "stationary_distribution");
  if (n == 0) throw std::invalid_argument("stationary_distribution: empty matrix");
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (pi(i, j) < 0.0)
        throw std::invalid_argument("stationary_distribution: negative entry");
      s += pi(i, j);
    }
    if (std::fabs(s - 1.0) > 1e-9)
      throw std::invalid_argument("stationary_distribution: rows must sum to 1");
  }
  check_irreducible(pi, "stationary_distribution");

  const Mat zero(n, n);
  const TiltedPerron T = tilt_perron(pi, zero, 0.0);
  Vec u(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = std::exp(T.lu[i] - T.off[i]);
    total += u[i];
  }
  for (double& x : u) x /= total;
  return u;
}

Vec stationary_distribution(const MarkovModel& model) {
  validate(model);
  return stationary_distribution(model.pi);
}

double markov_rate(const MarkovModel& model, double z) {
  // I(z) >= 0 since h(0) = 0; clamp arithmetic noise near the stationary mean.
  return std::max(0.0, legendre(markov_observable_cgf(model), z).value);
}

Mat twisted_kernel(const MarkovModel& model, double alpha, const Mat& g) {
  validate(model);
  const std::size_t n = model.n_states();
  check_square(g, n, "twisted_kernel");
  const TiltedPerron T = tilt_perron(model.pi, g, alpha);

  // pi_a(i,j) = A(i,j) w(j) / (lambda w(i)); the shift and balance offsets
  // cancel in the ratio.
  Mat out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (model.pi(i, j) > 0.0) {
        out(i, j) = std::exp(T.logA(i, j) + T.off[j] - T.off[i] + T.lw[j] - T.lw[i] -
                             T.log_lambda_bar);
        s += out(i, j);
      }
    }
    for (std::size_t j = 0; j < n; ++j) out(i, j) /= s;
  }
  return out;
}

LdpReport markov_sensitivity(const MarkovModel& model, const Vec& v, double z) {
  const double rate = markov_rate(model, z);
  if (!std::isfinite(rate))
    throw std::domain_error("markov_sensitivity: z outside the attainable mean range");
  Cgf h = markov_cgf(model, v);
  const BoundResult up = minimize_bound(h, rate, Sign::Plus);
  const BoundResult lo = minimize_bound(h, rate, Sign::Minus);
  return LdpReport{z,
                   rate,
                   -lo.value,
                   up.value,
                   lo.alpha_star,
                   up.alpha_star,
                   lo.kind,
                   up.kind,
                   std::move(h)};
}

SensitivityReport iid_sensitivity(const ExpFamModel& model, const Vec& v, double rate_value) {
  return sensitivity_indices(model, v, rate_value);
}

SensitivityReport iid_sensitivity(const DiscreteDist& dist, const std::vector<Vec>& scores,
                                  const Vec& v, double rate_value) {
  return sensitivity_indices(dist, scores, v, rate_value);
}

double SumDistribution::log_at(long long k) const {
  const long long idx = k - sum_lo;
  if (idx < 0 || idx >= static_cast<long long>(log_prob.size())) return kNegInf;
  return log_prob[static_cast<std::size_t>(idx)];
}

long long SumDistribution::nearest_attainable(double target) const {
  long long best = 0;
  double best_dist = kInf;
  bool found = false;
  for (std::size_t i = 0; i < log_prob.size(); ++i) {
    if (log_prob[i] == kNegInf) continue;
    const long long k = sum_lo + static_cast<long long>(i);
    const double dist = std::fabs(static_cast<double>(k) - target);
    if (!found || dist < best_dist) {
      best = k;
      best_dist = dist;
      found = true;
    }
  }
  if (!found) throw std::domain_error("dp: no attainable sum");
  return best;
}

SumDistribution dp_sum_distribution(const MarkovModel& model, std::size_t n) {
  validate(model);
  if (n == 0) throw std::invalid_argument("dp: horizon must be positive");
  const std::size_t ns = model.n_states();

  std::vector<long long> fi(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const long long r = std::llround(model.f[s]);
    if (std::fabs(model.f[s] - static_cast<double>(r)) > 1e-9)
      throw std::invalid_argument("dp: observable must be integer-valued");
    fi[s] = r;
  }
  const long long fmin = *std::min_element(fi.begin(), fi.end());
  const long long fmax = *std::max_element(fi.begin(), fi.end());
  const long long lo = std::min<long long>(0, static_cast<long long>(n) * fmin);
  const long long hi = std::max<long long>(0, static_cast<long long>(n) * fmax);
  const std::size_t width = static_cast<std::size_t>(hi - lo + 1);
  if (static_cast<double>(width) * static_cast<double>(ns) > 5e7)
    throw std::invalid_argument("dp: sum lattice too large");

  std::vector<std::vector<std::pair<std::size_t, double>>> out_edges(ns);
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < ns; ++j)
      if (model.pi(i, j) > 0.0) out_edges[i].push_back({j, std::log(model.pi(i, j))});

  std::vector<Vec> cur(ns, Vec(width, kNegInf)), nxt(ns, Vec(width, kNegInf));
  cur[model.initial_state][static_cast<std::size_t>(-lo)] = 0.0;

  for (std::size_t step = 0; step < n; ++step) {
    for (auto& row : nxt) std::fill(row.begin(), row.end(), kNegInf);
    for (std::size_t i = 0; i < ns; ++i) {
      const Vec& ci = cur[i];
      for (std::size_t idx = 0; idx < width; ++idx) {
        if (ci[idx] == kNegInf) continue;
        for (const auto& [j, lp] : out_edges[i]) {
          const long long tgt = static_cast<long long>(idx) + fi[j];
          if (tgt < 0 || tgt >= static_cast<long long>(width)) continue;
          double& cell = nxt[j][static_cast<std::size_t>(tgt)];
          cell = log_add_exp(cell, ci[idx] + lp);
        }
      }
    }
    std::swap(cur, nxt);
  }

  SumDistribution out;
  out.sum_lo = lo;
  out.log_prob.assign(width, kNegInf);
  Vec terms;
  terms.reserve(ns);
  for (std::size_t idx = 0; idx < width; ++idx) {
    terms.clear();
    for (std::size_t s = 0; s < ns; ++s)
      if (cur[s][idx] != kNegInf) terms.push_back(cur[s][idx]);
    out.log_prob[idx] = log_sum_exp(terms);
  }
  return out;
}

double dp_log_probability(const MarkovModel& model, std::size_t n, double z) {
  const double target = z * static_cast<double>(n);
  const long long k = std::llround(target);
  if (std::fabs(target - static_cast<double>(k)) > 1e-6 * std::max(1.0, std::fabs(target)))
    throw std::invalid_argument("dp: z is not a lattice value k/n");
  return dp_sum_distribution(model, n).log_at(k);
}

double dp_probability(const MarkovModel& model, std::size_t n, double z) {
  return std::exp(dp_log_probability(model, n, z));
}

FdSweep fd_sensitivity_sweep(const MarkovModel& model, const Vec& v, std::size_t n,
                             const Vec& z_grid, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("fd_sensitivity: eps must be positive");
  // The exponential perturbation preserves the support, so both tables
  // live on the same lattice.
  const SumDistribution up = dp_sum_distribution(perturbed(model, v, +eps), n);
  const SumDistribution dn = dp_sum_distribution(perturbed(model, v, -eps), n);

  FdSweep out;
  for (double z : z_grid) {
    const long long k = up.nearest_attainable(z * static_cast<double>(n));
    out.sums.push_back(k);
    out.z_snapped.push_back(static_cast<double>(k) / static_cast<double>(n));
    out.fd.push_back((up.log_at(k) - dn.log_at(k)) / (2.0 * static_cast<double>(n) * eps));
  }
  return out;
}

double fd_sensitivity(const MarkovModel& model, const Vec& v, std::size_t n, double z,
                      double eps) {
  return fd_sensitivity_sweep(model, v, n, Vec{z}, eps).fd[0];
}

}  // namespace raresens
