#pragma once

// Large-deviation-scale machinery for finite irreducible Markov chains:
// Perron-eigenvalue CGFs, rate functions by Legendre transform, twisted
// kernels realizing the constrained optimizer, sensitivity index pairs,
// and an exact dynamic-programming oracle for lattice sum events.

#include <optional>
#include <vector>

#include "raresens/cgf.hpp"
#include "raresens/optimize.hpp"
#include "raresens/sensitivity.hpp"

namespace raresens {

// Finite-state chain with per-edge parameter scores W_k(i,j); score
// matrices are zero exactly where pi is zero and row-centered under pi
// (they are gradients of log pi). f is the per-state observable driving
// the partial sums S_n = f(X_1) + ... + f(X_n); X_0 = initial_state.
struct MarkovModel {
  Mat pi;                  // row-stochastic, irreducible
  std::vector<Mat> score;  // one matrix per parameter component
  Vec theta;               // parameter snapshot (bookkeeping only)
  Vec f;                   // per-state observable
  std::size_t initial_state = 0;

  std::size_t n_states() const { return f.size(); }
  std::size_t param_dim() const { return score.size(); }
};

// Throws std::invalid_argument on shape mismatches, non-stochastic rows,
// reducible support, off-support or non-centered scores.
void validate(const MarkovModel& model);

// Reflecting birth-death chain on q.size() + 2 states: endpoint states
// bounce back with probability one, interior state i steps right with
// probability q[i-1]. theta = q; default observable f(i) = i - floor((n-1)/2)
// (integer, centered for odd n); default initial state n/2.
MarkovModel birth_death(const Vec& q, Vec f = {},
                        std::optional<std::size_t> initial_state = std::nullopt);

// Exponential perturbation of the kernel in score direction v:
// pi_eps(i,j) proportional (per row) to pi(i,j) exp(eps v.W(i,j)). This is
// the canonical path through pi whose score at eps = 0 is exactly v.W;
// scores are recentered so the result is again a valid model.
MarkovModel perturbed(const MarkovModel& model, const Vec& v, double eps);

// Per-edge values on the support (zero elsewhere).
Mat edge_score(const MarkovModel& model, const Vec& v);  // v.W(i,j)
Mat edge_observable(const MarkovModel& model);           // f(j)

// Asymptotic slope range of an edge observable: the extreme mean-cycle
// values of g over the support digraph (Karp). These bound H'(a) for the
// Perron CGF exactly, so equality of the two detects degenerate
// directions combinatorially.
double max_mean_cycle(const Mat& pi, const Mat& g);
double min_mean_cycle(const Mat& pi, const Mat& g);

// h(a) = log of the Perron root of pi(i,j) exp(a g(i,j)); h(0) = 0.
// Derivatives: first analytic via left/right eigenvectors, second by
// central differences of the first.
Cgf markov_edge_cgf(const MarkovModel& model, const Mat& g);
Cgf markov_cgf(const MarkovModel& model, const Vec& v);  // g = v.W
Cgf markov_observable_cgf(const MarkovModel& model);     // g(i,j) = f(j)

// Stationary distribution by power iteration (shift-accelerated, so
// periodic chains converge too).
Vec stationary_distribution(const Mat& pi);
Vec stationary_distribution(const MarkovModel& model);

// Rate function I(z) = sup_a { a z - h(a) } of the observable CGF; +inf
// outside the attainable mean range.
double markov_rate(const MarkovModel& model, double z);

// pi_a(i,j) = pi(i,j) exp(a g(i,j)) r(j) / (lambda r(i)) with the right
// Perron vector r: the stochastic kernel achieving the constrained
// relative-entropy optimum. Rows are renormalized to absorb iteration
// residual.
Mat twisted_kernel(const MarkovModel& model, double alpha, const Mat& g);

struct LdpReport {
  double z = 0.0;
  double rate = 0.0;  // I(z); doubles as the index level m
  double index_minus = 0.0;
  double index_plus = 0.0;
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  BoundCase case_minus = BoundCase::ZeroM;
  BoundCase case_plus = BoundCase::ZeroM;
  Cgf h_v;
};

// Index pair at level m = markov_rate(z) for direction v; throws
// std::domain_error when z is outside the attainable range.
LdpReport markov_sensitivity(const MarkovModel& model, const Vec& v, double z);

// IID reduction: per-sample indices at m = rate_value coincide with the
// single-sample variational indices.
SensitivityReport iid_sensitivity(const ExpFamModel& model, const Vec& v, double rate_value);
SensitivityReport iid_sensitivity(const DiscreteDist& dist, const std::vector<Vec>& scores,
                                  const Vec& v, double rate_value);

// Exact law of S_n on its integer lattice, in log space. Requires an
// integer-valued f (within 1e-9).
struct SumDistribution {
  long long sum_lo = 0;  // sum value of index 0
  Vec log_prob;          // log P(S_n = sum_lo + idx); -inf off support
  double log_at(long long k) const;
  // Attainable sum nearest to target (ties toward the smaller sum); throws
  // std::domain_error when nothing is attainable.
  long long nearest_attainable(double target) const;
};
SumDistribution dp_sum_distribution(const MarkovModel& model, std::size_t n);

// P(S_n = z n) for a lattice value z = k/n; probability 0 when the lattice
// point is unattainable. dp_probability can underflow to 0 for large n;
// dp_log_probability is the primary form.
double dp_log_probability(const MarkovModel& model, std::size_t n, double z);
double dp_probability(const MarkovModel& model, std::size_t n, double z);

// Central-difference LDP sensitivity (log P_n^{+eps} - log P_n^{-eps}) /
// (2 n eps) at the attainable lattice sums nearest to each z in the grid;
// two DP passes total.
struct FdSweep {
  std::vector<long long> sums;  // snapped lattice sums
  Vec z_snapped;                // sums / n
  Vec fd;
};
FdSweep fd_sensitivity_sweep(const MarkovModel& model, const Vec& v, std::size_t n,
                             const Vec& z_grid, double eps = 1e-4);
double fd_sensitivity(const MarkovModel& model, const Vec& v, std::size_t n, double z,
                      double eps = 1e-4);

}  // namespace raresens
