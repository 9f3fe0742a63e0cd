#pragma once

// One-dimensional exponential families in natural form and finite discrete
// distributions.
//
// A family is p^theta(x) = exp(theta . t(x) - F(theta)) against a fixed
// reference measure; F is the log-normalizer on the natural-parameter
// domain. Moments of the sufficient statistic t come from derivatives of F:
// grad F = E[t], hess F = Cov[t] (the Fisher information in theta).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "raresens/linalg.hpp"

namespace raresens {

class ExpFamModel {
 public:
  enum class Family { Gaussian, Poisson, Bernoulli, CenteredLaplace, Custom };

  // Hooks for a user-defined family. grad may be empty (falls back to
  // central differences of log_normalizer); in_domain may be empty (a
  // parameter is then admissible iff log_normalizer is finite);
  // sufficient_stat is only needed when per-point scores are requested.
  struct CustomSpec {
    std::size_t dim = 1;
    std::function<double(const Vec&)> log_normalizer;
    std::function<Vec(const Vec&)> grad;
    std::function<bool(const Vec&)> in_domain;
    std::function<Vec(double)> sufficient_stat;
    double domain_probe_hint = 1.0;  // initial bracket for domain searches
  };

  // Mean-direction Gaussian: fixed variance sigma2, theta = mu / sigma2,
  // t(x) = x, F(theta) = sigma2 * theta^2 / 2.
  static ExpFamModel gaussian_mean(double mu, double sigma2);
  // Two-parameter Gaussian in natural form: theta = (mu/sigma2, -1/sigma2),
  // t(x) = (x, x^2/2).
  static ExpFamModel gaussian_natural(double mu, double sigma2);
  // theta = log(rate), t(x) = x, F = exp(theta).
  static ExpFamModel poisson(double rate);
  // theta = logit(p), t(x) = x, F = log(1 + exp(theta)).
  static ExpFamModel bernoulli(double p);
  // Density exp(theta |x| - F(theta)) with theta < 0, F = log(-1/theta).
  static ExpFamModel centered_laplace(double theta);
  static ExpFamModel custom(Vec theta, CustomSpec spec);

  std::size_t dim() const { return dim_; }
  Family family() const { return family_; }
  const Vec& theta() const { return theta_; }

  bool in_domain(const Vec& th) const;
  double log_normalizer(const Vec& th) const;  // +inf outside the domain
  Vec grad_log_normalizer(const Vec& th) const;
  Mat hessian_log_normalizer(const Vec& th) const;

  bool in_support(double x) const;
  Vec sufficient_stat(double x) const;
  // t(x) - grad F(theta); the zero vector off the support.
  Vec score(double x) const;
  Mat fisher_information() const;  // hess F at theta
  Vec mean_stat() const;           // grad F at theta

  // Deterministic sampling (fixed seed => fixed draw sequence).
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

  // Endpoints of { a : theta + a v in domain }; +/-inf when unconstrained.
  // Both endpoints are open.
  double direction_domain_hi(const Vec& v) const;
  double direction_domain_lo(const Vec& v) const;

  // sup / inf of v . (t(x) - grad F(theta)) over the support, when finite.
  std::optional<double> score_sup(const Vec& v) const;
  std::optional<double> score_inf(const Vec& v) const;

 private:
  ExpFamModel() = default;

  Family family_ = Family::Custom;
  std::size_t dim_ = 1;
  Vec theta_;
  double aux_ = 0.0;  // fixed sigma2 for the mean-direction Gaussian
  CustomSpec custom_;
};

// Convenience wrapper for the two-parameter Gaussian; round-trips between
// (mu, sigma2) and the natural coordinates.
struct GaussianTwoParam {
  double mu = 0.0;
  double sigma2 = 1.0;

  Vec natural() const { return {mu / sigma2, -1.0 / sigma2}; }
  static GaussianTwoParam from_natural(const Vec& th);
  ExpFamModel model() const { return ExpFamModel::gaussian_natural(mu, sigma2); }
};

class DiscreteDist {
 public:
  // Validates: probabilities nonnegative and summing to 1 within 1e-12.
  DiscreteDist(std::vector<std::string> atoms, Vec probs);
  explicit DiscreteDist(Vec probs);  // auto-labeled atoms "a0", "a1", ...
  static DiscreteDist uniform(std::size_t n);

  std::size_t size() const { return probs_.size(); }
  const std::vector<std::string>& atoms() const { return atoms_; }
  const Vec& probs() const { return probs_; }
  double prob(std::size_t i) const { return probs_[i]; }

 private:
  std::vector<std::string> atoms_;
  Vec probs_;
};

double event_probability(const DiscreteDist& dist, const std::vector<std::size_t>& event);

// E[ v.W | A ] for an event given as atom indices. Throws
// std::invalid_argument on an empty event or one of probability zero.
double exact_conditional_score_mean(const DiscreteDist& dist,
                                    const std::vector<Vec>& scores,
                                    const std::vector<std::size_t>& event,
                                    const Vec& v);

}  // namespace raresens
