#include "raresens/distributions.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "raresens/errors.hpp"

namespace raresens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Strictly interior uniform draw; safe inside log().
double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double draw_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double fd_step(double x) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::fabs(x));
}

}  // namespace

ExpFamModel ExpFamModel::gaussian_mean(double mu, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gaussian_mean: sigma2 must be positive");
  ExpFamModel m;
  m.family_ = Family::Gaussian;
  m.dim_ = 1;
  m.theta_ = {mu / sigma2};
  m.aux_ = sigma2;
  return m;
}

ExpFamModel ExpFamModel::gaussian_natural(double mu, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gaussian_natural: sigma2 must be positive");
  ExpFamModel m;
  m.family_ = Family::Gaussian;
  m.dim_ = 2;
  m.theta_ = {mu / sigma2, -1.0 / sigma2};
  return m;
}

ExpFamModel ExpFamModel::poisson(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("poisson: rate must be positive");
  ExpFamModel m;
  m.family_ = Family::Poisson;
  m.dim_ = 1;
  m.theta_ = {std::log(rate)};
  return m;
}

ExpFamModel ExpFamModel::bernoulli(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("bernoulli: p must lie in (0,1)");
  ExpFamModel m;
  m.family_ = Family::Bernoulli;
  m.dim_ = 1;
  m.theta_ = {std::log(p / (1.0 - p))};
  return m;
}

ExpFamModel ExpFamModel::centered_laplace(double theta) {
  if (!(theta < 0.0)) throw std::invalid_argument("centered_laplace: theta must be negative");
  ExpFamModel m;
  m.family_ = Family::CenteredLaplace;
  m.dim_ = 1;
  m.theta_ = {theta};
  return m;
}

ExpFamModel ExpFamModel::custom(Vec theta, CustomSpec spec) {
  if (!spec.log_normalizer) throw std::invalid_argument("custom: log_normalizer required");
  if (spec.dim == 0 || theta.size() != spec.dim)
    throw std::invalid_argument("custom: theta size must equal spec.dim");
  ExpFamModel m;
  m.family_ = Family::Custom;
  m.dim_ = spec.dim;
  m.theta_ = std::move(theta);
  m.custom_ = std::move(spec);
  if (!m.in_domain(m.theta_)) throw std::invalid_argument("custom: theta outside the domain");
  return m;
}

bool ExpFamModel::in_domain(const Vec& th) const {
  if (th.size() != dim_) return false;
  switch (family_) {
    case Family::Gaussian:
      return dim_ == 1 || th[1] < 0.0;
    case Family::Poisson:
    case Family::Bernoulli:
      return true;
    case Family::CenteredLaplace:
      return th[0] < 0.0;
    case Family::Custom:
      if (custom_.in_domain) return custom_.in_domain(th);
      return std::isfinite(custom_.log_normalizer(th));
  }
  return false;
}

double ExpFamModel::log_normalizer(const Vec& th) const {
  if (th.size() != dim_) throw std::invalid_argument("log_normalizer: theta size mismatch");
  if (!in_domain(th)) return kInf;
  switch (family_) {
    case Family::Gaussian:
      if (dim_ == 1) return 0.5 * aux_ * th[0] * th[0];
      return -th[0] * th[0] / (2.0 * th[1]) + 0.5 * std::log(2.0 * M_PI / (-th[1]));
    case Family::Poisson:
      return std::exp(th[0]);
    case Family::Bernoulli:
      return softplus(th[0]);
    case Family::CenteredLaplace:
      return std::log(-1.0 / th[0]);
    case Family::Custom:
      return custom_.log_normalizer(th);
  }
  return kInf;
}

Vec ExpFamModel::grad_log_normalizer(const Vec& th) const {
  if (!in_domain(th)) throw std::domain_error("grad_log_normalizer: theta outside the domain");
  switch (family_) {
    case Family::Gaussian:
      if (dim_ == 1) return {aux_ * th[0]};
      // mean and half second moment
      {
        double s2 = -1.0 / th[1];
        double mu = th[0] * s2;
        return {mu, 0.5 * (mu * mu + s2)};
      }
    case Family::Poisson:
      return {std::exp(th[0])};
    case Family::Bernoulli:
      return {logistic(th[0])};
    case Family::CenteredLaplace:
      return {-1.0 / th[0]};
    case Family::Custom: {
      if (custom_.grad) return custom_.grad(th);
      Vec g(dim_);
      for (std::size_t k = 0; k < dim_; ++k) {
        double h = fd_step(th[k]);
        Vec a = th, b = th;
        a[k] += h;
        b[k] -= h;
        g[k] = (log_normalizer(a) - log_normalizer(b)) / (2.0 * h);
      }
      return g;
    }
  }
  throw std::logic_error("grad_log_normalizer: unreachable");
}

Mat ExpFamModel::hessian_log_normalizer(const Vec& th) const {
  if (!in_domain(th)) throw std::domain_error("hessian_log_normalizer: theta outside the domain");
  switch (family_) {
    case Family::Gaussian:
      if (dim_ == 1) {
        Mat h(1, 1);
        h(0, 0) = aux_;
        return h;
      } else {
        double s2 = -1.0 / th[1];
        double mu = th[0] * s2;
        // Cov of (x, x^2/2) under N(mu, s2)
        Mat h(2, 2);
        h(0, 0) = s2;
        h(0, 1) = h(1, 0) = mu * s2;
        h(1, 1) = 0.5 * s2 * s2 + mu * mu * s2;
        return h;
      }
    case Family::Poisson: {
      Mat h(1, 1);
      h(0, 0) = std::exp(th[0]);
      return h;
    }
    case Family::Bernoulli: {
      double p = logistic(th[0]);
      Mat h(1, 1);
      h(0, 0) = p * (1.0 - p);
      return h;
    }
    case Family::CenteredLaplace: {
      Mat h(1, 1);
      h(0, 0) = 1.0 / (th[0] * th[0]);
      return h;
    }
    case Family::Custom: {
      Mat h(dim_, dim_);
      for (std::size_t k = 0; k < dim_; ++k) {
        double step = fd_step(th[k]);
        Vec a = th, b = th;
        a[k] += step;
        b[k] -= step;
        Vec ga = grad_log_normalizer(a);
        Vec gb = grad_log_normalizer(b);
        for (std::size_t j = 0; j < dim_; ++j) h(j, k) = (ga[j] - gb[j]) / (2.0 * step);
      }
      // enforce symmetry
      for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = i + 1; j < dim_; ++j) {
          double s = 0.5 * (h(i, j) + h(j, i));
          h(i, j) = h(j, i) = s;
        }
      return h;
    }
  }
  throw std::logic_error("hessian_log_normalizer: unreachable");
}

bool ExpFamModel::in_support(double x) const {
  switch (family_) {
    case Family::Gaussian:
    case Family::CenteredLaplace:
      return std::isfinite(x);
    case Family::Poisson:
      return x >= 0.0 && std::nearbyint(x) == x;
    case Family::Bernoulli:
      return x == 0.0 || x == 1.0;
    case Family::Custom:
      return true;
  }
  return false;
}

Vec ExpFamModel::sufficient_stat(double x) const {
  switch (family_) {
    case Family::Gaussian:
      if (dim_ == 1) return {x};
      return {x, 0.5 * x * x};
    case Family::Poisson:
    case Family::Bernoulli:
      return {x};
    case Family::CenteredLaplace:
      return {std::fabs(x)};
    case Family::Custom:
      if (!custom_.sufficient_stat)
        throw std::logic_error("custom family has no sufficient_stat hook");
      return custom_.sufficient_stat(x);
  }
  throw std::logic_error("sufficient_stat: unreachable");
}

Vec ExpFamModel::score(double x) const {
  if (!in_support(x)) return Vec(dim_, 0.0);
  Vec t = sufficient_stat(x);
  Vec g = grad_log_normalizer(theta_);
  for (std::size_t k = 0; k < dim_; ++k) t[k] -= g[k];
  return t;
}

Mat ExpFamModel::fisher_information() const { return hessian_log_normalizer(theta_); }

Vec ExpFamModel::mean_stat() const { return grad_log_normalizer(theta_); }

std::vector<double> ExpFamModel::sample(std::size_t n, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  out.reserve(n);
  switch (family_) {
    case Family::Gaussian: {
      double s2 = dim_ == 1 ? aux_ : -1.0 / theta_[1];
      double mu = dim_ == 1 ? theta_[0] * aux_ : theta_[0] * (-1.0 / theta_[1]);
      double sd = std::sqrt(s2);
      for (std::size_t i = 0; i < n; ++i) out.push_back(mu + sd * draw_normal(rng));
      break;
    }
    case Family::Poisson: {
      double lambda = std::exp(theta_[0]);
      for (std::size_t i = 0; i < n; ++i) {
        double u = uniform01(rng);
        double p = std::exp(-lambda), cdf = p;
        double k = 0.0;
        while (u > cdf && k < 1e9) {
          k += 1.0;
          p *= lambda / k;
          cdf += p;
        }
        out.push_back(k);
      }
      break;
    }
    case Family::Bernoulli: {
      double p = logistic(theta_[0]);
      for (std::size_t i = 0; i < n; ++i) out.push_back(uniform01(rng) < p ? 1.0 : 0.0);
      break;
    }
    case Family::CenteredLaplace: {
      double rate = -theta_[0];
      for (std::size_t i = 0; i < n; ++i) {
        double mag = -std::log(uniform01(rng)) / rate;
        out.push_back(uniform01(rng) < 0.5 ? -mag : mag);
      }
      break;
    }
    case Family::Custom:
      throw std::invalid_argument("sample: not available for custom families");
  }
  return out;
}

double ExpFamModel::direction_domain_hi(const Vec& v) const {
  if (v.size() != dim_) throw std::invalid_argument("direction_domain_hi: size mismatch");
  switch (family_) {
    case Family::Gaussian:
      if (dim_ == 1 || v[1] <= 0.0) return kInf;
      return -theta_[1] / v[1];
    case Family::Poisson:
    case Family::Bernoulli:
      return kInf;
    case Family::CenteredLaplace:
      if (v[0] <= 0.0) return kInf;
      return -theta_[0] / v[0];
    case Family::Custom: {
      Vec probe(dim_);
      auto at = [&](double a) {
        for (std::size_t k = 0; k < dim_; ++k) probe[k] = theta_[k] + a * v[k];
        return in_domain(probe);
      };
      double good = 0.0;
      double bad = std::max(custom_.domain_probe_hint, 1e-6);
      int grow = 0;
      while (at(bad)) {
        good = bad;
        bad *= 2.0;
        if (++grow > 200) return kInf;
      }
      for (int i = 0; i < 200 && bad - good > 1e-14 * std::max(1.0, good); ++i) {
        double mid = 0.5 * (good + bad);
        (at(mid) ? good : bad) = mid;
      }
      return good;
    }
  }
  return kInf;
}

double ExpFamModel::direction_domain_lo(const Vec& v) const {
  Vec neg(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) neg[k] = -v[k];
  double hi = direction_domain_hi(neg);
  return -hi;
}

namespace {

// Range of v.t(x) over the support given the scalar ranges of t for the
// one-parameter families.
std::pair<double, double> stat_range_1d(double t_lo, double t_hi, double v) {
  if (v >= 0.0) return {v * t_lo, v * t_hi};
  return {v * t_hi, v * t_lo};
}

}  // namespace

std::optional<double> ExpFamModel::score_sup(const Vec& v) const {
  if (v.size() != dim_) throw std::invalid_argument("score_sup: size mismatch");
  double vt_hi = kInf;
  switch (family_) {
    case Family::Gaussian:
      if (dim_ == 1) {
        if (v[0] == 0.0) vt_hi = 0.0;
      } else {
        if (v[1] < 0.0)
          vt_hi = -v[0] * v[0] / (2.0 * v[1]);
        else if (v[1] == 0.0 && v[0] == 0.0)
          vt_hi = 0.0;
      }
      break;
    case Family::Poisson:
    case Family::CenteredLaplace:
      vt_hi = stat_range_1d(0.0, kInf, v[0]).second;
      break;
    case Family::Bernoulli:
      vt_hi = stat_range_1d(0.0, 1.0, v[0]).second;
      break;
    case Family::Custom:
      return std::nullopt;
  }
  if (!std::isfinite(vt_hi)) return std::nullopt;
  return vt_hi - dot(v, mean_stat());
}

std::optional<double> ExpFamModel::score_inf(const Vec& v) const {
  Vec neg(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) neg[k] = -v[k];
  auto s = score_sup(neg);
  if (!s) return std::nullopt;
  return -*s;
}

GaussianTwoParam GaussianTwoParam::from_natural(const Vec& th) {
  if (th.size() != 2 || !(th[1] < 0.0))
    throw std::invalid_argument("GaussianTwoParam: need theta = (t1, t2) with t2 < 0");
  GaussianTwoParam g;
  g.sigma2 = -1.0 / th[1];
  g.mu = th[0] * g.sigma2;
  return g;
}

DiscreteDist::DiscreteDist(std::vector<std::string> atoms, Vec probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  if (atoms_.size() != probs_.size())
    throw std::invalid_argument("DiscreteDist: atom/probability count mismatch");
  if (probs_.empty()) throw std::invalid_argument("DiscreteDist: empty distribution");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw std::invalid_argument("DiscreteDist: negative probability");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("DiscreteDist: probabilities must sum to 1");
}

DiscreteDist::DiscreteDist(Vec probs)
    : DiscreteDist(
          [&probs] {
            std::vector<std::string> names(probs.size());
            for (std::size_t i = 0; i < probs.size(); ++i) names[i] = "a" + std::to_string(i);
            return names;
          }(),
          probs) {}

DiscreteDist DiscreteDist::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform: n must be positive");
  return DiscreteDist(Vec(n, 1.0 / static_cast<double>(n)));
}

double event_probability(const DiscreteDist& dist, const std::vector<std::size_t>& event) {
  double p = 0.0;
  for (std::size_t i : event) {
    if (i >= dist.size()) throw std::invalid_argument("event_probability: index out of range");
    p += dist.prob(i);
  }
  return p;
}

double exact_conditional_score_mean(const DiscreteDist& dist,
                                    const std::vector<Vec>& scores,
                                    const std::vector<std::size_t>& event,
                                    const Vec& v) {
  if (scores.size() != dist.size())
    throw std::invalid_argument("exact_conditional_score_mean: score table size mismatch");
  if (event.empty()) throw std::invalid_argument("exact_conditional_score_mean: empty event");
  double mass = 0.0, num = 0.0;
  for (std::size_t i : event) {
    if (i >= dist.size())
      throw std::invalid_argument("exact_conditional_score_mean: index out of range");
    mass += dist.prob(i);
    num += dist.prob(i) * dot(v, scores[i]);
  }
  if (mass <= 0.0)
    throw std::invalid_argument("exact_conditional_score_mean: event has probability zero");
  return num / mass;
}

}  // namespace raresens
