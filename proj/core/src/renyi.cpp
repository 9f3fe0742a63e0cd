#include "raresens/renyi.hpp"

#include <cmath>
#include <stdexcept>

#include "raresens/linalg.hpp"

namespace raresens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_space(const DiscreteDist& q, const DiscreteDist& p, const char* where) {
  if (q.size() != p.size())
    throw std::invalid_argument(std::string(where) + ": distributions on different atom spaces");
}

}  // namespace

double renyi_divergence(const DiscreteDist& q, const DiscreteDist& p, double order) {
  check_same_space(q, p, "renyi_divergence");
  if (order == 0.0 || order == 1.0)
    throw std::invalid_argument("renyi_divergence: order must avoid 0 and 1");

  if (order > 1.0) {
    for (std::size_t i = 0; i < q.size(); ++i)
      if (q.prob(i) > 0.0 && p.prob(i) == 0.0) return kInf;
  }
  if (order < 0.0) {
    for (std::size_t i = 0; i < q.size(); ++i)
      if (p.prob(i) > 0.0 && q.prob(i) == 0.0) return kInf;
  }

  Vec terms;
  terms.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q.prob(i) > 0.0 && p.prob(i) > 0.0)
      terms.push_back(order * std::log(q.prob(i)) + (1.0 - order) * std::log(p.prob(i)));
  }
  if (terms.empty())
    throw std::invalid_argument("renyi_divergence: distributions with disjoint supports");
  return log_sum_exp(terms) / (order * (order - 1.0));
}

double relative_entropy(const DiscreteDist& q, const DiscreteDist& p) {
  check_same_space(q, p, "relative_entropy");
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q.prob(i) == 0.0) continue;
    if (p.prob(i) == 0.0) return kInf;
    s += q.prob(i) * std::log(q.prob(i) / p.prob(i));
  }
  return s;
}

double worst_case_regret(const DiscreteDist& q, const DiscreteDist& p) {
  check_same_space(q, p, "worst_case_regret");
  double best = -kInf;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q.prob(i) == 0.0) continue;
    if (p.prob(i) == 0.0) return kInf;
    best = std::max(best, std::log(q.prob(i) / p.prob(i)));
  }
  return best;
}

double variational_gap(const DiscreteDist& q, const DiscreteDist& p, const Vec& f,
                       double beta, double gamma) {
  check_same_space(q, p, "variational_gap");
  if (f.size() != q.size()) throw std::invalid_argument("variational_gap: f size mismatch");
  if (!(beta < gamma) || beta == 0.0 || gamma == 0.0)
    throw std::invalid_argument("variational_gap: need beta < gamma, both nonzero");

  auto log_mgf = [&](const DiscreteDist& d, double t) {
    Vec terms;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.prob(i) > 0.0) terms.push_back(std::log(d.prob(i)) + t * f[i]);
    return log_sum_exp(terms);
  };

  const double order = gamma / (gamma - beta);
  double r = renyi_divergence(q, p, order);
  if (!std::isfinite(r)) return kInf;
  return log_mgf(p, gamma) / gamma + r / (gamma - beta) - log_mgf(q, beta) / beta;
}

}  // namespace raresens
