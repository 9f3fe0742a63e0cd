#pragma once

// Minimal dense vector/matrix helpers. Parameter counts and state-space
// sizes in this library stay in the single digits, so nothing here is
// performance critical.

#include <cstddef>
#include <vector>

namespace raresens {

using Vec = std::vector<double>;

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

double dot(const Vec& x, const Vec& y);
Vec matvec(const Mat& m, const Vec& x);
Vec tmatvec(const Mat& m, const Vec& x);  // m^T x
double quad_form(const Mat& m, const Vec& x);  // x^T m x
Mat transpose(const Mat& m);

// log(sum(exp(x))) with the usual max shift; -inf for an empty or all
// -inf input.
double log_sum_exp(const Vec& x);
double log_add_exp(double a, double b);

}  // namespace raresens
