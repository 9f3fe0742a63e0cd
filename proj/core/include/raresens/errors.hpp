#pragma once

#include <stdexcept>
#include <string>

namespace raresens {

// The tilting observable has no variation (a.s. constant), so every
// variational problem in it is degenerate.
class ConstantObservableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The constraint R(P_a || P) = m has no finite root: m is at or above the
// saturation threshold carried by the exception.
class NoFiniteRootError : public std::domain_error {
 public:
  NoFiniteRootError(const std::string& what, double threshold)
      : std::domain_error(what), threshold_(threshold) {}
  double m_threshold() const { return threshold_; }

 private:
  double threshold_;
};

// Concentration surrogates need sup v.W finite; the requested direction has
// an unbounded score.
class UnboundedScoreError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed JSON model or chain spec.
class SpecParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace raresens
