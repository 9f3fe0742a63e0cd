#pragma once

// JSON ingestion of model and chain specifications, plus the deterministic
// serialization helpers shared by the command-line tool. Parse failures
// throw SpecParseError naming the offending field.

#include <optional>
#include <string>
#include <vector>

#include "raresens/distributions.hpp"
#include "raresens/ldp.hpp"
#include "raresens/uq.hpp"

namespace raresens {

// A parsed model spec: exactly one of the two members is set. Discrete
// models may carry per-atom score vectors for sensitivity work.
struct ModelSpec {
  std::optional<ExpFamModel> expfam;
  std::optional<DiscreteDist> discrete;
  std::vector<Vec> scores;

  bool is_discrete() const { return discrete.has_value(); }
};

ModelSpec parse_model_spec(const std::string& json_text);
MarkovModel parse_chain_spec(const std::string& json_text);
ModelSpec load_model_spec(const std::string& path);
MarkovModel load_chain_spec(const std::string& path);

// Round-trip-exact fixed formatting (17 significant digits); non-finite
// values render as inf / -inf / nan.
std::string format_double(double x);

// Field-for-field JSON of the report (non-finite values as strings),
// rendered deterministically.
std::string to_json(const UqBoundReport& r);

}  // namespace raresens
