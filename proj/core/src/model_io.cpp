#include "raresens/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "raresens/errors.hpp"

namespace raresens {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const json& require(const json& j, const char* field, const char* ctx) {
  const auto it = j.find(field);
  if (it == j.end())
    throw SpecParseError(std::string(ctx) + ": missing field '" + field + "'");
  return *it;
}

double num_field(const json& j, const char* field, const char* ctx) {
  const json& v = require(j, field, ctx);
  if (!v.is_number())
    throw SpecParseError(std::string(ctx) + ": field '" + field + "' must be a number");
  return v.get<double>();
}

std::string str_field(const json& j, const char* field, const char* ctx) {
  const json& v = require(j, field, ctx);
  if (!v.is_string())
    throw SpecParseError(std::string(ctx) + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

Vec vec_value(const json& v, const char* field, const char* ctx) {
  if (!v.is_array())
    throw SpecParseError(std::string(ctx) + ": field '" + field + "' must be an array of numbers");
  Vec out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number())
      throw SpecParseError(std::string(ctx) + ": field '" + field + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Vec vec_field(const json& j, const char* field, const char* ctx) {
  return vec_value(require(j, field, ctx), field, ctx);
}

Mat mat_value(const json& v, const char* field, const char* ctx) {
  if (!v.is_array() || v.empty())
    throw SpecParseError(std::string(ctx) + ": field '" + field + "' must be a nonempty matrix");
  Mat m(v.size(), vec_value(v[0], field, ctx).size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec row = vec_value(v[i], field, ctx);
    if (row.size() != m.cols)
      throw SpecParseError(std::string(ctx) + ": field '" + field + "' has ragged rows");
    for (std::size_t j2 = 0; j2 < row.size(); ++j2) m(i, j2) = row[j2];
  }
  return m;
}

Mat mat_field(const json& j, const char* field, const char* ctx) {
  return mat_value(require(j, field, ctx), field, ctx);
}

json parse_text(const std::string& text, const char* ctx) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw SpecParseError(std::string(ctx) + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Non-finite doubles have no JSON representation; emit them as strings so
// reports stay machine-readable.
ordered_json jnum(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

}  // namespace

ModelSpec parse_model_spec(const std::string& json_text) {
  const char* ctx = "model spec";
  const json j = parse_text(json_text, ctx);
  if (!j.is_object()) throw SpecParseError(std::string(ctx) + ": top level must be an object");
  const std::string family = str_field(j, "family", ctx);

  ModelSpec out;
  if (family == "gaussian_mean") {
    out.expfam = ExpFamModel::gaussian_mean(num_field(j, "mu", ctx), num_field(j, "sigma2", ctx));
  } else if (family == "gaussian_natural") {
    out.expfam =
        ExpFamModel::gaussian_natural(num_field(j, "mu", ctx), num_field(j, "sigma2", ctx));
  } else if (family == "poisson") {
    out.expfam = ExpFamModel::poisson(num_field(j, "rate", ctx));
  } else if (family == "bernoulli") {
    out.expfam = ExpFamModel::bernoulli(num_field(j, "p", ctx));
  } else if (family == "centered_laplace") {
    out.expfam = ExpFamModel::centered_laplace(num_field(j, "theta", ctx));
  } else if (family == "discrete") {
    const Vec probs = vec_field(j, "probs", ctx);
    if (j.contains("atoms")) {
      const json& a = j.at("atoms");
      if (!a.is_array())
        throw SpecParseError(std::string(ctx) + ": field 'atoms' must be an array of strings");
      std::vector<std::string> atoms;
      for (const auto& x : a) {
        if (!x.is_string())
          throw SpecParseError(std::string(ctx) + ": field 'atoms' must be an array of strings");
        atoms.push_back(x.get<std::string>());
      }
      if (atoms.size() != probs.size())
        throw SpecParseError(std::string(ctx) + ": 'atoms' and 'probs' lengths differ");
      out.discrete = DiscreteDist(std::move(atoms), probs);
    } else {
      out.discrete = DiscreteDist(probs);
    }
    if (j.contains("scores")) {
      const json& s = j.at("scores");
      if (!s.is_array() || s.size() != probs.size())
        throw SpecParseError(std::string(ctx) + ": 'scores' must hold one vector per atom");
      for (const auto& row : s) out.scores.push_back(vec_value(row, "scores", ctx));
      for (const Vec& row : out.scores)
        if (row.size() != out.scores.front().size())
          throw SpecParseError(std::string(ctx) + ": 'scores' rows must share one dimension");
    }
  } else {
    throw SpecParseError(std::string(ctx) + ": unknown family '" + family + "'");
  }

  try {
    if (out.expfam) (void)out.expfam->log_normalizer(out.expfam->theta());
  } catch (const std::exception& e) {
    throw SpecParseError(std::string(ctx) + ": " + e.what());
  }
  return out;
}

MarkovModel parse_chain_spec(const std::string& json_text) {
  const char* ctx = "chain spec";
  const json j = parse_text(json_text, ctx);
  if (!j.is_object()) throw SpecParseError(std::string(ctx) + ": top level must be an object");
  const std::string type = str_field(j, "type", ctx);

  try {
    if (type == "birth_death") {
      const Vec q = vec_field(j, "q", ctx);
      Vec f;
      if (j.contains("f")) f = vec_field(j, "f", ctx);
      std::optional<std::size_t> initial;
      if (j.contains("initial_state")) {
        const double i0 = num_field(j, "initial_state", ctx);
        if (i0 < 0.0) throw SpecParseError(std::string(ctx) + ": initial_state must be >= 0");
        initial = static_cast<std::size_t>(i0);
      }
      return birth_death(q, std::move(f), initial);
    }
    if (type == "explicit") {
      MarkovModel m;
      m.pi = mat_field(j, "pi", ctx);
      m.f = vec_field(j, "f", ctx);
      if (j.contains("theta")) m.theta = vec_field(j, "theta", ctx);
      if (j.contains("initial_state"))
        m.initial_state = static_cast<std::size_t>(num_field(j, "initial_state", ctx));
      const json& s = require(j, "scores", ctx);
      if (!s.is_array())
        throw SpecParseError(std::string(ctx) + ": 'scores' must be an array of matrices");
      for (const auto& w : s) m.score.push_back(mat_value(w, "scores", ctx));
      validate(m);
      return m;
    }
  } catch (const SpecParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw SpecParseError(std::string(ctx) + ": " + e.what());
  }
  throw SpecParseError(std::string(ctx) + ": unknown type '" + type + "'");
}

ModelSpec load_model_spec(const std::string& path) { return parse_model_spec(read_file(path)); }

MarkovModel load_chain_spec(const std::string& path) { return parse_chain_spec(read_file(path)); }

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string to_json(const UqBoundReport& r) {
  ordered_json j;
  j["M"] = jnum(r.m);
  j["lower"] = jnum(r.lower);
  j["upper"] = jnum(r.upper);
  j["upper_is_trivial"] = r.upper_is_trivial;
  j["alpha_minus"] = jnum(r.alpha_minus);
  j["alpha_plus"] = jnum(r.alpha_plus);
  j["kl_QP"] = jnum(r.kl_qp);
  j["threshold_ratio"] = jnum(r.threshold_ratio);
  return j.dump(2) + "\n";
}

}  // namespace raresens
