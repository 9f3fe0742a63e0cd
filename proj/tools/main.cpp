// raresens: rare-event sensitivity indices and distribution-change bounds.
//
// Subcommands: index, uq, markov, concentration, verify. Inputs are JSON
// model / chain specs (see docs in the README); outputs are versioned CSV
// or JSON written atomically (write-then-rename). All output is
// deterministic for a fixed invocation; infeasible grid points become
// structured error records instead of aborting the run.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "raresens/ldp.hpp"
#include "raresens/model_io.hpp"
#include "raresens/selfcheck.hpp"
#include "raresens/sensitivity.hpp"
#include "raresens/uq.hpp"

namespace {

using raresens::Vec;
using ordered_json = nlohmann::ordered_json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

const char* case_name(raresens::BoundCase c) {
  switch (c) {
    case raresens::BoundCase::ZeroM: return "zero_m";
    case raresens::BoundCase::Interior: return "interior";
    case raresens::BoundCase::DomainBoundary: return "domain_boundary";
    case raresens::BoundCase::EssSupPlateau: return "ess_sup_plateau";
  }
  return "unknown";
}

// Non-finite doubles become JSON strings, matching model_io::to_json.
ordered_json jnum(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::string fd(double x) { return raresens::format_double(x); }

// Assemble-in-memory, then write to <out>.tmp and rename: a failed run
// never leaves a partial artifact behind. Empty path means stdout.
int emit(const std::string& out, const std::string& content) {
  if (out.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return 0;
  }
  const std::string tmp = out + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << content;
    f.flush();
    if (!f) {
      std::remove(tmp.c_str());
      std::fprintf(stderr, "error: cannot write %s\n", tmp.c_str());
      return 1;
    }
  }
  if (std::rename(tmp.c_str(), out.c_str()) != 0) {
    std::remove(tmp.c_str());
    std::fprintf(stderr, "error: cannot rename %s to %s\n", tmp.c_str(), out.c_str());
    return 1;
  }
  return 0;
}

void require_sorted(const std::vector<double>& grid, const std::string& what) {
  if (grid.empty()) throw CLI::ValidationError(what, "grid must be nonempty");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw CLI::ValidationError(what, "grid must be sorted ascending");
}

Vec default_direction(std::size_t dim) {
  Vec v(dim, 0.0);
  if (dim > 0) v[0] = 1.0;
  return v;
}

// Score bound and variance of v.W for a finite model (the discrete analogue
// of concentration_params).
raresens::ConcentrationParams discrete_concentration(const raresens::DiscreteDist& dist,
                                                     const std::vector<Vec>& scores,
                                                     const Vec& v) {
  raresens::ConcentrationParams out{-kInf, 0.0};
  double mean = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double g = raresens::dot(v, scores[i]);
    if (dist.prob(i) > 0.0) out.b = std::max(out.b, g);
    mean += dist.prob(i) * g;
  }
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double g = raresens::dot(v, scores[i]) - mean;
    out.sigma2 += dist.prob(i) * g * g;
  }
  if (!(out.sigma2 > 0.0))
    throw std::invalid_argument("concentration: direction has zero score variance");
  return out;
}

struct SurrogateRow {
  double bernstein = kNan;
  double bennett = kNan;
  double linearized = kNan;
};

// ---------------------------------------------------------------------------
// index

struct IndexArgs {
  std::string model, out, format = "csv";
  std::vector<double> m_list;
  std::vector<double> direction;
};

int run_index(const IndexArgs& args) {
  require_sorted(args.m_list, "--M");
  for (double m : args.m_list)
    if (!(m >= 0.0)) throw CLI::ValidationError("--M", "levels must be nonnegative");
  raresens::ModelSpec spec = raresens::load_model_spec(args.model);

  const std::size_t dim = spec.is_discrete()
                              ? (spec.scores.empty() ? 0 : spec.scores.front().size())
                              : spec.expfam->dim();
  if (spec.is_discrete() && spec.scores.empty())
    throw std::invalid_argument("index: discrete model spec carries no scores");
  Vec v = args.direction.empty() ? default_direction(dim) : Vec(args.direction);

  // Surrogate parameters; stay NaN when the score is unbounded above.
  std::optional<raresens::ConcentrationParams> params;
  double fisher_quad = 0.0;
  if (spec.is_discrete()) {
    params = discrete_concentration(*spec.discrete, spec.scores, v);
    fisher_quad = params->sigma2;
  } else {
    fisher_quad = raresens::quad_form(spec.expfam->fisher_information(), v);
    try {
      params = raresens::concentration_params(*spec.expfam, v);
    } catch (const raresens::UnboundedScoreError&) {
    }
  }

  std::vector<raresens::SensitivityReport> rows;
  std::vector<SurrogateRow> surr;
  for (double m : args.m_list) {
    rows.push_back(spec.is_discrete()
                       ? raresens::sensitivity_indices(*spec.discrete, spec.scores, v, m)
                       : raresens::sensitivity_indices(*spec.expfam, v, m));
    SurrogateRow s;
    s.linearized = raresens::linearized_index(fisher_quad, m);
    if (params) {
      s.bernstein = raresens::bernstein_bound(*params, m);
      s.bennett = raresens::bennett_bound(*params, m);
    }
    surr.push_back(s);
  }

  std::ostringstream os;
  if (args.format == "csv") {
    os << "# raresens index v1\n";
    os << "M,index_minus,index_plus,bernstein,bennett,linearized\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      os << fd(rows[i].m) << ',' << fd(rows[i].index_minus) << ',' << fd(rows[i].index_plus)
         << ',' << fd(surr[i].bernstein) << ',' << fd(surr[i].bennett) << ','
         << fd(surr[i].linearized) << '\n';
    }
  } else {
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      ordered_json j;
      j["M"] = jnum(r.m);
      j["direction"] = r.v;
      j["index_minus"] = jnum(r.index_minus);
      j["index_plus"] = jnum(r.index_plus);
      j["alpha_minus"] = jnum(r.alpha_minus);
      j["alpha_plus"] = jnum(r.alpha_plus);
      j["case_minus"] = case_name(r.case_minus);
      j["case_plus"] = case_name(r.case_plus);
      j["tilted_mean_minus"] = jnum(r.tilted_mean_minus);
      j["tilted_mean_plus"] = jnum(r.tilted_mean_plus);
      j["flagged"] = r.flagged;
      j["bernstein"] = jnum(surr[i].bernstein);
      j["bennett"] = jnum(surr[i].bennett);
      j["linearized"] = jnum(surr[i].linearized);
      arr.push_back(std::move(j));
    }
    os << arr.dump(2) << '\n';
  }
  return emit(args.out, os.str());
}

// ---------------------------------------------------------------------------
// uq

struct UqArgs {
  std::string model, model_q, out, format = "json";
  double m = 0.0;
  std::vector<double> raw_alpha;
};

int run_uq(const UqArgs& args) {
  if (!(args.m >= 0.0)) throw CLI::ValidationError("--M", "level must be nonnegative");
  raresens::ModelSpec sp = raresens::load_model_spec(args.model);
  raresens::ModelSpec sq = raresens::load_model_spec(args.model_q);
  if (!sp.is_discrete() || !sq.is_discrete())
    throw std::invalid_argument("uq: both specs must be finite discrete models");
  raresens::UqBoundReport r = raresens::optimal_bounds(*sp.discrete, *sq.discrete, args.m);

  std::ostringstream os;
  if (args.format == "csv") {
    os << "# raresens uq v1\n";
    os << "M,lower,upper,upper_is_trivial,alpha_minus,alpha_plus,kl_QP,threshold_ratio\n";
    os << fd(r.m) << ',' << fd(r.lower) << ',' << fd(r.upper) << ','
       << (r.upper_is_trivial ? 1 : 0) << ',' << fd(r.alpha_minus) << ',' << fd(r.alpha_plus)
       << ',' << fd(r.kl_qp) << ',' << fd(r.threshold_ratio) << '\n';
  } else {
    ordered_json j = ordered_json::parse(raresens::to_json(r));
    if (!args.raw_alpha.empty()) {
      require_sorted(args.raw_alpha, "--raw-alpha");
      ordered_json raw = ordered_json::array();
      for (double a : args.raw_alpha) {
        raresens::RawBounds rb = raresens::raw_bounds(*sp.discrete, *sq.discrete, args.m, a);
        ordered_json e;
        e["alpha"] = jnum(a);
        e["lower"] = jnum(rb.lower);  // on log Q(A) - log P(A)
        e["upper"] = jnum(rb.upper);
        raw.push_back(std::move(e));
      }
      j["raw"] = std::move(raw);
    }
    os << j.dump(2) << '\n';
  }
  return emit(args.out, os.str());
}

// ---------------------------------------------------------------------------
// markov

struct MarkovArgs {
  std::string model, out, format = "csv";
  std::vector<double> z_grid;
  std::vector<double> direction;
  std::size_t n = 500;
  double eps = 1e-4;
};

int run_markov(const MarkovArgs& args) {
  require_sorted(args.z_grid, "--z-grid");
  raresens::MarkovModel model = raresens::load_chain_spec(args.model);
  if (model.param_dim() == 0)
    throw std::invalid_argument("markov: chain spec carries no parameter scores");
  Vec v = args.direction.empty() ? default_direction(model.param_dim()) : Vec(args.direction);

  // Attainable mean range of f: everything outside is an error record.
  const raresens::Mat g_obs = raresens::edge_observable(model);
  const double z_lo = raresens::min_mean_cycle(model.pi, g_obs);
  const double z_hi = raresens::max_mean_cycle(model.pi, g_obs);

  std::vector<double> feasible;
  for (double z : args.z_grid)
    if (z >= z_lo && z <= z_hi) feasible.push_back(z);
  raresens::FdSweep sweep;
  if (!feasible.empty()) sweep = raresens::fd_sensitivity_sweep(model, v, args.n, feasible, args.eps);

  struct Row {
    double z = 0.0, rate = kInf;
    double index_minus = kNan, index_plus = kNan, fd_sens = kNan;
    double alpha_minus = kNan, alpha_plus = kNan;
    std::string case_minus, case_plus;
    std::string error;
  };
  std::vector<Row> rows;
  std::size_t fi = 0;
  std::ostringstream range;
  range << "attainable mean range [" << fd(z_lo) << ", " << fd(z_hi) << "]";
  for (double z : args.z_grid) {
    Row row;
    if (!(z >= z_lo && z <= z_hi)) {
      row.z = z;
      row.error = "z outside " + range.str();
    } else {
      row.z = sweep.z_snapped[fi];
      row.fd_sens = sweep.fd[fi];
      try {
        raresens::LdpReport r = raresens::markov_sensitivity(model, v, row.z);
        row.rate = r.rate;
        row.index_minus = r.index_minus;
        row.index_plus = r.index_plus;
        row.alpha_minus = r.alpha_minus;
        row.alpha_plus = r.alpha_plus;
        row.case_minus = case_name(r.case_minus);
        row.case_plus = case_name(r.case_plus);
      } catch (const std::exception& e) {
        row.rate = kInf;
        row.error = e.what();
      }
      ++fi;
    }
    rows.push_back(std::move(row));
  }

  std::ostringstream os;
  if (args.format == "csv") {
    os << "# raresens markov v1\n";
    os << "# n " << args.n << ", eps " << fd(args.eps) << ", " << range.str() << '\n';
    os << "z,rate,index_minus,index_plus,fd_sensitivity\n";
    for (const Row& row : rows) {
      if (!row.error.empty()) os << "# error: " << row.error << '\n';
      os << fd(row.z) << ',' << fd(row.rate) << ',' << fd(row.index_minus) << ','
         << fd(row.index_plus) << ',' << fd(row.fd_sens) << '\n';
    }
  } else {
    ordered_json arr = ordered_json::array();
    for (const Row& row : rows) {
      ordered_json j;
      j["z"] = jnum(row.z);
      if (!row.error.empty()) {
        j["error"] = row.error;
        arr.push_back(std::move(j));
        continue;
      }
      j["rate"] = jnum(row.rate);
      j["index_minus"] = jnum(row.index_minus);
      j["index_plus"] = jnum(row.index_plus);
      j["alpha_minus"] = jnum(row.alpha_minus);
      j["alpha_plus"] = jnum(row.alpha_plus);
      j["case_minus"] = row.case_minus;
      j["case_plus"] = row.case_plus;
      j["fd_sensitivity"] = jnum(row.fd_sens);
      arr.push_back(std::move(j));
    }
    os << arr.dump(2) << '\n';
  }
  return emit(args.out, os.str());
}

// ---------------------------------------------------------------------------
// concentration

struct ConcentrationArgs {
  std::string model, out, format = "csv";
  std::vector<double> m_list;
  std::vector<double> direction;
  double b = kNan, sigma2 = kNan;
};

int run_concentration(const ConcentrationArgs& args) {
  require_sorted(args.m_list, "--M");
  for (double m : args.m_list)
    if (!(m >= 0.0)) throw CLI::ValidationError("--M", "levels must be nonnegative");

  raresens::ConcentrationParams params;
  if (!std::isnan(args.b) || !std::isnan(args.sigma2)) {
    if (std::isnan(args.b) || std::isnan(args.sigma2))
      throw CLI::ValidationError("--b/--sigma2", "give both or neither");
    params = raresens::ConcentrationParams{args.b, args.sigma2};
    if (!(params.b > 0.0) || !(params.sigma2 > 0.0))
      throw CLI::ValidationError("--b/--sigma2", "must be positive");
  } else if (!args.model.empty()) {
    raresens::ModelSpec spec = raresens::load_model_spec(args.model);
    const std::size_t dim = spec.is_discrete()
                                ? (spec.scores.empty() ? 0 : spec.scores.front().size())
                                : spec.expfam->dim();
    Vec v = args.direction.empty() ? default_direction(dim) : Vec(args.direction);
    params = spec.is_discrete() ? discrete_concentration(*spec.discrete, spec.scores, v)
                                : raresens::concentration_params(*spec.expfam, v);
  } else {
    throw CLI::ValidationError("--model", "need a model or explicit --b/--sigma2");
  }

  std::ostringstream os;
  if (args.format == "csv") {
    os << "# raresens concentration v1\n";
    os << "# b " << fd(params.b) << ", sigma2 " << fd(params.sigma2) << '\n';
    os << "M,bernstein,bennett,linearized\n";
    for (double m : args.m_list) {
      os << fd(m) << ',' << fd(raresens::bernstein_bound(params, m)) << ','
         << fd(raresens::bennett_bound(params, m)) << ','
         << fd(raresens::linearized_index(params.sigma2, m)) << '\n';
    }
  } else {
    ordered_json arr = ordered_json::array();
    for (double m : args.m_list) {
      ordered_json j;
      j["M"] = jnum(m);
      j["b"] = jnum(params.b);
      j["sigma2"] = jnum(params.sigma2);
      j["bernstein"] = jnum(raresens::bernstein_bound(params, m));
      j["bennett"] = jnum(raresens::bennett_bound(params, m));
      j["linearized"] = jnum(raresens::linearized_index(params.sigma2, m));
      arr.push_back(std::move(j));
    }
    os << arr.dump(2) << '\n';
  }
  return emit(args.out, os.str());
}

// ---------------------------------------------------------------------------
// verify

int run_verify(const std::string& out, const std::string& format) {
  const std::vector<raresens::CheckResult> results = raresens::run_selfchecks();
  int failed = 0;
  std::ostringstream os;
  if (format == "json") {
    ordered_json arr = ordered_json::array();
    for (const auto& r : results) {
      if (!r.pass) ++failed;
      ordered_json j;
      j["name"] = r.name;
      j["pass"] = r.pass;
      j["discrepancy"] = jnum(r.discrepancy);
      j["detail"] = r.detail;
      arr.push_back(std::move(j));
    }
    os << arr.dump(2) << '\n';
  } else {
    for (const auto& r : results) {
      if (!r.pass) ++failed;
      os << (r.pass ? "ok   " : "FAIL ") << r.name;
      for (std::size_t i = r.name.size(); i < 36; ++i) os << ' ';
      os << ' ' << r.detail << '\n';
    }
    os << results.size() - failed << '/' << results.size() << " checks passed\n";
  }
  const int rc = emit(out, os.str());
  if (rc != 0) return rc;
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rare-event sensitivity indices and distribution-change bounds"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;  // reserved for sampling-based paths; the shipped
                           // subcommands are fully deterministic and ignore it
  app.add_option("--seed", seed, "RNG seed (default 0; current subcommands are deterministic)");

  IndexArgs ia;
  CLI::App* index = app.add_subcommand("index", "variational sensitivity index pair vs level M");
  index->add_option("--model", ia.model, "model spec JSON")->required();
  index->add_option("--M", ia.m_list, "level grid (sorted, nonnegative)")
      ->required()
      ->delimiter(',');
  index->add_option("--direction", ia.direction, "direction v (default first basis vector)")
      ->delimiter(',');
  index->add_option("--out", ia.out, "output path (default stdout)");
  index->add_option("--format", ia.format, "csv or json (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));

  UqArgs ua;
  CLI::App* uq = app.add_subcommand("uq", "bounds on log Q(A) from P(A) = exp(-M)");
  uq->add_option("--model", ua.model, "spec of the base model P")->required();
  uq->add_option("--model-q", ua.model_q, "spec of the alternative model Q")->required();
  uq->add_option("--M", ua.m, "rareness level -log P(A)")->required();
  uq->add_option("--raw-alpha", ua.raw_alpha, "also emit fixed-order raw bounds at these orders")
      ->delimiter(',');
  uq->add_option("--out", ua.out, "output path (default stdout)");
  uq->add_option("--format", ua.format, "json or csv (default json)")
      ->check(CLI::IsMember({"csv", "json"}));

  MarkovArgs ma;
  CLI::App* markov = app.add_subcommand("markov", "LDP rate, index pair, and DP sensitivity");
  markov->add_option("--model", ma.model, "chain spec JSON")->required();
  markov->add_option("--z-grid", ma.z_grid, "mean levels (sorted)")->required()->delimiter(',');
  markov->add_option("--direction", ma.direction, "direction v (default first basis vector)")
      ->delimiter(',');
  markov->add_option("--n", ma.n, "finite horizon for the DP check (default 500)");
  markov->add_option("--eps", ma.eps, "central-difference step (default 1e-4)")
      ->check(CLI::PositiveNumber);
  markov->add_option("--out", ma.out, "output path (default stdout)");
  markov->add_option("--format", ma.format, "csv or json (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));

  ConcentrationArgs ca;
  CLI::App* conc = app.add_subcommand("concentration", "Bernstein / Bennett / linearized bounds");
  CLI::Option* conc_model =
      conc->add_option("--model", ca.model, "model spec JSON (alternative to --b/--sigma2)");
  conc->add_option("--direction", ca.direction, "direction v (default first basis vector)")
      ->delimiter(',');
  conc->add_option("--b", ca.b, "score upper bound")->excludes(conc_model);
  conc->add_option("--sigma2", ca.sigma2, "score variance")->excludes(conc_model);
  conc->add_option("--M", ca.m_list, "level grid (sorted, nonnegative)")
      ->required()
      ->delimiter(',');
  conc->add_option("--out", ca.out, "output path (default stdout)");
  conc->add_option("--format", ca.format, "csv or json (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));

  std::string verify_out, verify_format = "text";
  CLI::App* verify = app.add_subcommand("verify", "run the built-in oracle suite");
  verify->add_option("--out", verify_out, "output path (default stdout)");
  verify->add_option("--format", verify_format, "text or json (default text)")
      ->check(CLI::IsMember({"text", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*index) return run_index(ia);
    if (*uq) return run_uq(ua);
    if (*markov) return run_markov(ma);
    if (*conc) return run_concentration(ca);
    if (*verify) return run_verify(verify_out, verify_format);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const raresens::SpecParseError& e) {
    std::fprintf(stderr, "spec error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
