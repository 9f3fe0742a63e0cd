#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// End-to-end driver for the command-line tool. The binary location and the
// shipped model specs arrive via RARESENS_BIN / RARESENS_MODELS.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

struct RunResult {
  int code = -1;
  std::string out;  // stdout + stderr interleaved
};

RunResult run(const std::string& args) {
  const char* bin = std::getenv("RARESENS_BIN");
  RunResult r;
  if (!bin) return r;
  FILE* p = popen((std::string(bin) + " " + args + " 2>&1").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string models() {
  const char* dir = std::getenv("RARESENS_MODELS");
  return dir ? dir : ".";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Data rows of a CSV payload: comment lines start with '#', first data line
// is the column header.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    rows.push_back(split(line, ','));
  }
  return rows;
}

}  // namespace

TEST_CASE("environment is wired") {
  REQUIRE(std::getenv("RARESENS_BIN") != nullptr);
  REQUIRE(std::getenv("RARESENS_MODELS") != nullptr);
}

TEST_CASE("verify subcommand") {
  RunResult r = run("verify");
  CHECK(r.code == 0);
  CHECK(r.out.find("checks passed") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);

  RunResult j = run("verify --format json");
  CHECK(j.code == 0);
  const nlohmann::json arr = nlohmann::json::parse(j.out);
  REQUIRE(arr.is_array());
  CHECK(arr.size() >= 30);
  for (const auto& c : arr) CHECK(c.at("pass").get<bool>());
}

TEST_CASE("index CSV: Gaussian closed form, deterministic bytes") {
  const std::string spec = models() + "/gaussian.json";
  RunResult r = run("index --model " + spec + " --M 0,0.5,2,8 --out cli_idx_a.csv");
  REQUIRE(r.code == 0);
  const std::string a = slurp("cli_idx_a.csv");
  CHECK(a.rfind("# raresens index v1", 0) == 0);

  auto rows = csv_rows(a);
  REQUIRE(rows.size() == 4);
  const double ms[] = {0.0, 0.5, 2.0, 8.0};
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(rows[i].size() == 6);
    const double m = std::strtod(rows[i][0].c_str(), nullptr);
    const double lo = std::strtod(rows[i][1].c_str(), nullptr);
    const double hi = std::strtod(rows[i][2].c_str(), nullptr);
    CHECK(m == ms[i]);
    CHECK(hi == doctest::Approx(std::sqrt(2.0 * m)).epsilon(1e-12));
    CHECK(lo == doctest::Approx(-std::sqrt(2.0 * m)).epsilon(1e-12));
    // Gaussian scores are unbounded: the concentration columns are nan.
    CHECK(rows[i][3] == "nan");
    CHECK(rows[i][4] == "nan");
    const double lin = std::strtod(rows[i][5].c_str(), nullptr);
    CHECK(lin == doctest::Approx(std::sqrt(2.0 * m)).epsilon(1e-12));
  }

  RunResult r2 = run("index --model " + spec + " --M 0,0.5,2,8 --out cli_idx_b.csv");
  REQUIRE(r2.code == 0);
  CHECK(slurp("cli_idx_b.csv") == a);
  CHECK_FALSE(file_exists("cli_idx_a.csv.tmp"));
  std::remove("cli_idx_a.csv");
  std::remove("cli_idx_b.csv");
}

TEST_CASE("index JSON: Bernoulli Bennett coincidence") {
  RunResult r = run("index --model " + models() + "/bernoulli.json --M 0.2,1 --format json");
  REQUIRE(r.code == 0);
  const nlohmann::json arr = nlohmann::json::parse(r.out);
  REQUIRE(arr.is_array());
  REQUIRE(arr.size() == 2);
  for (const auto& row : arr) {
    const double plus = row.at("index_plus").get<double>();
    const double bennett = row.at("bennett").get<double>();
    CHECK(plus == doctest::Approx(bennett).epsilon(1e-10));
    CHECK(row.at("flagged").get<bool>() == false);
    CHECK(row.at("index_minus").get<double>() >= -0.3 - 1e-12);  // minus plateau at -p
  }
  // Past m = -log(0.3) the minus side saturates at the essential infimum.
  CHECK(arr[1].at("index_minus").get<double>() == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(arr[1].at("case_minus").get<std::string>() == "ess_sup_plateau");
}

TEST_CASE("uq JSON: trivial branch and raw orders") {
  const std::string base = "uq --model " + models() + "/discrete_p.json --model-q " +
                           models() + "/discrete_q.json ";

  RunResult low = run(base + "--M 0.05");
  REQUIRE(low.code == 0);
  nlohmann::json j = nlohmann::json::parse(low.out);
  CHECK(j.at("upper_is_trivial").get<bool>());
  CHECK(j.at("upper").get<double>() == 0.0);
  CHECK(j.at("alpha_plus").get<double>() == doctest::Approx(1.0));
  CHECK(j.at("threshold_ratio").get<double>() > 1.0);

  RunResult high = run(base + "--M 2 --raw-alpha 1,100");
  REQUIRE(high.code == 0);
  j = nlohmann::json::parse(high.out);
  CHECK_FALSE(j.at("upper_is_trivial").get<bool>());
  CHECK(j.at("upper").get<double>() < 0.0);
  CHECK(j.at("lower").get<double>() < j.at("upper").get<double>());
  REQUIRE(j.at("raw").size() == 2);
  CHECK(j.at("raw")[0].at("alpha").get<double>() == 1.0);
  // Raw windows contain the optimal ones once both are shifted to log Q(A).
  const double m = 2.0;
  for (const auto& raw : j.at("raw")) {
    CHECK(raw.at("lower").get<double>() - m <= j.at("lower").get<double>() + 1e-12);
    CHECK(raw.at("upper").get<double>() - m >= j.at("upper").get<double>() - 1e-12);
  }

  RunResult csv = run(base + "--M 2 --format csv");
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("# raresens uq v1", 0) == 0);
  auto rows = csv_rows(csv.out);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].size() == 8);
  CHECK(std::strtod(rows[0][0].c_str(), nullptr) == 2.0);
}

TEST_CASE("markov CSV: snapping, sandwich, infeasible rows") {
  RunResult r = run("markov --model " + models() +
                    "/chain5.json --z-grid -2,0.5,1,1.7 --n 300");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# raresens markov v1", 0) == 0);
  CHECK(r.out.find("attainable mean range [-1.5, 1.5]") != std::string::npos);
  CHECK(r.out.find("# error: z outside attainable mean range") != std::string::npos);

  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 4);
  // Infeasible endpoints carry inf rate and nan indices.
  CHECK(rows[0][1] == "inf");
  CHECK(rows[0][2] == "nan");
  CHECK(rows[3][1] == "inf");
  for (std::size_t i : {std::size_t{1}, std::size_t{2}}) {
    const double rate = std::strtod(rows[i][1].c_str(), nullptr);
    const double lo = std::strtod(rows[i][2].c_str(), nullptr);
    const double hi = std::strtod(rows[i][3].c_str(), nullptr);
    const double fd = std::strtod(rows[i][4].c_str(), nullptr);
    CHECK(rate >= 0.0);
    CHECK(std::isfinite(rate));
    CHECK(lo <= hi);
    CHECK(fd >= lo - 0.05);
    CHECK(fd <= hi + 0.05);
  }
}

TEST_CASE("concentration closed forms") {
  RunResult r = run("concentration --b 1 --sigma2 1 --M 0,2,8");
  REQUIRE(r.code == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(std::strtod(rows[0][1].c_str(), nullptr) == 0.0);
  CHECK(std::strtod(rows[1][1].c_str(), nullptr) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(std::strtod(rows[2][1].c_str(), nullptr) == doctest::Approx(12.0).epsilon(1e-14));
  for (const auto& row : rows) {
    const double bern = std::strtod(row[1].c_str(), nullptr);
    const double benn = std::strtod(row[2].c_str(), nullptr);
    CHECK(benn <= bern + 1e-12);
  }

  // Model-driven parameters must agree with the explicit pair.
  RunResult m = run("concentration --model " + models() + "/bernoulli.json --M 2");
  REQUIRE(m.code == 0);
  auto mrows = csv_rows(m.out);
  const double expect = 0.7 * 2.0 + std::sqrt(2.0 * 0.21 * 2.0);
  CHECK(std::strtod(mrows[0][1].c_str(), nullptr) == doctest::Approx(expect).epsilon(1e-12));

  // --b/--sigma2 and --model are mutually exclusive, both-or-neither.
  CHECK(run("concentration --b 1 --M 1").code != 0);
  CHECK(run("concentration --b 1 --sigma2 1 --model x.json --M 1").code != 0);
}

TEST_CASE("failure modes") {
  {
    std::ofstream bad("cli_bad_spec.json", std::ios::binary);
    bad << "{\"family\":\"bernoulli\"";
  }
  RunResult parse = run("index --model cli_bad_spec.json --M 1");
  CHECK(parse.code == 2);
  CHECK(parse.out.find("spec error") != std::string::npos);
  std::remove("cli_bad_spec.json");

  RunResult missing = run("index --model definitely_not_here.json --M 1");
  CHECK(missing.code == 2);
  CHECK(missing.out.find("cannot open file") != std::string::npos);

  RunResult unsorted = run("index --model " + models() + "/gaussian.json --M 2,1");
  CHECK(unsorted.code == 105);

  CHECK(run("").code != 0);                                   // subcommand required
  CHECK(run("index --model x --M 1 --format yaml").code != 0);  // bad enum value
  CHECK(run("markov --model " + models() + "/chain5.json --z-grid 0.5 --eps -1").code != 0);
}
