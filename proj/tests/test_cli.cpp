#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ep/inference.hpp"

using Catch::Approx;
using nlohmann::json;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;
};

CmdResult run_eptool(const std::string& args) {
  std::string cmd = std::string(EPTOOL_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult r;
  std::array<char, 4096> buf;
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
  int rc = pclose(pipe);
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

}  // namespace

TEST_CASE("tables: published cells reproduce on the default rows") {
  auto r = run_eptool("tables --dataset builtin:mastigamoeba-nn --alpha 0.5 --theta 206.75");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(r.output);
  REQUIRE(rows.size() == 11);
  CHECK(rows[0] == std::vector<std::string>{"table", "m", "exact", "uncorrected", "corrected"});
  // discovery rows: m, exact, uncorrected, corrected
  CHECK(rows[1] == std::vector<std::string>{"discovery", "7", "0.472", "5.438", "0.472"});
  CHECK(rows[2] == std::vector<std::string>{"discovery", "72", "0.456", "1.696", "0.456"});
  CHECK(rows[4] == std::vector<std::string>{"discovery", "7150", "0.160", "0.170", "0.160"});
  // singleton rows
  CHECK(rows[6] == std::vector<std::string>{"singleton", "7", "54.268", "5.438", "54.268"});
  CHECK(rows[8] == std::vector<std::string>{"singleton", "715", "0.752", "0.538", "0.752"});
}

TEST_CASE("tables: --rows floor uses the literal floors") {
  auto r = run_eptool(
      "tables --dataset builtin:mastigamoeba-nn --alpha 0.5 --theta 206.75 --rows floor");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(r.output);
  CHECK(rows[1][1] == "7");
  CHECK(rows[2][1] == "71");
}

TEST_CASE("tables: JSON round trip is lossless at 17 significant digits") {
  auto r = run_eptool(
      "tables --dataset builtin:mastigamoeba-n --alpha 0.5 --fit mean --format json");
  REQUIRE(r.exit_code == 0);
  json doc = json::parse(r.output);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["n"] == 363);
  CHECK(doc["j"] == 248);
  CHECK(doc["m1"] == 200);
  double alpha = doc["alpha"];
  double theta = doc["theta"];
  CHECK(theta == Approx(132.92).margin(0.01));
  ep::Params p(alpha, theta);
  for (const auto& row : doc["rows"]) {
    long m = row["m"];
    // bit-identical to the in-memory recomputation
    CHECK(double(row["discovery"]["exact"]) == ep::discovery_estimate(p, 363, 248, m));
    CHECK(double(row["singleton"]["exact"]) ==
          ep::m1_estimate(p, 363, 248, 200, m, ep::M1Variant::exact));
    CHECK(double(row["discovery"]["corrected"]) ==
          ep::discovery_asymptotic(p, 363, 248, m, true));
  }
}

TEST_CASE("tables: full-precision CSV carries 17 significant digits") {
  auto r = run_eptool(
      "tables --dataset builtin:mastigamoeba-nn --alpha 0.5 --theta 206.75 --m-list 715 "
      "--full-precision");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(r.output);
  REQUIRE(rows.size() == 3);
  double exact = std::stod(rows[1][2]);
  CHECK(exact == ep::discovery_estimate(ep::Params(0.5, 206.75), 715, 460, 715));
}

TEST_CASE("rate: closed form endpoints and the generic/closed agreement") {
  auto r = run_eptool("rate --alpha 0.5 --l 1 --grid 21 --closed-form");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(r.output);
  REQUIRE(rows.size() == 22);
  CHECK(rows[0] == std::vector<std::string>{"x", "I"});
  CHECK(std::stod(rows[1][1]) == 0.0);
  CHECK(std::stod(rows[21][1]) == Approx(std::log(2.0)).epsilon(1e-12));

  auto generic = run_eptool("rate --alpha 0.5 --l 1 --grid 21");
  auto grows = parse_csv(generic.output);
  for (size_t i = 1; i < rows.size(); ++i)
    CHECK(std::stod(grows[i][1]) == Approx(std::stod(rows[i][1])).margin(1e-6));

  CHECK(run_eptool("rate --alpha 0.3 --l 1 --closed-form").exit_code != 0);
}

TEST_CASE("tail: values in [0,1], nonincreasing, top row exactly 1") {
  auto r = run_eptool(
      "tail --dataset builtin:mastigamoeba-nn --alpha 0.5 --theta 206.75 --m-list 715 "
      "--grid 41");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(r.output);
  REQUIRE(rows.size() == 42);
  CHECK(rows[0] == std::vector<std::string>{"x", "uncorrected", "corrected"});
  CHECK(std::stod(rows[1][1]) == 1.0);
  CHECK(std::stod(rows[1][2]) == 1.0);
  double pu = 2, pc = 2;
  for (size_t i = 1; i < rows.size(); ++i) {
    double u = std::stod(rows[i][1]), c = std::stod(rows[i][2]);
    CHECK(u >= 0.0);
    CHECK(u <= 1.0);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    CHECK(u <= pu + 1e-15);
    CHECK(c <= pc + 1e-15);
    pu = u;
    pc = c;
  }
  // alpha outside (0,1) is rejected
  CHECK(run_eptool("tail --dataset builtin:mastigamoeba-nn --alpha 0 --theta 2 --m-list 10")
            .exit_code != 0);
}

TEST_CASE("fit: mean-match and mle outputs") {
  auto mean = run_eptool("fit --dataset builtin:mastigamoeba-nn --fit mean --format json");
  REQUIRE(mean.exit_code == 0);
  json jm = json::parse(mean.output);
  CHECK(double(jm["theta"]) == Approx(206.75).margin(0.01));
  CHECK(double(jm["residual"]) <= 1e-8);

  auto mle = run_eptool("fit --dataset builtin:mastigamoeba-n --fit mle --format json");
  REQUIRE(mle.exit_code == 0);
  json jl = json::parse(mle.output);
  CHECK(double(jl["alpha"]) > 0.0);
  CHECK(double(jl["alpha"]) < 1.0);
  CHECK(jl.contains("log_likelihood"));
}

TEST_CASE("simulate: determinism, statistics, and the m = 0 echo") {
  auto a = run_eptool("simulate --n 40 --reps 200 --alpha 0.5 --theta 1 --seed 9");
  auto b = run_eptool("simulate --n 40 --reps 200 --alpha 0.5 --theta 1 --seed 9");
  REQUIRE(a.exit_code == 0);
  CHECK(a.output == b.output);
  auto c = run_eptool("simulate --n 40 --reps 200 --alpha 0.5 --theta 1 --seed 10");
  CHECK(a.output != c.output);

  auto rows = parse_csv(a.output);
  REQUIRE(rows.size() == 201);
  double mean_k = 0;
  for (size_t i = 1; i < rows.size(); ++i) mean_k += std::stod(rows[i][1]);
  mean_k /= 200.0;
  double expected = ep::expected_K_n(ep::Params(0.5, 1.0), 40);
  CHECK(std::abs(mean_k - expected) < 1.5);  // ~5 SE at 200 reps

  auto echo = run_eptool(
      "simulate --dataset builtin:mastigamoeba-n --m 0 --reps 2 --alpha 0.5 --theta 132.92 "
      "--seed 1");
  REQUIRE(echo.exit_code == 0);
  auto er = parse_csv(echo.output);
  REQUIRE(er.size() == 3);
  CHECK(er[1][1] == "0");                                 // no new blocks
  CHECK(er[1][4] == "1:200 2:21 3:14 4:4 5:3 6:3 7:1 9:1 14:1");  // initial partition
}

TEST_CASE("dataset errors surface as distinct messages") {
  auto bad = run_eptool("tables --dataset /nonexistent.csv --alpha 0.5 --theta 1");
  CHECK(bad.exit_code != 0);
  CHECK(bad.output.find("cannot open") != std::string::npos);

  std::string path = "cli_test_bad.csv";
  {
    std::ofstream f(path);
    f << "frequency,count\n-1,3\n";
  }
  auto neg = run_eptool("tables --dataset " + path + " --alpha 0.5 --theta 1");
  CHECK(neg.exit_code != 0);
  CHECK(neg.output.find("positive") != std::string::npos);
  std::remove(path.c_str());

  {
    std::ofstream f(path);
    f << "frequency,count\n";
  }
  auto empty = run_eptool("tables --dataset " + path + " --alpha 0.5 --theta 1");
  CHECK(empty.exit_code != 0);
  CHECK(empty.output.find("empty partition") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("missing parameters are reported") {
  auto r = run_eptool("tables --dataset builtin:mastigamoeba-nn");
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("--theta or --fit") != std::string::npos);
  auto both = run_eptool("tables --dataset builtin:mastigamoeba-nn --theta 1 --fit mean");
  CHECK(both.exit_code != 0);
}

TEST_CASE("verify: JSON report carries per-group results") {
  auto r = run_eptool("verify --max-n 3 --chi-reps 5000 --threads 4 --format json");
  REQUIRE(r.exit_code == 0);
  json doc = json::parse(r.output);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["pass"] == true);
  REQUIRE(doc["groups"].is_array());
  bool saw_sandwich = false;
  for (const auto& g : doc["groups"]) {
    CHECK(g["pass"] == true);
    if (g["group"] == "conditional-mgf-sandwich") saw_sandwich = true;
  }
  CHECK(saw_sandwich);
}

TEST_CASE("thread count never changes output bytes") {
  auto r1 = run_eptool("rate --alpha 0.4 --l 2 --grid 31 --threads 1");
  auto r8 = run_eptool("rate --alpha 0.4 --l 2 --grid 31 --threads 8");
  REQUIRE(r1.exit_code == 0);
  CHECK(r1.output == r8.output);
  auto t1 = run_eptool(
      "tail --dataset builtin:mastigamoeba-n --alpha 0.5 --theta 132.92 --m-list 363 --grid 31 "
      "--threads 1");
  auto t8 = run_eptool(
      "tail --dataset builtin:mastigamoeba-n --alpha 0.5 --theta 132.92 --m-list 363 --grid 31 "
      "--threads 8");
  REQUIRE(t1.exit_code == 0);
  CHECK(t1.output == t8.output);
}
