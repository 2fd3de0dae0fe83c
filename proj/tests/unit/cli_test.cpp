#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "laplace_bounds/cli.hpp"

namespace fs = std::filesystem;
namespace lbc = laplace_bounds::cli;
using lbc::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lb_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  int exec(const std::string& cmd, const std::string& cfg, const std::string& out,
           std::optional<std::uint64_t> seed = std::nullopt) {
    out_.str("");
    err_.str("");
    return lbc::execute(cmd, cfg, out, seed, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const char* kBound = R"({"objective": {"family": "power", "m": 2}, "lambda": [5, 10]})";

}  // namespace

TEST_F(Cli, BoundWritesCsvAndSidecar) {
  const std::string cfg = write("b.json", kBound);
  const std::string csv = (dir_ / "out.csv").string();
  ASSERT_EQ(exec("bound", cfg, csv), lbc::kExitOk) << err_.str();
  const auto ls = lines(slurp(csv));
  ASSERT_EQ(ls.size(), 3u);
  EXPECT_EQ(ls[0],
            "lambda,log_lower,log_oracle,log_upper,oracle_error,upper_method,lower_method,eps_upper,eps_lower,"
            "kappa_upper,kappa_lower,c_phi_used,oracle_method,flags");
  const auto row = split(ls[2], ',');
  ASSERT_EQ(row.size(), 14u);
  EXPECT_EQ(row[0], "10");
  // %.17g round-trips
  EXPECT_EQ(std::stod(row[2]), std::stod(row[2]));
  EXPECT_NEAR(std::stod(row[2]), 50.918938533204673, 1e-9);
  EXPECT_LE(std::stod(row[1]), std::stod(row[2]));
  EXPECT_GE(std::stod(row[3]), std::stod(row[2]));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", std::stod(row[2]));
  EXPECT_EQ(row[2], buf);

  const json side = json::parse(slurp((dir_ / "out.json").string()));
  EXPECT_EQ(side["command"], "bound");
  EXPECT_EQ(side["seed"], 42);
  EXPECT_EQ(side["columns"].size(), 14u);
  EXPECT_EQ(side["rows"].size(), 2u);
  EXPECT_FALSE(side["rows"][1]["upper_candidates"].empty());
}

TEST_F(Cli, OutputIsDeterministic) {
  const std::string cfg = write("mc.json", R"({
    "objective": {"family": "power", "m": 2, "dim": 2},
    "lambda": [[3, 4]], "level_set": "monte_carlo", "quadrature": {"mc_samples": 20000}})");
  const std::string a = (dir_ / "a.csv").string(), b = (dir_ / "b.csv").string(), c = (dir_ / "c.csv").string();
  ASSERT_EQ(exec("bound", cfg, a), 0) << err_.str();
  ASSERT_EQ(exec("bound", cfg, b), 0);
  ASSERT_EQ(exec("bound", cfg, c, 7), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const json sa = json::parse(slurp((dir_ / "a.json").string()));
  const json sc = json::parse(slurp((dir_ / "c.json").string()));
  EXPECT_EQ(sa["seed"], 42);
  EXPECT_EQ(sc["seed"], 7);
}

TEST_F(Cli, SeedPrecedence) {
  const json cfg = json::parse(R"({"seed": 9})");
  EXPECT_EQ(lbc::resolve_seed(cfg, std::nullopt), 9u);
  EXPECT_EQ(lbc::resolve_seed(cfg, 3), 3u);
  EXPECT_EQ(lbc::resolve_seed(json::object(), std::nullopt), 42u);
  EXPECT_THROW(lbc::resolve_seed(json::parse(R"({"seed": -1})"), std::nullopt), laplace_bounds::InputError);
}

TEST_F(Cli, ValidationErrorsNameTheField) {
  struct Case {
    const char* cmd;
    const char* cfg;
    const char* field;
  };
  const Case cases[] = {
      {"bound", R"({"objective": {"family": "power", "m": 0.5}, "lambda": [1]})", "objective.m"},
      {"bound", R"({"objective": {"family": "power", "m": 2}})", "lambda"},
      {"bound", R"({"objective": {"family": "cubic"}, "lambda": [1]})", "objective.family"},
      {"bound", R"({"objective": {"family": "power", "m": 2}, "lambda": [1], "eps": 1.5})", "eps"},
      {"scan", R"({"objective": {"family": "power", "m": 2}, "ray": {"direction": [1], "t": [3, 2]}})", "ray.t"},
      {"scan", R"({"objective": {"family": "power", "m": 2}, "ray": {"direction": [-1], "t": [1, 2]}})",
       "ray.direction"},
      {"chernoff", R"({"phi": {"family": "power", "m": 2, "domain": "full"}, "x": [-1]})", "x[0]"},
      {"asympt", R"({"m": [1], "lambda": [5]})", "m[0]"},
      {"inverse", R"({"comparison": {"lambda": [0, 1, 2], "values": [0, 1]}, "x": [1]})", "comparison.values"},
      {"bound", R"({"objective": {"family": "power", "m": 2}, "lambda": [1], "measure": {"alpha": -2}})",
       "measure.alpha"},
  };
  for (const Case& c : cases) {
    const std::string cfg = write("bad.json", c.cfg);
    EXPECT_EQ(exec(c.cmd, cfg, (dir_ / "x.csv").string()), lbc::kExitInput) << c.cfg;
    EXPECT_NE(err_.str().find(std::string("'") + c.field + "'"), std::string::npos) << err_.str();
  }
}

TEST_F(Cli, MalformedInputs) {
  EXPECT_EQ(exec("bound", write("broken.json", "{\"objective\": "), (dir_ / "x.csv").string()), lbc::kExitInput);
  EXPECT_NE(err_.str().find("not valid JSON"), std::string::npos);
  EXPECT_EQ(exec("bound", (dir_ / "missing.json").string(), (dir_ / "x.csv").string()), lbc::kExitInput);
  EXPECT_EQ(exec("bound", write("arr.json", "[1, 2]"), (dir_ / "x.csv").string()), lbc::kExitInput);
  EXPECT_EQ(exec("bound", write("wrongtype.json", R"({"objective": {"family": "power", "m": "two"}, "lambda": [1]})"),
                 (dir_ / "x.csv").string()),
            lbc::kExitInput);
}

TEST_F(Cli, DivergenceExitCode) {
  // zeta(x) = x on the half-line: I(2) is infinite
  const std::string cfg = write("div.json", R"({
    "objective": {"family": "grid", "nodes": {"linspace": [0, 10, 11]}, "values": {"linspace": [0, 10, 11]},
                  "extension": "linear", "domain": "orthant"},
    "lambda": [2]})");
  EXPECT_EQ(exec("bound", cfg, (dir_ / "x.csv").string()), lbc::kExitDivergence) << err_.str();
}

TEST_F(Cli, StdoutSkipsSidecar) {
  const std::string cfg = write("c.json", R"({"objective": {"family": "power", "m": 2}, "lambda": {"linspace": [0, 2, 3]}})");
  ASSERT_EQ(exec("conjugate", cfg, "-"), 0);
  const auto ls = lines(out_.str());
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0], "lambda,zeta_star,argmax,source,boundary,pi_kappa,flags");
  EXPECT_EQ(split(ls[3], ',')[1], "2");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir_), fs::directory_iterator{}), 1);
}

TEST_F(Cli, ScanAndAsympt) {
  const std::string s = write("s.json", R"({"objective": {"family": "power", "m": 2},
                                         "ray": {"direction": [1], "t": {"logspace": [1, 50, 5]}}})");
  ASSERT_EQ(exec("scan", s, "-"), 0) << err_.str();
  auto ls = lines(out_.str());
  EXPECT_EQ(ls[0], "t,lambda_min,log_I,zeta_star,ratio,log_r_ratio,log_v_ratio,ok,flags");
  EXPECT_EQ(ls.size(), 6u);

  const std::string a = write("a.json", R"({"m": [2, 3], "lambda": [0.5, 10]})");
  const std::string out = (dir_ / "a.csv").string();
  ASSERT_EQ(exec("asympt", a, out), 0) << err_.str();
  ls = lines(slurp(out));
  EXPECT_EQ(ls[0],
            "m,lambda,lambda0,log_oracle,oracle_error,log_closed_lower,log_fedoryuk,log_closed_upper,"
            "fedoryuk_ratio,bracket,flags");
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(split(ls[1], ',')[9], "na");
  EXPECT_EQ(split(ls[2], ',')[9], "1");
  EXPECT_EQ(split(ls[3], ',')[9], "na");
  EXPECT_EQ(json::parse(slurp((dir_ / "a.json").string()))["bracket_violations"], 0);
}

TEST_F(Cli, InverseAndChernoff) {
  const std::string i = write("i.json", R"({"objective": {"family": "power", "m": 2},
      "comparison": {"source": "conjugate", "lambda": {"linspace": [-5, 20, 251]}},
      "x": [1, 2, 4]})");
  ASSERT_EQ(exec("inverse", i, "-"), 0) << err_.str();
  auto ls = lines(out_.str());
  EXPECT_EQ(ls[0], "x,zeta,upper_bound,lower_bound,upper_edge,lower_edge,flags");
  EXPECT_NEAR(std::stod(split(ls[3], ',')[2]), 8.0, 1e-9);

  const std::string c = write("ch.json", R"({"phi": {"family": "power", "m": 2, "domain": "full"}, "x": [0, 1, 3]})");
  ASSERT_EQ(exec("chernoff", c, "-"), 0) << err_.str();
  ls = lines(out_.str());
  EXPECT_EQ(ls[0], "x,phi_star,bound,clipped,edge");
  EXPECT_EQ(split(ls[1], ',')[2], "1");
  EXPECT_NEAR(std::stod(split(ls[3], ',')[2]), std::exp(-4.5), 1e-15);
}

TEST(CliFormat, Numbers) {
  EXPECT_EQ(lbc::fmt(0.1), "0.10000000000000001");
  EXPECT_EQ(lbc::fmt(laplace_bounds::kInf), "inf");
  EXPECT_EQ(lbc::fmt(-laplace_bounds::kInf), "-inf");
  EXPECT_EQ(lbc::fmt(laplace_bounds::kNaN), "nan");
  EXPECT_EQ(lbc::fmt(laplace_bounds::make_vec({1.0, 2.5})), "1;2.5");
  lbc::Table t{{"a", "b"}, {{"x,y", "say \"hi\""}}};
  EXPECT_EQ(t.csv(), "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
  EXPECT_EQ(lbc::sidecar_path("out/run.csv"), "out/run.json");
  EXPECT_EQ(lbc::sidecar_path("out.d/run"), "out.d/run.json");
}
