#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qeilab_cli.hpp"

using namespace qeilab;
using namespace qeilab::cli;

namespace {

struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::out_of_range(name);
  }
  [[nodiscard]] double num(std::size_t r, const std::string& name) const {
    return std::stod(rows.at(r).at(col(name)));
  }
};

// Splits on commas outside double quotes.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.emplace_back();
    } else {
      out.back() += ch;
    }
  }
  return out;
}

Csv parse_csv(const std::string& text) {
  Csv c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      c.comments.push_back(line.substr(2));
    } else if (c.header.empty()) {
      c.header = split_csv(line);
    } else {
      c.rows.push_back(split_csv(line));
    }
  }
  return c;
}

std::string comment_value(const Csv& c, const std::string& key) {
  for (const auto& s : c.comments) {
    if (s.rfind(key + ": ", 0) == 0) return s.substr(key.size() + 2);
  }
  return {};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qeilab_test_" + name);
}

}  // namespace

TEST(Cli, VersionAndHelp) {
  const auto v = run({"--version"});
  EXPECT_EQ(v.exit_code, kOk);
  EXPECT_NE(v.output.find(kVersion), std::string::npos);
  const auto h = run({"--help"});
  EXPECT_EQ(h.exit_code, kOk);
  EXPECT_NE(h.output.find("selftest"), std::string::npos);
}

TEST(Cli, InvalidConfigExitsWithTwo) {
  EXPECT_EQ(run({}).exit_code, kInvalidConfig);
  EXPECT_EQ(run({"scan", "--model", "dirac"}).exit_code, kInvalidConfig);
  EXPECT_EQ(run({"scan", "--mass", "0"}).exit_code, kInvalidConfig);
  EXPECT_EQ(run({"profile", "--nparticles", "0"}).exit_code, kInvalidConfig);
  EXPECT_EQ(run({"scan", "--no-such-flag"}).exit_code, kInvalidConfig);
  EXPECT_EQ(run({"scan", "--format", "xml"}).exit_code, kInvalidConfig);
  EXPECT_EQ(run({"scan", "--config", "/nonexistent/qeilab.json"}).exit_code, kInvalidConfig);

  const auto bad_key = temp_file("bad_key.json");
  std::ofstream(bad_key) << R"({"mass": 1.0, "colour": "red"})";
  const auto r = run({"scan", "--config", bad_key.string()});
  EXPECT_EQ(r.exit_code, kInvalidConfig);
  EXPECT_NE(r.error.find("colour"), std::string::npos);

  const auto broken = temp_file("broken.json");
  std::ofstream(broken) << R"({"mass": )";
  EXPECT_EQ(run({"scan", "--config", broken.string()}).exit_code, kInvalidConfig);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto path = temp_file("precedence.json");
  std::ofstream(path) << R"({"mass": 2.0, "alpha": 0.3, "gammas": [1.0]})";
  const auto r = run({"scan", "--config", path.string(), "--mass", "3", "--alphas", "0.5"});
  ASSERT_EQ(r.exit_code, kOk) << r.error;
  const auto csv = parse_csv(r.output);
  const auto cfg = json::parse(comment_value(csv, "config"));
  EXPECT_EQ(cfg["mass"].get<double>(), 3.0);   // flag wins
  EXPECT_EQ(cfg["alpha"].get<double>(), 0.3);  // file beats default
  EXPECT_EQ(cfg["beta"].get<double>(), -0.04); // default
  ASSERT_EQ(csv.rows.size(), 1u);
  EXPECT_EQ(csv.num(0, "alpha"), 0.5);
  EXPECT_EQ(csv.num(0, "gamma"), 1.0);
}

TEST(Cli, ScanReportsThresholdAndFigurePoint) {
  const auto r = run({"scan", "--alphas", "0.1,0.5", "--gammas", "0,1,5"});
  ASSERT_EQ(r.exit_code, kOk) << r.error;
  const auto csv = parse_csv(r.output);
  EXPECT_EQ(csv.header, (std::vector<std::string>{"alpha", "gamma", "beta_opt", "min_value",
                                                  "min_value_error", "negative", "status"}));
  EXPECT_NEAR(std::stod(comment_value(csv, "gamma_threshold")), 2.1226, 1e-4);
  ASSERT_EQ(csv.rows.size(), 6u);
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const double g = csv.num(i, "gamma");
    const bool negative = csv.rows[i][csv.col("negative")] == "true";
    EXPECT_EQ(negative, csv.num(i, "min_value") < 0.0);
    if (g == 0.0) {
      EXPECT_GE(csv.num(i, "min_value"), 0.0);
    }
    if (csv.num(i, "alpha") == 0.5 && g == 5.0) {
      EXPECT_TRUE(negative);
    }
    EXPECT_EQ(csv.rows[i][csv.col("status")], "ok");
  }
}

TEST(Cli, ScanNonConvergenceExitsWithOne) {
  const auto r = run({"scan", "--alphas", "0.5", "--gammas", "5", "--tol", "1e-17", "--abs-tol",
                      "1e-300"});
  EXPECT_EQ(r.exit_code, kNonConvergence);
  const auto csv = parse_csv(r.output);
  ASSERT_EQ(csv.rows.size(), 1u);
  EXPECT_NE(csv.rows[0][csv.col("status")], "ok");
}

TEST(Cli, ProfileShowsDipAndNonAdditivity) {
  const auto r = run({"profile", "--t-min", "-0.02", "--t-max", "0.02", "--samples", "5",
                      "--nparticles", "1,5"});
  ASSERT_EQ(r.exit_code, kOk) << r.error;
  const auto csv = parse_csv(r.output);
  EXPECT_EQ(csv.header, (std::vector<std::string>{"n", "t", "rho", "rho_error"}));
  ASSERT_EQ(csv.rows.size(), 10u);
  // center rows: index 2 (n = 1) and 7 (n = 5)
  EXPECT_EQ(csv.num(2, "t"), 0.0);
  EXPECT_LT(csv.num(2, "rho"), 0.0);
  const double gap = std::abs(csv.num(7, "rho") - csv.num(2, "rho"));
  EXPECT_GT(gap, 10 * (csv.num(7, "rho_error") + csv.num(2, "rho_error")));
}

TEST(Cli, FreeProfileIsIndependentOfN) {
  const auto r = run({"profile", "--model", "free", "--t-min", "-1", "--t-max", "1", "--samples",
                      "3", "--nparticles", "1,3"});
  ASSERT_EQ(r.exit_code, kOk) << r.error;
  const auto csv = parse_csv(r.output);
  ASSERT_EQ(csv.rows.size(), 6u);
  for (std::size_t i = 0; i < 3; ++i) {
    const double err = csv.num(i, "rho_error") + csv.num(i + 3, "rho_error") + 1e-12;
    EXPECT_NEAR(csv.num(i, "rho"), csv.num(i + 3, "rho"), err);
    EXPECT_GE(csv.num(i, "rho"), -csv.num(i, "rho_error"));
  }
}

TEST(Cli, BoundOrderingAndSweep) {
  const auto f = parse_csv(run({"bound", "--model", "free"}).output);
  const auto i = parse_csv(run({"bound", "--model", "ising"}).output);
  ASSERT_EQ(f.rows.size(), 1u);
  EXPECT_LT(f.num(0, "rhs"), i.num(0, "rhs"));
  EXPECT_LT(i.num(0, "rhs"), 0.0);

  const auto r = run({"bound", "--sweep", "--model", "ising"});
  ASSERT_EQ(r.exit_code, kOk) << r.error;
  const auto s = parse_csv(r.output);
  const std::size_t last = s.rows.size() - 1;
  EXPECT_EQ(s.num(last, "mass"), 0.0);
  const double limit = s.num(last, "rhs");
  EXPECT_NEAR(limit, massless_limit_rhs(SmearingFunction::bump()), 1e-12);
  // masses run downward; distance to the limit shrinks
  double prev = INFINITY;
  for (std::size_t k = 0; k < last; ++k) {
    const double d = std::abs(s.num(k, "rhs") - limit);
    EXPECT_LT(d, prev) << s.num(k, "mass");
    prev = d;
  }
  EXPECT_LT(prev, 0.01 * std::abs(limit));
}

TEST(Cli, VerifyVacuumJson) {
  const auto r = run({"verify", "--suite", "vacuum"});
  ASSERT_EQ(r.exit_code, kOk) << r.error;
  const auto doc = json::parse(r.output);
  ASSERT_TRUE(doc.contains("config"));
  ASSERT_TRUE(doc.contains("checks"));
  ASSERT_EQ(doc["results"].size(), 1u);
  const auto& rep = doc["results"][0];
  EXPECT_EQ(rep["lhs"].get<double>(), 0.0);
  EXPECT_LT(rep["rhs"].get<double>(), 0.0);
  EXPECT_EQ(rep["margin"].get<double>(), -rep["rhs"].get<double>());
  EXPECT_TRUE(rep["passed"].get<bool>());
  for (const char* key : {"lhs_error", "rhs_error", "state", "smearing"}) {
    EXPECT_TRUE(rep.contains(key)) << key;
  }
}

TEST(Cli, VerifyFigureStates) {
  const auto r = run({"verify", "--nparticles", "1,2", "--tau", "0.5", "--format", "csv"});
  ASSERT_EQ(r.exit_code, kOk) << r.error;
  const auto csv = parse_csv(r.output);
  ASSERT_EQ(csv.rows.size(), 2u);
  for (const auto& row : csv.rows) EXPECT_EQ(row[csv.col("passed")], "true");
}

TEST(Cli, VerifySuperposition) {
  const auto r = run({"verify", "--suite", "superposition", "--tau", "0.3", "--phase", "2"});
  ASSERT_EQ(r.exit_code, kOk) << r.error;
  EXPECT_TRUE(json::parse(r.output)["results"][0]["passed"].get<bool>());
}

TEST(Cli, RandomSuiteIsSeeded) {
  const auto a = random_suite(7, 6);
  const auto b = random_suite(7, 6);
  const auto c = random_suite(8, 6);
  ASSERT_EQ(a.size(), 6u);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(describe(a[i].state), describe(b[i].state));
    EXPECT_EQ(a[i].model.name(), b[i].model.name());
    EXPECT_EQ(a[i].x, b[i].x);
    differs = differs || describe(a[i].state) != describe(c[i].state);
    const auto& ps = std::get<ProductState>(a[i].state);
    EXPECT_GE(ps.n, 1);
    EXPECT_LE(ps.n, 5);
  }
  EXPECT_TRUE(differs);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(rng);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Cli, OutputFileAndReproducibleRerun) {
  const auto first = temp_file("scan1.csv");
  const auto second = temp_file("scan2.csv");
  const auto r = run({"scan", "--alphas", "0.25", "--gammas", "2.5,4", "--out", first.string()});
  ASSERT_EQ(r.exit_code, kOk) << r.error;
  EXPECT_TRUE(r.output.empty());
  std::ifstream in(first);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  // the echoed config alone reproduces the run byte for byte
  const auto echoed = temp_file("echo.json");
  std::ofstream(echoed) << comment_value(parse_csv(text), "config");
  const auto again = run({"scan", "--config", echoed.string(), "--out", second.string()});
  ASSERT_EQ(again.exit_code, kOk) << again.error;
  std::ifstream in2(second);
  const std::string text2((std::istreambuf_iterator<char>(in2)),
                          std::istreambuf_iterator<char>());
  EXPECT_EQ(text, text2);
  EXPECT_EQ(run({"scan", "--alphas", "0.25", "--gammas", "2.5,4"}).output, text);
}

TEST(Cli, SelftestPasses) {
  const auto r = run({"selftest"});
  ASSERT_EQ(r.exit_code, kOk) << r.output;
  const auto doc = json::parse(r.output);
  ASSERT_GE(doc["checks"].size(), 10u);
  for (const auto& c : doc["checks"]) EXPECT_TRUE(c["passed"].get<bool>()) << c.dump();
}
