#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

// Each test gets a fresh directory under the system temp path.
class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("semivar-cli-" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(std::vector<std::string> args) const {
    std::vector<const char*> argv{"semivar"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = semivar::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
  }

  fs::path path(const std::string& rel) const { return dir_ / rel; }
  std::string out_dir(const std::string& name) const { return (dir_ / name).string(); }

  static json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
  }
  static std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string l; std::getline(in, l);) ++n;
    return n;
  }

  // Writes a constant-volatility price series and returns its path.
  std::string synth_jd(std::size_t n, double sigma, double lambda, std::uint64_t seed = 1) const {
    const auto r = run({"synth", "--model", "jd", "--n", std::to_string(n), "--jd-mu", "0.05", "--jd-sigma",
                        std::to_string(sigma), "--jd-lambda", std::to_string(lambda), "--jd-mu-q", "-0.02",
                        "--jd-sigma-q", "0.03", "--seed", std::to_string(seed), "--out", out_dir("synth")});
    EXPECT_EQ(r.code, 0) << r.err;
    return (dir_ / "synth" / "prices.csv").string();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpAndVersionExitZero) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("tailbound"), std::string::npos);
  EXPECT_EQ(run({"--version"}).code, 0);
  EXPECT_EQ(run({"svjj", "estimate", "--help"}).code, 0);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"svjj"}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({"fit", "--population", "abc"}).code, 2);
  EXPECT_EQ(run({"synth", "--model", "garch", "--out", out_dir("x")}).code, 2);
}

TEST_F(Cli, MissingInputExitsTwo) {
  auto r = run({"fit", "--input", path("absent.csv").string(), "--out", out_dir("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run({"fit", "--out", out_dir("o")}).code, 2);
}

TEST_F(Cli, SynthWritesPricesAndTruth) {
  const auto prices = synth_jd(500, 0.2, 0.0);
  EXPECT_EQ(count_lines(prices), 502u);  // header + 501 levels
  const auto truth = read_json(path("synth/truth.json"));
  EXPECT_EQ(truth["model"], "jd");
  EXPECT_DOUBLE_EQ(truth["params"]["sigma"].get<double>(), 0.2);
  const auto manifest = read_json(path("synth/manifest.json"));
  EXPECT_EQ(manifest["command"], "synth");
  EXPECT_EQ(manifest["seed"], 1);
}

TEST_F(Cli, PureFitRecoversVolatility) {
  const auto prices = synth_jd(2000, 0.2, 0.0, 3);
  const auto r = run({"fit", "--input", prices, "--model", "pure", "--out", out_dir("fit")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fit = read_json(path("fit/fit.json"));
  EXPECT_NEAR(fit["params"]["sigma"].get<double>(), 0.2, 0.02);
  EXPECT_EQ(fit["observations"], 2000);
  EXPECT_GT(fit["semideviation"].get<double>(), 0.0);
  EXPECT_TRUE(fs::exists(path("fit/fit_report.txt")));
  const auto manifest = read_json(path("fit/manifest.json"));
  EXPECT_EQ(manifest["command"], "fit");
  bool listed = false;
  for (const auto& o : manifest["outputs"]) listed = listed || o == "fit.json";
  EXPECT_TRUE(listed);
  EXPECT_NE(r.out.find("sigma"), std::string::npos);
}

TEST_F(Cli, LambdaCapHonoured) {
  const auto prices = synth_jd(1000, 0.15, 60.0, 4);
  const auto r = run({"fit", "--input", prices, "--model", "generalized", "--lambda-cap", "10", "--population", "60",
                      "--de-iterations", "80", "--out", out_dir("fit")});
  ASSERT_EQ(r.code, 0) << r.err;
  const double lambda = read_json(path("fit/fit.json"))["params"]["lambda"].get<double>();
  EXPECT_GE(lambda, 0.0);
  EXPECT_LE(lambda, 10.0);
}

TEST_F(Cli, RollSqrtOnly) {
  const auto prices = synth_jd(300, 0.2, 0.0, 5);
  const auto r = run({"roll", "--input", prices, "--methods", "sqrt", "--out", out_dir("roll")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(path("roll/rolling.csv")), 1u + 300 - 251);
  const auto manifest = read_json(path("roll/manifest.json"));
  EXPECT_EQ(manifest["optimizer_evaluations"], 0);
  EXPECT_EQ(manifest["rows"], 49);
}

TEST_F(Cli, RollWindowLongerThanDataExitsTwo) {
  const auto prices = synth_jd(100, 0.2, 0.0, 6);
  EXPECT_EQ(run({"roll", "--input", prices, "--window", "252", "--out", out_dir("roll")}).code, 2);
  EXPECT_EQ(run({"roll", "--input", prices, "--methods", "sqrt,bogus", "--window", "50", "--out", out_dir("roll")}).code,
            2);
}

TEST_F(Cli, SvjjEstimateWritesChain) {
  auto r = run({"synth", "--model", "svjj", "--n", "500", "--seed", "7", "--out", out_dir("synth")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(path("synth/latent_truth.csv")), 501u);  // one row per return
  r = run({"svjj", "estimate", "--input", path("synth/prices.csv").string(), "--iterations", "1000", "--burn-in", "100",
           "--out", out_dir("est")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(path("est/chain.csv")), 901u);
  EXPECT_EQ(count_lines(path("est/posterior_summary.csv")), 11u);
  for (const char* f : {"acf.csv", "qq.csv", "latent.csv", "posterior.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(path(std::string("est/") + f))) << f;
  }
  const auto post = read_json(path("est/posterior.json"));
  ASSERT_TRUE(post.contains("posterior_mean"));
  // Fractions: daily variance of a few percent squared is far below 1e-2.
  EXPECT_LT(post["posterior_mean"]["theta"].get<double>(), 1e-2);

  // The posterior file feeds simulation directly.
  r = run({"svjj", "simulate", "--params", path("est/posterior.json").string(), "--paths", "300", "--horizon", "0.1",
           "--out", out_dir("sim")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, SvjjEstimateShortSeriesExitsTwo) {
  const auto prices = synth_jd(50, 0.2, 0.0, 8);
  EXPECT_EQ(run({"svjj", "estimate", "--input", prices, "--iterations", "200", "--burn-in", "50", "--out", out_dir("e")}).code,
            2);
  EXPECT_EQ(run({"svjj", "estimate", "--input", prices, "--iterations", "50", "--burn-in", "50", "--out", out_dir("e")}).code,
            2);
}

TEST_F(Cli, SvjjSimulate) {
  {
    std::ofstream f(path("p.json"));
    f << R"({"mu": 0.0003, "kappa": 0.8, "theta": 2.5e-5, "rho": -0.2, "sigma_nu": 0.0012,
             "mu_y": -0.005, "sigma_y": 0.01, "rho_j": 0.0, "mu_nu": 5e-7, "lambda": 0.03})";
  }
  const auto r = run({"svjj", "simulate", "--params", path("p.json").string(), "--paths", "1000", "--out", out_dir("sim")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(path("sim/samples.csv")), 1001u);
  EXPECT_TRUE(fs::exists(path("sim/density.csv")));
  const auto j = read_json(path("sim/simulation.json"));
  EXPECT_EQ(j["paths"], 1000);
  const auto manifest = read_json(path("sim/manifest.json"));
  EXPECT_EQ(manifest["command"], "svjj simulate");

  EXPECT_EQ(run({"svjj", "simulate", "--params", path("none.json").string(), "--out", out_dir("sim2")}).code, 2);
  EXPECT_EQ(run({"svjj", "simulate", "--rho", "1.5", "--out", out_dir("sim3")}).code, 2);
}

TEST_F(Cli, Tailbound) {
  const auto r = run({"tailbound", "--out", out_dir("tb")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("1  0.264"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("2  0.080"), std::string::npos);
  EXPECT_NE(r.out.find("3  0.019"), std::string::npos);
  EXPECT_EQ(read_json(path("tb/tailbound.json")).size(), 5u);
}

TEST_F(Cli, PrintConfigAndConfigFile) {
  auto r = run({"--seed", "99", "--print-config"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("99"), std::string::npos);
  {
    std::ofstream f(path("c.toml"));
    f << "seed = 11\n[tailbound]\nmax-m = 3\n";
  }
  r = run({"--config", path("c.toml").string(), "tailbound", "--out", out_dir("tb")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(path("tb/tailbound.json")).size(), 3u);
  EXPECT_EQ(read_json(path("tb/manifest.json"))["seed"], 11);
}

TEST_F(Cli, BinaryExitStatus) {
  const std::string base = std::string(SEMIVAR_CLI_PATH) + " --out " + out_dir("bin");
  const auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status(base + " tailbound"), 0);
  EXPECT_EQ(status(base + " fit --input " + path("absent.csv").string()), 2);
}
