#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "mlab/errors.hpp"
#include "output.hpp"

using namespace mlab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::path(::testing::TempDir()) / ("mlab_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  ADD_FAILURE() << "no column " << name;
  return 0;
}

}  // namespace

TEST(Config, ParsesTypedKeys) {
  const auto c = Config::parse("# comment\npotential = tilted_double_well\npotential.tau = 0.1\ns = 0.05, 0.02\n",
                               schema_for("rates"));
  EXPECT_EQ(c.text("potential", ""), "tilted_double_well");
  EXPECT_EQ(c.prefixed("potential.").at("tau"), 0.1);
  EXPECT_EQ(c.reals("s", {}), (std::vector<double>{0.05, 0.02}));
  EXPECT_EQ(c.reals("alpha", {0.9}), std::vector<double>{0.9});
}

TEST(Config, RejectsBadInput) {
  const auto schema = schema_for("simulate");
  EXPECT_THROW(Config::parse("bogus = 1\n", schema), mlab::ValidationError);
  EXPECT_THROW(Config::parse("n_traj = 1\nn_traj = 2\n", schema), mlab::ValidationError);
  EXPECT_THROW(Config::parse("n_traj = lots\n", schema), mlab::ValidationError);
  EXPECT_THROW(Config::parse("s = 0.1, x\n", schema), mlab::ValidationError);
  EXPECT_THROW(Config::parse("no equals sign\n", schema), mlab::ValidationError);
  EXPECT_THROW(schema_for("launch"), mlab::UsageError);
}

TEST(Config, CanonicalFormIgnoresOrderAndSpacing) {
  const auto schema = schema_for("rates");
  const auto a = Config::parse("s = 0.05\nalpha=0.9\n", schema);
  const auto b = Config::parse("alpha = 0.9\n\n  s=0.05\n", schema);
  EXPECT_EQ(a.canonical(), b.canonical());
  const auto c = Config::parse("alpha = 0.9\ns = 0.06\n", schema);
  EXPECT_NE(fnv1a(a.canonical()), fnv1a(c.canonical()));
  EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
}

TEST(Output, RealsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 2.5e-300, -7.0, 1e22, 0.29289321881345248}) EXPECT_EQ(parse_real(fmt(v)), v);
  EXPECT_EQ(fmt(std::nan("")), "nan");
}

TEST(Output, CsvQuoting) {
  CsvTable t({"a", "b"});
  t.add({"x,y", "1"});
  EXPECT_EQ(t.render(), "a,b\n\"x,y\",1\n");
  EXPECT_THROW(t.add({"only one"}), std::exception);
}

TEST(Threads, FlagBeatsConfig) {
  auto cfg = Config::parse("threads = 3\n", schema_for("morse"));
  EXPECT_EQ(resolve_threads(5u, cfg), 5u);
  ::unsetenv("MOMENTUM_LAB_THREADS");
  EXPECT_EQ(resolve_threads(std::nullopt, cfg), 3u);
  ::setenv("MOMENTUM_LAB_THREADS", "2", 1);
  EXPECT_EQ(resolve_threads(std::nullopt, cfg), 2u);
  ::unsetenv("MOMENTUM_LAB_THREADS");
  EXPECT_EQ(resolve_threads(std::nullopt, Config::parse("", schema_for("morse"))), 1u);
}

TEST(Binary, RatesRowAndManifest) {
  const auto dir = scratch("rates");
  const auto cfg = write_config(dir, "potential = tilted_double_well\npotential.tau = 0.1\ns = 0.05\nalpha = 0.9\n");
  ASSERT_EQ(run_cli("--out " + dir.string() + " rates --config " + cfg.string()), 0);
  const auto rows = csv(dir / "rates.csv");
  ASSERT_GE(rows.size(), 2u);
  EXPECT_NEAR(parse_real(rows[1][column(rows[0], "lambda")]), 0.168, 1e-3);
  const std::string manifest = slurp(dir / "manifest.json");
  const std::string hash = rows[1][column(rows[0], "config_hash")];
  EXPECT_NE(manifest.find(hash), std::string::npos);
  EXPECT_NE(manifest.find("\"wall_seconds\""), std::string::npos);
}

TEST(Binary, ValidationExitCodes) {
  const auto dir = scratch("invalid");
  auto cfg = write_config(dir, "potential = quadratic\nn_traj = 0\nn_steps = 10\nx0 = 1\n");
  EXPECT_EQ(run_cli("--out " + dir.string() + " simulate --config " + cfg.string()), 2);
  cfg = write_config(dir, "potential = quadratic\nsurprise = 1\n");
  EXPECT_EQ(run_cli("--out " + dir.string() + " morse --config " + cfg.string()), 2);
  EXPECT_EQ(run_cli("--out " + dir.string() + " morse --config " + (dir / "missing.cfg").string()), 2);
  EXPECT_EQ(run_cli("--out " + dir.string() + " reproduce nonsense"), 2);
}

TEST(Binary, NumericalErrorExitCode) {
  const auto dir = scratch("numerical");
  const auto cfg = write_config(dir, "potential = quadratic\n");
  EXPECT_EQ(run_cli("--out " + dir.string() + " rates --config " + cfg.string()), 3);
}

TEST(Binary, IdenticalRunsAreByteIdentical) {
  const auto a = scratch("same_a"), b = scratch("same_b");
  const std::string text =
      "potential = tilted_double_well\ns = 0.05\nalpha = 0.9\nscheme = sgdm\nn_traj = 64\nn_steps = 400\nx0 = 0.9\nseed = 4\n";
  const auto ca = write_config(a, text), cb = write_config(b, text);
  ASSERT_EQ(run_cli("--quiet --threads 2 --out " + a.string() + " simulate --config " + ca.string()), 0);
  ASSERT_EQ(run_cli("--quiet --threads 1 --out " + b.string() + " simulate --config " + cb.string()), 0);
  EXPECT_EQ(slurp(a / "simulate_stats.csv"), slurp(b / "simulate_stats.csv"));
  EXPECT_EQ(slurp(a / "simulate_fit.csv"), slurp(b / "simulate_fit.csv"));
  ASSERT_EQ(run_cli("--quiet --seed 5 --out " + b.string() + " simulate --config " + cb.string()), 0);
  EXPECT_NE(slurp(a / "simulate_stats.csv"), slurp(b / "simulate_stats.csv"));
}

TEST(Binary, EveryRowCarriesTheHash) {
  const auto dir = scratch("hash");
  auto cfg = write_config(dir, "potential = tilted_double_well\n");
  ASSERT_EQ(run_cli("--out " + dir.string() + " morse --config " + cfg.string()), 0);
  const auto first = csv(dir / "morse.csv");
  const std::string h = first[1][0];
  for (std::size_t r = 1; r < first.size(); ++r) EXPECT_EQ(first[r][0], h);
  cfg = write_config(dir, "potential = tilted_double_well\npotential.tau = 0.12\n");
  ASSERT_EQ(run_cli("--out " + dir.string() + " morse --config " + cfg.string()), 0);
  EXPECT_NE(csv(dir / "morse.csv")[1][0], h);
}

TEST(Binary, SpectralQuadratic) {
  const auto dir = scratch("spectral");
  const auto cfg = write_config(dir, "potential = quadratic\npotential.theta = 0.5\ns = 0.04\nalpha = 0.6666666666666666\nnx = 100\nnv = 100\nk = 3\n");
  ASSERT_EQ(run_cli("--out " + dir.string() + " spectral --config " + cfg.string()), 0);
  const auto rows = csv(dir / "spectral.csv");
  const auto n = column(rows[0], "n"), re = column(rows[0], "re");
  for (std::size_t r = 1; r < rows.size(); ++r)
    if (rows[r][n] == "1") EXPECT_NEAR(parse_real(rows[r][re]), 1.0 - std::sqrt(0.5), 0.03 * 0.2929);
}

TEST(Binary, ReproduceTables) {
  const auto dir = scratch("reproduce");
  ASSERT_EQ(run_cli("--out " + dir.string() + " reproduce figure3"), 0);
  auto rows = csv(dir / "figure3.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NEAR(parse_real(rows[3][2]), 99.5, 1e-12);
  ASSERT_EQ(run_cli("--out " + dir.string() + " reproduce section32"), 0);
  rows = csv(dir / "section32.csv");
  const auto ok = column(rows[0], "within_factor_3");
  std::size_t checked = 0;
  for (std::size_t r = 1; r < rows.size(); ++r)
    if (rows[r][column(rows[0], "scheme")] == "sgdm") {
      EXPECT_EQ(rows[r][ok], "1");
      ++checked;
    }
  EXPECT_EQ(checked, 2u);
  const auto cfg = write_config(dir, "s = 0.01, 0.04\nalpha = 0.3333333333333333\n");
  ASSERT_EQ(run_cli("--out " + dir.string() + " reproduce ratio_demo --config " + cfg.string()), 0);
  rows = csv(dir / "ratio_demo.csv");
  const auto s = column(rows[0], "s"), ratio = column(rows[0], "sgdm_over_sgd");
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t r = 1; r < rows.size(); ++r)
    EXPECT_NEAR(parse_real(rows[r][ratio]), 4.0 * std::sqrt(parse_real(rows[r][s])), 1e-9);
}
