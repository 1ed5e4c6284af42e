#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "zapsa/cli.hpp"
#include "zapsa/mdp.hpp"

using namespace zapsa;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Rows of a csv file, comment and header stripped, split on commas.
std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "zapsa_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config: defaults, overrides, unknown keys, hashing") {
  config::RunConfig cfg;
  CHECK(cfg.init_low_or_default() == -1e3);
  cfg.beta = 0.99;
  CHECK(cfg.init_high_or_default() == 1e4);

  config::apply_override(cfg, "steps", "123");
  CHECK(cfg.steps == 123);
  config::apply_override(cfg, "algorithm", "watkins");
  CHECK(cfg.algorithm == "watkins");
  config::apply_override(cfg, "snapshots", "[10, 20]");
  CHECK(cfg.snapshots == std::vector<long>{10, 20});
  CHECK_THROWS_AS(config::apply_override(cfg, "nonsense", "1"), ConfigError);
  CHECK_THROWS_AS(config::from_json_text("{\"nonsense\": 1}"), ConfigError);
  CHECK_THROWS_AS(config::from_json_text("{\"beta\": 1.5}"), ConfigError);

  const config::RunConfig a;
  config::RunConfig b;
  CHECK(a.hash() == b.hash());
  b.seed = 2;
  CHECK(a.hash() != b.hash());

  // The matrix-gain stopping algorithm carries its own standard gain.
  config::RunConfig gq;
  gq.algorithm = "gq0";
  CHECK(gq.gain_or_default() == 100.0);
  CHECK(a.gain_or_default() == 1.0);
  config::apply_override(gq, "g", "7");
  CHECK(gq.gain_or_default() == 7.0);
}

TEST_CASE("cli solve: row counts, beta=0 cost table, byte-identical reruns") {
  const fs::path dir = fresh_dir("solve");
  const int code = cli::main_entry(
      {"solve", "--beta=0.8", "--out", dir.string(), "--seed=3"});
  CHECK(code == cli::kExitOk);
  const auto q_rows = read_csv(dir / "q_star.csv");
  CHECK(q_rows.size() == 18);
  CHECK(slurp(dir / "q_star.csv").rfind("# config_hash=", 0) == 0);

  // beta = 0: the optimal Q-table coincides with the reward table.
  const fs::path dir0 = fresh_dir("solve0");
  CHECK(cli::main_entry({"solve", "--beta=0", "--out", dir0.string()}) == cli::kExitOk);
  const mdp::FiniteMDP six = mdp::build_six_state({.beta = 0.0});
  for (const auto& row : read_csv(dir0 / "q_star.csv")) {
    const Index k = std::stol(row[0]);
    CHECK(std::stod(row[3]) == doctest::Approx(-six.cost[k]).epsilon(1e-12));
  }

  const std::string first = slurp(dir / "q_star.csv") + slurp(dir / "policy.csv");
  const fs::path dir2 = fresh_dir("solve_again");
  CHECK(cli::main_entry({"solve", "--beta=0.8", "--out", dir2.string(), "--seed=3"}) == 0);
  // Output directory is not part of the provenance hash.
  const std::string second = slurp(dir2 / "q_star.csv") + slurp(dir2 / "policy.csv");
  CHECK(first == second);
}

TEST_CASE("cli cov: scalar demo curve and tagged non-finite rows") {
  const fs::path dir = fresh_dir("cov_scalar");
  CHECK(cli::main_entry({"cov", "--env=scalar", "--out", dir.string(),
                         "--gains=[0.25,0.5,1,2,10]"}) == cli::kExitOk);
  const auto rows = read_csv(dir / "sweep.csv");
  REQUIRE(rows.size() == 5);
  for (const auto& row : rows) {
    const double g = std::stod(row[0]);
    if (g <= 0.5) {
      CHECK(row[1].empty());
      CHECK(row[2] == "infinite");
    } else {
      CHECK(row[2] == "finite");
      CHECK(std::stod(row[1]) == doctest::Approx(g * g / (2 * g - 1)).epsilon(1e-9));
    }
  }
}

TEST_CASE("cli cov: preset report carries the threshold band") {
  const fs::path dir = fresh_dir("cov_six");
  CHECK(cli::main_entry({"cov", "--beta=0.8", "--out", dir.string()}) == cli::kExitOk);
  const std::string report = slurp(dir / "report.json");
  CHECK(report.find("\"g_star\"") != std::string::npos);
  const auto pos = report.find("\"g_star\": ");
  const double g_star = std::stod(report.substr(pos + 10));
  CHECK(g_star > 40.0);
  CHECK(g_star < 50.0);
}

TEST_CASE("cli run: bellman column matches recomputation from the theta dump") {
  const fs::path dir = fresh_dir("run_zap");
  CHECK(cli::main_entry({"run", "--algo=zap", "--beta=0.8", "--steps=2000", "--seed=5",
                         "--snapshots=[500,1000,2000]", "--out", dir.string()}) ==
        cli::kExitOk);
  const mdp::FiniteMDP six = mdp::build_six_state({.beta = 0.8});
  const auto traj = read_csv(dir / "trajectory.csv");
  const auto thetas = read_csv(dir / "theta.csv");
  REQUIRE(traj.size() == thetas.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    Vector theta(six.d());
    for (Index k = 0; k < six.d(); ++k)
      theta[k] = -std::stod(thetas[i][static_cast<std::size_t>(k) + 1]);  // reward -> cost
    CHECK(std::stod(traj[i][1]) ==
          doctest::Approx(mdp::bellman_error(six, theta).max_abs).epsilon(1e-9));
  }

  const std::string bytes = slurp(dir / "trajectory.csv");
  const fs::path dir2 = fresh_dir("run_zap2");
  CHECK(cli::main_entry({"run", "--algo=zap", "--beta=0.8", "--steps=2000", "--seed=5",
                         "--snapshots=[500,1000,2000]", "--out", dir2.string()}) ==
        cli::kExitOk);
  CHECK(slurp(dir2 / "trajectory.csv") == bytes);
}

TEST_CASE("cli bench: smoke run emits the full output set") {
  const fs::path dir = fresh_dir("bench_smoke");
  CHECK(cli::main_entry({"bench", "--algo=zap", "--beta=0.8", "--steps=300", "--trials=2",
                         "--seed=9", "--snapshots=[100,300]", "--out", dir.string()}) ==
        cli::kExitOk);
  for (const char* name : {"bellman_bands.csv", "w_samples.csv", "w_cov.csv", "w_hist.csv",
                           "theory.csv", "manifest.json"})
    CHECK(fs::exists(dir / name));
  const std::string manifest = slurp(dir / "manifest.json");
  CHECK(manifest.find("\"seed\": 9") != std::string::npos);
  CHECK(manifest.find("config_hash") != std::string::npos);
  const auto theory = read_csv(dir / "theory.csv");
  REQUIRE(theory.size() == 1);
  CHECK(!theory[0][2].empty());  // zap has a finite optimal-covariance prediction
  CHECK(theory[0][3] == "finite");
}

TEST_CASE("cli bench: stopping environment emits ensemble and outlier tables") {
  const fs::path dir = fresh_dir("bench_stop");
  CHECK(cli::main_entry({"bench", "--env=stopping", "--algo=zap_stopping", "--steps=500",
                         "--trials=3", "--n_paths=50", "--horizon=100", "--window=30",
                         "--beta=0.97", "--out", dir.string()}) == cli::kExitOk);
  const auto outliers = read_csv(dir / "outliers.csv");
  REQUIRE(outliers.size() == 4);
  CHECK(std::stod(outliers[0][0]) == 1.0);
  CHECK(fs::exists(dir / "reward_hist.csv"));
  CHECK(fs::exists(dir / "value.json"));
  CHECK(read_csv(dir / "w_samples.csv").size() == 3);
  const auto theory = read_csv(dir / "theory.csv");
  REQUIRE(theory.size() == 1);
  CHECK(!theory[0][1].empty());  // empirical trace always present
  CHECK((theory[0][3] == "finite" || theory[0][3] == "infinite" ||
         theory[0][3] == "undetermined"));
}

TEST_CASE("cli bench: re-running a manifest reproduces byte-identical outputs") {
  const fs::path dir_a = fresh_dir("manifest_a");
  CHECK(cli::main_entry({"bench", "--algo=zap", "--beta=0.8", "--steps=150", "--trials=2",
                         "--seed=31", "--snapshots=[50,150]", "--out", dir_a.string()}) ==
        cli::kExitOk);
  const fs::path dir_b = fresh_dir("manifest_b");
  CHECK(cli::main_entry({"bench", "--config", (dir_a / "manifest.json").string(), "--out",
                         dir_b.string()}) == cli::kExitOk);
  for (const char* name :
       {"bellman_bands.csv", "w_samples.csv", "w_cov.csv", "w_hist.csv", "theory.csv"})
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
}

TEST_CASE("cli exit codes: config errors and numerical failures") {
  CHECK(cli::main_entry({"run", "--algo=not_an_algorithm",
                         "--out=/tmp/zapsa_cli_tests/bad"}) == cli::kExitConfig);
  CHECK(cli::main_entry({"what"}) == cli::kExitConfig);
  CHECK(cli::main_entry({"run", "--beta=2.0"}) == cli::kExitConfig);
  CHECK(cli::main_entry({"run", "--bogus_key=1"}) == cli::kExitConfig);

  // A tied optimum is a numerical failure, not a config problem.
  const fs::path dir = fresh_dir("tied");
  const fs::path mdp_path = dir / "tied.json";
  mdp::FiniteMDP tied;
  tied.n_states = 1;
  tied.beta = 0.5;
  tied.feasible_actions = {{0, 1}};
  mdp::index_pairs(tied);
  tied.kernel = Matrix::Ones(2, 1);
  tied.cost = Vector::Constant(2, 0.3);
  tied.validate();
  mdp::save_file(tied, mdp_path.string());
  CHECK(cli::main_entry({"cov", "--env=" + mdp_path.string(), "--out",
                         (dir / "out").string()}) == cli::kExitNumerical);
}

TEST_CASE("cli run: td, lstd, and stopping algorithms emit parameter dumps") {
  for (const std::string algo : {"td", "lstd"}) {
    const fs::path dir = fresh_dir("run_" + algo);
    CHECK(cli::main_entry({"run", "--algo=" + algo, "--beta=0.8", "--steps=500",
                           "--snapshots=[100,500]", "--out", dir.string()}) == cli::kExitOk);
    const auto rows = read_csv(dir / "theta.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].size() == 7);  // step + one value per state
    for (const auto& cell : rows[1]) CHECK(std::isfinite(std::stod(cell)));
  }

  const fs::path dir = fresh_dir("run_q0");
  CHECK(cli::main_entry({"run", "--algo=q0", "--steps=400", "--window=20", "--basis_dim=4",
                         "--beta=0.95", "--snapshots=[200,400]", "--out", dir.string()}) ==
        cli::kExitOk);
  const auto rows = read_csv(dir / "theta.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].size() == 5);  // step + basis_dim coefficients
}
