#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = SPPSBL_TEST_TMP;

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Run cli(const std::string& args, const std::string& env = "") {
  fs::create_directories(kTmp);
  const auto out = kTmp / "stdout.txt";
  const auto err = kTmp / "stderr.txt";
  const std::string cmd = env + " '" + std::string(SPPSBL_CLI_PATH) + "' " + args + " > '" + out.string() +
                          "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

const char* kSmallConfig = R"(// small benchmark
{
  "name": "cli_small",
  "generator": {"family": "multi_pattern", "n": 40, "m": 24, "snr_db": 25,
                "params": {"k_clustered": 8, "n_clusters": 2, "k_isolated": 2}},
  "algorithms": [{"label": "SPP", "scheme": "spp"}, {"label": "SBL", "scheme": "none"}],
  "n_trials": 4,
  "master_seed": 8
})";

}  // namespace

TEST_CASE("usage errors exit with 1") {
  auto r = cli("");
  CHECK(r.code == 1);
  r = cli("bench --bogus");
  CHECK(r.code == 1);
  CHECK(r.err.find("error") != std::string::npos);
  r = cli("bench");
  CHECK(r.code == 1);
  CHECK(r.err.find("--config") != std::string::npos);
  r = cli("--help");
  CHECK(r.code == 0);
  CHECK(r.out.find("generate") != std::string::npos);
}

TEST_CASE("generate honours seed precedence") {
  const auto base = kTmp / "gen";
  fs::remove_all(base);
  const std::string args = "generate --n 20 --m 10 --k 6 --blocks 2 --count 2 ";
  REQUIRE(cli(args + "--seed 3 --out '" + (base / "a").string() + "'").code == 0);
  REQUIRE(cli(args + "--out '" + (base / "b").string() + "'", "SPPSBL_SEED=3").code == 0);
  REQUIRE(cli(args + "--seed 3 --out '" + (base / "c").string() + "'", "SPPSBL_SEED=4").code == 0);
  REQUIRE(cli(args + "--out '" + (base / "d").string() + "'", "SPPSBL_SEED=4").code == 0);
  for (const char* f : {"instance_0.json", "instance_1.json"}) {
    const auto a = slurp(base / "a" / f);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(base / "b" / f));
    CHECK(a == slurp(base / "c" / f));
    CHECK(a != slurp(base / "d" / f));
  }
  CHECK(slurp(base / "a" / "instance_0.json") != slurp(base / "a" / "instance_1.json"));

  CHECK(cli("generate --seed banana --out '" + (base / "e").string() + "'").code == 1);
  CHECK(cli("generate --n 20 --out '" + (base / "e").string() + "'").code == 1);  // k > n
}

TEST_CASE("solve prints metrics and writes a result") {
  const auto base = kTmp / "solve";
  fs::remove_all(base);
  REQUIRE(cli("generate --family chain --n 64 --ratio 0.5 --snr 30 --seed 1 --out '" + base.string() + "'").code == 0);
  const auto inst = (base / "instance_0.json").string();
  const auto res = (base / "result.json").string();
  auto r = cli("solve '" + inst + "' --out '" + res + "'");
  CHECK(r.code == 0);
  for (const char* key : {"iterations ", "converged ", "nmse ", "corr ", "srr ", "success "}) {
    CHECK(r.out.find(key) != std::string::npos);
  }
  CHECK(slurp(res).find("\"x_hat\"") != std::string::npos);

  r = cli("solve '" + inst + "' --scheme pc_fixed --beta 1 --root-method cardano --max-iter 5");
  CHECK(r.code == 0);
  CHECK(r.out.find("iterations 5") != std::string::npos);
  CHECK(cli("solve '" + inst + "' --scheme t2").code == 1);
  CHECK(cli("solve '" + (base / "missing.json").string() + "'").code == 2);
}

TEST_CASE("bench output is byte-identical across thread counts") {
  const auto base = kTmp / "bench";
  fs::remove_all(base);
  const auto cfg = base / "small.cfg";
  write(cfg, kSmallConfig);
  const std::string common = "bench --config '" + cfg.string() + "' --no-timing ";
  REQUIRE(cli(common + "--threads 1 --out '" + (base / "t1").string() + "'").code == 0);
  REQUIRE(cli(common + "--threads 3 --out '" + (base / "t3").string() + "'").code == 0);
  const auto a = slurp(base / "t1" / "trials.csv");
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(base / "t3" / "trials.csv"));
  CHECK(slurp(base / "t1" / "summary.json") == slurp(base / "t3" / "summary.json"));
  CHECK(fs::exists(base / "t1" / "config_echo.json"));
  CHECK(a.find("# // small benchmark") != std::string::npos);

  // --seed and --trials override the config.
  REQUIRE(cli(common + "--trials 2 --seed 99 --out '" + (base / "o").string() + "'").code == 0);
  const auto o = slurp(base / "o" / "trials.csv");
  CHECK(o.find("\"master_seed\":99") != std::string::npos);
  CHECK(o.find("\"n_trials\":2") != std::string::npos);

  write(base / "broken.cfg", "{\n \"name\": \"x\",\n ]\n}");
  const auto r = cli("bench --config '" + (base / "broken.cfg").string() + "'");
  CHECK(r.code == 1);
  CHECK(r.err.find("broken.cfg:3:") != std::string::npos);
  CHECK(cli("bench --config '" + (base / "absent.cfg").string() + "'").code == 2);
}

TEST_CASE("phase writes grid files") {
  const auto base = kTmp / "phase";
  fs::remove_all(base);
  const auto cfg = base / "grid.cfg";
  write(cfg, R"({
    "name": "cli_grid",
    "generator": {"family": "heteroscedastic", "n": 32, "params": {"k": 6, "n_blocks": 2}},
    "algorithms": [{"label": "SPP", "scheme": "spp"}],
    "n_trials": 2,
    "sweep": {"snr_db": [20, 40], "measurement_ratio": [0.5, 0.75]}
  })");
  REQUIRE(cli("phase --config '" + cfg.string() + "' --out '" + (base / "o").string() + "'").code == 0);
  const auto grid = slurp(base / "o" / "grid.csv");
  CHECK(grid.find("snr_db,ratio,mean_rnmse,n_trials") != std::string::npos);
  CHECK(std::count(grid.begin(), grid.end(), '\n') >= 5);
  CHECK(cli("phase --config '" + std::string(SPPSBL_CONFIG_DIR) + "/table1.cfg' --trials 1 --out '" +
            (base / "no").string() + "'")
            .code == 1);  // no sweep
}
