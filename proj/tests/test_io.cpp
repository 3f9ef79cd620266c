#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <random>

#include "sppsbl/errors.hpp"
#include "sppsbl/experiment.hpp"
#include "sppsbl/instance_io.hpp"

using namespace sppsbl;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path d = SPPSBL_TEST_TMP;
  fs::create_directories(d);
  return d;
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("format_double round-trips") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lu(-300, 300);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::pow(10.0, lu(rng)) * (i % 2 ? -1 : 1);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("instances round-trip bit for bit") {
  for (Family fam : {Family::kHeteroscedastic, Family::kMultiPattern, Family::kChain}) {
    GeneratorSpec spec;
    spec.family = fam;
    spec.seed = 31;
    const auto inst = generate(spec);
    const auto path = (tmp_dir() / ("inst_" + to_string(fam) + ".json")).string();
    save_instance(path, inst.problem, inst.spec);
    const auto back = load_instance(path);
    CHECK(back.problem.phi == inst.problem.phi);
    CHECK(back.problem.y == inst.problem.y);
    CHECK(*back.problem.x_true == *inst.problem.x_true);
    CHECK(*back.problem.true_support == *inst.problem.true_support);
    REQUIRE(back.spec);
    CHECK(back.spec->family == fam);
    CHECK(back.spec->seed == 31);
    CHECK(generator_spec_to_json(*back.spec) == generator_spec_to_json(spec));
  }

  // Without truth or spec.
  const auto p = SensingProblem::make(Matrix::Identity(2, 3), Vector::Ones(2));
  const auto back = instance_from_json(instance_to_json(p));
  CHECK_FALSE(back.problem.x_true);
  CHECK_FALSE(back.spec);
  CHECK(back.problem.phi == p.phi);
}

TEST_CASE("supports are written 0-based") {
  Vector x = Vector::Zero(4);
  x[0] = 1.0;
  x[3] = 2.0;
  const auto p = SensingProblem::make(Matrix::Identity(4, 4), x, x);
  const auto text = instance_to_json(p);
  CHECK(contains(text, "[0,3]"));
}

TEST_CASE("generator specs") {
  GeneratorSpec spec;
  spec.snr_db = kNoiselessSnr;
  spec.seed = 0xffffffffffffffffULL;
  const auto back = generator_spec_from_json(generator_spec_to_json(spec));
  CHECK(back.snr_db == kNoiselessSnr);
  CHECK(back.seed == spec.seed);

  const auto r = generator_spec_from_json(R"({"family": "chain", "n": 512, "measurement_ratio": 0.254})");
  CHECK(r.family == Family::kChain);
  CHECK(r.m == 130);

  CHECK(contains(error_of([] { generator_spec_from_json(R"({"famly": "chain"})"); }), "famly"));
  CHECK(contains(error_of([] { generator_spec_from_json(R"({"n": "many"})"); }), "field 'n'"));
  CHECK(contains(error_of([] { generator_spec_from_json(R"({"family": "blob"})"); }), "family"));
}

TEST_CASE("malformed instance files") {
  CHECK_THROWS_AS(load_instance((tmp_dir() / "missing.json").string()), IoError);
  const auto bad = (tmp_dir() / "bad.json").string();
  write_text_file(bad, R"({"m": 2, "n": 2, "phi": [1, 0, 0], "y": [1, 1]})");
  CHECK_THROWS_AS(load_instance(bad), ConfigError);
  write_text_file(bad, R"({"m": 1, "n": 2, "phi": [1, 0], "y": [1], "x_true": [1, 0], "support": [1]})");
  const auto msg = error_of([&] { load_instance(bad); });
  CHECK(contains(msg, "support"));
  CHECK(contains(msg, bad));
}

TEST_CASE("presets parse") {
  for (const char* name : {"table1", "table2", "table3", "successrate", "phase"}) {
    const auto cfg = load_experiment_config(std::string(SPPSBL_CONFIG_DIR) + "/" + name + ".cfg");
    CHECK(cfg.name == name);
    CHECK_FALSE(cfg.algorithms.empty());
    // The canonical form is a fixed point.
    const auto canon = experiment_config_to_json(cfg);
    CHECK(experiment_config_to_json(parse_experiment_config(canon)) == canon);
  }
  const auto t1 = load_experiment_config(std::string(SPPSBL_CONFIG_DIR) + "/table1.cfg");
  CHECK(t1.generator.n == 162);
  CHECK(t1.generator.m == 81);
  CHECK(t1.algorithms.size() == 3);
  CHECK(t1.algorithms[1].solver.scheme.kind == CouplingScheme::Kind::kPcFixed);
  CHECK(t1.algorithms[1].solver.scheme.fixed_beta == 1.0);
  CHECK(t1.n_trials == 50);
}

TEST_CASE("config diagnostics") {
  const std::string head = R"({"name": "x", "generator": {"family": "heteroscedastic"}, )";
  CHECK(contains(error_of([&] { parse_experiment_config(head + R"("algorithms": [{"scheme": "spp"}], "n_trials": "ten"})"); }),
                 "field 'n_trials'"));
  CHECK(contains(error_of([&] { parse_experiment_config(head + R"("algorithms": [{"label": "a"}]})"); }),
                 "algorithms[0].scheme"));
  CHECK(contains(error_of([&] { parse_experiment_config(head + R"("algorithms": [{"scheme": "spp", "root_method": "x"}]})"); }),
                 "root_method"));
  CHECK(contains(error_of([&] {
                   parse_experiment_config(head + R"("algorithms": [{"scheme": "spp"}, {"scheme": "spp"}]})");
                 }),
                 "duplicate label"));
  CHECK(contains(error_of([&] { parse_experiment_config(head + R"("algorithms": [{"scheme": "spp"}], "colour": 1})"); }),
                 "field 'colour': unknown field"));
  CHECK(contains(error_of([&] {
                   parse_experiment_config(head + R"("algorithms": [{"scheme": "spp", "hyperpriors": {"c": 0.5}}]})");
                 }),
                 "algorithms[0]"));
  CHECK(contains(error_of([&] { parse_experiment_config(head + R"("algorithms": [{"scheme": "none", "beta": 1}]})"); }),
                 "beta"));

  // Syntax errors point at line and column.
  const auto msg = error_of([] { parse_experiment_config("{\n  \"name\": \"x\",\n  oops\n}", "my.cfg"); });
  CHECK(msg.rfind("my.cfg:3:", 0) == 0);

  // Comments are accepted.
  CHECK_NOTHROW(parse_experiment_config("// hi\n" + head + R"("algorithms": [{"scheme": "spp"}]})"));
}
