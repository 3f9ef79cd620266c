#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>
#include <set>

#include "sppsbl/datagen.hpp"
#include "sppsbl/errors.hpp"

using namespace sppsbl;

TEST_CASE("derive_seed is a fixed, collision-free mixing") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(0, 0, 0) != 0);
  std::set<std::uint64_t> seen;
  for (std::uint64_t cell = 0; cell < 100; ++cell)
    for (std::uint64_t trial = 0; trial < 100; ++trial) seen.insert(derive_seed(42, cell, trial));
  CHECK(seen.size() == 10000);
}

TEST_CASE("sensing matrix") {
  const Matrix a = gen_sensing_matrix(81, 162, 7);
  for (Index j = 0; j < a.cols(); ++j) CHECK(std::abs(a.col(j).norm() - 1.0) < 1e-12);
  CHECK(a == gen_sensing_matrix(81, 162, 7));
  CHECK(a != gen_sensing_matrix(81, 162, 8));

  const Matrix gram = a.transpose() * a;
  double coherence = 0.0;
  for (Index i = 0; i < gram.rows(); ++i)
    for (Index j = i + 1; j < gram.cols(); ++j) coherence = std::max(coherence, std::abs(gram(i, j)));
  CHECK(coherence < 0.7);

  // Raw entries look standard normal.
  const Matrix raw = gen_sensing_matrix(200, 500, 9, false);
  const double mean = raw.mean();
  const double var = (raw.array() - mean).square().sum() / (raw.size() - 1);
  CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(raw.size())));
  CHECK(std::abs(var - 1.0) < 0.02);
  CHECK_THROWS_AS(gen_sensing_matrix(0, 5, 1), DimensionError);
}

TEST_CASE("heteroscedastic structure over 1000 seeds") {
  GeneratorSpec spec;
  spec.family = Family::kHeteroscedastic;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    spec.seed = s;
    const auto inst = gen_heteroscedastic(spec);
    const Vector& x = *inst.problem.x_true;
    const auto runs = run_lengths(x);
    CHECK(runs.size() == 4);
    CHECK(std::accumulate(runs.begin(), runs.end(), Index{0}) == 40);
    for (Index r : runs) CHECK(r >= 2);
    CHECK(inst.problem.true_support->size() == 40);
  }
}

TEST_CASE("multi-pattern structure over 1000 seeds") {
  GeneratorSpec spec;
  spec.family = Family::kMultiPattern;
  spec.m = 80;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    spec.seed = s;
    const auto inst = gen_multi_pattern(spec);
    auto runs = run_lengths(*inst.problem.x_true);
    std::sort(runs.begin(), runs.end());
    REQUIRE(runs.size() == 8);
    for (int i = 0; i < 5; ++i) CHECK(runs[i] == 1);
    Index clustered = 0;
    for (int i = 5; i < 8; ++i) {
      CHECK(runs[i] >= 2);
      clustered += runs[i];
    }
    CHECK(clustered == 25);
  }
}

TEST_CASE("chain supports follow the Markov law") {
  ChainParams cp;  // p = 0.8, p10 = 0.01, p01 = 0.04
  CHECK(cp.p01() == doctest::Approx(0.04));
  const int draws = 2000;
  const Index n = 512;
  double ones = 0.0;
  double stays = 0.0;
  double exits = 0.0;
  for (int s = 0; s < draws; ++s) {
    Rng rng(derive_seed(99, 0, s));
    const auto supp = chain_support(n, cp, rng);
    for (Index i = 0; i < n; ++i) {
      if (!supp[static_cast<std::size_t>(i)]) continue;
      ones += 1.0;
      if (i + 1 < n) (supp[static_cast<std::size_t>(i + 1)] ? stays : exits) += 1.0;
    }
  }
  const double occupancy = ones / (draws * static_cast<double>(n));
  // Positive autocorrelation inflates the variance; allow a generous band.
  CHECK(std::abs(occupancy - 0.2) < 0.01);
  // Run lengths are geometric with mean 1/p01; estimate p01 from transitions.
  const double mean_run = (stays + exits) / exits;
  CHECK(std::abs(mean_run - 25.0) < 1.0);

  Rng rng(1);
  const auto forced = chain_support(10, cp, rng, true);
  CHECK(forced[0]);
}

TEST_CASE("chain regeneration") {
  ChainParams sparse;
  sparse.p = 0.9;
  sparse.p10 = 0.02;
  int regenerated = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto a = nonempty_chain_support(20, sparse, s, false);
    CHECK(std::find(a.begin(), a.end(), true) != a.end());
    CHECK(a == nonempty_chain_support(20, sparse, s, false));
    Rng first(derive_seed(s, 2, 0));
    const auto raw = chain_support(20, sparse, first, false);
    if (std::find(raw.begin(), raw.end(), true) == raw.end()) ++regenerated;
  }
  CHECK(regenerated > 0);

  ChainParams hopeless;
  hopeless.p = 1.0 - 1e-9;
  hopeless.p10 = 1e-12;
  CHECK_THROWS_AS(nonempty_chain_support(8, hopeless, 3, false), GenerationError);

  GeneratorSpec spec;
  spec.family = Family::kChain;
  spec.n = 8;
  spec.m = 4;
  spec.chain = hopeless;
  CHECK_THROWS_AS(generate(spec), GenerationError);
}

TEST_CASE("noise hits the requested SNR exactly") {
  const auto clean = gen_sensing_matrix(50, 2, 5).col(0) * 3.0;
  for (double snr : {-5.0, 0.0, 15.0, 25.0, 50.0}) {
    const Vector noisy = add_noise_at_snr(clean, snr, 11);
    CHECK(std::abs(realized_snr_db(clean, noisy) - snr) < 1e-9);
  }
  CHECK(add_noise_at_snr(clean, kNoiselessSnr, 1) == clean);
  CHECK_THROWS_AS(add_noise_at_snr(Vector::Zero(4), 10.0, 1), DomainError);

  GeneratorSpec spec;
  spec.snr_db = 20.0;
  spec.seed = 5;
  const auto inst = generate(spec);
  const Vector clean_y = inst.problem.phi * *inst.problem.x_true;
  CHECK(std::abs(realized_snr_db(clean_y, inst.problem.y) - 20.0) < 1e-9);
}

TEST_CASE("instances are reproducible from the spec") {
  for (Family fam : {Family::kHeteroscedastic, Family::kMultiPattern, Family::kChain}) {
    GeneratorSpec spec;
    spec.family = fam;
    spec.n = 162;
    spec.m = 81;
    spec.seed = 1234;
    const auto a = generate(spec);
    const auto b = generate(spec);
    CHECK(a.problem.phi == b.problem.phi);
    CHECK(a.problem.y == b.problem.y);
    CHECK(*a.problem.x_true == *b.problem.x_true);
    spec.seed = 1235;
    const auto c = generate(spec);
    CHECK(*a.problem.x_true != *c.problem.x_true);
    CHECK(a.problem.phi != c.problem.phi);
  }
}

TEST_CASE("generator validation") {
  GeneratorSpec spec;
  spec.n = 20;
  CHECK_THROWS_AS(spec.validate(), ConfigError);  // k = 40 > n
  spec.hetero.k = 8;
  CHECK_NOTHROW(spec.validate());
  spec.hetero.n_blocks = 5;
  CHECK_THROWS_AS(spec.validate(), ConfigError);  // blocks of one
  spec = GeneratorSpec{};
  spec.family = Family::kChain;
  spec.chain.p = 0.9;
  spec.chain.p10 = 0.5;
  CHECK_THROWS_AS(spec.validate(), ConfigError);  // p01 > 1
  spec = GeneratorSpec{};
  spec.snr_db = std::nan("");
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  CHECK(parse_family("Chain") == Family::kChain);
  CHECK(to_string(Family::kMultiPattern) == "multi_pattern");
  CHECK_THROWS_AS(parse_family("blocks"), ConfigError);
}
