#pragma once

// Seeded synthetic block-sparse instances. Every draw derives from the
// 64-bit spec seed through derive_seed(), so instances are reproducible and
// independent of the order in which trials run.

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>

#include "sppsbl/core.hpp"

namespace sppsbl {

using Rng = std::mt19937_64;

/// splitmix64 finalizer over (a, b, c); the substream seed for trial `c` of
/// grid cell `b` under master seed `a` is derive_seed(a, b, c).
std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

enum class Family { kHeteroscedastic, kMultiPattern, kChain };

Family parse_family(const std::string& text);
std::string to_string(Family family);

struct HeteroscedasticParams {
  Index k = 40;
  Index n_blocks = 4;
  double sigma_min = 0.5;
  double sigma_max = 2.0;
};

struct MultiPatternParams {
  Index k_clustered = 25;
  Index n_clusters = 3;
  Index k_isolated = 5;
};

struct ChainParams {
  double p = 0.8;    // Pr(s_i = 0)
  double p10 = 0.01; // Pr(s_{i+1} = 1 | s_i = 0)

  double p01() const { return p * p10 / (1.0 - p); }
};

/// Requested SNR of +inf means noiseless.
inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

struct GeneratorSpec {
  Family family = Family::kHeteroscedastic;
  Index n = 162;
  Index m = 81;
  double snr_db = 15.0;
  std::uint64_t seed = 0;
  bool normalize_columns = true;
  HeteroscedasticParams hetero;
  MultiPatternParams multi;
  ChainParams chain;

  void validate() const;
};

struct GeneratedInstance {
  SensingProblem problem;
  GeneratorSpec spec;
};

/// i.i.d. N(0,1) entries, columns rescaled to unit norm when `normalize`.
Matrix gen_sensing_matrix(Index m, Index n, std::uint64_t seed, bool normalize = true);

GeneratedInstance gen_heteroscedastic(const GeneratorSpec& spec);
GeneratedInstance gen_multi_pattern(const GeneratorSpec& spec);
GeneratedInstance gen_chain(const GeneratorSpec& spec);

/// Dispatches on spec.family.
GeneratedInstance generate(const GeneratorSpec& spec);

/// clean + n with ||n|| = ||clean|| 10^(-snr_db/20) exactly; snr_db = +inf
/// returns `clean`. Throws DomainError for a zero clean vector.
Vector add_noise_at_snr(const Vector& clean, double snr_db, std::uint64_t seed);

/// 20 log10(||clean|| / ||noise||).
double realized_snr_db(const Vector& clean, const Vector& noisy);

/// Two-state Markov support of length n. The first state is drawn from the
/// stationary law unless `initial_state` forces it.
std::vector<bool> chain_support(Index n, const ChainParams& params, Rng& rng,
                                std::optional<bool> initial_state = std::nullopt);

/// Chain support with regeneration of all-zero draws on fresh substreams of
/// `seed`; throws GenerationError after `max_attempts` all-zero draws.
std::vector<bool> nonempty_chain_support(Index n, const ChainParams& params, std::uint64_t seed,
                                         std::optional<bool> initial_state = std::nullopt,
                                         int max_attempts = 64);

/// Lengths of maximal runs of nonzeros, left to right.
std::vector<Index> run_lengths(const Vector& x);

}  // namespace sppsbl
