#include "sppsbl/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sppsbl/errors.hpp"

namespace sppsbl {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Substream tags under one instance seed.
constexpr std::uint64_t kMatrixStream = 1;
constexpr std::uint64_t kSignalStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

// Uniform weak composition of `total` into `parts` nonnegative integers
// (stars and bars: choose parts-1 bar positions among total+parts-1 slots).
std::vector<Index> weak_composition(Index total, Index parts, Rng& rng) {
  std::vector<Index> out(static_cast<std::size_t>(parts), 0);
  if (parts == 1) {
    out[0] = total;
    return out;
  }
  const Index slots = total + parts - 1;
  std::vector<Index> positions(static_cast<std::size_t>(slots));
  std::iota(positions.begin(), positions.end(), Index{0});
  std::vector<Index> bars;
  bars.reserve(static_cast<std::size_t>(parts - 1));
  std::sample(positions.begin(), positions.end(), std::back_inserter(bars), parts - 1, rng);
  Index prev = -1;
  for (Index j = 0; j < parts - 1; ++j) {
    out[static_cast<std::size_t>(j)] = bars[static_cast<std::size_t>(j)] - prev - 1;
    prev = bars[static_cast<std::size_t>(j)];
  }
  out.back() = slots - prev - 1;
  return out;
}

// Composition of `total` into `parts` blocks, each at least `min_size`.
std::vector<Index> block_sizes(Index total, Index parts, Index min_size, Rng& rng) {
  auto sizes = weak_composition(total - min_size * parts, parts, rng);
  for (auto& s : sizes) s += min_size;
  return sizes;
}

// Places runs of the given lengths in random order on [0, n) with at least
// one zero between consecutive runs; returns the start of each run in the
// order of `lengths`.
std::vector<Index> place_runs(const std::vector<Index>& lengths, Index n, Rng& rng) {
  const Index count = static_cast<Index>(lengths.size());
  const Index occupied = std::accumulate(lengths.begin(), lengths.end(), Index{0});
  const Index spare = n - occupied - (count - 1);
  if (spare < 0) {
    std::ostringstream os;
    os << "cannot place " << count << " separated runs covering " << occupied
       << " entries in a signal of length " << n;
    throw GenerationError(os.str());
  }
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto gaps = weak_composition(spare, count + 1, rng);

  std::vector<Index> starts(lengths.size(), 0);
  Index cursor = gaps[0];
  for (Index j = 0; j < count; ++j) {
    const std::size_t item = order[static_cast<std::size_t>(j)];
    starts[item] = cursor;
    cursor += lengths[item] + 1 + gaps[static_cast<std::size_t>(j + 1)];
  }
  return starts;
}

double nonzero_normal(Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  double v = 0.0;
  while (v == 0.0) v = dist(rng);
  return v;
}

GeneratedInstance finish(const GeneratorSpec& spec, Vector x) {
  Matrix phi = gen_sensing_matrix(spec.m, spec.n, derive_seed(spec.seed, kMatrixStream, 0),
                                  spec.normalize_columns);
  const Vector clean = phi * x;
  Vector y = add_noise_at_snr(clean, spec.snr_db, derive_seed(spec.seed, kNoiseStream, 0));
  GeneratedInstance out{SensingProblem::make(std::move(phi), std::move(y), std::move(x), spec.snr_db),
                        spec};
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

Family parse_family(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (t == "heteroscedastic") return Family::kHeteroscedastic;
  if (t == "multi_pattern") return Family::kMultiPattern;
  if (t == "chain") return Family::kChain;
  throw ConfigError("unknown generator family '" + text +
                    "' (expected heteroscedastic, multi_pattern or chain)");
}

std::string to_string(Family family) {
  switch (family) {
    case Family::kHeteroscedastic:
      return "heteroscedastic";
    case Family::kMultiPattern:
      return "multi_pattern";
    case Family::kChain:
      return "chain";
  }
  return "unknown";
}

void GeneratorSpec::validate() const {
  require(n >= 2, "generator: n must be at least 2");
  require(m >= 1, "generator: m must be at least 1");
  require(!std::isnan(snr_db) && snr_db > -std::numeric_limits<double>::infinity(),
          "generator: snr_db must be a number or +inf");
  switch (family) {
    case Family::kHeteroscedastic:
      require(hetero.n_blocks >= 1, "heteroscedastic: n_blocks must be at least 1");
      require(hetero.k <= n, "heteroscedastic: k must not exceed n");
      require(hetero.k >= 2 * hetero.n_blocks, "heteroscedastic: every block needs at least 2 entries (k >= 2 n_blocks)");
      require(hetero.k + hetero.n_blocks - 1 <= n, "heteroscedastic: blocks plus separating gaps do not fit in n");
      require(hetero.sigma_min > 0.0 && hetero.sigma_max >= hetero.sigma_min,
              "heteroscedastic: need 0 < sigma_min <= sigma_max");
      break;
    case Family::kMultiPattern: {
      require(multi.n_clusters >= 0 && multi.k_isolated >= 0 && multi.k_clustered >= 0,
              "multi_pattern: counts must be nonnegative");
      require(multi.k_clustered + multi.k_isolated <= n, "multi_pattern: k_clustered + k_isolated must not exceed n");
      require(multi.k_clustered >= 2 * multi.n_clusters, "multi_pattern: every cluster needs at least 2 entries");
      require(multi.n_clusters > 0 || multi.k_clustered == 0, "multi_pattern: clustered entries need at least one cluster");
      require(multi.n_clusters + multi.k_isolated >= 1, "multi_pattern: signal would be empty");
      const Index items = multi.n_clusters + multi.k_isolated;
      require(multi.k_clustered + multi.k_isolated + items - 1 <= n,
              "multi_pattern: clusters, singletons and separating gaps do not fit in n");
      break;
    }
    case Family::kChain:
      require(chain.p > 0.0 && chain.p < 1.0, "chain: p must lie in (0, 1)");
      require(chain.p10 > 0.0 && chain.p10 < 1.0, "chain: p10 must lie in (0, 1)");
      require(chain.p01() > 0.0 && chain.p01() < 1.0, "chain: derived p01 = p p10 / (1 - p) must lie in (0, 1)");
      break;
  }
}

Matrix gen_sensing_matrix(Index m, Index n, std::uint64_t seed, bool normalize) {
  if (m < 1 || n < 2) throw DimensionError("sensing matrix needs m >= 1 and n >= 2");
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix phi(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) phi(i, j) = dist(rng);
  }
  if (normalize) {
    for (Index j = 0; j < n; ++j) {
      const double norm = phi.col(j).norm();
      if (norm > 0.0) phi.col(j) /= norm;
    }
  }
  return phi;
}

GeneratedInstance gen_heteroscedastic(const GeneratorSpec& spec) {
  spec.validate();
  if (spec.family != Family::kHeteroscedastic) throw ConfigError("spec is not heteroscedastic");
  Rng rng(derive_seed(spec.seed, kSignalStream, 0));
  const auto& hp = spec.hetero;
  const auto sizes = block_sizes(hp.k, hp.n_blocks, 2, rng);
  const auto starts = place_runs(sizes, spec.n, rng);
  std::uniform_real_distribution<double> sigma_dist(hp.sigma_min, hp.sigma_max);

  Vector x = Vector::Zero(spec.n);
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    const double sigma = sigma_dist(rng);
    for (Index j = 0; j < sizes[b]; ++j) x[starts[b] + j] = nonzero_normal(rng, sigma);
  }
  return finish(spec, std::move(x));
}

GeneratedInstance gen_multi_pattern(const GeneratorSpec& spec) {
  spec.validate();
  if (spec.family != Family::kMultiPattern) throw ConfigError("spec is not multi_pattern");
  Rng rng(derive_seed(spec.seed, kSignalStream, 0));
  const auto& mp = spec.multi;
  std::vector<Index> lengths;
  if (mp.n_clusters > 0) lengths = block_sizes(mp.k_clustered, mp.n_clusters, 2, rng);
  lengths.insert(lengths.end(), static_cast<std::size_t>(mp.k_isolated), Index{1});
  const auto starts = place_runs(lengths, spec.n, rng);

  Vector x = Vector::Zero(spec.n);
  for (std::size_t r = 0; r < lengths.size(); ++r) {
    for (Index j = 0; j < lengths[r]; ++j) x[starts[r] + j] = nonzero_normal(rng, 1.0);
  }
  return finish(spec, std::move(x));
}

std::vector<bool> chain_support(Index n, const ChainParams& params, Rng& rng,
                                std::optional<bool> initial_state) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double p01 = params.p01();
  std::vector<bool> s(static_cast<std::size_t>(n));
  bool state = initial_state ? *initial_state : (u(rng) < 1.0 - params.p);
  for (Index i = 0; i < n; ++i) {
    if (i > 0) {
      const double draw = u(rng);
      state = state ? !(draw < p01) : (draw < params.p10);
    }
    s[static_cast<std::size_t>(i)] = state;
  }
  return s;
}

std::vector<bool> nonempty_chain_support(Index n, const ChainParams& params, std::uint64_t seed,
                                         std::optional<bool> initial_state, int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Rng rng(derive_seed(seed, kSignalStream, static_cast<std::uint64_t>(attempt)));
    auto s = chain_support(n, params, rng, initial_state);
    if (std::find(s.begin(), s.end(), true) != s.end()) return s;
  }
  std::ostringstream os;
  os << "chain support was all-zero in " << max_attempts << " consecutive draws";
  throw GenerationError(os.str());
}

GeneratedInstance gen_chain(const GeneratorSpec& spec) {
  spec.validate();
  if (spec.family != Family::kChain) throw ConfigError("spec is not chain");
  const auto s = nonempty_chain_support(spec.n, spec.chain, spec.seed);
  // Amplitudes come from their own substream so support regeneration does not
  // shift them.
  Rng rng(derive_seed(spec.seed, kSignalStream, 1000));
  Vector x = Vector::Zero(spec.n);
  for (Index i = 0; i < spec.n; ++i) {
    const double theta = nonzero_normal(rng, 1.0);
    if (s[static_cast<std::size_t>(i)]) x[i] = theta;
  }
  return finish(spec, std::move(x));
}

GeneratedInstance generate(const GeneratorSpec& spec) {
  switch (spec.family) {
    case Family::kHeteroscedastic:
      return gen_heteroscedastic(spec);
    case Family::kMultiPattern:
      return gen_multi_pattern(spec);
    case Family::kChain:
      return gen_chain(spec);
  }
  throw ConfigError("unknown generator family");
}

Vector add_noise_at_snr(const Vector& clean, double snr_db, std::uint64_t seed) {
  const double clean_norm = clean.norm();
  if (!(clean_norm > 0.0)) throw DomainError("add_noise_at_snr: clean measurements are zero");
  if (std::isnan(snr_db)) throw DomainError("add_noise_at_snr: snr_db is NaN");
  if (snr_db == kNoiselessSnr) return clean;
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector noise(clean.size());
  for (Index i = 0; i < noise.size(); ++i) noise[i] = dist(rng);
  const double target = clean_norm * std::pow(10.0, -snr_db / 20.0);
  noise *= target / noise.norm();
  return clean + noise;
}

double realized_snr_db(const Vector& clean, const Vector& noisy) {
  return 20.0 * std::log10(clean.norm() / (noisy - clean).norm());
}

std::vector<Index> run_lengths(const Vector& x) {
  std::vector<Index> runs;
  Index current = 0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) {
      ++current;
    } else if (current > 0) {
      runs.push_back(current);
      current = 0;
    }
  }
  if (current > 0) runs.push_back(current);
  return runs;
}

}  // namespace sppsbl
