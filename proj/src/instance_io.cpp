#include "sppsbl/instance_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json_fields.hpp"
#include "sppsbl/errors.hpp"

namespace sppsbl {

using detail::Json;

namespace {

Json spec_json(const GeneratorSpec& spec) {
  Json j;
  j["family"] = to_string(spec.family);
  j["n"] = spec.n;
  j["m"] = spec.m;
  if (std::isinf(spec.snr_db)) {
    j["snr_db"] = spec.snr_db > 0 ? "inf" : "-inf";
  } else {
    j["snr_db"] = spec.snr_db;
  }
  j["seed"] = spec.seed;
  j["normalize_columns"] = spec.normalize_columns;
  Json p;
  switch (spec.family) {
    case Family::kHeteroscedastic:
      p["k"] = spec.hetero.k;
      p["n_blocks"] = spec.hetero.n_blocks;
      p["sigma_min"] = spec.hetero.sigma_min;
      p["sigma_max"] = spec.hetero.sigma_max;
      break;
    case Family::kMultiPattern:
      p["k_clustered"] = spec.multi.k_clustered;
      p["n_clusters"] = spec.multi.n_clusters;
      p["k_isolated"] = spec.multi.k_isolated;
      break;
    case Family::kChain:
      p["p"] = spec.chain.p;
      p["p10"] = spec.chain.p10;
      break;
  }
  j["params"] = p;
  return j;
}

GeneratorSpec spec_from(const Json& j, const std::string& path, const GeneratorSpec& base) {
  using namespace detail;
  require_object(j, path);
  check_keys(j, path, {"family", "n", "m", "measurement_ratio", "snr_db", "seed", "normalize_columns", "params"});
  GeneratorSpec spec = base;
  if (j.contains("family")) {
    const auto text = as_string(j["family"], join_path(path, "family"));
    try {
      spec.family = parse_family(text);
    } catch (const Error& e) {
      field_error(join_path(path, "family"), e.what());
    }
  }
  spec.n = get_int(j, "n", path, spec.n);
  spec.snr_db = get_double(j, "snr_db", path, spec.snr_db);
  spec.seed = get_or(j, "seed", path, spec.seed, as_u64);
  spec.normalize_columns = get_bool(j, "normalize_columns", path, spec.normalize_columns);
  const bool has_m = j.contains("m") && !j["m"].is_null();
  const bool has_ratio = j.contains("measurement_ratio") && !j["measurement_ratio"].is_null();
  if (has_m && has_ratio) field_error(join_path(path, "m"), "give either m or measurement_ratio, not both");
  if (has_m) spec.m = as_int(j["m"], join_path(path, "m"));
  if (has_ratio) {
    const std::string rp = join_path(path, "measurement_ratio");
    const double ratio = as_double(j["measurement_ratio"], rp);
    if (!(ratio > 0.0 && ratio <= 1.0)) field_error(rp, "must lie in (0, 1]");
    spec.m = static_cast<Index>(std::lround(ratio * static_cast<double>(spec.n)));
    if (spec.m < 1) field_error(rp, "gives fewer than one measurement");
  }

  if (j.contains("params")) {
    const std::string pp = join_path(path, "params");
    const Json& p = j["params"];
    require_object(p, pp);
    switch (spec.family) {
      case Family::kHeteroscedastic:
        check_keys(p, pp, {"k", "n_blocks", "sigma_min", "sigma_max"});
        spec.hetero.k = get_int(p, "k", pp, spec.hetero.k);
        spec.hetero.n_blocks = get_int(p, "n_blocks", pp, spec.hetero.n_blocks);
        spec.hetero.sigma_min = get_double(p, "sigma_min", pp, spec.hetero.sigma_min);
        spec.hetero.sigma_max = get_double(p, "sigma_max", pp, spec.hetero.sigma_max);
        break;
      case Family::kMultiPattern:
        check_keys(p, pp, {"k_clustered", "n_clusters", "k_isolated"});
        spec.multi.k_clustered = get_int(p, "k_clustered", pp, spec.multi.k_clustered);
        spec.multi.n_clusters = get_int(p, "n_clusters", pp, spec.multi.n_clusters);
        spec.multi.k_isolated = get_int(p, "k_isolated", pp, spec.multi.k_isolated);
        break;
      case Family::kChain:
        check_keys(p, pp, {"p", "p10"});
        spec.chain.p = get_double(p, "p", pp, spec.chain.p);
        spec.chain.p10 = get_double(p, "p10", pp, spec.chain.p10);
        break;
    }
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    field_error(path.empty() ? "<generator>" : path, e.what());
  }
  return spec;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from(const Json& j, const std::string& path, Index expected) {
  if (!j.is_array()) detail::field_error(path, "expected an array, got " + detail::describe(j));
  if (static_cast<Index>(j.size()) != expected) {
    detail::field_error(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
  }
  Vector v(expected);
  for (Index i = 0; i < expected; ++i) v[i] = detail::as_double(j[static_cast<std::size_t>(i)], path);
  return v;
}

}  // namespace

GeneratorSpec detail::generator_spec_from(const Json& j, const std::string& path, const GeneratorSpec& base) {
  return spec_from(j, path, base);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string generator_spec_to_json(const GeneratorSpec& spec) { return spec_json(spec).dump(2); }

GeneratorSpec generator_spec_from_json(const std::string& text, const GeneratorSpec& base) {
  return spec_from(detail::parse_json_text(text, "<generator>"), "", base);
}

std::string instance_to_json(const SensingProblem& problem, const std::optional<GeneratorSpec>& spec) {
  problem.validate();
  Json j;
  Json phi = Json::array();
  for (Index r = 0; r < problem.m(); ++r) {
    for (Index c = 0; c < problem.n(); ++c) phi.push_back(problem.phi(r, c));
  }
  j["phi"] = std::move(phi);
  j["m"] = problem.m();
  j["n"] = problem.n();
  j["y"] = vector_json(problem.y);
  j["x_true"] = problem.x_true ? vector_json(*problem.x_true) : Json(nullptr);
  if (problem.true_support) {
    j["support"] = *problem.true_support;
  } else {
    j["support"] = nullptr;
  }
  j["spec"] = spec ? spec_json(*spec) : Json(nullptr);
  return j.dump();
}

InstanceFile instance_from_json(const std::string& text) {
  using namespace detail;
  const Json j = parse_json_text(text, "<instance>");
  require_object(j, "");
  for (const char* key : {"phi", "m", "n", "y"}) {
    if (!j.contains(key)) field_error(key, "missing");
  }
  const std::int64_t m = as_int(j["m"], "m");
  const std::int64_t n = as_int(j["n"], "n");
  if (m < 1) field_error("m", "must be at least 1");
  if (n < 2) field_error("n", "must be at least 2");
  const Vector flat = vector_from(j["phi"], "phi", m * n);
  Matrix phi(m, n);
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < n; ++c) phi(r, c) = flat[r * n + c];
  }
  InstanceFile out;
  out.problem.phi = std::move(phi);
  out.problem.y = vector_from(j["y"], "y", m);
  if (j.contains("x_true") && !j["x_true"].is_null()) {
    out.problem.x_true = vector_from(j["x_true"], "x_true", n);
    out.problem.true_support = support_of(*out.problem.x_true);
  }
  if (j.contains("support") && !j["support"].is_null()) {
    const Json& s = j["support"];
    if (!s.is_array()) field_error("support", "expected an array, got " + describe(s));
    SupportSet support;
    for (const auto& v : s) {
      const auto idx = as_int(v, "support");
      if (idx < 0 || idx >= n) field_error("support", "index " + std::to_string(idx) + " out of range");
      support.push_back(idx);
    }
    std::sort(support.begin(), support.end());
    if (out.problem.true_support && *out.problem.true_support != support) {
      field_error("support", "does not match the nonzero pattern of x_true");
    }
    out.problem.true_support = std::move(support);
  }
  if (j.contains("spec") && !j["spec"].is_null()) {
    out.spec = spec_from(j["spec"], "spec", GeneratorSpec{});
    if (std::isfinite(out.spec->snr_db)) out.problem.snr_db = out.spec->snr_db;
  }
  try {
    out.problem.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("error while writing '" + path + "'");
}

void save_instance(const std::string& path, const SensingProblem& problem,
                   const std::optional<GeneratorSpec>& spec) {
  write_text_file(path, instance_to_json(problem, spec) + "\n");
}

InstanceFile load_instance(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return instance_from_json(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace sppsbl
