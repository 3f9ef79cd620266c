#pragma once

// Instance files: {"phi" (row-major), "m", "n", "y", "x_true", "support", "spec"}.
// Support indices are 0-based.

#include <optional>
#include <string>

#include "sppsbl/core.hpp"
#include "sppsbl/datagen.hpp"

namespace sppsbl {

struct InstanceFile {
  SensingProblem problem;
  std::optional<GeneratorSpec> spec;
};

/// Generator spec as JSON text. An infinite snr_db is written as "inf".
std::string generator_spec_to_json(const GeneratorSpec& spec);

/// Reads a generator object. Missing fields keep the defaults of `base`;
/// "measurement_ratio" may replace "m". Throws ConfigError naming the field.
GeneratorSpec generator_spec_from_json(const std::string& text, const GeneratorSpec& base = {});

std::string instance_to_json(const SensingProblem& problem,
                             const std::optional<GeneratorSpec>& spec = std::nullopt);
InstanceFile instance_from_json(const std::string& text);

/// Throws IoError when the file cannot be written or read and ConfigError
/// when its content is malformed.
void save_instance(const std::string& path, const SensingProblem& problem,
                   const std::optional<GeneratorSpec>& spec = std::nullopt);
InstanceFile load_instance(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Shortest round-tripping decimal ("%.17g"); "nan", "inf", "-inf" otherwise.
std::string format_double(double value);

}  // namespace sppsbl
