#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "derivlab/algebra.hpp"
#include "derivlab/control.hpp"
#include "derivlab/maps.hpp"
#include "derivlab/stability.hpp"

namespace derivlab {

inline constexpr int kReportSchemaVersion = 1;

/// Invalid configuration or malformed report schema.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// I/O failure (missing file, unwritable path, unparseable JSON).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One experiment: a seeded ground-truth derivation pair, power
/// perturbations of size c_g/c_h with exponent r, and the full battery of
/// checks. Sample elements live in the unit ball (radius 1).
struct ExperimentConfig {
  std::uint64_t seed = 1;
  int dim = 2;
  NormKind norm_kind = NormKind::frobenius;
  Complex s{0.5, 0.0};
  Complex t{0.25, 0.25};
  Regime regime = Regime::contractive;
  double r = 3.0;
  double c_g = 0.1;
  double c_h = 0.1;
  int sample_count = 24;
  int circle_count = 8;
  double tol = kDefaultTol;
  int k_max = kDefaultKMax;
  std::string output_path = "report.json";

  /// Human-readable list of violated invariants; empty when valid.
  std::vector<std::string> violations() const;
  /// Throws ConfigError listing every violation.
  void validate() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
};

/// A finished run. `deterministic` is byte-reproducible for a given config;
/// `runtime` holds wall-clock data and is excluded from the content hash.
struct ExperimentReport {
  nlohmann::json deterministic;
  nlohmann::json runtime;
  std::string content_hash;

  bool pass() const;
  nlohmann::json to_json() const;
  static ExperimentReport from_json(const nlohmann::json& j);
};

/// FNV-1a 64-bit over the compact dump of the deterministic section,
/// rendered as "fnv1a64:<16 hex digits>".
std::string content_hash_of(const nlohmann::json& deterministic);

/// Flat per-sample-point table (point id, |x|, deviations, iteration
/// counts, and rhs/slack of every bound check) for plotting.
std::string report_csv(const nlohmann::json& deterministic);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

nlohmann::json complex_to_json(Complex z);
Complex complex_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const AlgebraElement& m);
AlgebraElement matrix_from_json(const nlohmann::json& j);

nlohmann::json residual_report_to_json(const ResidualReport& report);
nlohmann::json reconstruction_to_json(const ReconstructionResult& recon);

}  // namespace derivlab
