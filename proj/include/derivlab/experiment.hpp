#pragma once

#include <string>

#include "derivlab/report.hpp"

namespace derivlab {

/// Full pipeline for one config: sample generation, instance calibration,
/// the two inequality checks on a sample disjoint from calibration, both
/// reconstructions, every regime-applicable bound check, and the metric
/// checks. Never throws on mathematical failure; the report carries
/// verdict = "fail" plus reasons. Throws ConfigError on invalid configs.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Recomputes every verdict of a stored report from its stored values
/// (no recomputation of reconstructions) and re-derives the content hash.
struct VerifyOutcome {
  int exit_code = 0;  // 0 ok, 1 divergent field, 2 schema error, 3 I/O error
  std::string message;
};
VerifyOutcome verify_report_file(const std::string& path);

/// Writes the report JSON to `json_path` and the per-point CSV next to it
/// (same stem, .csv extension).
void write_report_files(const ExperimentReport& report,
                        const std::string& json_path);

/// Per-run summary rows for sweep CSVs.
std::string sweep_csv_header(const ExperimentReport& first);
std::string sweep_csv_row(const std::string& param, double value,
                          const ExperimentReport& report);

/// JSON-text convenience wrapper (used by the python bindings).
std::string run_experiment_json(const std::string& config_json_text);

}  // namespace derivlab
