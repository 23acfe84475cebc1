// derivlab CLI: seeded stability experiments with JSON/CSV reports.
//
//   derivlab run --config <path> [--seed N] [--out <path>]
//   derivlab verify <report.json>
//   derivlab sweep --param r --values 2.5,3,4 --config <path> [--out <csv>]
//
// Exit codes: 0 pass, 1 fail (math verdict), 2 config error, 3 I/O error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "derivlab/experiment.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> values;
  std::stringstream stream(csv);
  std::string token;
  while (std::getline(stream, token, ',')) {
    if (token.empty()) continue;
    values.push_back(std::stod(token));
  }
  return values;
}

void apply_sweep_value(derivlab::ExperimentConfig& config,
                       const std::string& param, double value) {
  if (param == "r") {
    config.r = value;
  } else if (param == "c_g") {
    config.c_g = value;
  } else if (param == "c_h") {
    config.c_h = value;
  } else if (param == "seed") {
    config.seed = static_cast<std::uint64_t>(value);
  } else if (param == "tol") {
    config.tol = value;
  } else {
    throw derivlab::ConfigError(
        "unsupported sweep param '" + param +
        "' (supported: r, c_g, c_h, seed, tol)");
  }
}

int run_command(const std::string& config_path,
                std::optional<std::uint64_t> seed,
                std::optional<std::string> out) {
  derivlab::ExperimentConfig config =
      derivlab::ExperimentConfig::load(config_path);
  if (seed) config.seed = *seed;
  if (out) config.output_path = *out;
  config.validate();

  const derivlab::ExperimentReport report = derivlab::run_experiment(config);
  derivlab::write_report_files(report, config.output_path);
  std::cout << "report: " << config.output_path
            << "  verdict: " << report.deterministic.at("verdict").get<std::string>()
            << "  hash: " << report.content_hash << "\n";
  if (!report.pass()) {
    for (const auto& reason : report.deterministic.at("failure_reasons")) {
      std::cout << "  reason: " << reason.get<std::string>() << "\n";
    }
    return kExitFail;
  }
  return kExitPass;
}

int verify_command(const std::string& report_path) {
  const derivlab::VerifyOutcome outcome =
      derivlab::verify_report_file(report_path);
  std::cout << outcome.message << "\n";
  return outcome.exit_code;
}

int sweep_command(const std::string& config_path, const std::string& param,
                  const std::string& values_csv,
                  std::optional<std::string> out) {
  const std::vector<double> values = parse_values(values_csv);
  if (values.empty()) {
    throw derivlab::ConfigError("sweep: --values must list at least one value");
  }
  const derivlab::ExperimentConfig base =
      derivlab::ExperimentConfig::load(config_path);

  std::string csv;
  for (const double value : values) {
    derivlab::ExperimentConfig config = base;
    apply_sweep_value(config, param, value);
    config.validate();
    const derivlab::ExperimentReport report = derivlab::run_experiment(config);
    if (csv.empty()) csv = derivlab::sweep_csv_header(report);
    csv += derivlab::sweep_csv_row(param, value, report);
    std::cout << param << "=" << value << " verdict: "
              << report.deterministic.at("verdict").get<std::string>() << "\n";
  }
  const std::string csv_path = out.value_or("sweep.csv");
  derivlab::write_text_file(csv_path, csv);
  std::cout << "sweep csv: " << csv_path << "\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical stability laboratory for derivation pairs"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", config_path, "config JSON path")->required();
  run->add_option("--seed", seed, "override config seed");
  run->add_option("--out", out, "override report output path");

  std::string report_path;
  CLI::App* verify = app.add_subcommand("verify", "re-check a stored report");
  verify->add_option("report", report_path, "report JSON path")->required();

  std::string param;
  std::string values_csv;
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter family");
  sweep->add_option("--param", param, "config field to sweep")->required();
  sweep->add_option("--values", values_csv, "comma-separated values")
      ->required();
  sweep->add_option("--config", config_path, "config JSON path")->required();
  sweep->add_option("--out", out, "sweep CSV path (default sweep.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(config_path, seed, out);
    if (verify->parsed()) return verify_command(report_path);
    if (sweep->parsed()) return sweep_command(config_path, param, values_csv, out);
  } catch (const derivlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const derivlab::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
