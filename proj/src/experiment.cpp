#include "derivlab/experiment.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "derivlab/rng.hpp"

namespace derivlab {

using nlohmann::json;

namespace {

// substream tags deriving the independent seeds of one experiment
enum : std::uint64_t {
  kSeedCheckSamples = 1,
  kSeedCalibration = 2,
  kSeedGroundTruthA = 3,
  kSeedGroundTruthB = 4,
  kSeedDirectionG = 5,
  kSeedDirectionH = 6,
};

constexpr double kSampleRadius = 1.0;
constexpr int kCalibrationDensityFactor = 4;
constexpr double kMetricRatioTol = 1e-10;

class PhaseTimer {
 public:
  void start() { begin_ = std::chrono::steady_clock::now(); }
  double stop() {
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - begin_).count();
  }

 private:
  std::chrono::steady_clock::time_point begin_;
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();

  json deterministic;
  json runtime;
  std::vector<std::string> failure_reasons;
  bool all_satisfied = true;
  bool all_converged = true;
  PhaseTimer timer;
  const auto note_check = [&](const ResidualReport& report) {
    if (!report.satisfied) {
      all_satisfied = false;
      failure_reasons.push_back(report.check_name + " violated (slack " +
                                std::to_string(report.slack) + ")");
    }
  };

  // output_path is I/O plumbing: it lives in the runtime section so that
  // --out overrides cannot change the content hash
  deterministic["config"] = config.to_json();
  deterministic["config"].erase("output_path");
  deterministic["generator"] = kGeneratorId;
  runtime["output_path"] = config.output_path;

  // sampling: the check/reconstruction sample is disjoint from the denser
  // calibration sample by construction (independent substreams)
  const SampleSet samples =
      generate_samples(substream_seed(config.seed, kSeedCheckSamples),
                       config.dim, config.sample_count, kSampleRadius,
                       config.norm_kind);
  const SampleSet calibration = generate_samples(
      substream_seed(config.seed, kSeedCalibration), config.dim,
      kCalibrationDensityFactor * config.sample_count, kSampleRadius,
      config.norm_kind);
  deterministic["samples"] = json{
      {"seed", samples.seed},
      {"count", config.sample_count},
      {"calibration_seed", calibration.seed},
      {"calibration_count", kCalibrationDensityFactor * config.sample_count},
      {"radius", kSampleRadius}};

  // seeded ground truth: inner derivations, so every hypothesis on (D, H)
  // holds exactly
  const AlgebraElement a = random_unit_element(
      substream_seed(config.seed, kSeedGroundTruthA), config.dim,
      config.norm_kind);
  const AlgebraElement b = random_unit_element(
      substream_seed(config.seed, kSeedGroundTruthB), config.dim,
      config.norm_kind);
  const LinearMap ground_d = inner_derivation(a);
  const LinearMap ground_h = inner_derivation(b);

  PerturbationSpec pert_g;
  pert_g.family = PerturbationFamily::power_norm;
  pert_g.amplitude = config.c_g;
  pert_g.exponent = config.r;
  pert_g.norm_kind = config.norm_kind;
  pert_g.direction = random_unit_element(
      substream_seed(config.seed, kSeedDirectionG), config.dim,
      config.norm_kind);
  PerturbationSpec pert_h = pert_g;
  pert_h.amplitude = config.c_h;
  pert_h.direction = random_unit_element(
      substream_seed(config.seed, kSeedDirectionH), config.dim,
      config.norm_kind);

  const InequalityParams params = make_inequality_params(config.s, config.t);

  timer.start();
  const CertifiedInstance instance =
      make_instance(ground_d, ground_h, pert_g, pert_h, params, calibration,
                    config.circle_count);
  runtime["wall_ms"]["calibration"] = timer.stop();

  const auto lipschitz = contraction_constant(instance.cf, config.regime);
  deterministic["instance"] = json{
      {"theta", instance.cf.theta},
      {"theta_raw", instance.theta_raw},
      {"safety_factor", kCalibrationSafety},
      {"regime", to_string(instance.regime)},
      {"lipschitz",
       json{{"smallest", lipschitz->smallest},
            {"corollary", lipschitz->corollary},
            {"chosen", lipschitz->chosen},
            {"usable", lipschitz->usable},
            {"corollary_mismatch", lipschitz->corollary_mismatch}}},
      {"ground_truth_d", matrix_to_json(ground_d.action)},
      {"ground_truth_h", matrix_to_json(ground_h.action)},
      {"direction_g", matrix_to_json(pert_g.direction)},
      {"direction_h", matrix_to_json(pert_h.direction)},
      {"certificates",
       json{{"st", residual_report_to_json(instance.st_certificate)},
            {"derivation",
             residual_report_to_json(instance.derivation_certificate)}}}};
  if (!lipschitz->usable) {
    all_converged = false;
    failure_reasons.push_back("no Lipschitz constant < 1 for this regime");
  }

  // inequality checks on the fresh sample
  timer.start();
  const auto lambdas = sample_unit_circle(config.circle_count);
  const ResidualReport st_check =
      residual_st_inequality(instance.g, instance.h, params, samples, lambdas,
                             instance.cf, config.tol);
  const ResidualReport derivation_check = residual_derivation_pair(
      instance.g, instance.h, samples, instance.cf, config.tol);
  runtime["wall_ms"]["checks"] = timer.stop();
  note_check(st_check);
  note_check(derivation_check);
  deterministic["checks"] = json::array(
      {residual_report_to_json(st_check),
       residual_report_to_json(derivation_check)});

  // both reconstructions
  timer.start();
  const ReconstructionResult direct =
      direct_reconstruct(instance.g, instance.h, config.regime, samples,
                         config.tol, config.k_max, instance.cf);
  ReconstructionResult fixed_point;
  bool fixed_point_ran = false;
  if (lipschitz->usable) {
    fixed_point =
        fixed_point_reconstruct(instance.g, instance.h, instance.cf,
                                config.regime, samples, config.tol,
                                config.k_max);
    fixed_point_ran = true;
  }
  runtime["wall_ms"]["reconstruction"] = timer.stop();

  if (!direct.all_converged) {
    all_converged = false;
    failure_reasons.push_back("direct reconstruction hit k_max");
  }
  if (fixed_point_ran && !fixed_point.all_converged) {
    all_converged = false;
    failure_reasons.push_back("fixed-point reconstruction hit k_max");
  }
  deterministic["reconstructions"] = json::array();
  deterministic["reconstructions"].push_back(reconstruction_to_json(direct));
  if (fixed_point_ran) {
    deterministic["reconstructions"].push_back(
        reconstruction_to_json(fixed_point));
  }

  // regime-applicable bounds, all checked against the direct values
  timer.start();
  deterministic["bound_checks"] = json::array();
  if (direct.all_converged) {
    const std::vector<BoundKind> kinds =
        config.regime == Regime::contractive
            ? std::vector<BoundKind>{BoundKind::eq25, BoundKind::eq32,
                                     BoundKind::cor24}
            : std::vector<BoundKind>{BoundKind::eq213, BoundKind::eq36,
                                     BoundKind::cor26};
    for (const BoundKind kind : kinds) {
      const ResidualReport bound_check = verify_stability_bound(
          instance.g, instance.h, direct, instance.cf, kind, config.tol);
      note_check(bound_check);
      deterministic["bound_checks"].push_back(
          residual_report_to_json(bound_check));
    }
  } else {
    failure_reasons.push_back("bound checks skipped: reconstruction not converged");
  }
  runtime["wall_ms"]["bounds"] = timer.stop();

  // metric checks: contraction factor of J and the a-posteriori
  // fixed-point distance estimate
  timer.start();
  {
    const MappingModel exact_g{ground_d, PerturbationSpec{}};
    const MappingModel exact_h{ground_h, PerturbationSpec{}};
    const MetricEstimate base = generalized_metric(
        instance.g, instance.h, exact_g, exact_h, instance.cf, samples);
    const auto [jg, jh] = iteration_operator(instance.g, instance.h,
                                             config.regime, 1);
    const auto [jg_exact, jh_exact] =
        iteration_operator(exact_g, exact_h, config.regime, 1);
    const MetricEstimate after = generalized_metric(
        jg, jh, jg_exact, jh_exact, instance.cf, samples);
    const double measured = base.mu > 0.0 ? after.mu / base.mu : 0.0;
    const bool contraction_ok =
        !base.infinite() && !after.infinite() &&
        measured <= lipschitz->chosen + kMetricRatioTol;
    if (!contraction_ok) {
      all_satisfied = false;
      failure_reasons.push_back("generalized-metric contraction violated");
    }
    deterministic["metric"]["j_contraction"] =
        json{{"d_before", base.mu},
             {"d_after", after.mu},
             {"measured_ratio", measured},
             {"lipschitz", lipschitz->chosen},
             {"satisfied", contraction_ok}};

    if (fixed_point_ran) {
      if (!fixed_point.aposteriori_ok) {
        all_satisfied = false;
        failure_reasons.push_back("fixed-point a-posteriori bound violated");
      }
      deterministic["metric"]["fixed_point_aposteriori"] =
          json{{"final_distance", fixed_point.metric_final_distance},
               {"d0", fixed_point.metric_d0},
               {"lipschitz", fixed_point.lipschitz},
               {"satisfied", fixed_point.aposteriori_ok}};
    }
  }
  runtime["wall_ms"]["metric"] = timer.stop();

  deterministic["verdict"] =
      all_satisfied && all_converged ? "pass" : "fail";
  deterministic["failure_reasons"] = failure_reasons;

  ExperimentReport report;
  report.deterministic = std::move(deterministic);
  report.runtime = std::move(runtime);
  report.content_hash = content_hash_of(report.deterministic);
  return report;
}

namespace {

// recomputed-verdict walk; returns the first divergent field, empty if none
std::string first_divergent_field(const ExperimentReport& report) {
  const json& det = report.deterministic;

  const auto check_report = [](const json& check,
                               const std::string& where) -> std::string {
    const double lhs = check.at("lhs").get<double>();
    const double rhs = check.at("rhs").get<double>();
    const double slack = check.at("slack").get<double>();
    const double tolerance = check.at("tolerance").get<double>();
    const bool satisfied = check.at("satisfied").get<bool>();
    if (slack != rhs - lhs) return where + ".slack";
    if (satisfied != (slack >= -tolerance)) return where + ".satisfied";
    if (check.contains("rows")) {
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < check.at("rows").size(); ++i) {
        const json& row = check.at("rows").at(i);
        const double row_slack = row.at("slack").get<double>();
        if (row_slack !=
            row.at("rhs").get<double>() - row.at("lhs").get<double>()) {
          return where + ".rows[" + std::to_string(i) + "].slack";
        }
        worst = std::min(worst, row_slack);
      }
      if (worst != slack) return where + ".slack (vs rows)";
    }
    return {};
  };

  bool expect_pass = true;
  for (std::size_t i = 0; i < det.at("checks").size(); ++i) {
    const json& check = det.at("checks").at(i);
    const std::string name = check.at("name").get<std::string>();
    if (auto field = check_report(check, "checks[" + name + "]");
        !field.empty()) {
      return field;
    }
    expect_pass = expect_pass && check.at("satisfied").get<bool>();
  }
  for (std::size_t i = 0; i < det.at("bound_checks").size(); ++i) {
    const json& check = det.at("bound_checks").at(i);
    const std::string name = check.at("name").get<std::string>();
    if (auto field = check_report(check, "bound_checks[" + name + "]");
        !field.empty()) {
      return field;
    }
    expect_pass = expect_pass && check.at("satisfied").get<bool>();
  }

  for (const json& recon : det.at("reconstructions")) {
    expect_pass = expect_pass && recon.at("all_converged").get<bool>();
  }

  const json& metric = det.at("metric");
  {
    const json& jc = metric.at("j_contraction");
    const bool recomputed = jc.at("measured_ratio").get<double>() <=
                            jc.at("lipschitz").get<double>() + kMetricRatioTol;
    if (jc.at("satisfied").get<bool>() != recomputed) {
      return "metric.j_contraction.satisfied";
    }
    expect_pass = expect_pass && recomputed;
  }
  if (metric.contains("fixed_point_aposteriori")) {
    const json& ap = metric.at("fixed_point_aposteriori");
    const double bound = ap.at("d0").get<double>() /
                         (1.0 - ap.at("lipschitz").get<double>());
    const bool recomputed = ap.at("final_distance").get<double>() <=
                            bound + 1e-12 * std::max(1.0, bound);
    if (ap.at("satisfied").get<bool>() != recomputed) {
      return "metric.fixed_point_aposteriori.satisfied";
    }
    expect_pass = expect_pass && recomputed;
  }

  const std::string verdict = det.at("verdict").get<std::string>();
  if ((verdict == "pass") != expect_pass) return "verdict";

  if (content_hash_of(det) != report.content_hash) return "content_hash";
  return {};
}

}  // namespace

VerifyOutcome verify_report_file(const std::string& path) {
  json parsed;
  try {
    parsed = json::parse(read_text_file(path));
  } catch (const IoError& e) {
    return {3, e.what()};
  } catch (const json::exception& e) {
    return {3, std::string("cannot parse report: ") + e.what()};
  }

  ExperimentReport report;
  try {
    report = ExperimentReport::from_json(parsed);
  } catch (const ConfigError& e) {
    return {2, e.what()};
  }

  try {
    const std::string field = first_divergent_field(report);
    if (!field.empty()) {
      return {1, "verification failed at field: " + field};
    }
  } catch (const json::exception& e) {
    return {2, std::string("report schema error: ") + e.what()};
  }
  return {0, "report verified: verdicts and content hash reproduce"};
}

void write_report_files(const ExperimentReport& report,
                        const std::string& json_path) {
  write_text_file(json_path, report.to_json().dump(2) + "\n");
  std::filesystem::path csv_path(json_path);
  csv_path.replace_extension(".csv");
  write_text_file(csv_path.string(), report_csv(report.deterministic));
}

std::string sweep_csv_header(const ExperimentReport& first) {
  std::ostringstream out;
  out << "param,value,seed,theta,verdict,st_slack,derivation_slack";
  for (const auto& check : first.deterministic.at("bound_checks")) {
    out << ',' << check.at("name").get<std::string>() << "_slack";
  }
  out << ",direct_iterations_mean,fixed_point_iterations_mean,content_hash\n";
  return out.str();
}

std::string sweep_csv_row(const std::string& param, double value,
                          const ExperimentReport& report) {
  const json& det = report.deterministic;
  std::ostringstream out;
  out.precision(17);
  out << param << ',' << value << ','
      << det.at("config").at("seed").get<std::uint64_t>() << ','
      << det.at("instance").at("theta").get<double>() << ','
      << det.at("verdict").get<std::string>();
  for (const auto& check : det.at("checks")) {
    out << ',' << check.at("slack").get<double>();
  }
  for (const auto& check : det.at("bound_checks")) {
    out << ',' << check.at("slack").get<double>();
  }
  const json& recons = det.at("reconstructions");
  out << ',' << recons.at(0).at("iterations_mean").get<double>();
  out << ','
      << (recons.size() > 1 ? recons.at(1).at("iterations_mean").get<double>()
                            : 0.0);
  out << ',' << report.content_hash << '\n';
  return out.str();
}

std::string run_experiment_json(const std::string& config_json_text) {
  json parsed;
  try {
    parsed = json::parse(config_json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  const ExperimentConfig config = ExperimentConfig::from_json(parsed);
  return run_experiment(config).to_json().dump();
}

}  // namespace derivlab
