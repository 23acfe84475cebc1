#include "derivlab/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace derivlab {

using nlohmann::json;

std::vector<std::string> ExperimentConfig::violations() const {
  std::vector<std::string> out;
  const double abs_s = std::abs(s);
  const double abs_t = std::abs(t);
  if (!(abs_s > 0.0 && abs_s < 1.0)) out.push_back("need 0 < |s| < 1");
  if (!(abs_t > 0.0 && abs_t < 1.0)) out.push_back("need 0 < |t| < 1");
  if (dim < 1 || dim > kDimSoftCap) {
    out.push_back("dim must be in [1, " + std::to_string(kDimSoftCap) + "]");
  }
  if (regime == Regime::contractive && !(r > 2.0)) {
    out.push_back("contractive regime requires r > 2");
  }
  if (regime == Regime::expansive && !(r < 1.0)) {
    out.push_back("expansive regime requires r < 1");
  }
  if (!(r > 0.0)) out.push_back("r must be > 0");
  if (c_g < 0.0) out.push_back("c_g must be >= 0");
  if (c_h < 0.0) out.push_back("c_h must be >= 0");
  if (sample_count < 1) out.push_back("sample_count must be >= 1");
  if (circle_count < 2) out.push_back("circle_count must be >= 2");
  if (!(tol > 0.0)) out.push_back("tol must be > 0");
  if (k_max < 1) out.push_back("k_max must be >= 1");
  if (output_path.empty()) out.push_back("output_path must be nonempty");
  return out;
}

void ExperimentConfig::validate() const {
  const auto problems = violations();
  if (problems.empty()) return;
  std::string message = "invalid config:";
  for (const auto& p : problems) message += "\n  - " + p;
  throw ConfigError(message);
}

json complex_to_json(Complex z) {
  return json{{"re", z.real()}, {"im", z.imag()}};
}

Complex complex_from_json(const json& j) {
  return Complex(j.at("re").get<double>(), j.at("im").get<double>());
}

json matrix_to_json(const AlgebraElement& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      row.push_back(complex_to_json(m(i, k)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

AlgebraElement matrix_from_json(const json& j) {
  const auto rows = j.size();
  if (rows == 0) throw ConfigError("matrix_from_json: empty matrix");
  const auto cols = j.at(0).size();
  AlgebraElement m(static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (j.at(i).size() != cols) {
      throw ConfigError("matrix_from_json: ragged rows");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          complex_from_json(j.at(i).at(k));
    }
  }
  return m;
}

json ExperimentConfig::to_json() const {
  return json{{"seed", seed},
              {"dim", dim},
              {"norm_kind", to_string(norm_kind)},
              {"s", complex_to_json(s)},
              {"t", complex_to_json(t)},
              {"regime", to_string(regime)},
              {"r", r},
              {"c_g", c_g},
              {"c_h", c_h},
              {"sample_count", sample_count},
              {"circle_count", circle_count},
              {"tol", tol},
              {"k_max", k_max},
              {"output_path", output_path}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig config;
  try {
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("dim")) config.dim = j.at("dim").get<int>();
    if (j.contains("norm_kind")) {
      config.norm_kind =
          norm_kind_from_string(j.at("norm_kind").get<std::string>());
    }
    if (j.contains("s")) config.s = complex_from_json(j.at("s"));
    if (j.contains("t")) config.t = complex_from_json(j.at("t"));
    if (j.contains("regime")) {
      config.regime = regime_from_string(j.at("regime").get<std::string>());
    }
    if (j.contains("r")) config.r = j.at("r").get<double>();
    if (j.contains("c_g")) config.c_g = j.at("c_g").get<double>();
    if (j.contains("c_h")) config.c_h = j.at("c_h").get<double>();
    if (j.contains("sample_count")) {
      config.sample_count = j.at("sample_count").get<int>();
    }
    if (j.contains("circle_count")) {
      config.circle_count = j.at("circle_count").get<int>();
    }
    if (j.contains("tol")) config.tol = j.at("tol").get<double>();
    if (j.contains("k_max")) config.k_max = j.at("k_max").get<int>();
    if (j.contains("output_path")) {
      config.output_path = j.at("output_path").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw IoError("cannot parse config " + path + ": " + e.what());
  }
  return from_json(j);
}

bool ExperimentReport::pass() const {
  return deterministic.value("verdict", "") == "pass";
}

json ExperimentReport::to_json() const {
  return json{{"schema_version", kReportSchemaVersion},
              {"deterministic", deterministic},
              {"runtime", runtime},
              {"content_hash", content_hash}};
}

ExperimentReport ExperimentReport::from_json(const json& j) {
  if (!j.contains("schema_version") ||
      j.at("schema_version").get<int>() != kReportSchemaVersion) {
    throw ConfigError("report schema_version mismatch (expected " +
                      std::to_string(kReportSchemaVersion) + ")");
  }
  ExperimentReport report;
  try {
    report.deterministic = j.at("deterministic");
    report.runtime = j.at("runtime");
    report.content_hash = j.at("content_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report schema error: ") + e.what());
  }
  return report;
}

std::string content_hash_of(const json& deterministic) {
  const std::string bytes = deterministic.dump();
  std::uint64_t hash = 1469598103934665603ull;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string("fnv1a64:") + buffer;
}

namespace {

json witness_to_json(const Witness& witness) {
  return json{{"pair_kind", witness.pair_kind},
              {"pair_index", witness.pair_index},
              {"lambda_index", witness.lambda_index},
              {"lambda", complex_to_json(witness.lambda)},
              {"norm_x", witness.norm_x},
              {"norm_y", witness.norm_y}};
}

}  // namespace

json residual_report_to_json(const ResidualReport& report) {
  json j{{"name", report.check_name}, {"lhs", report.lhs},
         {"rhs", report.rhs},         {"slack", report.slack},
         {"satisfied", report.satisfied}, {"tolerance", report.tolerance},
         {"witness", witness_to_json(report.witness)}};
  if (!report.rows.empty()) {
    json rows = json::array();
    for (const BoundRow& row : report.rows) {
      rows.push_back(json{{"point_index", row.point_index},
                          {"norm_x", row.norm_x},
                          {"lhs", row.lhs},
                          {"rhs", row.rhs},
                          {"slack", row.slack}});
    }
    j["rows"] = std::move(rows);
  }
  return j;
}

json reconstruction_to_json(const ReconstructionResult& recon) {
  json points = json::array();
  int iterations_max = 0;
  double iterations_total = 0.0;
  for (std::size_t i = 0; i < recon.per_point.size(); ++i) {
    const PointReconstruction& pr = recon.per_point[i];
    iterations_max = std::max(iterations_max, pr.iterations);
    iterations_total += pr.iterations;
    json p{{"point_index", static_cast<int>(i)},
           {"norm_x", recon.point_norms[i]},
           {"iterations", pr.iterations},
           {"converged", pr.converged},
           {"residual_final", pr.residual_final}};
    if (recon.has_bounds) {
      p["deviation"] = pr.deviation;
      p["bound_value"] = pr.bound_value;
      p["bound_satisfied"] = pr.bound_satisfied;
    }
    if (const auto ratio = measured_contraction_ratio(pr.increments)) {
      p["measured_ratio"] = *ratio;
    }
    points.push_back(std::move(p));
  }
  json j{{"method", to_string(recon.method, recon.regime)},
         {"regime", to_string(recon.regime)},
         {"tol", recon.tol},
         {"k_max", recon.k_max},
         {"all_converged", recon.all_converged},
         {"iterations_max", iterations_max},
         {"iterations_mean",
          recon.per_point.empty()
              ? 0.0
              : iterations_total / static_cast<double>(recon.per_point.size())},
         {"points", std::move(points)}};
  if (recon.method == ReconstructionMethod::fixed_point) {
    j["lipschitz"] = recon.lipschitz;
    j["metric_d0"] = recon.metric_d0;
    j["metric_final_distance"] = recon.metric_final_distance;
    j["aposteriori_ok"] = recon.aposteriori_ok;
  }
  return j;
}

std::string report_csv(const json& deterministic) {
  // column set: reconstruction data then rhs/slack per bound check
  std::vector<std::string> bound_names;
  for (const auto& check : deterministic.at("bound_checks")) {
    bound_names.push_back(check.at("name").get<std::string>());
  }

  std::ostringstream out;
  out.precision(17);
  out << "point_index,norm_x,deviation,direct_iterations,direct_residual_final,"
         "fixed_point_deviation,fixed_point_iterations";
  for (const auto& name : bound_names) {
    out << ',' << name << "_rhs," << name << "_slack";
  }
  out << '\n';

  const json& recons = deterministic.at("reconstructions");
  const json& direct_points = recons.at(0).at("points");
  const json& fixed_points = recons.at(1).at("points");
  const json& bound_checks = deterministic.at("bound_checks");
  for (std::size_t i = 0; i < direct_points.size(); ++i) {
    const json& dp = direct_points.at(i);
    const json& fp = fixed_points.at(i);
    out << dp.at("point_index").get<int>() << ','
        << dp.at("norm_x").get<double>() << ','
        << dp.value("deviation", 0.0) << ','
        << dp.at("iterations").get<int>() << ','
        << dp.at("residual_final").get<double>() << ','
        << fp.value("deviation", 0.0) << ','
        << fp.at("iterations").get<int>();
    for (const auto& check : bound_checks) {
      const json& row = check.at("rows").at(i);
      out << ',' << row.at("rhs").get<double>() << ','
          << row.at("slack").get<double>();
    }
    out << '\n';
  }
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace derivlab
