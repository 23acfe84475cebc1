#include "derivlab/stability.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace derivlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PairEntry {
  const char* kind;
  int index;
  AlgebraElement x;
  AlgebraElement y;
};

// Extreme norm ratios |y| / |x| are their own corner family: the worst
// slack of the (s,t) inequality can sit at |y| -> 0, which random pairs
// with uniform norms rarely visit.
constexpr double kScaledPairEpsilon = 1e-4;

// Every for-all (x,y) check visits the sampled pairs plus structured
// families: the degenerate diagonals (y = x sends the h(x-y) branch through
// h(0) = 0, y = -x sends the g(x+y) branch through g(0) = 0) and the scaled
// pairs covering extreme norm ratios. The zero element itself is excluded
// from sample sets and covered by dedicated tests.
std::vector<PairEntry> build_pair_entries(const SampleSet& samples) {
  std::vector<PairEntry> entries;
  entries.reserve(samples.pair_points.size() + 4 * samples.points.size());
  int i = 0;
  for (const auto& [x, y] : samples.pair_points) {
    entries.push_back({"pair", i++, x, y});
  }
  i = 0;
  for (const auto& p : samples.points) {
    entries.push_back({"diag", i++, p, p});
  }
  i = 0;
  for (const auto& p : samples.points) {
    entries.push_back({"antidiag", i++, p, -p});
  }
  i = 0;
  for (const auto& p : samples.points) {
    entries.push_back({"scaled", i++, p, kScaledPairEpsilon * p});
  }
  i = 0;
  for (const auto& p : samples.points) {
    entries.push_back({"scaled_rev", i++, kScaledPairEpsilon * p, p});
  }
  return entries;
}

void record_worst(ResidualReport& report, double lhs, double rhs,
                  const PairEntry& entry, int lambda_index, Complex lambda,
                  NormKind norm_kind) {
  const double slack = rhs - lhs;
  if (slack < report.slack) {
    report.slack = slack;
    report.lhs = lhs;
    report.rhs = rhs;
    report.witness.pair_kind = entry.kind;
    report.witness.pair_index = entry.index;
    report.witness.lambda_index = lambda_index;
    report.witness.lambda = lambda;
    report.witness.x = entry.x;
    report.witness.y = entry.y;
    report.witness.norm_x = norm(entry.x, norm_kind);
    report.witness.norm_y = norm(entry.y, norm_kind);
  }
}

double metric_ratio(double numerator, double denominator) {
  if (denominator > 0.0) return numerator / denominator;
  return numerator == 0.0 ? 0.0 : kInf;
}

void validate_params(const InequalityParams& params) {
  make_inequality_params(params.s, params.t);
}

}  // namespace

bool MetricEstimate::infinite() const { return std::isinf(mu); }

std::string to_string(ReconstructionMethod method, Regime regime) {
  if (method == ReconstructionMethod::fixed_point) return "fixed_point";
  return regime == Regime::contractive ? "direct_contractive"
                                       : "direct_expansive";
}

ResidualReport residual_st_inequality(const MappingModel& g,
                                      const MappingModel& h,
                                      const InequalityParams& params,
                                      const SampleSet& samples,
                                      const std::vector<Complex>& lambdas,
                                      const std::optional<ControlFunction>& cf,
                                      double tol) {
  validate_params(params);
  if (samples.points.empty() && samples.pair_points.empty()) {
    throw std::invalid_argument("residual_st_inequality: samples are empty");
  }

  // exact variant: no control slack, lambda = 1 only
  const std::vector<Complex> unit{Complex(1.0, 0.0)};
  const std::vector<Complex>& lams = cf ? lambdas : unit;
  if (lams.empty()) {
    throw std::invalid_argument("residual_st_inequality: no lambdas");
  }

  ResidualReport report;
  report.check_name = "st_inequality";
  report.tolerance = tol;
  report.slack = kInf;

  const NormKind nk = samples.norm_kind;
  for (const PairEntry& entry : build_pair_entries(samples)) {
    const AlgebraElement& x = entry.x;
    const AlgebraElement& y = entry.y;
    const AlgebraElement gx = g.evaluate(x);
    const AlgebraElement gy = g.evaluate(y);
    const AlgebraElement hx = h.evaluate(x);
    const AlgebraElement sum = x + y;
    const AlgebraElement diff = x - y;
    const double control = cf ? phi(*cf, x, y) : 0.0;

    int lambda_index = 0;
    for (const Complex lambda : lams) {
      const AlgebraElement g_jensen =
          2.0 * g.evaluate(lambda * (0.5 * sum)) - lambda * gx - lambda * gy;
      const AlgebraElement h_jensen = 2.0 * h.evaluate(lambda * (0.5 * sum)) +
                                      2.0 * h.evaluate(lambda * (0.5 * diff)) -
                                      2.0 * lambda * hx;
      const double lhs =
          norm(g.evaluate(lambda * sum) - lambda * gx - lambda * gy, nk) +
          norm(h.evaluate(lambda * sum) + h.evaluate(lambda * diff) -
                   2.0 * lambda * hx,
               nk);
      const double rhs = norm(params.s * g_jensen, nk) +
                         norm(params.t * h_jensen, nk) + control;
      record_worst(report, lhs, rhs, entry, lambda_index, lambda, nk);
      ++lambda_index;
    }
  }
  report.satisfied = report.slack >= -tol;
  return report;
}

ResidualReport residual_derivation_pair(const MappingModel& g,
                                        const MappingModel& h,
                                        const SampleSet& samples,
                                        const ControlFunction& cf, double tol) {
  if (samples.points.empty() && samples.pair_points.empty()) {
    throw std::invalid_argument("residual_derivation_pair: samples are empty");
  }

  ResidualReport report;
  report.check_name = "derivation_pair";
  report.tolerance = tol;
  report.slack = kInf;

  const NormKind nk = samples.norm_kind;
  const auto bracket = [&g, &h](const AlgebraElement& z) -> AlgebraElement {
    return g.evaluate(h.evaluate(z)) - h.evaluate(g.evaluate(z));
  };
  for (const PairEntry& entry : build_pair_entries(samples)) {
    const AlgebraElement& x = entry.x;
    const AlgebraElement& y = entry.y;
    const AlgebraElement xy = x * y;
    const double lhs =
        norm(bracket(xy) - bracket(x) * y - x * bracket(y), nk) +
        norm(h.evaluate(xy) - h.evaluate(x) * y - x * h.evaluate(y), nk);
    const double rhs = phi(cf, x, y);
    record_worst(report, lhs, rhs, entry, 0, Complex(1.0, 0.0), nk);
  }
  report.satisfied = report.slack >= -tol;
  return report;
}

PointTrace reconstruct_point(const MapFn& f, Regime regime,
                             const AlgebraElement& x, NormKind norm_kind,
                             double tol, int k_max) {
  if (!(tol > 0.0)) throw std::invalid_argument("reconstruct_point: tol > 0");
  if (k_max < 1) throw std::invalid_argument("reconstruct_point: k_max >= 1");

  PointTrace trace;
  AlgebraElement argument = x;
  double scale = 1.0;
  trace.value = f(x);
  double previous_increment = kInf;
  for (int k = 1; k <= k_max; ++k) {
    if (regime == Regime::contractive) {
      argument *= 0.5;  // exact
      scale *= 2.0;
    } else {
      argument *= 2.0;
      scale *= 0.5;
    }
    AlgebraElement next = scale * f(argument);
    const double increment = norm(next - trace.value, norm_kind);
    trace.value = std::move(next);
    trace.increments.push_back(increment);
    trace.iterations = k;
    if (increment == 0.0 ||
        (increment < tol && previous_increment < tol)) {
      trace.converged = true;
      return trace;
    }
    previous_increment = increment;
  }
  return trace;
}

namespace {

void attach_bounds(ReconstructionResult& result, const MappingModel& g,
                   const MappingModel& h, const ControlFunction& cf,
                   double tol) {
  result.has_bounds = true;
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const AlgebraElement& x = result.points[i];
    PointReconstruction& pr = result.per_point[i];
    pr.deviation = norm(g.evaluate(x) - pr.d_value, result.norm_kind) +
                   norm(h.evaluate(x) - pr.h_value, result.norm_kind);
    if (result.regime == Regime::contractive) {
      pr.bound_value =
          sum_contractive_series(cf, x, x, SeriesWeight::two_jm1).total();
    } else {
      pr.bound_value = half_expansive_sum(cf, x);
    }
    pr.bound_satisfied = pr.deviation <= pr.bound_value + tol;
  }
}

}  // namespace

ReconstructionResult direct_reconstruct(const MappingModel& g,
                                        const MappingModel& h, Regime regime,
                                        const SampleSet& points, double tol,
                                        int k_max,
                                        const std::optional<ControlFunction>& cf) {
  if (points.points.empty()) {
    throw std::invalid_argument("direct_reconstruct: no sample points");
  }
  ReconstructionResult result;
  result.method = ReconstructionMethod::direct;
  result.regime = regime;
  result.norm_kind = points.norm_kind;
  result.tol = tol;
  result.k_max = k_max;
  result.all_converged = true;

  const MapFn g_fn = as_fn(g);
  const MapFn h_fn = as_fn(h);
  for (const AlgebraElement& x : points.points) {
    result.points.push_back(x);
    result.point_norms.push_back(norm(x, points.norm_kind));

    // joint iteration: convergence is judged on the combined increment,
    // matching the summed distance the bounds control
    PointReconstruction pr;
    AlgebraElement argument = x;
    double scale = 1.0;
    pr.d_value = g_fn(x);
    pr.h_value = h_fn(x);
    double previous_increment = kInf;
    for (int k = 1; k <= k_max; ++k) {
      if (regime == Regime::contractive) {
        argument *= 0.5;
        scale *= 2.0;
      } else {
        argument *= 2.0;
        scale *= 0.5;
      }
      AlgebraElement next_d = scale * g_fn(argument);
      AlgebraElement next_h = scale * h_fn(argument);
      const double increment = norm(next_d - pr.d_value, points.norm_kind) +
                               norm(next_h - pr.h_value, points.norm_kind);
      pr.d_value = std::move(next_d);
      pr.h_value = std::move(next_h);
      pr.increments.push_back(increment);
      pr.iterations = k;
      pr.residual_final = increment;
      if (increment == 0.0 ||
          (increment < tol && previous_increment < tol)) {
        pr.converged = true;
        break;
      }
      previous_increment = increment;
    }
    result.all_converged = result.all_converged && pr.converged;
    result.per_point.push_back(std::move(pr));
  }

  if (cf) attach_bounds(result, g, h, *cf, tol);
  return result;
}

ReconstructionResult fixed_point_reconstruct(const MappingModel& g,
                                             const MappingModel& h,
                                             const ControlFunction& cf,
                                             Regime regime,
                                             const SampleSet& points,
                                             double tol, int k_max) {
  if (points.points.empty()) {
    throw std::invalid_argument("fixed_point_reconstruct: no sample points");
  }
  const auto lipschitz = contraction_constant(cf, regime);
  if (!lipschitz || !lipschitz->usable) {
    throw std::invalid_argument(
        "fixed_point_reconstruct: no Lipschitz constant < 1 for this regime");
  }
  const double L = lipschitz->chosen;

  ReconstructionResult result;
  result.method = ReconstructionMethod::fixed_point;
  result.regime = regime;
  result.norm_kind = points.norm_kind;
  result.tol = tol;
  result.k_max = k_max;
  result.lipschitz = L;

  const std::size_t n_points = points.points.size();
  std::vector<AlgebraElement> arguments(points.points.begin(),
                                        points.points.end());
  std::vector<double> phis(n_points);
  result.per_point.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const AlgebraElement& x = points.points[i];
    result.points.push_back(x);
    result.point_norms.push_back(norm(x, points.norm_kind));
    phis[i] = phi(cf, x, x);
    result.per_point[i].d_value = g.evaluate(x);
    result.per_point[i].h_value = h.evaluate(x);
  }

  // J^n(g,h)(x) unfolds to (2^n g(x/2^n), 2^n h(x/2^n)) (halving) or
  // (2^-n g(2^n x), 2^-n h(2^n x)) (doubling); iterating the unfolded form
  // evaluates the original maps only.
  const double threshold = tol * (1.0 - L);
  double previous_delta = kInf;
  bool converged = false;
  int iterations = 0;
  double scale = 1.0;
  while (iterations < k_max && !converged) {
    ++iterations;
    double delta = 0.0;
    if (regime == Regime::contractive) {
      scale *= 2.0;
    } else {
      scale *= 0.5;
    }
    for (std::size_t i = 0; i < n_points; ++i) {
      if (regime == Regime::contractive) {
        arguments[i] *= 0.5;
      } else {
        arguments[i] *= 2.0;
      }
      AlgebraElement next_d = scale * g.evaluate(arguments[i]);
      AlgebraElement next_h = scale * h.evaluate(arguments[i]);
      PointReconstruction& pr = result.per_point[i];
      const double increment =
          norm(next_d - pr.d_value, points.norm_kind) +
          norm(next_h - pr.h_value, points.norm_kind);
      pr.d_value = std::move(next_d);
      pr.h_value = std::move(next_h);
      pr.increments.push_back(increment);
      pr.residual_final = increment;
      pr.iterations = iterations;
      delta = std::max(delta, metric_ratio(increment, phis[i]));
    }
    result.metric_increments.push_back(delta);
    if (delta == 0.0 || (delta < threshold && previous_delta < threshold)) {
      converged = true;
    }
    previous_delta = delta;
  }

  result.all_converged = converged;
  for (PointReconstruction& pr : result.per_point) pr.converged = converged;
  result.metric_d0 =
      result.metric_increments.empty() ? 0.0 : result.metric_increments.front();

  // a-priori bound and a-posteriori distance estimate
  const double bound_factor = regime == Regime::contractive
                                  ? L / (2.0 * (1.0 - L))
                                  : 1.0 / (2.0 * (1.0 - L));
  result.has_bounds = true;
  double final_distance = 0.0;
  for (std::size_t i = 0; i < n_points; ++i) {
    PointReconstruction& pr = result.per_point[i];
    const AlgebraElement& x = points.points[i];
    pr.deviation = norm(g.evaluate(x) - pr.d_value, points.norm_kind) +
                   norm(h.evaluate(x) - pr.h_value, points.norm_kind);
    pr.bound_value = bound_factor * phis[i];
    pr.bound_satisfied = pr.deviation <= pr.bound_value + tol;
    final_distance = std::max(final_distance, metric_ratio(pr.deviation, phis[i]));
  }
  result.metric_final_distance = final_distance;
  const double aposteriori_rhs = result.metric_d0 / (1.0 - L);
  result.aposteriori_ok =
      final_distance <= aposteriori_rhs + 1e-12 * std::max(1.0, aposteriori_rhs);
  return result;
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::eq25: return "eq25";
    case BoundKind::eq213: return "eq213";
    case BoundKind::eq32: return "eq32";
    case BoundKind::eq36: return "eq36";
    case BoundKind::cor24: return "cor24";
    case BoundKind::cor26: return "cor26";
  }
  return "unknown";
}

BoundKind bound_kind_from_string(std::string_view name) {
  if (name == "eq25") return BoundKind::eq25;
  if (name == "eq213") return BoundKind::eq213;
  if (name == "eq32") return BoundKind::eq32;
  if (name == "eq36") return BoundKind::eq36;
  if (name == "cor24") return BoundKind::cor24;
  if (name == "cor26") return BoundKind::cor26;
  throw std::invalid_argument("unknown bound kind: " + std::string(name));
}

ResidualReport verify_stability_bound(const MappingModel& g,
                                      const MappingModel& h,
                                      const ReconstructionResult& recon,
                                      const ControlFunction& cf,
                                      BoundKind kind, double tol) {
  if (!recon.all_converged) {
    throw std::invalid_argument(
        "verify_stability_bound: reconstruction did not converge");
  }
  ResidualReport report;
  report.check_name = "bound_" + to_string(kind);
  report.tolerance = tol;
  report.slack = kInf;

  std::optional<double> fixed_point_factor;
  if (kind == BoundKind::eq32 || kind == BoundKind::eq36) {
    const Regime regime =
        kind == BoundKind::eq32 ? Regime::contractive : Regime::expansive;
    const auto lipschitz = contraction_constant(cf, regime);
    if (!lipschitz || !lipschitz->usable) {
      throw std::invalid_argument(
          "verify_stability_bound: no Lipschitz constant < 1 for this bound");
    }
    const double L = lipschitz->chosen;
    fixed_point_factor = kind == BoundKind::eq32 ? L / (2.0 * (1.0 - L))
                                                 : 1.0 / (2.0 * (1.0 - L));
  }

  for (std::size_t i = 0; i < recon.points.size(); ++i) {
    const AlgebraElement& x = recon.points[i];
    const PointReconstruction& pr = recon.per_point[i];
    const double lhs =
        norm(g.evaluate(x) - pr.d_value, recon.norm_kind) +
        norm(h.evaluate(x) - pr.h_value, recon.norm_kind);

    double rhs = 0.0;
    switch (kind) {
      case BoundKind::eq25:
        rhs = sum_contractive_series(cf, x, x, SeriesWeight::two_jm1).total();
        break;
      case BoundKind::eq213:
        rhs = half_expansive_sum(cf, x);
        break;
      case BoundKind::eq32:
      case BoundKind::eq36:
        rhs = *fixed_point_factor * phi(cf, x, x);
        break;
      case BoundKind::cor24:
        rhs = 2.0 * cf.theta / (std::pow(2.0, cf.r) - 2.0) *
              std::pow(norm(x, cf.norm_kind), cf.r);
        break;
      case BoundKind::cor26:
        rhs = 2.0 * cf.theta / (2.0 - std::pow(2.0, cf.r)) *
              std::pow(norm(x, cf.norm_kind), cf.r);
        break;
    }

    BoundRow row;
    row.point_index = static_cast<int>(i);
    row.norm_x = recon.point_norms[i];
    row.lhs = lhs;
    row.rhs = rhs;
    row.slack = rhs - lhs;
    report.rows.push_back(row);
    if (row.slack < report.slack) {
      report.slack = row.slack;
      report.lhs = lhs;
      report.rhs = rhs;
      report.witness.pair_kind = "point";
      report.witness.pair_index = row.point_index;
      report.witness.x = x;
      report.witness.y = x;
      report.witness.norm_x = row.norm_x;
      report.witness.norm_y = row.norm_x;
    }
  }
  report.satisfied = report.slack >= -tol;
  return report;
}

MetricEstimate generalized_metric(const MapFn& g, const MapFn& h,
                                  const MapFn& g1, const MapFn& h1,
                                  const ControlFunction& cf,
                                  const SampleSet& samples) {
  if (samples.points.empty()) {
    throw std::invalid_argument("generalized_metric: samples are empty");
  }
  MetricEstimate estimate;
  estimate.sample_count = static_cast<int>(samples.points.size());
  for (const AlgebraElement& x : samples.points) {
    const double numerator = norm(g(x) - g1(x), samples.norm_kind) +
                             norm(h(x) - h1(x), samples.norm_kind);
    estimate.mu = std::max(estimate.mu, metric_ratio(numerator, phi(cf, x, x)));
  }
  return estimate;
}

MetricEstimate generalized_metric(const MappingModel& g, const MappingModel& h,
                                  const MappingModel& g1,
                                  const MappingModel& h1,
                                  const ControlFunction& cf,
                                  const SampleSet& samples) {
  return generalized_metric(as_fn(g), as_fn(h), as_fn(g1), as_fn(h1), cf,
                            samples);
}

std::pair<MapFn, MapFn> iteration_operator(const MappingModel& g,
                                           const MappingModel& h, Regime regime,
                                           int times) {
  if (times < 0) throw std::invalid_argument("iteration_operator: times >= 0");
  const double scale =
      regime == Regime::contractive ? std::ldexp(1.0, times)
                                    : std::ldexp(1.0, -times);
  const double argument_scale = 1.0 / scale;
  MapFn jg = [g, scale, argument_scale](const AlgebraElement& x) -> AlgebraElement {
    return scale * g.evaluate(argument_scale * x);
  };
  MapFn jh = [h, scale, argument_scale](const AlgebraElement& x) -> AlgebraElement {
    return scale * h.evaluate(argument_scale * x);
  };
  return {std::move(jg), std::move(jh)};
}

CertifiedInstance make_instance(const LinearMap& ground_truth_d,
                                const LinearMap& ground_truth_h,
                                const PerturbationSpec& pert_g,
                                const PerturbationSpec& pert_h,
                                const InequalityParams& params,
                                const SampleSet& calibration_samples,
                                int circle_count,
                                std::optional<double> exponent) {
  validate_params(params);
  if (ground_truth_d.dim != ground_truth_h.dim ||
      ground_truth_d.dim != calibration_samples.dim) {
    throw std::invalid_argument("make_instance: dimension mismatch");
  }
  if (circle_count < 2) {
    throw std::invalid_argument("make_instance: circle_count >= 2");
  }

  // ground-truth hypotheses: H and [D,H] must be derivations
  constexpr double kGroundTruthTol = 1e-8;
  if (derivation_residual(ground_truth_h, calibration_samples) >
      kGroundTruthTol) {
    throw std::invalid_argument("make_instance: H is not a derivation");
  }
  if (derivation_residual(lie_bracket(ground_truth_d, ground_truth_h),
                          calibration_samples) > kGroundTruthTol) {
    throw std::invalid_argument("make_instance: [D,H] is not a derivation");
  }

  // one exponent across the active perturbations, in one regime
  std::optional<double> active_exponent;
  for (const PerturbationSpec* pert : {&pert_g, &pert_h}) {
    if (pert->family == PerturbationFamily::none) continue;
    if (active_exponent && *active_exponent != pert->exponent) {
      throw std::invalid_argument(
          "make_instance: active perturbations must share one exponent");
    }
    active_exponent = pert->exponent;
  }
  if (active_exponent && exponent && *active_exponent != *exponent) {
    throw std::invalid_argument(
        "make_instance: exponent override conflicts with the perturbations");
  }
  const std::optional<double> r_opt =
      active_exponent ? active_exponent : exponent;
  if (!r_opt) {
    throw std::invalid_argument(
        "make_instance: exact instance needs an explicit exponent");
  }
  const double r = *r_opt;
  Regime regime;
  if (r > 2.0) {
    regime = Regime::contractive;
  } else if (r < 1.0) {
    regime = Regime::expansive;
  } else {
    throw std::invalid_argument(
        "make_instance: exponent must satisfy r > 2 or r < 1");
  }

  CertifiedInstance instance;
  instance.g = MappingModel{ground_truth_d, pert_g};
  instance.h = MappingModel{ground_truth_h, pert_h};
  instance.regime = regime;
  instance.params = params;
  instance.ground_truth_d = ground_truth_d;
  instance.ground_truth_h = ground_truth_h;

  // smallest theta making both inequalities hold on the calibration sample:
  // sup over (x, y, lambda) of (lhs - rhs_without_phi) / (|x|^r + |y|^r)
  const NormKind nk = calibration_samples.norm_kind;
  const auto lambdas = sample_unit_circle(circle_count);
  const auto denominator = [&](const AlgebraElement& x,
                               const AlgebraElement& y) {
    return std::pow(norm(x, nk), r) + std::pow(norm(y, nk), r);
  };

  double theta_raw = 0.0;
  const auto bracket = [&](const AlgebraElement& z) -> AlgebraElement {
    return instance.g.evaluate(instance.h.evaluate(z)) -
           instance.h.evaluate(instance.g.evaluate(z));
  };
  for (const PairEntry& entry : build_pair_entries(calibration_samples)) {
    const AlgebraElement& x = entry.x;
    const AlgebraElement& y = entry.y;
    const double den = denominator(x, y);
    const AlgebraElement gx = instance.g.evaluate(x);
    const AlgebraElement gy = instance.g.evaluate(y);
    const AlgebraElement hx = instance.h.evaluate(x);
    const AlgebraElement sum = x + y;
    const AlgebraElement diff = x - y;
    for (const Complex lambda : lambdas) {
      const double lhs =
          norm(instance.g.evaluate(lambda * sum) - lambda * gx - lambda * gy,
               nk) +
          norm(instance.h.evaluate(lambda * sum) +
                   instance.h.evaluate(lambda * diff) - 2.0 * lambda * hx,
               nk);
      const double rhs_st =
          norm(params.s * (2.0 * instance.g.evaluate(lambda * (0.5 * sum)) -
                           lambda * gx - lambda * gy),
               nk) +
          norm(params.t * (2.0 * instance.h.evaluate(lambda * (0.5 * sum)) +
                           2.0 * instance.h.evaluate(lambda * (0.5 * diff)) -
                           2.0 * lambda * hx),
               nk);
      theta_raw = std::max(theta_raw, (lhs - rhs_st) / den);
    }
    const AlgebraElement xy = x * y;
    const double lhs_pair =
        norm(bracket(xy) - bracket(x) * y - x * bracket(y), nk) +
        norm(instance.h.evaluate(xy) - instance.h.evaluate(x) * y -
                 x * instance.h.evaluate(y),
             nk);
    theta_raw = std::max(theta_raw, lhs_pair / den);
  }
  if (!std::isfinite(theta_raw)) {
    throw std::runtime_error("make_instance: calibration diverged");
  }

  instance.theta_raw = theta_raw;
  const double theta =
      theta_raw <= kThetaZeroClamp ? 0.0 : kCalibrationSafety * theta_raw;
  instance.cf = ControlFunction::power_family(theta, r, nk);

  instance.st_certificate =
      residual_st_inequality(instance.g, instance.h, params,
                             calibration_samples, lambdas, instance.cf);
  instance.derivation_certificate = residual_derivation_pair(
      instance.g, instance.h, calibration_samples, instance.cf);
  return instance;
}

std::optional<double> measured_contraction_ratio(
    const std::vector<double>& increments, int skip, double floor) {
  double log_sum = 0.0;
  int count = 0;
  for (std::size_t k = static_cast<std::size_t>(std::max(skip, 1));
       k < increments.size(); ++k) {
    const double previous = increments[k - 1];
    const double current = increments[k];
    if (previous <= floor || current <= floor) continue;
    log_sum += std::log(current / previous);
    ++count;
  }
  if (count < 2) return std::nullopt;
  return std::exp(log_sum / count);
}

}  // namespace derivlab
