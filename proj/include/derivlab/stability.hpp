#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "derivlab/algebra.hpp"
#include "derivlab/control.hpp"
#include "derivlab/maps.hpp"

namespace derivlab {

inline constexpr double kDefaultTol = 1e-10;
inline constexpr int kDefaultKMax = 60;
inline constexpr double kCalibrationSafety = 1.05;
// calibrated theta at or below this is floating-point dust from an exact
// instance and is clamped to zero
inline constexpr double kThetaZeroClamp = 1e-13;

/// Where the worst slack of a quantified check occurred.
/// pair_kind: "pair" (pair_points[i]), "diag" ((p_i, p_i)) or
/// "antidiag" ((p_i, -p_i)); the diagonal cases are the degenerate points
/// every for-all check also visits.
struct Witness {
  std::string pair_kind = "pair";
  int pair_index = -1;
  int lambda_index = -1;
  Complex lambda{1.0, 0.0};
  AlgebraElement x, y;
  double norm_x = 0.0;
  double norm_y = 0.0;
};

struct BoundRow {
  int point_index = -1;
  double norm_x = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
};

/// Outcome of one inequality check over a sample. lhs/rhs are the values at
/// the worst-slack evaluation; slack is the minimum of rhs - lhs; satisfied
/// means slack >= -tolerance everywhere.
struct ResidualReport {
  std::string check_name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool satisfied = false;
  double tolerance = kDefaultTol;
  Witness witness;
  std::vector<BoundRow> rows;  // per-point rows (bound checks only)
};

enum class ReconstructionMethod { direct, fixed_point };

std::string to_string(ReconstructionMethod method, Regime regime);

struct PointReconstruction {
  AlgebraElement d_value;  // recovered D(x)
  AlgebraElement h_value;  // recovered H(x)
  int iterations = 0;
  bool converged = false;
  double residual_final = 0.0;        // last Cauchy increment |dD| + |dH|
  std::vector<double> increments;     // increment history per iteration
  double deviation = 0.0;             // |g(x)-D(x)| + |h(x)-H(x)|
  double bound_value = 0.0;           // method's a-priori bound at this point
  bool bound_satisfied = true;
};

struct ReconstructionResult {
  ReconstructionMethod method = ReconstructionMethod::direct;
  Regime regime = Regime::contractive;
  NormKind norm_kind = NormKind::frobenius;
  double tol = kDefaultTol;
  int k_max = kDefaultKMax;
  std::vector<AlgebraElement> points;
  std::vector<double> point_norms;
  std::vector<PointReconstruction> per_point;
  bool all_converged = false;
  bool has_bounds = false;  // deviation/bound fields populated

  // fixed-point method only
  double lipschitz = 0.0;
  std::vector<double> metric_increments;  // d(J^n, J^{n+1}) estimates
  double metric_d0 = 0.0;                 // d((g,h), J(g,h)) estimate
  double metric_final_distance = 0.0;     // d((g,h), (D,H)) estimate
  bool aposteriori_ok = true;             // final <= d0 / (1 - L)
};

/// Sample lower bound of the generalized metric
/// d((g,h),(g1,h1)) = inf{ mu : |g-g1| + |h-h1| <= mu * phi(x,x) }.
struct MetricEstimate {
  double mu = 0.0;  // +inf when some point has phi = 0 but a nonzero gap
  int sample_count = 0;
  bool infinite() const;
};

struct CertifiedInstance {
  MappingModel g;
  MappingModel h;
  ControlFunction cf;
  Regime regime = Regime::contractive;
  InequalityParams params;
  LinearMap ground_truth_d;
  LinearMap ground_truth_h;
  double theta_raw = 0.0;  // calibrated sup before the safety factor
  ResidualReport st_certificate;
  ResidualReport derivation_certificate;
};

/// Checks the additive-additive (s,t) inequality: for every sampled
/// (x, y, lambda),
///   |g(l(x+y)) - l g(x) - l g(y)| + |h(l(x+y)) + h(l(x-y)) - 2 l h(x)|
///     <= |s (2 g(l(x+y)/2) - l g(x) - l g(y))|
///      + |t (2 h(l(x+y)/2) + 2 h(l(x-y)/2) - 2 l h(x))| + phi(x, y).
/// Without a control function the exact inequality is checked at lambda = 1
/// only. Pairs visited: samples.pair_points plus (p, p) and (p, -p).
ResidualReport residual_st_inequality(const MappingModel& g,
                                      const MappingModel& h,
                                      const InequalityParams& params,
                                      const SampleSet& samples,
                                      const std::vector<Complex>& lambdas,
                                      const std::optional<ControlFunction>& cf,
                                      double tol = kDefaultTol);

/// Checks the derivation-pair inequality: for every sampled (x, y),
///   |[g,h](xy) - [g,h](x) y - x [g,h](y)| + |h(xy) - h(x) y - x h(y)|
///     <= phi(x, y),
/// with [g,h](z) = g(h(z)) - h(g(z)) by direct composition.
ResidualReport residual_derivation_pair(const MappingModel& g,
                                        const MappingModel& h,
                                        const SampleSet& samples,
                                        const ControlFunction& cf,
                                        double tol = kDefaultTol);

/// One map's scaling limit at one point:
///   contractive: 2^k f(x / 2^k), expansive: 2^-k f(2^k x).
/// Scale factors are exact powers of two. Stops after two consecutive
/// increments below tol (an exactly zero increment converges immediately)
/// or at k_max.
struct PointTrace {
  AlgebraElement value;
  int iterations = 0;
  bool converged = false;
  std::vector<double> increments;
};
PointTrace reconstruct_point(const MapFn& f, Regime regime,
                             const AlgebraElement& x, NormKind norm_kind,
                             double tol = kDefaultTol, int k_max = kDefaultKMax);

/// Recovers (D, H) at every sample point by the scaling limits of g and h.
/// Convergence is judged on the combined increment |dD| + |dH|. When a
/// control function is supplied, per-point deviations and the telescoped
/// a-priori bound (halving: sum 2^{j-1} phi(x/2^j, x/2^j); doubling: half
/// the doubling sum) are also recorded.
ReconstructionResult direct_reconstruct(
    const MappingModel& g, const MappingModel& h, Regime regime,
    const SampleSet& points, double tol = kDefaultTol, int k_max = kDefaultKMax,
    const std::optional<ControlFunction>& cf = std::nullopt);

/// Recovers (D, H) as the fixed point of J(g,h)(x) = (2g(x/2), 2h(x/2))
/// (contractive) or (g(2x)/2, h(2x)/2) (expansive), iterated pointwise.
/// Stops when the generalized-metric increment estimate falls below
/// tol * (1 - L) twice in a row, which caps the remaining fixed-point
/// distance at tol. Records the a-priori bound L/(2(1-L)) * phi(x,x)
/// (contractive) or 1/(2(1-L)) * phi(x,x) (expansive) per point.
/// Throws std::invalid_argument when no usable L < 1 exists for the regime.
ReconstructionResult fixed_point_reconstruct(const MappingModel& g,
                                             const MappingModel& h,
                                             const ControlFunction& cf,
                                             Regime regime,
                                             const SampleSet& points,
                                             double tol = kDefaultTol,
                                             int k_max = kDefaultKMax);

enum class BoundKind { eq25, eq213, eq32, eq36, cor24, cor26 };

std::string to_string(BoundKind kind);
BoundKind bound_kind_from_string(std::string_view name);

/// Per reconstructed point: lhs = |g(x)-D(x)| + |h(x)-H(x)| against the
/// selected bound. Requires the reconstruction to have converged.
///   eq25:  sum_{j>=1} 2^{j-1} phi(x/2^j, x/2^j)
///   eq213: half the doubling sum at (x, x)
///   eq32:  L/(2(1-L)) phi(x,x),  L the halving-condition constant
///   eq36:  1/(2(1-L)) phi(x,x),  L the doubling corollary constant
///   cor24: 2 theta / (2^r - 2) |x|^r
///   cor26: 2 theta / (2 - 2^r) |x|^r
ResidualReport verify_stability_bound(const MappingModel& g,
                                      const MappingModel& h,
                                      const ReconstructionResult& recon,
                                      const ControlFunction& cf,
                                      BoundKind kind,
                                      double tol = kDefaultTol);

/// Sampled sup of (|g(x)-g1(x)| + |h(x)-h1(x)|) / phi(x,x); a lower bound
/// of the true generalized metric.
MetricEstimate generalized_metric(const MapFn& g, const MapFn& h,
                                  const MapFn& g1, const MapFn& h1,
                                  const ControlFunction& cf,
                                  const SampleSet& samples);
MetricEstimate generalized_metric(const MappingModel& g, const MappingModel& h,
                                  const MappingModel& g1,
                                  const MappingModel& h1,
                                  const ControlFunction& cf,
                                  const SampleSet& samples);

/// The iteration operator J applied n times, as evaluable maps.
std::pair<MapFn, MapFn> iteration_operator(const MappingModel& g,
                                           const MappingModel& h, Regime regime,
                                           int times = 1);

/// Builds g = D + pert_g, h = H + pert_h and calibrates the smallest theta
/// (times a 5% safety factor) making both inequalities hold on the
/// calibration sample; certifies the result on that sample.
///
/// Preconditions checked: H and [D,H] are derivations (residual on the
/// calibration pairs), active perturbations share one exponent, and that
/// exponent lies in one regime (r > 2 or r < 1). `exponent` must be given
/// when both perturbations are `none` (there is nothing to infer it from).
CertifiedInstance make_instance(const LinearMap& ground_truth_d,
                                const LinearMap& ground_truth_h,
                                const PerturbationSpec& pert_g,
                                const PerturbationSpec& pert_h,
                                const InequalityParams& params,
                                const SampleSet& calibration_samples,
                                int circle_count = 8,
                                std::optional<double> exponent = std::nullopt);

/// Geometric mean of successive increment ratios, skipping the first `skip`
/// iterations and ignoring increments at or below `floor`. Empty when fewer
/// than two usable ratios remain.
std::optional<double> measured_contraction_ratio(
    const std::vector<double>& increments, int skip = 3, double floor = 1e-13);

}  // namespace derivlab
