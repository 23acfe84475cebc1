#pragma once

#include <functional>
#include <limits>
#include <string>
#include <string_view>

#include "derivlab/algebra.hpp"

namespace derivlab {

/// Any evaluable map A -> A.
using MapFn = std::function<AlgebraElement(const AlgebraElement&)>;

/// An exactly C-linear operator on M_n(C), stored as an n^2 x n^2 matrix
/// acting on column-vectorized elements. Additivity and C-homogeneity hold
/// by representation; the ground truth of every experiment is one of these.
struct LinearMap {
  int dim = 0;
  Eigen::MatrixXcd action;  // n^2 x n^2

  static LinearMap zero(int dim);
  /// Assembles the matrix column by column from the map's action on the
  /// elementary basis; exact for any linear fn.
  static LinearMap from_function(int dim, const MapFn& fn);

  AlgebraElement apply(const AlgebraElement& x) const;
};

/// x |-> ax - xa.
LinearMap inner_derivation(const AlgebraElement& a);

/// d1 o d2 - d2 o d1. Derivations are closed under this bracket.
LinearMap lie_bracket(const LinearMap& d1, const LinearMap& d2);

enum class PerturbationFamily { none, power_norm, bounded_bump };

std::string to_string(PerturbationFamily family);
PerturbationFamily perturbation_family_from_string(std::string_view name);

/// Rank-one analytic perturbation p(x) along a fixed unit direction:
///   power_norm:   p(x) = c * |x|^r * u
///   bounded_bump: p(x) = c * min(|x|^r, cap) * u
/// The fixed direction makes the reconstruction limit analytically known.
struct PerturbationSpec {
  PerturbationFamily family = PerturbationFamily::none;
  double amplitude = 0.0;  // c
  double exponent = 0.0;   // r
  double cap = std::numeric_limits<double>::infinity();
  AlgebraElement direction;  // unit norm under norm_kind
  NormKind norm_kind = NormKind::frobenius;

  AlgebraElement eval(const AlgebraElement& x) const;
};

/// g = exact linear part + perturbation; evaluate(0) = 0 always holds.
struct MappingModel {
  LinearMap linear_part;
  PerturbationSpec perturbation;

  int dim() const { return linear_part.dim; }
  AlgebraElement evaluate(const AlgebraElement& x) const;
  bool is_exact() const {
    return perturbation.family == PerturbationFamily::none;
  }
};

/// The fixed scalars of the functional inequality; both strictly inside
/// the punctured unit disc.
struct InequalityParams {
  Complex s;
  Complex t;
};

/// Validates 0 < |s| < 1 and 0 < |t| < 1.
InequalityParams make_inequality_params(Complex s, Complex t);

MapFn as_fn(const LinearMap& map);
MapFn as_fn(const MappingModel& model);

/// max over sampled pairs (a,b) of |f(ab) - f(a)b - a f(b)|.
double derivation_residual(const MapFn& f, const SampleSet& samples);
double derivation_residual(const LinearMap& f, const SampleSet& samples);
double derivation_residual(const MappingModel& f, const SampleSet& samples);

struct LinearityResidual {
  double add_res = 0.0;  // max |f(x+y) - f(x) - f(y)|
  double hom_res = 0.0;  // max over unit-circle lambda of |f(lambda x) - lambda f(x)|
};

LinearityResidual linearity_residual(const MapFn& f, const SampleSet& samples,
                                     int circle_count);
LinearityResidual linearity_residual(const LinearMap& f,
                                     const SampleSet& samples,
                                     int circle_count);
LinearityResidual linearity_residual(const MappingModel& f,
                                     const SampleSet& samples,
                                     int circle_count);

}  // namespace derivlab
