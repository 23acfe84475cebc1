#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "derivlab/algebra.hpp"

namespace derivlab {

enum class Regime { contractive, expansive };

std::string to_string(Regime regime);
Regime regime_from_string(std::string_view name);

enum class ControlFamily { power, custom_tabulated };

/// Control function phi(x,y) bounding the inequality residuals.
/// The power family is phi(x,y) = theta * (|x|^r + |y|^r); it is the only
/// family with rigorous geometric tails. Custom functions may supply their
/// own per-term ratio bounds; without one, series over them are truncated
/// at a fixed depth and flagged non-convergent.
struct ControlFunction {
  ControlFamily family = ControlFamily::power;
  double theta = 0.0;
  double r = 0.0;
  NormKind norm_kind = NormKind::frobenius;

  std::function<double(const AlgebraElement&, const AlgebraElement&)> custom;
  std::optional<double> custom_halving_ratio;   // sup phi(x/2,y/2)/phi(x,y)
  std::optional<double> custom_doubling_ratio;  // sup phi(2x,2y)/phi(x,y)

  static ControlFunction power_family(double theta, double r,
                                      NormKind kind = NormKind::frobenius);
  static ControlFunction custom_family(
      std::function<double(const AlgebraElement&, const AlgebraElement&)> fn,
      std::optional<double> halving_ratio = std::nullopt,
      std::optional<double> doubling_ratio = std::nullopt);
};

/// phi(x,y). For the power family with r < 0 a zero argument is a domain
/// error (|0|^r diverges).
double phi(const ControlFunction& cf, const AlgebraElement& x,
           const AlgebraElement& y);

enum class SeriesWeight {
  four_j,   // sum_{j>=1} 4^j     phi(x/2^j, y/2^j)  -- summability condition
  two_jm1,  // sum_{j>=1} 2^{j-1} phi(x/2^j, y/2^j)  -- stability bound
};

/// Truncation policy: stop once the geometric tail drops below
/// kSeriesTailRel * max(1, partial_sum), or at kSeriesMaxTerms.
inline constexpr int kSeriesMaxTerms = 200;
inline constexpr double kSeriesTailRel = 1e-12;

struct SeriesResult {
  double partial_sum = 0.0;
  double tail_bound = 0.0;  // +inf marker when no rigorous tail exists
  int terms_used = 0;
  bool converged = false;

  /// partial_sum + tail_bound. For the power family the tail is the exact
  /// geometric remainder, so this equals the true sum up to roundoff.
  double total() const { return partial_sum + tail_bound; }
};

/// Terms w(j) * phi(x/2^j, y/2^j), j >= 1. Power-family term ratio is
/// 2^{2-r} (four_j) or 2^{1-r} (two_jm1); converged iff the ratio is < 1.
SeriesResult sum_contractive_series(const ControlFunction& cf,
                                    const AlgebraElement& x,
                                    const AlgebraElement& y,
                                    SeriesWeight weight);

/// Terms 2^{-j} * phi(2^j x, 2^j y), j >= 0. Power-family term ratio is
/// 2^{r-1}; converged iff r < 1.
SeriesResult sum_expansive_series(const ControlFunction& cf,
                                  const AlgebraElement& x,
                                  const AlgebraElement& y);

/// Half of the expansive sum at y = x; the a-priori bound of the
/// doubling-direction reconstruction.
double half_expansive_sum(const ControlFunction& cf, const AlgebraElement& x);

/// Lipschitz data of the iteration operator J on the pair space.
///
/// `smallest` is the least L satisfying the halving condition
/// phi(x/2,y/2) <= (L/4) phi(x,y) (contractive, L = 2^{2-r}) or the
/// doubling condition phi(x,y) <= 4L phi(x/2,y/2) (expansive, L = 2^{r-2}).
/// `corollary` is the constant the closed-form power bounds are derived
/// with (2^{1-r} resp. 2^{r-1}). In the contractive regime the two differ
/// by a factor of 2 and the corollary value does not satisfy the halving
/// condition; reports surface both and flag the mismatch. `chosen` is what
/// the fixed-point solver uses: `smallest` when contracting, `corollary`
/// when expanding (where it is the valid one).
struct LipschitzConstant {
  Regime regime = Regime::contractive;
  double smallest = 0.0;
  double corollary = 0.0;
  double chosen = 0.0;
  bool usable = false;  // chosen < 1
  bool corollary_mismatch = false;
};

/// None for custom functions without ratio bounds; theta never enters.
std::optional<LipschitzConstant> contraction_constant(const ControlFunction& cf,
                                                      Regime regime);

}  // namespace derivlab
