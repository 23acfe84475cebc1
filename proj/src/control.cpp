#include "derivlab/control.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace derivlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(Regime regime) {
  return regime == Regime::contractive ? "contractive" : "expansive";
}

Regime regime_from_string(std::string_view name) {
  if (name == "contractive") return Regime::contractive;
  if (name == "expansive") return Regime::expansive;
  throw std::invalid_argument("unknown regime: " + std::string(name));
}

ControlFunction ControlFunction::power_family(double theta, double r,
                                              NormKind kind) {
  if (theta < 0.0) {
    throw std::invalid_argument("ControlFunction: theta must be >= 0");
  }
  ControlFunction cf;
  cf.family = ControlFamily::power;
  cf.theta = theta;
  cf.r = r;
  cf.norm_kind = kind;
  return cf;
}

ControlFunction ControlFunction::custom_family(
    std::function<double(const AlgebraElement&, const AlgebraElement&)> fn,
    std::optional<double> halving_ratio, std::optional<double> doubling_ratio) {
  ControlFunction cf;
  cf.family = ControlFamily::custom_tabulated;
  cf.custom = std::move(fn);
  cf.custom_halving_ratio = halving_ratio;
  cf.custom_doubling_ratio = doubling_ratio;
  return cf;
}

double phi(const ControlFunction& cf, const AlgebraElement& x,
           const AlgebraElement& y) {
  if (cf.family == ControlFamily::custom_tabulated) {
    const double value = cf.custom(x, y);
    if (value < 0.0) throw std::domain_error("phi: custom value < 0");
    return value;
  }
  if (cf.theta == 0.0) return 0.0;
  const double nx = norm(x, cf.norm_kind);
  const double ny = norm(y, cf.norm_kind);
  if (cf.r < 0.0 && (nx == 0.0 || ny == 0.0)) {
    throw std::domain_error("phi: zero argument with negative exponent");
  }
  // 0^0 = 1 by std::pow; acceptable here since r >= 0 and phi(0,0) = 0
  // is only promised for r > 0
  const double px = nx == 0.0 && cf.r == 0.0 ? 1.0 : std::pow(nx, cf.r);
  const double py = ny == 0.0 && cf.r == 0.0 ? 1.0 : std::pow(ny, cf.r);
  return cf.theta * (px + py);
}

namespace {

struct TermStream {
  // produces w(j) * phi evaluated at the j-th rescaled arguments
  AlgebraElement x, y;
  double weight;        // current w(j)
  double weight_factor; // w(j+1)/w(j)
  bool halving;         // argument update direction

  double term(const ControlFunction& cf) const { return weight * phi(cf, x, y); }

  void advance() {
    if (halving) {
      x *= 0.5;
      y *= 0.5;
    } else {
      x *= 2.0;
      y *= 2.0;
    }
    weight *= weight_factor;
  }
};

// Shared summation loop. `ratio` is the exact per-term ratio when known
// (power family, or a caller-supplied bound for custom functions).
SeriesResult sum_series(const ControlFunction& cf, TermStream stream,
                        std::optional<double> ratio) {
  SeriesResult result;

  if (cf.family == ControlFamily::power && cf.theta == 0.0) {
    result.converged = true;
    return result;
  }

  const bool has_tail = ratio.has_value() && *ratio < 1.0;
  result.converged = has_tail;

  for (int j = 0; j < kSeriesMaxTerms; ++j) {
    const double term = stream.term(cf);
    result.partial_sum += term;
    ++result.terms_used;
    if (!std::isfinite(result.partial_sum)) {
      result.converged = false;
      result.tail_bound = kInf;
      return result;
    }
    if (has_tail) {
      // exact geometric remainder: term * q / (1 - q)
      result.tail_bound = term * *ratio / (1.0 - *ratio);
      if (result.tail_bound <
          kSeriesTailRel * std::max(1.0, result.partial_sum)) {
        return result;
      }
    }
    stream.advance();
  }
  if (!has_tail) result.tail_bound = kInf;
  return result;
}

std::optional<double> power_ratio(const ControlFunction& cf, double exponent) {
  if (cf.family == ControlFamily::power) return std::pow(2.0, exponent);
  return std::nullopt;
}

}  // namespace

SeriesResult sum_contractive_series(const ControlFunction& cf,
                                    const AlgebraElement& x,
                                    const AlgebraElement& y,
                                    SeriesWeight weight) {
  detail::require_same_dim(x, y, "sum_contractive_series");
  TermStream stream;
  stream.x = 0.5 * x;  // j = 1 term
  stream.y = 0.5 * y;
  stream.halving = true;
  if (weight == SeriesWeight::four_j) {
    stream.weight = 4.0;
    stream.weight_factor = 4.0;
  } else {
    stream.weight = 1.0;  // 2^{j-1} at j = 1
    stream.weight_factor = 2.0;
  }

  std::optional<double> ratio;
  if (cf.family == ControlFamily::power) {
    ratio = power_ratio(cf, (weight == SeriesWeight::four_j ? 2.0 : 1.0) - cf.r);
  } else if (cf.custom_halving_ratio) {
    ratio = stream.weight_factor * *cf.custom_halving_ratio;
  }
  return sum_series(cf, std::move(stream), ratio);
}

SeriesResult sum_expansive_series(const ControlFunction& cf,
                                  const AlgebraElement& x,
                                  const AlgebraElement& y) {
  detail::require_same_dim(x, y, "sum_expansive_series");
  TermStream stream;
  stream.x = x;  // j = 0 term
  stream.y = y;
  stream.halving = false;
  stream.weight = 1.0;
  stream.weight_factor = 0.5;

  std::optional<double> ratio;
  if (cf.family == ControlFamily::power) {
    ratio = power_ratio(cf, cf.r - 1.0);
  } else if (cf.custom_doubling_ratio) {
    ratio = 0.5 * *cf.custom_doubling_ratio;
  }
  return sum_series(cf, std::move(stream), ratio);
}

double half_expansive_sum(const ControlFunction& cf, const AlgebraElement& x) {
  return 0.5 * sum_expansive_series(cf, x, x).total();
}

std::optional<LipschitzConstant> contraction_constant(const ControlFunction& cf,
                                                      Regime regime) {
  LipschitzConstant lc;
  lc.regime = regime;
  if (cf.family == ControlFamily::power) {
    if (regime == Regime::contractive) {
      lc.smallest = std::pow(2.0, 2.0 - cf.r);
      lc.corollary = std::pow(2.0, 1.0 - cf.r);
      lc.chosen = lc.smallest;
      lc.corollary_mismatch = true;  // corollary value violates the condition
    } else {
      lc.smallest = std::pow(2.0, cf.r - 2.0);
      lc.corollary = std::pow(2.0, cf.r - 1.0);
      lc.chosen = lc.corollary;
      lc.corollary_mismatch = false;
    }
    lc.usable = lc.chosen < 1.0;
    return lc;
  }
  // custom: only available with a caller-supplied ratio bound
  const std::optional<double>& ratio = regime == Regime::contractive
                                           ? cf.custom_halving_ratio
                                           : cf.custom_doubling_ratio;
  if (!ratio) return std::nullopt;
  lc.smallest = regime == Regime::contractive ? 4.0 * *ratio : *ratio / 4.0;
  lc.corollary = lc.smallest;
  lc.chosen = lc.smallest;
  lc.usable = lc.chosen < 1.0;
  return lc;
}

}  // namespace derivlab
