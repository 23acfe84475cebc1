#include "derivlab/maps.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace derivlab {

LinearMap LinearMap::zero(int dim) {
  if (dim < 1) throw std::invalid_argument("LinearMap::zero: dim >= 1");
  return LinearMap{dim, Eigen::MatrixXcd::Zero(dim * dim, dim * dim)};
}

LinearMap LinearMap::from_function(int dim, const MapFn& fn) {
  if (dim < 1) throw std::invalid_argument("LinearMap::from_function: dim >= 1");
  LinearMap map{dim, Eigen::MatrixXcd(dim * dim, dim * dim)};
  AlgebraElement basis = AlgebraElement::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    for (int row = 0; row < dim; ++row) {
      basis(row, col) = Complex(1.0, 0.0);
      const AlgebraElement image = fn(basis);
      detail::require_square(image, "LinearMap::from_function");
      if (image.rows() != dim) {
        throw std::invalid_argument(
            "LinearMap::from_function: fn changes dimension");
      }
      map.action.col(row + col * dim) =
          Eigen::Map<const Eigen::VectorXcd>(image.data(), dim * dim);
      basis(row, col) = Complex(0.0, 0.0);
    }
  }
  return map;
}

AlgebraElement LinearMap::apply(const AlgebraElement& x) const {
  detail::require_square(x, "LinearMap::apply");
  if (x.rows() != dim) {
    throw std::invalid_argument("LinearMap::apply: dimension mismatch");
  }
  const Eigen::VectorXcd image =
      action * Eigen::Map<const Eigen::VectorXcd>(x.data(), dim * dim);
  return Eigen::Map<const AlgebraElement>(image.data(), dim, dim);
}

LinearMap inner_derivation(const AlgebraElement& a) {
  detail::require_square(a, "inner_derivation");
  const int dim = static_cast<int>(a.rows());
  return LinearMap::from_function(
      dim, [&a](const AlgebraElement& x) -> AlgebraElement { return a * x - x * a; });
}

LinearMap lie_bracket(const LinearMap& d1, const LinearMap& d2) {
  if (d1.dim != d2.dim) {
    throw std::invalid_argument("lie_bracket: dimension mismatch");
  }
  return LinearMap{d1.dim, d1.action * d2.action - d2.action * d1.action};
}

std::string to_string(PerturbationFamily family) {
  switch (family) {
    case PerturbationFamily::none: return "none";
    case PerturbationFamily::power_norm: return "power_norm";
    case PerturbationFamily::bounded_bump: return "bounded_bump";
  }
  return "unknown";
}

PerturbationFamily perturbation_family_from_string(std::string_view name) {
  if (name == "none") return PerturbationFamily::none;
  if (name == "power_norm") return PerturbationFamily::power_norm;
  if (name == "bounded_bump") return PerturbationFamily::bounded_bump;
  throw std::invalid_argument("unknown perturbation family: " +
                              std::string(name));
}

AlgebraElement PerturbationSpec::eval(const AlgebraElement& x) const {
  detail::require_square(x, "PerturbationSpec::eval");
  if (family == PerturbationFamily::none) {
    return zero_element(static_cast<int>(x.rows()));
  }
  if (x.isZero(0.0)) return zero_element(static_cast<int>(x.rows()));
  const double magnitude = norm(x, norm_kind);
  double scale = amplitude * std::pow(magnitude, exponent);
  if (family == PerturbationFamily::bounded_bump) {
    scale = amplitude * std::min(std::pow(magnitude, exponent), cap);
  }
  return scale * direction;
}

AlgebraElement MappingModel::evaluate(const AlgebraElement& x) const {
  detail::require_square(x, "MappingModel::evaluate");
  if (x.rows() != linear_part.dim) {
    throw std::invalid_argument("MappingModel::evaluate: dimension mismatch");
  }
  if (x.isZero(0.0)) return zero_element(linear_part.dim);
  if (is_exact()) return linear_part.apply(x);
  return linear_part.apply(x) + perturbation.eval(x);
}

InequalityParams make_inequality_params(Complex s, Complex t) {
  const double abs_s = std::abs(s);
  const double abs_t = std::abs(t);
  if (!(abs_s > 0.0 && abs_s < 1.0)) {
    throw std::invalid_argument("InequalityParams: need 0 < |s| < 1");
  }
  if (!(abs_t > 0.0 && abs_t < 1.0)) {
    throw std::invalid_argument("InequalityParams: need 0 < |t| < 1");
  }
  return InequalityParams{s, t};
}

MapFn as_fn(const LinearMap& map) {
  return [map](const AlgebraElement& x) { return map.apply(x); };
}

MapFn as_fn(const MappingModel& model) {
  return [model](const AlgebraElement& x) { return model.evaluate(x); };
}

double derivation_residual(const MapFn& f, const SampleSet& samples) {
  if (samples.pair_points.empty()) {
    throw std::invalid_argument("derivation_residual: samples are empty");
  }
  double worst = 0.0;
  for (const auto& [a, b] : samples.pair_points) {
    const AlgebraElement defect = f(a * b) - f(a) * b - a * f(b);
    worst = std::max(worst, norm(defect, samples.norm_kind));
  }
  return worst;
}

double derivation_residual(const LinearMap& f, const SampleSet& samples) {
  return derivation_residual(as_fn(f), samples);
}

double derivation_residual(const MappingModel& f, const SampleSet& samples) {
  return derivation_residual(as_fn(f), samples);
}

LinearityResidual linearity_residual(const MapFn& f, const SampleSet& samples,
                                     int circle_count) {
  if (circle_count < 2) {
    throw std::invalid_argument("linearity_residual: circle_count >= 2");
  }
  LinearityResidual res;
  for (const auto& [x, y] : samples.pair_points) {
    const AlgebraElement defect = f(x + y) - f(x) - f(y);
    res.add_res = std::max(res.add_res, norm(defect, samples.norm_kind));
  }
  const auto lambdas = sample_unit_circle(circle_count);
  for (const auto& x : samples.points) {
    const AlgebraElement fx = f(x);
    for (const Complex lambda : lambdas) {
      const AlgebraElement defect = f(lambda * x) - lambda * fx;
      res.hom_res = std::max(res.hom_res, norm(defect, samples.norm_kind));
    }
  }
  return res;
}

LinearityResidual linearity_residual(const LinearMap& f,
                                     const SampleSet& samples,
                                     int circle_count) {
  return linearity_residual(as_fn(f), samples, circle_count);
}

LinearityResidual linearity_residual(const MappingModel& f,
                                     const SampleSet& samples,
                                     int circle_count) {
  return linearity_residual(as_fn(f), samples, circle_count);
}

}  // namespace derivlab
