#include "derivlab/algebra.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "derivlab/rng.hpp"

namespace derivlab {

namespace detail {

void require_square(const AlgebraElement& x, const char* what) {
  if (x.rows() < 1 || x.rows() != x.cols()) {
    throw std::invalid_argument(std::string(what) +
                                ": element must be a square matrix of dim >= 1");
  }
}

void require_same_dim(const AlgebraElement& x, const AlgebraElement& y,
                      const char* what) {
  require_square(x, what);
  require_square(y, what);
  if (x.rows() != y.rows()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(x.rows()) + " vs " +
                                std::to_string(y.rows()) + ")");
  }
}

}  // namespace detail

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::frobenius: return "frobenius";
    case NormKind::operator2: return "operator2";
  }
  return "unknown";
}

NormKind norm_kind_from_string(std::string_view name) {
  if (name == "frobenius") return NormKind::frobenius;
  if (name == "operator2") return NormKind::operator2;
  throw std::invalid_argument("unknown norm kind: " + std::string(name));
}

AlgebraElement zero_element(int dim) {
  if (dim < 1) throw std::invalid_argument("zero_element: dim must be >= 1");
  return AlgebraElement::Zero(dim, dim);
}

AlgebraElement identity_element(int dim) {
  if (dim < 1) throw std::invalid_argument("identity_element: dim must be >= 1");
  return AlgebraElement::Identity(dim, dim);
}

AlgebraElement mul(const AlgebraElement& x, const AlgebraElement& y) {
  detail::require_same_dim(x, y, "mul");
  return x * y;
}

double norm(const AlgebraElement& x, NormKind kind) {
  detail::require_square(x, "norm");
  switch (kind) {
    case NormKind::frobenius:
      return x.norm();
    case NormKind::operator2: {
      Eigen::JacobiSVD<AlgebraElement> svd(x);
      return svd.singularValues()(0);
    }
  }
  throw std::invalid_argument("norm: unknown kind");
}

std::vector<Complex> sample_unit_circle(int count) {
  if (count < 1) throw std::invalid_argument("sample_unit_circle: count >= 1");
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const double angle = 2.0 * std::numbers::pi * j / count;
    out.emplace_back(std::cos(angle), std::sin(angle));
  }
  return out;
}

namespace {

AlgebraElement draw_scaled_element(Xoshiro256pp& rng, int dim, double radius,
                                   NormKind kind) {
  AlgebraElement x(dim, dim);
  for (;;) {
    for (int col = 0; col < dim; ++col) {
      for (int row = 0; row < dim; ++row) {
        const double re = rng.uniform_symmetric();
        const double im = rng.uniform_symmetric();
        x(row, col) = Complex(re, im);
      }
    }
    const double current = norm(x, kind);
    if (current > 0.0) {
      // target in (0, radius]; 1 - uniform01() never hits zero
      const double target = radius * (1.0 - rng.uniform01());
      x *= (target / current);
      return x;
    }
  }
}

}  // namespace

SampleSet generate_samples(std::uint64_t seed, int dim, int count,
                           double radius, NormKind kind) {
  if (dim < 1) throw std::invalid_argument("generate_samples: dim >= 1");
  if (count < 1) throw std::invalid_argument("generate_samples: count >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("generate_samples: radius > 0");

  SampleSet set;
  set.seed = seed;
  set.dim = dim;
  set.radius = radius;
  set.norm_kind = kind;
  set.points.reserve(static_cast<std::size_t>(count));
  set.pair_points.reserve(static_cast<std::size_t>(count));

  Xoshiro256pp rng(seed);
  for (int i = 0; i < count; ++i) {
    set.points.push_back(draw_scaled_element(rng, dim, radius, kind));
  }
  for (int i = 0; i < count; ++i) {
    AlgebraElement first = draw_scaled_element(rng, dim, radius, kind);
    AlgebraElement second = draw_scaled_element(rng, dim, radius, kind);
    set.pair_points.emplace_back(std::move(first), std::move(second));
  }
  return set;
}

AlgebraElement random_unit_element(std::uint64_t seed, int dim, NormKind kind) {
  Xoshiro256pp rng(seed);
  AlgebraElement u = draw_scaled_element(rng, dim, 1.0, kind);
  return u / norm(u, kind);
}

}  // namespace derivlab
