#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace derivlab {

using Complex = std::complex<double>;

/// An element of the matrix algebra M_n(C): a square complex matrix.
/// Operations validate squareness and dimension agreement at their boundary.
using AlgebraElement = Eigen::MatrixXcd;

/// Dimensions above this are rejected by the experiment layer; all
/// identities are dimension-independent and small n keeps suites fast.
inline constexpr int kDimSoftCap = 16;

enum class NormKind {
  frobenius,  // sqrt(sum |entries|^2)
  operator2,  // largest singular value
};

std::string to_string(NormKind kind);
NormKind norm_kind_from_string(std::string_view name);

AlgebraElement zero_element(int dim);
AlgebraElement identity_element(int dim);

/// Matrix product. Throws std::invalid_argument on dimension mismatch.
AlgebraElement mul(const AlgebraElement& x, const AlgebraElement& y);

/// Both kinds are submultiplicative and absolutely homogeneous.
double norm(const AlgebraElement& x, NormKind kind = NormKind::frobenius);

/// The count-th roots of unity exp(2*pi*i*j/count), j = 0..count-1.
std::vector<Complex> sample_unit_circle(int count);

/// Deterministic nonzero sample points; pairs are independent draws.
struct SampleSet {
  std::uint64_t seed = 0;
  int dim = 0;
  double radius = 0.0;
  NormKind norm_kind = NormKind::frobenius;
  std::vector<AlgebraElement> points;
  std::vector<std::pair<AlgebraElement, AlgebraElement>> pair_points;
};

/// Draws `count` points and `count` independent pairs, every element
/// rescaled to a norm in (0, radius]. Regeneration from the same arguments
/// is bit-for-bit identical. The zero element is never produced; callers
/// that need it pass it explicitly.
SampleSet generate_samples(std::uint64_t seed, int dim, int count,
                           double radius,
                           NormKind kind = NormKind::frobenius);

/// One random element of unit norm (perturbation directions).
AlgebraElement random_unit_element(std::uint64_t seed, int dim,
                                   NormKind kind = NormKind::frobenius);

namespace detail {
void require_square(const AlgebraElement& x, const char* what);
void require_same_dim(const AlgebraElement& x, const AlgebraElement& y,
                      const char* what);
}  // namespace detail

}  // namespace derivlab
