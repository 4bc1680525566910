#pragma once

#include <cstdint>

#include "refgeo/feature_matrix.hpp"
#include "refgeo/geometry.hpp"

namespace refgeo::toy {

/// Reference x ~ N(0, P) with P = diag(1 x r, 0 x (D-r)); generated
/// x + eps with eps ~ N(0, lambda^2 I).
struct ToyConfig {
  std::size_t dim = 16;
  std::size_t rank = 8;
  double lambda = 0.5;
  std::size_t n = 50000;
  std::uint64_t seed = 0;
  std::size_t k = geometry::kDefaultDensityK;

  /// Throws ArgumentError unless 0 < rank <= dim, n >= 2, lambda >= 0.
  void validate() const;
};

struct ToyReport {
  ToyConfig config;
  double empirical_frechet = 0.0;
  double analytic_w2 = 0.0;
  double rel_error = 0.0;  ///< |empirical - analytic| / analytic (absolute when analytic = 0)
  double erank = 0.0;
  double erank_rel_error = 0.0;  ///< |erank - r| / r
  double density = 0.0;
};

FeatureMatrix sample_reference(const ToyConfig& c);

/// Adds i.i.d. N(0, lambda^2) noise to every entry; lambda = 0 returns ref unchanged.
FeatureMatrix sample_generated(const FeatureMatrix& ref, double lambda, std::uint64_t seed);

/// Samples both sets and compares the fitted Fréchet distance with the
/// closed form; also reports erank and mean kNN log-density of the
/// reference. Requires n >= 1000.
ToyReport verify_toy(const ToyConfig& c);

}  // namespace refgeo::toy
