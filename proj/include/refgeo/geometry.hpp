#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "refgeo/feature_matrix.hpp"

namespace refgeo::geometry {

inline constexpr std::size_t kDefaultDensityK = 80;

struct GeometryDescriptors {
  double mean_knn_log_density = 0.0;  ///< <-log d_k>, natural log
  double effective_rank = 0.0;
  std::size_t k = 0;
  std::size_t n = 0;
};

/// Euclidean distance from every row to its k-th nearest other row (self
/// excluded, exact). Requires 1 <= k <= n-1.
std::vector<double> knn_distances(const FeatureMatrix& m, std::size_t k);

/// (1/n) sum_i -log d_k(x_i). Throws DegenerateError naming a pair of
/// coincident rows when some d_k is zero.
double mean_knn_log_density(const FeatureMatrix& m, std::size_t k = kDefaultDensityK);

/// Singular values (descending) of the column-centered matrix. Values below
/// the numerical-rank tolerance are reported as exactly zero.
std::vector<double> centered_singular_values(const FeatureMatrix& m);

/// exp of the Shannon entropy of sigma / ||sigma||_1, with 0 log 0 = 0.
double effective_rank_from_singular_values(std::span<const double> sigma);

/// Effective rank of the centered feature matrix. Requires n >= 2 and a
/// non-constant matrix (DegenerateError otherwise).
double effective_rank(const FeatureMatrix& m);

GeometryDescriptors describe(const FeatureMatrix& m, std::size_t k = kDefaultDensityK);

}  // namespace refgeo::geometry
