#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>

#include "refgeo/feature_matrix.hpp"

namespace refgeo::metrics {

inline constexpr std::size_t kDefaultKidSubsetSize = 1000;
inline constexpr std::size_t kDefaultKidSubsets = 100;
inline constexpr std::size_t kDefaultPrK = 3;

/// Mean and unbiased covariance of a feature set.
struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  ///< symmetric
  std::size_t n = 0;
  /// Sum of the covariance eigenvalues with negative round-off clipped to 0.
  double clipped_trace = 0.0;

  /// Symmetrizes cov and checks that its most negative eigenvalue is no
  /// worse than -1e-8 * trace (NumericalError otherwise).
  GaussianStats(Eigen::VectorXd mean, Eigen::MatrixXd cov, std::size_t n);

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

struct MetricResult {
  double value = 0.0;
  std::string metric_name;
  std::size_t n_ref = 0;
  std::size_t n_gen = 0;
  std::map<std::string, double> params;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// Column means and covariance with divisor n-1. Requires n >= 2.
GaussianStats fit_gaussian(const FeatureMatrix& m);

/// Squared 2-Wasserstein distance between N(a.mean, a.cov) and N(b.mean, b.cov):
///   |mu_a - mu_b|^2 + tr(S_a) + tr(S_b) - 2 sum_j sqrt(max(lambda_j(S_a S_b), 0))
/// Imaginary eigenvalue parts beyond 1e-6 * spectral radius are a
/// NumericalError. Clamped to >= 0; exactly 0 for identical inputs.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

/// Fréchet distance between Gaussian fits of two feature sets.
MetricResult frechet(const FeatureMatrix& ref, const FeatureMatrix& gen);

/// Closed-form W2^2 of the rank-r toy model: D*lambda^2 + 2r(1 - sqrt(1 + lambda^2)).
double toy_frechet_closed_form(std::size_t dim, std::size_t rank, double lambda);

/// Unbiased MMD^2 with kernel (x.y/D + 1)^3, averaged over num_subsets
/// draws of subset_size rows from each set. Subset s of either set is drawn
/// from the stream (seed, s), so swapping ref and gen swaps the subsets too
/// and identical inputs give identical subsets. Within each draw, rows are
/// paired by draw position and all i == j terms are excluded.
MetricResult kid_mmd(const FeatureMatrix& ref, const FeatureMatrix& gen,
                     std::size_t subset_size = kDefaultKidSubsetSize,
                     std::size_t num_subsets = kDefaultKidSubsets, std::uint64_t seed = 0);

/// Single-subset estimator on already paired samples of equal size m >= 2.
double mmd2_unbiased(const FeatureMatrix& x, const FeatureMatrix& y);

/// kNN-manifold precision and recall: a point is covered when it lies in
/// some ball centered at a point of the other set with radius equal to
/// that center's k-th neighbor distance within its own set.
PrecisionRecall precision_recall(const FeatureMatrix& ref, const FeatureMatrix& gen,
                                 std::size_t k = kDefaultPrK);

}  // namespace refgeo::metrics
