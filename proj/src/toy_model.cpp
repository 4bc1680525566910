#include "refgeo/toy_model.hpp"

#include <cmath>
#include <string>

#include "refgeo/error.hpp"
#include "refgeo/metrics.hpp"
#include "refgeo/rng.hpp"

namespace refgeo::toy {

void ToyConfig::validate() const {
  if (rank == 0 || rank > dim) {
    throw ArgumentError("toy rank must satisfy 0 < r <= D, got r=" + std::to_string(rank) +
                        ", D=" + std::to_string(dim));
  }
  if (n < 2) throw ArgumentError("toy sample count must be >= 2");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ArgumentError("toy noise level must be finite and >= 0");
  }
}

FeatureMatrix sample_reference(const ToyConfig& c) {
  c.validate();
  Rng rng = Rng::stream(c.seed, 0);
  RowMatrix x = RowMatrix::Zero(static_cast<Eigen::Index>(c.n), static_cast<Eigen::Index>(c.dim));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(c.rank); ++j) x(i, j) = rng.normal();
  }
  return FeatureMatrix(std::move(x));
}

FeatureMatrix sample_generated(const FeatureMatrix& ref, double lambda, std::uint64_t seed) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ArgumentError("noise level must be finite and >= 0");
  }
  if (lambda == 0.0) return ref;
  Rng rng = Rng::stream(seed, 1);
  RowMatrix x = ref.data();
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += lambda * rng.normal();
  return FeatureMatrix(std::move(x));
}

ToyReport verify_toy(const ToyConfig& c) {
  c.validate();
  if (c.n < 1000) throw ArgumentError("toy verification needs n >= 1000");
  const FeatureMatrix ref = sample_reference(c);
  const FeatureMatrix gen = sample_generated(ref, c.lambda, c.seed);

  ToyReport r;
  r.config = c;
  r.empirical_frechet =
      metrics::frechet_distance(metrics::fit_gaussian(ref), metrics::fit_gaussian(gen));
  r.analytic_w2 = metrics::toy_frechet_closed_form(c.dim, c.rank, c.lambda);
  r.rel_error = r.analytic_w2 > 0.0 ? std::abs(r.empirical_frechet - r.analytic_w2) / r.analytic_w2
                                    : std::abs(r.empirical_frechet);
  r.erank = geometry::effective_rank(ref);
  r.erank_rel_error = std::abs(r.erank - static_cast<double>(c.rank)) / static_cast<double>(c.rank);
  r.density = geometry::mean_knn_log_density(ref, c.k);
  return r;
}

}  // namespace refgeo::toy
