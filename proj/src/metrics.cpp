#include "refgeo/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "refgeo/error.hpp"
#include "refgeo/kernels.hpp"
#include "refgeo/rng.hpp"

namespace refgeo::metrics {

namespace {

kernels::MatrixView view(const RowMatrix& m) {
  return {m.data(), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
}

void require_same_dim(const FeatureMatrix& ref, const FeatureMatrix& gen) {
  if (ref.cols() != gen.cols()) {
    throw ArgumentError("feature dimensions differ: reference D=" + std::to_string(ref.cols()) +
                        ", generated D=" + std::to_string(gen.cols()));
  }
}

RowMatrix gather(const FeatureMatrix& m, const std::vector<std::size_t>& rows) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), m.data().cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.data().row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

double mmd2_from_sums(const kernels::KernelSums& s, std::size_t m) {
  const double pairs = static_cast<double>(m) * static_cast<double>(m - 1);
  return (s.xx + s.yy - 2.0 * s.xy) / pairs;
}

}  // namespace

GaussianStats::GaussianStats(Eigen::VectorXd mean_in, Eigen::MatrixXd cov_in, std::size_t n_in)
    : mean(std::move(mean_in)), cov(std::move(cov_in)), n(n_in) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw ArgumentError("covariance shape does not match mean dimension");
  }
  cov = 0.5 * (cov + cov.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("covariance eigen-decomposition failed");
  const Eigen::VectorXd lambda = solver.eigenvalues();
  if (!lambda.allFinite()) throw NumericalError("covariance has non-finite eigenvalues");
  const double trace = cov.trace();
  if (lambda.size() > 0 && lambda.minCoeff() < -1e-8 * std::abs(trace)) {
    throw NumericalError("covariance is not positive semidefinite (min eigenvalue " +
                         std::to_string(lambda.minCoeff()) + ")");
  }
  clipped_trace = lambda.cwiseMax(0.0).sum();
}

GaussianStats fit_gaussian(const FeatureMatrix& m) {
  if (m.rows() < 2) {
    throw ArgumentError("Gaussian fit needs at least 2 rows, got " + std::to_string(m.rows()));
  }
  const Eigen::RowVectorXd mu = m.data().colwise().mean();
  const RowMatrix centered = m.data().rowwise() - mu;
  const std::vector<double> g = kernels::omp::gram(view(centered));
  const auto dim = static_cast<Eigen::Index>(m.cols());
  Eigen::MatrixXd cov = Eigen::Map<const Eigen::MatrixXd>(g.data(), dim, dim) /
                        static_cast<double>(m.rows() - 1);
  return GaussianStats(mu.transpose(), std::move(cov), m.rows());
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  if (a.dim() != b.dim()) {
    throw ArgumentError("Gaussian dimensions differ: " + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()));
  }
  if (a.mean == b.mean && a.cov == b.cov) return 0.0;

  const double mean_term = (a.mean - b.mean).squaredNorm();
  const Eigen::MatrixXd product = a.cov * b.cov;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(product, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalues of cov_a*cov_b failed");
  const Eigen::VectorXcd lambda = solver.eigenvalues();
  if (!lambda.allFinite()) throw NumericalError("non-finite eigenvalue of cov_a*cov_b");

  const double radius = lambda.cwiseAbs().maxCoeff();
  // eigenvalues at rounding level are zeros of a rank-deficient product;
  // their square roots would otherwise contribute ~sqrt(eps) each
  const double floor = 8.0 * static_cast<double>(a.dim()) * std::numeric_limits<double>::epsilon() * radius;
  double sqrt_sum = 0.0;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    if (std::abs(lambda[j].imag()) > 1e-6 * radius) {
      throw NumericalError("eigenvalue of cov_a*cov_b has imaginary part " +
                           std::to_string(lambda[j].imag()) + " (spectral radius " +
                           std::to_string(radius) + ")");
    }
    if (lambda[j].real() > floor) sqrt_sum += std::sqrt(lambda[j].real());
  }
  const double value = mean_term + a.clipped_trace + b.clipped_trace - 2.0 * sqrt_sum;
  return std::max(value, 0.0);
}

MetricResult frechet(const FeatureMatrix& ref, const FeatureMatrix& gen) {
  require_same_dim(ref, gen);
  MetricResult r;
  r.metric_name = "frechet";
  r.n_ref = ref.rows();
  r.n_gen = gen.rows();
  r.value = frechet_distance(fit_gaussian(ref), fit_gaussian(gen));
  return r;
}

double toy_frechet_closed_form(std::size_t dim, std::size_t rank, double lambda) {
  if (rank == 0 || rank > dim) {
    throw ArgumentError("toy model needs 0 < r <= D, got r=" + std::to_string(rank) +
                        ", D=" + std::to_string(dim));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ArgumentError("noise level must be finite and >= 0");
  }
  const double l2 = lambda * lambda;
  // 1 - sqrt(1 + l2) rewritten without cancellation
  const double one_minus_root = -l2 / (1.0 + std::sqrt(1.0 + l2));
  return static_cast<double>(dim) * l2 + 2.0 * static_cast<double>(rank) * one_minus_root;
}

double mmd2_unbiased(const FeatureMatrix& x, const FeatureMatrix& y) {
  require_same_dim(x, y);
  if (x.rows() != y.rows() || x.rows() < 2) {
    throw ArgumentError("paired MMD needs two samples of equal size >= 2");
  }
  return mmd2_from_sums(kernels::omp::polynomial_kernel_sums(view(x.data()), view(y.data())),
                        x.rows());
}

MetricResult kid_mmd(const FeatureMatrix& ref, const FeatureMatrix& gen, std::size_t subset_size,
                     std::size_t num_subsets, std::uint64_t seed) {
  require_same_dim(ref, gen);
  if (subset_size < 2) throw ArgumentError("KID subset size must be >= 2");
  if (subset_size > std::min(ref.rows(), gen.rows())) {
    throw ArgumentError("KID subset size " + std::to_string(subset_size) +
                        " exceeds min(n_ref, n_gen) = " +
                        std::to_string(std::min(ref.rows(), gen.rows())));
  }
  if (num_subsets < 1) throw ArgumentError("KID needs at least one subset");

  std::vector<double> estimates(num_subsets);
  for (std::size_t s = 0; s < num_subsets; ++s) {
    Rng ref_stream = Rng::stream(seed, s);
    Rng gen_stream = Rng::stream(seed, s);
    const RowMatrix x = gather(ref, sample_without_replacement(ref.rows(), subset_size, ref_stream));
    const RowMatrix y = gather(gen, sample_without_replacement(gen.rows(), subset_size, gen_stream));
    estimates[s] =
        mmd2_from_sums(kernels::omp::polynomial_kernel_sums(view(x), view(y)), subset_size);
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= static_cast<double>(num_subsets);
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  const double sd = num_subsets > 1 ? std::sqrt(var / static_cast<double>(num_subsets - 1)) : 0.0;

  MetricResult r;
  r.metric_name = "kid";
  r.value = mean;
  r.n_ref = ref.rows();
  r.n_gen = gen.rows();
  r.params = {{"subset_size", static_cast<double>(subset_size)},
              {"num_subsets", static_cast<double>(num_subsets)},
              {"seed", static_cast<double>(seed)},
              {"subset_std", sd}};
  return r;
}

PrecisionRecall precision_recall(const FeatureMatrix& ref, const FeatureMatrix& gen, std::size_t k) {
  require_same_dim(ref, gen);
  const std::size_t n_min = std::min(ref.rows(), gen.rows());
  if (k < 1 || k + 1 > n_min) {
    throw ArgumentError("precision/recall k=" + std::to_string(k) +
                        " requires 1 <= k <= min(n_ref, n_gen) - 1 = " +
                        std::to_string(n_min > 0 ? n_min - 1 : 0));
  }
  const auto ref_view = view(ref.data());
  const auto gen_view = view(gen.data());
  const std::vector<double> ref_radii = kernels::omp::kth_neighbor_sq_distances(ref_view, k);
  const std::vector<double> gen_radii = kernels::omp::kth_neighbor_sq_distances(gen_view, k);
  PrecisionRecall pr;
  pr.precision = static_cast<double>(kernels::omp::count_covered(gen_view, ref_view, ref_radii)) /
                 static_cast<double>(gen.rows());
  pr.recall = static_cast<double>(kernels::omp::count_covered(ref_view, gen_view, gen_radii)) /
              static_cast<double>(ref.rows());
  return pr;
}

}  // namespace refgeo::metrics
