#include "refgeo/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "refgeo/error.hpp"
#include "refgeo/kernels.hpp"

namespace refgeo::geometry {

namespace {

kernels::MatrixView view(const RowMatrix& m) {
  return {m.data(), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
}

void check_k(const FeatureMatrix& m, std::size_t k) {
  if (k < 1 || k + 1 > m.rows()) {
    throw ArgumentError("neighbor count k=" + std::to_string(k) + " requires 1 <= k <= n-1 with n=" +
                        std::to_string(m.rows()));
  }
}

RowMatrix centered(const FeatureMatrix& m) {
  const Eigen::RowVectorXd mean = m.data().colwise().mean();
  return m.data().rowwise() - mean;
}

}  // namespace

std::vector<double> knn_distances(const FeatureMatrix& m, std::size_t k) {
  check_k(m, k);
  std::vector<double> d = kernels::omp::kth_neighbor_sq_distances(view(m.data()), k);
  for (double& v : d) v = std::sqrt(v);
  return d;
}

double mean_knn_log_density(const FeatureMatrix& m, std::size_t k) {
  const std::vector<double> d = knn_distances(m, k);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0.0) continue;
    // a zero k-th distance means row i coincides with at least k other rows
    for (std::size_t j = 0; j < m.rows(); ++j) {
      if (j != i && std::ranges::equal(m.row(i), m.row(j))) {
        throw DegenerateError("k-th neighbor distance is zero: rows " + std::to_string(std::min(i, j)) +
                              " and " + std::to_string(std::max(i, j)) + " coincide (k=" +
                              std::to_string(k) + ")");
      }
    }
    throw DegenerateError("k-th neighbor distance is zero at row " + std::to_string(i));
  }
  // fixed-order sum keeps the result independent of the thread count
  double sum = 0.0;
  for (double v : d) sum += -std::log(v);
  return sum / static_cast<double>(d.size());
}

std::vector<double> centered_singular_values(const FeatureMatrix& m) {
  if (m.rows() < 2) {
    throw ArgumentError("effective rank needs at least 2 rows, got " + std::to_string(m.rows()));
  }
  const RowMatrix a = centered(m);
  const auto n = static_cast<std::size_t>(a.rows());
  const auto dim = static_cast<std::size_t>(a.cols());
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> sigma;

  if (n > dim) {
    // tall: eigenvalues of the D x D Gram matrix are the squared singular values
    const std::vector<double> g = kernels::omp::gram(view(a));
    const Eigen::Map<const Eigen::MatrixXd> gm(g.data(), a.cols(), a.cols());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gm, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("Gram eigen-decomposition failed");
    const Eigen::VectorXd lambda = solver.eigenvalues();
    const double lmax = lambda.maxCoeff();
    const double tol = std::max(lmax, 0.0) * 10.0 * static_cast<double>(dim) * eps;
    for (Eigen::Index j = lambda.size() - 1; j >= 0; --j) {
      sigma.push_back(lambda[j] > tol ? std::sqrt(lambda[j]) : 0.0);
    }
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.singularValues();
    const double tol = (s.size() > 0 ? s[0] : 0.0) * static_cast<double>(std::max(n, dim)) * eps;
    for (Eigen::Index j = 0; j < s.size(); ++j) sigma.push_back(s[j] > tol ? s[j] : 0.0);
  }
  return sigma;
}

double effective_rank_from_singular_values(std::span<const double> sigma) {
  double l1 = 0.0;
  for (double s : sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw ArgumentError("singular values must be finite and non-negative");
    }
    l1 += s;
  }
  if (l1 <= 0.0) throw DegenerateError("all singular values are zero; effective rank undefined");
  double entropy = 0.0;
  for (double s : sigma) {
    if (s == 0.0) continue;
    const double p = s / l1;
    entropy -= p * std::log(p);
  }
  return std::exp(entropy);
}

double effective_rank(const FeatureMatrix& m) {
  const std::vector<double> sigma = centered_singular_values(m);
  try {
    return effective_rank_from_singular_values(sigma);
  } catch (const DegenerateError&) {
    throw DegenerateError("centered feature matrix is identically zero; effective rank undefined");
  }
}

GeometryDescriptors describe(const FeatureMatrix& m, std::size_t k) {
  return {mean_knn_log_density(m, k), effective_rank(m), k, m.rows()};
}

}  // namespace refgeo::geometry
