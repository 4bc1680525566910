#pragma once

// Hot loops behind geometry and metrics. Each kernel exists twice: an
// OpenMP-tiled version used by the library and a plain serial version kept
// as the reference the tests and benchmarks compare against. Both produce
// bitwise-identical results: every output element is accumulated in the
// same order regardless of thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace refgeo::kernels {

/// Row-major n x dim view over contiguous doubles.
struct MatrixView {
  const double* data;
  std::size_t rows;
  std::size_t cols;
  std::span<const double> row(std::size_t i) const { return {data + i * cols, cols}; }
};

/// Sums of the cubic polynomial kernel (x.y/dim + 1)^3 over a paired
/// sample. Diagonal terms (i == j) are excluded from all three sums.
struct KernelSums {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;
};

namespace serial {

/// Squared distance from each row to its k-th nearest other row.
std::vector<double> kth_neighbor_sq_distances(MatrixView points, std::size_t k);

/// Number of query rows within (<=) the ball of some center, where ball i
/// has squared radius sq_radii[i].
std::size_t count_covered(MatrixView queries, MatrixView centers, std::span<const double> sq_radii);

KernelSums polynomial_kernel_sums(MatrixView x, MatrixView y);

/// Upper-triangle-symmetric Gram matrix A^T A (cols x cols, row-major).
std::vector<double> gram(MatrixView a);

}  // namespace serial

namespace omp {

std::vector<double> kth_neighbor_sq_distances(MatrixView points, std::size_t k);
std::size_t count_covered(MatrixView queries, MatrixView centers, std::span<const double> sq_radii);
KernelSums polynomial_kernel_sums(MatrixView x, MatrixView y);
std::vector<double> gram(MatrixView a);

}  // namespace omp

/// Threads used by the omp kernels: REFGEO_THREADS if set and positive,
/// otherwise the OpenMP default (logical cores).
int worker_threads();

/// Applies worker_threads() to the OpenMP runtime.
void configure_threads_from_env();

}  // namespace refgeo::kernels
