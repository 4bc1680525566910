#include "kernels_detail.hpp"
#include "refgeo/kernels.hpp"

namespace refgeo::kernels::serial {

std::vector<double> kth_neighbor_sq_distances(MatrixView points, std::size_t k) {
  std::vector<double> out(points.rows);
  detail::BoundedMaxHeap heap(k);
  for (std::size_t i = 0; i < points.rows; ++i) {
    heap.clear();
    const double* xi = points.data + i * points.cols;
    for (std::size_t j = 0; j < points.rows; ++j) {
      if (j == i) continue;
      heap.offer(detail::sq_distance(xi, points.data + j * points.cols, points.cols));
    }
    out[i] = heap.top();
  }
  return out;
}

std::size_t count_covered(MatrixView queries, MatrixView centers,
                          std::span<const double> sq_radii) {
  std::size_t covered = 0;
  for (std::size_t q = 0; q < queries.rows; ++q) {
    const double* xq = queries.data + q * queries.cols;
    for (std::size_t c = 0; c < centers.rows; ++c) {
      if (detail::sq_distance(xq, centers.data + c * centers.cols, centers.cols) <= sq_radii[c]) {
        ++covered;
        break;
      }
    }
  }
  return covered;
}

KernelSums polynomial_kernel_sums(MatrixView x, MatrixView y) {
  const std::size_t m = x.rows;
  const std::size_t dim = x.cols;
  std::vector<double> row_xx(m, 0.0), row_yy(m, 0.0), row_xy(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = x.data + i * dim;
    const double* yi = y.data + i * dim;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      row_xx[i] += detail::cubic_kernel(xi, x.data + j * dim, dim);
      row_yy[i] += detail::cubic_kernel(yi, y.data + j * dim, dim);
      row_xy[i] += detail::cubic_kernel(xi, y.data + j * dim, dim);
    }
  }
  KernelSums s;
  for (std::size_t i = 0; i < m; ++i) {
    s.xx += row_xx[i];
    s.yy += row_yy[i];
    s.xy += row_xy[i];
  }
  return s;
}

std::vector<double> gram(MatrixView a) {
  const std::size_t d = a.cols;
  std::vector<double> g(d * d, 0.0);
  for (std::size_t p = 0; p < d; ++p) {
    for (std::size_t q = p; q < d; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.rows; ++i) s += a.data[i * d + p] * a.data[i * d + q];
      g[p * d + q] = s;
      g[q * d + p] = s;
    }
  }
  return g;
}

}  // namespace refgeo::kernels::serial
