#include <omp.h>

#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>

#include "kernels_detail.hpp"
#include "refgeo/kernels.hpp"

namespace refgeo::kernels {

namespace {

constexpr std::size_t kQueryBlock = 32;

// Rows per reference tile: roughly 32 KiB of doubles so a tile stays in L1,
// a multiple of 8, at least 8.
std::size_t tile_rows(std::size_t cols) {
  const std::size_t rows = (32 * 1024 / sizeof(double)) / std::max<std::size_t>(cols, 1);
  return std::clamp<std::size_t>(rows - rows % 8, 8, 1024);
}

// Copies rows [begin, begin + count) of m into a cols x count column tile
// so that the innermost loop runs over candidate rows with unit stride.
void transpose_tile(MatrixView m, std::size_t begin, std::size_t count, std::vector<double>& tile) {
  tile.resize(m.cols * count);
  for (std::size_t j = 0; j < count; ++j) {
    const double* src = m.data + (begin + j) * m.cols;
    for (std::size_t t = 0; t < m.cols; ++t) tile[t * count + j] = src[t];
  }
}

std::vector<std::vector<double>> transpose_all(MatrixView m, std::size_t block) {
  std::vector<std::vector<double>> tiles((m.rows + block - 1) / block);
  for (std::size_t tb = 0; tb < tiles.size(); ++tb) {
    const std::size_t begin = tb * block;
    transpose_tile(m, begin, std::min(block, m.rows - begin), tiles[tb]);
  }
  return tiles;
}

constexpr std::size_t kLanes = 8;

// Four doubles; lowered to SSE2 pairs in the default clone.
typedef double Vec4 __attribute__((vector_size(32)));

inline Vec4 load4(const double* p) {
  Vec4 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store4(double* p, Vec4 v) { std::memcpy(p, &v, sizeof v); }

// acc[j] = sum_t (q[t] - tile[t][j])^2, summed in increasing t like detail::sq_distance.
// Eight candidates are accumulated in registers at a time; the clones only
// change vector width, never the per-candidate summation order.
__attribute__((target_clones("avx2", "default"))) void tile_sq_distances(
    const double* q, const double* tile, std::size_t cols, std::size_t count, double* acc) {
  std::size_t j = 0;
  for (; j + kLanes <= count; j += kLanes) {
    Vec4 s0 = {}, s1 = {};
    for (std::size_t t = 0; t < cols; ++t) {
      const double* col = tile + t * count + j;
      const Vec4 d0 = q[t] - load4(col);
      const Vec4 d1 = q[t] - load4(col + 4);
      s0 += d0 * d0;
      s1 += d1 * d1;
    }
    store4(acc + j, s0);
    store4(acc + j + 4, s1);
  }
  for (; j < count; ++j) {
    double s = 0.0;
    for (std::size_t t = 0; t < cols; ++t) {
      const double diff = q[t] - tile[t * count + j];
      s += diff * diff;
    }
    acc[j] = s;
  }
}

__attribute__((target_clones("avx2", "default"))) void tile_dots(
    const double* q, const double* tile, std::size_t cols, std::size_t count, double* acc) {
  std::size_t j = 0;
  for (; j + kLanes <= count; j += kLanes) {
    Vec4 s0 = {}, s1 = {};
    for (std::size_t t = 0; t < cols; ++t) {
      const double* col = tile + t * count + j;
      s0 += q[t] * load4(col);
      s1 += q[t] * load4(col + 4);
    }
    store4(acc + j, s0);
    store4(acc + j + 4, s1);
  }
  for (; j < count; ++j) {
    double s = 0.0;
    for (std::size_t t = 0; t < cols; ++t) s += q[t] * tile[t * count + j];
    acc[j] = s;
  }
}

}  // namespace

int worker_threads() {
  if (const char* env = std::getenv("REFGEO_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return omp_get_num_procs();
}

void configure_threads_from_env() { omp_set_num_threads(worker_threads()); }

namespace omp {

std::vector<double> kth_neighbor_sq_distances(MatrixView points, std::size_t k) {
  const std::size_t n = points.rows;
  const std::size_t block = tile_rows(points.cols);
  const auto tiles = transpose_all(points, block);
  std::vector<double> out(n);

#pragma omp parallel
  {
    std::vector<double> acc(block);
    std::vector<detail::BoundedMaxHeap> heaps(kQueryBlock, detail::BoundedMaxHeap(k));

#pragma omp for schedule(dynamic, 1)
    for (std::size_t qb = 0; qb < n; qb += kQueryBlock) {
      const std::size_t qend = std::min(n, qb + kQueryBlock);
      for (auto& h : heaps) h.clear();
      for (std::size_t tb = 0; tb < tiles.size(); ++tb) {
        const std::size_t begin = tb * block;
        const std::size_t count = std::min(block, n - begin);
        for (std::size_t q = qb; q < qend; ++q) {
          tile_sq_distances(points.data + q * points.cols, tiles[tb].data(), points.cols, count, acc.data());
          // self is never among the k nearest: n - 1 >= k real candidates exist
          if (q >= begin && q < begin + count) acc[q - begin] = std::numeric_limits<double>::infinity();
          heaps[q - qb].offer_all(acc.data(), count);
        }
      }
      for (std::size_t q = qb; q < qend; ++q) out[q] = heaps[q - qb].top();
    }
  }
  return out;
}

std::size_t count_covered(MatrixView queries, MatrixView centers,
                          std::span<const double> sq_radii) {
  const std::size_t block = tile_rows(centers.cols);
  const auto tiles = transpose_all(centers, block);
  std::vector<unsigned char> covered(queries.rows, 0);

#pragma omp parallel
  {
    std::vector<double> acc(block);
#pragma omp for schedule(dynamic, 16)
    for (std::size_t q = 0; q < queries.rows; ++q) {
      const double* xq = queries.data + q * queries.cols;
      for (std::size_t tb = 0; tb < tiles.size() && !covered[q]; ++tb) {
        const std::size_t begin = tb * block;
        const std::size_t count = std::min(block, centers.rows - begin);
        tile_sq_distances(xq, tiles[tb].data(), centers.cols, count, acc.data());
        for (std::size_t j = 0; j < count; ++j) {
          if (acc[j] <= sq_radii[begin + j]) {
            covered[q] = 1;
            break;
          }
        }
      }
    }
  }
  std::size_t total = 0;
  for (unsigned char c : covered) total += c;
  return total;
}

KernelSums polynomial_kernel_sums(MatrixView x, MatrixView y) {
  const std::size_t m = x.rows;
  const std::size_t dim = x.cols;
  const double scale = static_cast<double>(dim);
  const std::size_t block = tile_rows(dim);
  const std::size_t num_tiles = (m + block - 1) / block;

  const auto xt = transpose_all(x, block);
  const auto yt = transpose_all(y, block);

  std::vector<double> row_xx(m, 0.0), row_yy(m, 0.0), row_xy(m, 0.0);
  auto cube = [scale](double d) {
    const double base = d / scale + 1.0;
    return base * base * base;
  };

#pragma omp parallel
  {
    std::vector<double> acc(block);
#pragma omp for schedule(dynamic, 8)
    for (std::size_t i = 0; i < m; ++i) {
      const double* xi = x.data + i * dim;
      const double* yi = y.data + i * dim;
      for (std::size_t tb = 0; tb < num_tiles; ++tb) {
        const std::size_t begin = tb * block;
        const std::size_t count = std::min(block, m - begin);
        tile_dots(xi, xt[tb].data(), dim, count, acc.data());
        for (std::size_t j = 0; j < count; ++j) {
          if (begin + j != i) row_xx[i] += cube(acc[j]);
        }
        tile_dots(yi, yt[tb].data(), dim, count, acc.data());
        for (std::size_t j = 0; j < count; ++j) {
          if (begin + j != i) row_yy[i] += cube(acc[j]);
        }
        tile_dots(xi, yt[tb].data(), dim, count, acc.data());
        for (std::size_t j = 0; j < count; ++j) {
          if (begin + j != i) row_xy[i] += cube(acc[j]);
        }
      }
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
  constexpr std::size_t kRowBlock = 64;
  // each thread owns whole rows of g; entries accumulate over samples in order
  for (std::size_t ib = 0; ib < a.rows; ib += kRowBlock) {
    const std::size_t iend = std::min(a.rows, ib + kRowBlock);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t p = 0; p < d; ++p) {
      double* gp = g.data() + p * d;
      for (std::size_t i = ib; i < iend; ++i) {
        const double* ai = a.data + i * d;
        const double aip = ai[p];
        for (std::size_t q = p; q < d; ++q) gp[q] += aip * ai[q];
      }
    }
  }
  for (std::size_t p = 0; p < d; ++p) {
    for (std::size_t q = p + 1; q < d; ++q) g[q * d + p] = g[p * d + q];
  }
  return g;
}

}  // namespace omp
}  // namespace refgeo::kernels
