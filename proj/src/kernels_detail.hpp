#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace refgeo::kernels::detail {

inline double sq_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t t = 0; t < dim; ++t) {
    const double diff = a[t] - b[t];
    s += diff * diff;
  }
  return s;
}

inline double dot(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t t = 0; t < dim; ++t) s += a[t] * b[t];
  return s;
}

inline double cubic_kernel(const double* a, const double* b, std::size_t dim) {
  const double base = dot(a, b, dim) / static_cast<double>(dim) + 1.0;
  return base * base * base;
}

/// Keeps the k smallest values seen; top() is the k-th smallest once full.
class BoundedMaxHeap {
 public:
  explicit BoundedMaxHeap(std::size_t k) : k_(k) { heap_.reserve(k); }

  void offer(double v) {
    if (heap_.size() < k_) {
      heap_.push_back(v);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (v < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = v;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }
  /// Same result as offer() on each value in turn; skips values that cannot
  /// enter without touching the heap.
  void offer_all(const double* v, std::size_t count) {
    std::size_t j = 0;
    for (; j < count && heap_.size() < k_; ++j) offer(v[j]);
    if (heap_.empty()) return;
    double bound = heap_.front();
    for (; j < count; ++j) {
      if (v[j] < bound) {
        std::pop_heap(heap_.begin(), heap_.end());
        heap_.back() = v[j];
        std::push_heap(heap_.begin(), heap_.end());
        bound = heap_.front();
      }
    }
  }
  double top() const { return heap_.front(); }
  void clear() { heap_.clear(); }

 private:
  std::size_t k_;
  std::vector<double> heap_;
};

}  // namespace refgeo::kernels::detail
