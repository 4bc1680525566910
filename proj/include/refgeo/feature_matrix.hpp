#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>

namespace refgeo {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n x D matrix of feature vectors, one sample per row. Always finite and
/// non-empty; immutable once constructed so it can be shared across workers.
class FeatureMatrix {
 public:
  /// Validates shape and finiteness. Throws ArgumentError on an empty shape
  /// and DataError (with row/column) on the first non-finite entry.
  explicit FeatureMatrix(RowMatrix data);

  /// Copies a row-major buffer of n*dim values.
  static FeatureMatrix from_rows(std::span<const double> values, std::size_t n, std::size_t dim);

  std::size_t rows() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(data_.cols()); }

  const RowMatrix& data() const { return data_; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols(), cols()};
  }
  std::span<const double> values() const {
    return {data_.data(), static_cast<std::size_t>(data_.size())};
  }

  /// Returns a copy with every entry multiplied by c.
  FeatureMatrix scaled(double c) const;

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
           a.data_ == b.data_;
  }

 private:
  RowMatrix data_;
};

}  // namespace refgeo
