#include "refgeo/feature_matrix.hpp"

#include <cmath>
#include <string>

#include "refgeo/error.hpp"

namespace refgeo {

FeatureMatrix::FeatureMatrix(RowMatrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw ArgumentError("feature matrix must have at least one row and one column, got " +
                        std::to_string(data_.rows()) + "x" + std::to_string(data_.cols()));
  }
  const Eigen::Index d = data_.cols();
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!std::isfinite(data_(i, j))) {
        throw DataError("non-finite feature value at row " + std::to_string(i) + ", column " +
                            std::to_string(j),
                        static_cast<long>(i), static_cast<long>(j));
      }
    }
  }
}

FeatureMatrix FeatureMatrix::from_rows(std::span<const double> values, std::size_t n,
                                       std::size_t dim) {
  if (values.size() != n * dim) {
    throw ArgumentError("buffer holds " + std::to_string(values.size()) + " values, expected " +
                        std::to_string(n * dim));
  }
  RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::copy(values.begin(), values.end(), m.data());
  return FeatureMatrix(std::move(m));
}

FeatureMatrix FeatureMatrix::scaled(double c) const {
  RowMatrix m = data_ * c;
  return FeatureMatrix(std::move(m));
}

}  // namespace refgeo
