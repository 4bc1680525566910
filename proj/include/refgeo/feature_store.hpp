#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "refgeo/feature_matrix.hpp"

namespace refgeo::store {

/// Element type recorded in an npy header.
enum class DType { f4, f8 };

struct NpyHeader {
  DType dtype = DType::f8;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t data_offset = 0;  ///< byte offset of the payload
};

/// Parses the header of an npy v1.0 file. Only 2-D, C-order, little-endian
/// "<f4" / "<f8" arrays are accepted; anything else is a FormatError.
NpyHeader read_npy_header(const std::filesystem::path& path);

/// Loads an npy v1.0 feature file. 32-bit payloads are widened to double.
FeatureMatrix load_features(const std::filesystem::path& path);

/// Writes m as "<f8" npy v1.0. Reloading is bit-exact.
void save_features(const FeatureMatrix& m, const std::filesystem::path& path);

/// Also writes "<f4" for interop tests and compact fixtures (lossy).
void save_features_f32(const FeatureMatrix& m, const std::filesystem::path& path);

/// k distinct rows drawn uniformly without replacement, in draw order.
/// Deterministic in (m, k, seed) across platforms.
FeatureMatrix subsample(const FeatureMatrix& m, std::size_t k, std::uint64_t seed);

struct DatasetManifest {
  std::string name;
  std::filesystem::path feature_path;
  std::size_t count = 0;
  std::size_t dim = 0;
  std::string checksum;  ///< lowercase hex SHA-256 of the feature file
};

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Reads a manifest JSON. Relative feature paths resolve against the
/// manifest's directory.
DatasetManifest read_manifest(const std::filesystem::path& path);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Builds a manifest describing an existing feature file.
DatasetManifest make_manifest(const std::string& name, const std::filesystem::path& feature_path);

/// Loads the manifest's feature file, failing with FormatError when the
/// header disagrees with count/dim or the checksum differs.
FeatureMatrix load_from_manifest(const DatasetManifest& manifest);

}  // namespace refgeo::store
