#include "refgeo/feature_store.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <nlohmann/json.hpp>
#include <regex>
#include <sstream>
#include <vector>

#include "refgeo/error.hpp"
#include "refgeo/rng.hpp"

namespace refgeo::store {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 6> kMagic = {'\x93', 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kPreludeBytes = 10;  // magic + version + u16 header length

static_assert(std::endian::native == std::endian::little,
              "npy payloads are read in place; big-endian hosts are not supported");

std::string describe(const fs::path& path) { return "'" + path.string() + "'"; }

std::string header_field(const std::string& header, const std::string& key,
                         const fs::path& path) {
  // value runs up to the next top-level comma or closing brace; shape needs the parens
  const std::regex re("['\"]" + key + "['\"]\\s*:\\s*(\\([^)]*\\)|[^,}]+)");
  std::smatch match;
  if (!std::regex_search(header, match, re)) {
    throw FormatError("npy header of " + describe(path) + " lacks key '" + key + "'");
  }
  std::string v = match[1].str();
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
  return v;
}

std::vector<std::size_t> parse_shape(const std::string& text, const fs::path& path) {
  if (text.size() < 2 || text.front() != '(' || text.back() != ')') {
    throw FormatError("npy shape of " + describe(path) + " is not a tuple: " + text);
  }
  std::vector<std::size_t> dims;
  std::stringstream ss(text.substr(1, text.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;  // trailing comma of a 1-tuple
    const auto last = item.find_last_not_of(" \t");
    const std::string digits = item.substr(first, last - first + 1);
    if (digits.find_first_not_of("0123456789") != std::string::npos) {
      throw FormatError("npy shape of " + describe(path) + " has a non-integer entry: " + text);
    }
    dims.push_back(std::stoull(digits));
  }
  return dims;
}

void write_npy(const FeatureMatrix& m, const fs::path& path, DType dtype) {
  std::ostringstream dict;
  dict << "{'descr': '" << (dtype == DType::f8 ? "<f8" : "<f4")
       << "', 'fortran_order': False, 'shape': (" << m.rows() << ", " << m.cols() << "), }";
  std::string header = dict.str();
  // pad with spaces so the payload starts on a 64-byte boundary, terminated by '\n'
  const std::size_t unpadded = kPreludeBytes + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  if (header.size() > 0xffff) throw ArgumentError("npy v1.0 header would exceed 65535 bytes");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + describe(path) + " for writing");
  out.write(kMagic.data(), kMagic.size());
  const char version[2] = {1, 0};
  out.write(version, 2);
  const auto len = static_cast<std::uint16_t>(header.size());
  const char len_bytes[2] = {static_cast<char>(len & 0xff), static_cast<char>(len >> 8)};
  out.write(len_bytes, 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  const auto values = m.values();
  if (dtype == DType::f8) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
  } else {
    std::vector<float> narrow(values.begin(), values.end());
    out.write(reinterpret_cast<const char*>(narrow.data()),
              static_cast<std::streamsize>(narrow.size() * sizeof(float)));
  }
  out.flush();
  if (!out) throw IoError("write to " + describe(path) + " failed");
}

}  // namespace

NpyHeader read_npy_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + describe(path));

  std::array<char, kPreludeBytes> prelude{};
  in.read(prelude.data(), prelude.size());
  if (in.gcount() != static_cast<std::streamsize>(prelude.size()) ||
      !std::equal(kMagic.begin(), kMagic.end(), prelude.begin())) {
    throw FormatError(describe(path) + " is not an npy file (bad magic)");
  }
  if (prelude[6] != 1 || prelude[7] != 0) {
    throw FormatError(describe(path) + " has npy version " + std::to_string(prelude[6]) + "." +
                      std::to_string(prelude[7]) + "; only 1.0 is supported");
  }
  const std::size_t header_len = static_cast<unsigned char>(prelude[8]) |
                                 (static_cast<std::size_t>(static_cast<unsigned char>(prelude[9])) << 8);
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (in.gcount() != static_cast<std::streamsize>(header_len)) {
    throw FormatError(describe(path) + " has a truncated npy header");
  }
  if (header.find('{') == std::string::npos || header.find('}') == std::string::npos) {
    throw FormatError("npy header of " + describe(path) + " is not a dict literal");
  }

  NpyHeader h;
  std::string descr = header_field(header, "descr", path);
  if (descr.size() >= 2 && (descr.front() == '\'' || descr.front() == '"')) {
    descr = descr.substr(1, descr.size() - 2);
  }
  if (descr == "<f8") {
    h.dtype = DType::f8;
  } else if (descr == "<f4") {
    h.dtype = DType::f4;
  } else {
    throw FormatError(describe(path) + " has dtype '" + descr + "'; expected '<f4' or '<f8'");
  }
  if (header_field(header, "fortran_order", path) != "False") {
    throw FormatError(describe(path) + " is fortran-ordered; only C order is supported");
  }
  const auto shape = parse_shape(header_field(header, "shape", path), path);
  if (shape.size() != 2) {
    throw FormatError(describe(path) + " holds a " + std::to_string(shape.size()) +
                      "-D array; feature files must be 2-D");
  }
  h.rows = shape[0];
  h.cols = shape[1];
  h.data_offset = kPreludeBytes + header_len;
  return h;
}

FeatureMatrix load_features(const fs::path& path) {
  const NpyHeader h = read_npy_header(path);
  if (h.rows == 0 || h.cols == 0) {
    throw FormatError(describe(path) + " has empty shape (" + std::to_string(h.rows) + ", " +
                      std::to_string(h.cols) + ")");
  }
  const std::size_t count = h.rows * h.cols;
  const std::size_t width = h.dtype == DType::f8 ? sizeof(double) : sizeof(float);

  std::ifstream in(path, std::ios::binary);
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::size_t>(in.tellg());
  if (file_size != h.data_offset + count * width) {
    throw FormatError(describe(path) + " payload is " + std::to_string(file_size - h.data_offset) +
                      " bytes; header implies " + std::to_string(count * width));
  }
  in.seekg(static_cast<std::streamoff>(h.data_offset));

  RowMatrix data(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  if (h.dtype == DType::f8) {
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * width));
  } else {
    std::vector<float> narrow(count);
    in.read(reinterpret_cast<char*>(narrow.data()), static_cast<std::streamsize>(count * width));
    std::copy(narrow.begin(), narrow.end(), data.data());
  }
  if (!in) throw IoError("read of " + describe(path) + " failed");
  try {
    return FeatureMatrix(std::move(data));
  } catch (const DataError& e) {
    throw DataError(describe(path) + ": " + e.what(), e.row(), e.col());
  }
}

void save_features(const FeatureMatrix& m, const fs::path& path) { write_npy(m, path, DType::f8); }

void save_features_f32(const FeatureMatrix& m, const fs::path& path) {
  write_npy(m, path, DType::f4);
}

FeatureMatrix subsample(const FeatureMatrix& m, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > m.rows()) {
    throw ArgumentError("subsample size " + std::to_string(k) + " outside [1, " +
                        std::to_string(m.rows()) + "]");
  }
  Rng rng(seed);
  const auto picked = sample_without_replacement(m.rows(), k, rng);
  RowMatrix out(static_cast<Eigen::Index>(k), m.data().cols());
  for (std::size_t i = 0; i < k; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.data().row(static_cast<Eigen::Index>(picked[i]));
  }
  return FeatureMatrix(std::move(out));
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + describe(path));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) {
      EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + describe(path));
  nlohmann::json j;
  try {
    in >> j;
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.feature_path = j.at("feature_path").get<std::string>();
    m.count = j.at("count").get<std::size_t>();
    m.dim = j.at("dim").get<std::size_t>();
    m.checksum = j.at("checksum").get<std::string>();
    if (m.feature_path.is_relative()) m.feature_path = path.parent_path() / m.feature_path;
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + describe(path) + ": " + e.what());
  }
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const nlohmann::ordered_json j = {{"name", manifest.name},
                                    {"feature_path", manifest.feature_path.string()},
                                    {"count", manifest.count},
                                    {"dim", manifest.dim},
                                    {"checksum", manifest.checksum}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + describe(path) + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write to " + describe(path) + " failed");
}

DatasetManifest make_manifest(const std::string& name, const fs::path& feature_path) {
  const NpyHeader h = read_npy_header(feature_path);
  return {name, feature_path, h.rows, h.cols, sha256_file(feature_path)};
}

FeatureMatrix load_from_manifest(const DatasetManifest& manifest) {
  const NpyHeader h = read_npy_header(manifest.feature_path);
  if (h.rows != manifest.count || h.cols != manifest.dim) {
    throw FormatError("manifest '" + manifest.name + "' declares " +
                      std::to_string(manifest.count) + "x" + std::to_string(manifest.dim) +
                      " but " + describe(manifest.feature_path) + " holds " +
                      std::to_string(h.rows) + "x" + std::to_string(h.cols));
  }
  const std::string actual = sha256_file(manifest.feature_path);
  if (actual != manifest.checksum) {
    throw FormatError("checksum mismatch for " + describe(manifest.feature_path) + ": manifest " +
                      manifest.checksum + ", file " + actual);
  }
  return load_features(manifest.feature_path);
}

}  // namespace refgeo::store
