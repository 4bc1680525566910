#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "refgeo/geometry.hpp"
#include "refgeo/metrics.hpp"
#include "refgeo/mixed_models.hpp"
#include "refgeo/toy_model.hpp"

namespace refgeo::report {

using Row = nlohmann::ordered_json;

Row describe_row(const std::string& name, std::size_t dim, const geometry::GeometryDescriptors& g);
Row metric_row(const metrics::MetricResult& r);
Row analysis_row(const hlm::TestReport& r, const std::string& x_name, const std::string& y_name,
                 const std::optional<std::string>& z_name);
Row ols_row(const std::string& group, const std::string& x_name, const std::string& y_name,
            double r2, std::size_t n);
Row toy_row(const toy::ToyReport& r);

/// Observation CSV: a header naming at least `group_col`, `x_col` and
/// `y_col`; one record per line. FormatError carries the 1-based line number.
std::vector<hlm::Observation> read_observations(const std::filesystem::path& path,
                                                const std::string& x_col = "x",
                                                const std::string& y_col = "y",
                                                const std::string& group_col = "group");

/// Per-group values of `col` from a CSV with a `group_col` column. Repeated
/// groups must agree.
std::map<std::string, double> read_group_values(const std::filesystem::path& path,
                                                const std::string& col = "z",
                                                const std::string& group_col = "group");

/// Reads JSON-lines rows; blank lines are skipped.
std::vector<Row> read_rows(const std::filesystem::path& path);

/// Appends rows as JSON lines, creating the file when missing.
void append_rows(const std::vector<Row>& rows, const std::filesystem::path& path);

struct RenderedTable {
  std::string text;  ///< aligned plain text
  std::string csv;
};

/// Renders rows of a single kind in input order. Empty input renders the
/// header of `fallback_kind`. Mixed kinds are a FormatError.
RenderedTable render(const std::vector<Row>& rows, const std::string& fallback_kind = "describe");

/// Column names of a row kind, in table order.
std::vector<std::string> columns_for(const std::string& kind);

}  // namespace refgeo::report
