#include "refgeo/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "refgeo/error.hpp"

namespace refgeo::report {

namespace fs = std::filesystem;

namespace {

nlohmann::ordered_json number_or_null(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const fs::path& path, std::size_t line,
                    const std::string& col) {
  double v = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": column '" + col +
                      "' is not a number: '" + text + "'");
  }
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> records;  // (line, fields)

  std::size_t column(const std::string& name, const fs::path& path) const {
    const auto it = std::ranges::find(header, name);
    if (it == header.end()) {
      throw FormatError(path.string() + ":1: header lacks column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  }
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(t.header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    t.records.emplace_back(line_no, std::move(fields));
  }
  if (t.header.empty()) throw FormatError(path.string() + ":1: missing header");
  return t;
}

std::string format_cell(const nlohmann::ordered_json& v, bool for_csv) {
  if (v.is_null()) return for_csv ? "" : "-";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) {
    if (for_csv) return v.dump();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_object()) {
    std::string s;
    for (const auto& [k, val] : v.items()) {
      if (!s.empty()) s += ';';
      s += k + "=" + format_cell(val, for_csv);
    }
    return s;
  }
  return v.dump();
}

// looks up dotted paths such as "config.D"
const nlohmann::ordered_json* lookup(const Row& row, const std::string& key) {
  const nlohmann::ordered_json* node = &row;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
  }
  return node;
}

}  // namespace

Row describe_row(const std::string& name, std::size_t dim, const geometry::GeometryDescriptors& g) {
  return {{"kind", "describe"}, {"name", name},
          {"n", g.n},           {"D", dim},
          {"k", g.k},           {"density", g.mean_knn_log_density},
          {"erank", g.effective_rank}};
}

Row metric_row(const metrics::MetricResult& r) {
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.params) {
    if (v == std::floor(v) && std::abs(v) < 9e15) {
      params[k] = static_cast<long long>(v);
    } else {
      params[k] = v;
    }
  }
  return {{"kind", "metric"}, {"metric_name", r.metric_name}, {"value", r.value},
          {"n_ref", r.n_ref}, {"n_gen", r.n_gen},             {"params", params}};
}

Row analysis_row(const hlm::TestReport& r, const std::string& x_name, const std::string& y_name,
                 const std::optional<std::string>& z_name) {
  Row row = {{"kind", "analysis"},
             {"test", hlm::to_string(r.kind)},
             {"x", x_name},
             {"y", y_name},
             {"z", z_name ? nlohmann::ordered_json(*z_name) : nlohmann::ordered_json(nullptr)},
             {"statistic", r.statistic},
             {"p_value", number_or_null(r.p_value)},
             {"r2_slope", number_or_null(r.r2_slope)},
             {"standardize", r.standardized}};
  nlohmann::ordered_json fits = nlohmann::ordered_json::array();
  for (const auto& f : r.fits) {
    nlohmann::ordered_json gamma = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < f.gamma.size(); ++i) {
      gamma[f.gamma_names[i]] = {{"estimate", f.gamma[i]}, {"se", f.se_gamma[i]}};
    }
    fits.push_back({{"model", hlm::to_string(f.kind)},
                    {"loglik", f.loglik},
                    {"gamma", gamma},
                    {"tau00", f.tau(0, 0)},
                    {"tau01", f.tau(0, 1)},
                    {"tau11", f.tau(1, 1)},
                    {"sigma2", f.sigma2},
                    {"iterations", f.iterations}});
  }
  if (r.wald_z) row["wald_z"] = *r.wald_z;
  row["fits"] = fits;
  return row;
}

Row ols_row(const std::string& group, const std::string& x_name, const std::string& y_name,
            double r2, std::size_t n) {
  return {{"kind", "ols"}, {"group", group}, {"x", x_name}, {"y", y_name}, {"r2", r2}, {"n", n}};
}

Row toy_row(const toy::ToyReport& r) {
  const auto& c = r.config;
  return {{"kind", "toy"},
          {"config",
           {{"D", c.dim}, {"r", c.rank}, {"lambda", c.lambda}, {"n", c.n}, {"seed", c.seed}, {"k", c.k}}},
          {"empirical_frechet", r.empirical_frechet},
          {"analytic_w2", r.analytic_w2},
          {"rel_error", r.rel_error},
          {"erank", r.erank},
          {"density", r.density}};
}

std::vector<hlm::Observation> read_observations(const fs::path& path, const std::string& x_col,
                                                const std::string& y_col,
                                                const std::string& group_col) {
  const CsvTable t = read_csv(path);
  const std::size_t gi = t.column(group_col, path);
  const std::size_t xi = t.column(x_col, path);
  const std::size_t yi = t.column(y_col, path);
  std::vector<hlm::Observation> out;
  for (const auto& [line, f] : t.records) {
    if (f[gi].empty()) {
      throw FormatError(path.string() + ":" + std::to_string(line) + ": empty group identifier");
    }
    out.push_back({f[gi], parse_number(f[xi], path, line, x_col), parse_number(f[yi], path, line, y_col)});
  }
  return out;
}

std::map<std::string, double> read_group_values(const fs::path& path, const std::string& col,
                                                const std::string& group_col) {
  const CsvTable t = read_csv(path);
  const std::size_t gi = t.column(group_col, path);
  const std::size_t vi = t.column(col, path);
  std::map<std::string, double> out;
  for (const auto& [line, f] : t.records) {
    const double v = parse_number(f[vi], path, line, col);
    const auto [it, inserted] = out.emplace(f[gi], v);
    if (!inserted && it->second != v) {
      throw FormatError(path.string() + ":" + std::to_string(line) + ": group '" + f[gi] +
                        "' has conflicting values for '" + col + "'");
    }
  }
  return out;
}

std::vector<Row> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      rows.push_back(Row::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!rows.back().is_object() || !rows.back().contains("kind")) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": row has no 'kind'");
    }
  }
  return rows;
}

void append_rows(const std::vector<Row>& rows, const fs::path& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open '" + path.string() + "' for appending");
  for (const auto& r : rows) out << r.dump() << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<std::string> columns_for(const std::string& kind) {
  if (kind == "describe") return {"name", "n", "D", "k", "density", "erank"};
  if (kind == "metric") return {"metric_name", "value", "n_ref", "n_gen", "params"};
  if (kind == "analysis") return {"x", "y", "z", "test", "statistic", "p_value", "r2_slope", "standardize"};
  if (kind == "ols") return {"group", "x", "y", "r2", "n"};
  if (kind == "toy") {
    return {"config.D", "config.r",         "config.lambda", "config.n", "empirical_frechet",
            "analytic_w2", "rel_error", "erank", "density"};
  }
  throw FormatError("unknown row kind '" + kind + "'");
}

RenderedTable render(const std::vector<Row>& rows, const std::string& fallback_kind) {
  const std::string kind = rows.empty() ? fallback_kind : rows.front().at("kind").get<std::string>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string k = rows[i].at("kind").get<std::string>();
    if (k != kind) {
      throw FormatError("cannot render mixed row kinds: row 0 is '" + kind + "', row " +
                        std::to_string(i) + " is '" + k + "'");
    }
  }
  const auto cols = columns_for(kind);

  std::vector<std::vector<std::string>> text_cells, csv_cells;
  for (const auto& r : rows) {
    std::vector<std::string> t, c;
    for (const auto& col : cols) {
      const auto* v = lookup(r, col);
      const nlohmann::ordered_json null_value;
      t.push_back(format_cell(v ? *v : null_value, false));
      c.push_back(format_cell(v ? *v : null_value, true));
    }
    text_cells.push_back(std::move(t));
    csv_cells.push_back(std::move(c));
  }

  std::vector<std::size_t> width(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    width[j] = cols[j].size();
    for (const auto& row : text_cells) width[j] = std::max(width[j], row[j].size());
  }
  std::ostringstream text;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j > 0) text << "  ";
      // first column left-aligned, the rest right-aligned
      if (j == 0) {
        text << cells[j] << std::string(width[j] - cells[j].size(), ' ');
      } else {
        text << std::string(width[j] - cells[j].size(), ' ') << cells[j];
      }
    }
    text << '\n';
  };
  emit(cols);
  std::size_t total = 0;
  for (auto w : width) total += w;
  text << std::string(total + 2 * (cols.size() - 1), '-') << '\n';
  for (const auto& row : text_cells) emit(row);

  std::ostringstream csv;
  for (std::size_t j = 0; j < cols.size(); ++j) csv << (j ? "," : "") << cols[j];
  csv << '\n';
  for (const auto& row : csv_cells) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      const bool quote = row[j].find(',') != std::string::npos;
      csv << (j ? "," : "") << (quote ? "\"" + row[j] + "\"" : row[j]);
    }
    csv << '\n';
  }
  return {text.str(), csv.str()};
}

}  // namespace refgeo::report
