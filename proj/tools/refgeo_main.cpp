// refgeo: reference-dataset geometry, distributional metrics and
// hierarchical-model analyses over precomputed feature files.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "refgeo/error.hpp"
#include "refgeo/feature_store.hpp"
#include "refgeo/geometry.hpp"
#include "refgeo/kernels.hpp"
#include "refgeo/metrics.hpp"
#include "refgeo/mixed_models.hpp"
#include "refgeo/report.hpp"
#include "refgeo/toy_model.hpp"

namespace fs = std::filesystem;
using namespace refgeo;

namespace {

enum ExitCode { kOk = 0, kArgument = 2, kData = 3, kNumerical = 4 };

struct Loaded {
  FeatureMatrix features;
  std::string name;
};

Loaded load_input(const fs::path& path) {
  try {
    if (path.extension() == ".json") {
      const auto manifest = store::read_manifest(path);
      return {store::load_from_manifest(manifest), manifest.name};
    }
    return {store::load_features(path), path.stem().string()};
  } catch (const DataError& e) {
    throw DataError(std::string("loading ") + path.string() + ": " + e.what(), e.row(), e.col());
  }
}

void emit(const std::vector<report::Row>& rows, const std::string& out) {
  for (const auto& r : rows) std::cout << r.dump() << '\n';
  if (!out.empty()) report::append_rows(rows, out);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"refgeo: reference-dataset geometry and distributional metrics"};
  app.require_subcommand(1);

  std::string out;
  std::uint64_t seed = 0;

  // describe
  auto* describe = app.add_subcommand("describe", "mean kNN log-density and effective rank of a feature set");
  std::string describe_input, describe_name;
  std::size_t describe_k = geometry::kDefaultDensityK;
  std::size_t describe_subsample = 0;
  describe->add_option("features", describe_input, "npy feature file or manifest .json")->required();
  describe->add_option("--name", describe_name, "dataset name (default: file stem or manifest name)");
  describe->add_option("--k", describe_k, "neighbor rank for the density")->capture_default_str();
  describe->add_option("--subsample", describe_subsample, "use a seeded subsample of this many rows");
  describe->add_option("--seed", seed, "subsample seed")->capture_default_str();
  describe->add_option("--out", out, "append the JSON row to this file");

  // metric
  auto* metric = app.add_subcommand("metric", "distance between a reference and a generated feature set");
  std::string metric_name, metric_ref, metric_gen;
  std::size_t metric_k = metrics::kDefaultPrK;
  std::size_t subset_size = metrics::kDefaultKidSubsetSize;
  std::size_t num_subsets = metrics::kDefaultKidSubsets;
  metric->add_option("name", metric_name, "frechet | kid | pr")
      ->required()
      ->check(CLI::IsMember({"frechet", "kid", "pr"}));
  metric->add_option("reference", metric_ref)->required();
  metric->add_option("generated", metric_gen)->required();
  metric->add_option("--k", metric_k, "neighbor rank for precision/recall")->capture_default_str();
  metric->add_option("--subset-size", subset_size, "KID subset size")->capture_default_str();
  metric->add_option("--num-subsets", num_subsets, "KID subset count")->capture_default_str();
  metric->add_option("--seed", seed, "KID subset seed")->capture_default_str();
  metric->add_option("--out", out, "append JSON rows to this file");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "omnibus / moderation tests or per-group OLS R^2");
  std::string obs_path, cov_path, x_name = "x", y_name = "y", z_name, group_col = "group";
  bool standardize = true;
  bool per_group_ols = false;
  analyze->add_option("observations", obs_path, "CSV with group and x/y columns")->required();
  analyze->add_option("--covariates", cov_path, "CSV with group and z columns");
  analyze->add_option("--x", x_name, "x column")->capture_default_str();
  analyze->add_option("--y", y_name, "y column")->capture_default_str();
  analyze->add_option("--z", z_name, "covariate column; enables the moderation test");
  analyze->add_option("--group", group_col, "group column")->capture_default_str();
  analyze->add_flag("--standardize,!--no-standardize", standardize,
                    "z-score x, y (pooled) and z (across groups) before fitting (default on)");
  analyze->add_flag("--ols", per_group_ols, "per-group OLS R^2 of y on x instead of the HLM tests");
  analyze->add_option("--out", out, "append JSON rows to this file");

  // toy
  auto* toy_cmd = app.add_subcommand("toy", "validate metrics and descriptors on the rank-r Gaussian toy model");
  toy::ToyConfig cfg;
  toy_cmd->add_option("--D", cfg.dim, "ambient dimension")->capture_default_str();
  toy_cmd->add_option("--r", cfg.rank, "support rank")->capture_default_str();
  toy_cmd->add_option("--lambda", cfg.lambda, "noise level")->capture_default_str();
  toy_cmd->add_option("--n", cfg.n, "samples")->capture_default_str();
  toy_cmd->add_option("--k", cfg.k, "neighbor rank for the density")->capture_default_str();
  toy_cmd->add_option("--seed", cfg.seed)->capture_default_str();
  toy_cmd->add_option("--out", out, "append the JSON row to this file");

  // report
  auto* report_cmd = app.add_subcommand("report", "render JSON-lines rows as aligned text and CSV");
  std::vector<std::string> row_files;
  std::string csv_path, kind = "describe";
  report_cmd->add_option("rows", row_files, "JSON-lines files from earlier commands")->required();
  report_cmd->add_option("--csv", csv_path, "also write the table as CSV");
  report_cmd->add_option("--kind", kind, "header layout used when the input is empty")->capture_default_str();
  report_cmd->add_option("--out", out, "write the text table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kArgument;
  }

  kernels::configure_threads_from_env();

  try {
    if (describe->parsed()) {
      Loaded in = load_input(describe_input);
      FeatureMatrix m = describe_subsample > 0 ? store::subsample(in.features, describe_subsample, seed)
                                               : std::move(in.features);
      const auto g = geometry::describe(m, describe_k);
      emit({report::describe_row(describe_name.empty() ? in.name : describe_name, m.cols(), g)}, out);
    } else if (metric->parsed()) {
      const Loaded ref = load_input(metric_ref);
      const Loaded gen = load_input(metric_gen);
      if (ref.features.cols() != gen.features.cols()) {
        throw ArgumentError("feature dimensions differ: " + metric_ref + " has D=" +
                            std::to_string(ref.features.cols()) + ", " + metric_gen + " has D=" +
                            std::to_string(gen.features.cols()));
      }
      std::vector<report::Row> rows;
      if (metric_name == "frechet") {
        rows.push_back(report::metric_row(metrics::frechet(ref.features, gen.features)));
      } else if (metric_name == "kid") {
        rows.push_back(report::metric_row(
            metrics::kid_mmd(ref.features, gen.features, subset_size, num_subsets, seed)));
      } else {
        const auto pr = metrics::precision_recall(ref.features, gen.features, metric_k);
        for (const auto& [name, value] : {std::pair{"precision", pr.precision}, std::pair{"recall", pr.recall}}) {
          metrics::MetricResult r;
          r.metric_name = name;
          r.value = value;
          r.n_ref = ref.features.rows();
          r.n_gen = gen.features.rows();
          r.params = {{"k", static_cast<double>(metric_k)}};
          rows.push_back(report::metric_row(r));
        }
      }
      emit(rows, out);
    } else if (analyze->parsed()) {
      const auto obs = report::read_observations(obs_path, x_name, y_name, group_col);
      if (per_group_ols) {
        std::vector<std::string> order;
        std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
        for (const auto& o : obs) {
          if (!series.contains(o.group)) order.push_back(o.group);
          series[o.group].first.push_back(o.x);
          series[o.group].second.push_back(o.y);
        }
        std::vector<report::Row> rows;
        for (const auto& g : order) {
          const auto& [xs, ys] = series[g];
          rows.push_back(report::ols_row(g, x_name, y_name, hlm::ols_r2(xs, ys), xs.size()));
        }
        emit(rows, out);
      } else {
        std::map<std::string, double> covariates;
        std::optional<std::string> z;
        if (!z_name.empty()) {
          z = z_name;
          covariates = report::read_group_values(cov_path.empty() ? obs_path : cov_path, z_name, group_col);
        }
        const hlm::ObservationTable table(obs, covariates);
        std::vector<report::Row> rows;
        rows.push_back(report::analysis_row(hlm::omnibus_test(table, standardize), x_name, y_name, std::nullopt));
        if (z) rows.push_back(report::analysis_row(hlm::moderation_test(table, standardize), x_name, y_name, z));
        emit(rows, out);
      }
    } else if (toy_cmd->parsed()) {
      emit({report::toy_row(toy::verify_toy(cfg))}, out);
    } else if (report_cmd->parsed()) {
      std::vector<report::Row> rows;
      for (const auto& f : row_files) {
        auto more = report::read_rows(f);
        rows.insert(rows.end(), more.begin(), more.end());
      }
      const auto table = report::render(rows, kind);
      if (out.empty()) {
        std::cout << table.text;
      } else {
        write_text(out, table.text);
      }
      if (!csv_path.empty()) write_text(csv_path, table.csv);
    }
  } catch (const ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return kArgument;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kData;
  } catch (const DegenerateError& e) {
    std::cerr << "degenerate input: " << e.what() << '\n';
    return kNumerical;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << '\n';
    return kNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
