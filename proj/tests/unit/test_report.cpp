#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "refgeo/error.hpp"
#include "refgeo/feature_store.hpp"
#include "refgeo/report.hpp"
#include "refgeo/rng.hpp"
#include "support/simulate.hpp"

namespace fs = std::filesystem;
using namespace refgeo;
using report::Row;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("refgeo_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct RunResult {
  int code;
  std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + std::string(REFGEO_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

FeatureMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return FeatureMatrix(std::move(m));
}

std::string observations_csv(const sim::SimTable& t) {
  std::ostringstream s;
  s.precision(17);
  s << "group,x,y\n";
  for (const auto& o : t.rows) s << o.group << ',' << o.x << ',' << o.y << '\n';
  return s.str();
}

std::string covariates_csv(const sim::SimTable& t) {
  std::ostringstream s;
  s.precision(17);
  s << "group,z\n";
  for (const auto& [g, z] : t.z) s << g << ',' << z << '\n';
  return s.str();
}

Row describe(const std::string& name) {
  return Row{{"kind", "describe"}, {"name", name}, {"n", 10}, {"D", 4}, {"k", 3}, {"density", -1.25}, {"erank", 3.5}};
}

}  // namespace

TEST(ReadObservations, ParsesNamedColumns) {
  TempDir dir;
  write_file(dir / "obs.csv", "step,group,fid\n1,a,2.5\n2,a,3\n\n3,b,-1e-3\n");
  const auto rows = report::read_observations(dir / "obs.csv", "step", "fid");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].group, "b");
  EXPECT_EQ(rows[2].x, 3.0);
  EXPECT_EQ(rows[2].y, -1e-3);
}

TEST(ReadObservations, ErrorsCarryLineNumbers) {
  TempDir dir;
  write_file(dir / "bad.csv", "group,x,y\na,1,2\na,oops,3\n");
  try {
    report::read_observations(dir / "bad.csv");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv:3"), std::string::npos) << e.what();
  }
  write_file(dir / "short.csv", "group,x,y\na,1,2\na,1\n");
  EXPECT_THROW(report::read_observations(dir / "short.csv"), FormatError);
  write_file(dir / "nohdr.csv", "group,x\na,1\n");
  EXPECT_THROW(report::read_observations(dir / "nohdr.csv"), FormatError);
  EXPECT_THROW(report::read_observations(dir / "missing.csv"), IoError);
}

TEST(ReadGroupValues, RepeatsMustAgree) {
  TempDir dir;
  write_file(dir / "z.csv", "group,z\na,1\nb,2\na,1\n");
  const auto z = report::read_group_values(dir / "z.csv");
  EXPECT_EQ(z.at("a"), 1.0);
  EXPECT_EQ(z.at("b"), 2.0);
  write_file(dir / "zbad.csv", "group,z\na,1\na,2\n");
  EXPECT_THROW(report::read_group_values(dir / "zbad.csv"), FormatError);
}

TEST(Rows, AppendAndReadBack) {
  TempDir dir;
  report::append_rows({describe("a")}, dir / "rows.jsonl");
  report::append_rows({describe("b"), describe("c")}, dir / "rows.jsonl");
  const auto rows = report::read_rows(dir / "rows.jsonl");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1]["name"], "b");
  write_file(dir / "nokind.jsonl", "{\"a\": 1}\n");
  EXPECT_THROW(report::read_rows(dir / "nokind.jsonl"), FormatError);
  write_file(dir / "broken.jsonl", "{\"kind\": \n");
  EXPECT_THROW(report::read_rows(dir / "broken.jsonl"), FormatError);
}

TEST(Render, DescribeTableLayout) {
  const auto t = report::render({describe("ffhq"), describe("imagenet"), describe("x")});
  std::istringstream lines(t.text);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header.find("name"), 0u);
  EXPECT_LT(header.find("density"), header.find("erank"));
  int count = 0;
  for (std::string l; std::getline(lines, l);) count += !l.empty() && l.find_first_not_of("- ") != std::string::npos;
  EXPECT_EQ(count, 3);
  EXPECT_EQ(t.csv.substr(0, t.csv.find('\n')), "name,n,D,k,density,erank");
  EXPECT_NE(t.csv.find("imagenet,10,4,3,-1.25,3.5"), std::string::npos) << t.csv;
}

TEST(Render, EmptyInputRendersHeaderOnly) {
  const auto t = report::render({}, "metric");
  EXPECT_EQ(t.csv, "metric_name,value,n_ref,n_gen,params\n");
}

TEST(Render, MixedKindsAreRejected) {
  Row m{{"kind", "metric"}, {"metric_name", "frechet"}, {"value", 1.0}};
  EXPECT_THROW(report::render({describe("a"), m}), FormatError);
  EXPECT_THROW(report::columns_for("nope"), FormatError);
}

TEST(Rows, ToyRowShape) {
  toy::ToyReport r;
  r.config.dim = 16;
  r.config.rank = 8;
  r.empirical_frechet = 1.0;
  const Row row = report::toy_row(r);
  for (const char* key : {"config", "empirical_frechet", "analytic_w2", "rel_error", "erank", "density"}) {
    EXPECT_TRUE(row.contains(key)) << key;
  }
  EXPECT_EQ(row["config"]["D"], 16);
  EXPECT_EQ(row["config"]["r"], 8);
}

// --- command line ---

TEST(Cli, DescribeEmitsRowAndAppends) {
  TempDir dir;
  store::save_features(random_matrix(50, 3, 1), dir / "ref.npy");
  const auto out = dir / "rows.jsonl";
  const auto r = run_cli("describe " + (dir / "ref.npy").string() + " --k 5 --out " + out.string());
  ASSERT_EQ(r.code, 0);
  const Row row = Row::parse(r.out);
  EXPECT_EQ(row["name"], "ref");
  EXPECT_EQ(row["n"], 50);
  EXPECT_EQ(row["D"], 3);
  EXPECT_EQ(row["k"], 5);
  EXPECT_EQ(run_cli("describe " + (dir / "ref.npy").string() + " --k 5 --out " + out.string()).code, 0);
  EXPECT_EQ(report::read_rows(out).size(), 2u);
}

TEST(Cli, DescribeThroughManifest) {
  TempDir dir;
  store::save_features(random_matrix(20, 2, 1), dir / "f.npy");
  store::write_manifest(store::make_manifest("mine", dir / "f.npy"), dir / "m.json");
  const auto r = run_cli("describe " + (dir / "m.json").string() + " --k 2");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(Row::parse(r.out)["name"], "mine");
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  store::save_features(random_matrix(20, 2, 1), dir / "a.npy");
  store::save_features(random_matrix(20, 3, 2), dir / "b.npy");
  RowMatrix dup = random_matrix(6, 2, 3).data();
  dup.row(4) = dup.row(1);
  store::save_features(FeatureMatrix(dup), dir / "dup.npy");
  write_file(dir / "junk.npy", "not a numpy file");

  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("describe " + (dir / "a.npy").string() + " --k 20").code, 2);
  EXPECT_EQ(run_cli("describe " + (dir / "a.npy").string() + " --k abc").code, 2);
  EXPECT_EQ(run_cli("metric frechet " + (dir / "a.npy").string() + " " + (dir / "b.npy").string()).code, 2);
  EXPECT_EQ(run_cli("metric kid " + (dir / "a.npy").string() + " " + (dir / "a.npy").string()).code, 2);
  EXPECT_EQ(run_cli("describe " + (dir / "junk.npy").string()).code, 3);
  EXPECT_EQ(run_cli("describe " + (dir / "missing.npy").string()).code, 3);
  EXPECT_EQ(run_cli("describe " + (dir / "dup.npy").string() + " --k 1").code, 4);
  EXPECT_EQ(run_cli("toy --D 4 --r 5").code, 2);
}

TEST(Cli, MetricRows) {
  TempDir dir;
  store::save_features(random_matrix(30, 4, 1), dir / "a.npy");
  const std::string a = (dir / "a.npy").string();
  auto r = run_cli("metric frechet " + a + " " + a);
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(Row::parse(r.out)["value"], 0.0);
  r = run_cli("metric kid " + a + " " + a + " --subset-size 30 --num-subsets 2 --seed 4");
  ASSERT_EQ(r.code, 0);
  const Row kid = Row::parse(r.out);
  EXPECT_EQ(kid["value"], 0.0);
  EXPECT_EQ(kid["params"]["subset_size"], 30);
  r = run_cli("metric pr " + a + " " + a + " --k 2");
  ASSERT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::string p, q;
  std::getline(lines, p);
  std::getline(lines, q);
  EXPECT_EQ(Row::parse(p)["metric_name"], "precision");
  EXPECT_EQ(Row::parse(q)["metric_name"], "recall");
  EXPECT_EQ(Row::parse(q)["value"], 1.0);
}

TEST(Cli, AnalyzeOmnibusAndModeration) {
  TempDir dir;
  Rng rng(3);
  sim::HlmSpec spec;
  spec.tau11 = 0.0;
  spec.g11 = 0.3;
  spec.sigma2 = 1e-8;
  const auto t = sim::simulate(spec, rng);
  write_file(dir / "obs.csv", observations_csv(t));
  write_file(dir / "z.csv", covariates_csv(t));
  const auto r = run_cli("analyze " + (dir / "obs.csv").string() + " --covariates " + (dir / "z.csv").string() +
                         " --z z --no-standardize");
  ASSERT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::string a, b;
  std::getline(lines, a);
  std::getline(lines, b);
  const Row omni = Row::parse(a);
  const Row mod = Row::parse(b);
  EXPECT_EQ(omni["test"], "omnibus");
  EXPECT_EQ(omni["standardize"], false);
  EXPECT_EQ(mod["test"], "moderation");
  EXPECT_NEAR(mod["r2_slope"].get<double>(), 1.0, 1e-4);
  EXPECT_LT(mod["p_value"].get<double>(), 1e-4);
  EXPECT_EQ(mod["fits"].size(), 2u);
}

TEST(Cli, AnalyzeOlsAndFormatErrors) {
  TempDir dir;
  write_file(dir / "obs.csv", "group,x,y\na,1,1\na,2,3\na,3,5\nb,1,0\nb,2,1\nb,3,0\n");
  const auto r = run_cli("analyze " + (dir / "obs.csv").string() + " --ols");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(Row::parse(r.out.substr(0, r.out.find('\n')))["r2"], 1.0);
  write_file(dir / "bad.csv", "group,x,y\na,1,1\na,2,x\n");
  EXPECT_EQ(run_cli("analyze " + (dir / "bad.csv").string()).code, 3);
  write_file(dir / "tiny.csv", "group,x,y\na,1,1\na,2,2\nb,1,1\nb,2,2\n");
  EXPECT_EQ(run_cli("analyze " + (dir / "tiny.csv").string()).code, 2);
}

TEST(Cli, ReportRendersAndRejectsMixedKinds) {
  TempDir dir;
  report::append_rows({describe("a"), describe("b")}, dir / "d.jsonl");
  report::append_rows({Row{{"kind", "metric"}, {"metric_name", "kid"}}}, dir / "m.jsonl");
  const auto csv = dir / "t.csv";
  auto r = run_cli("report " + (dir / "d.jsonl").string() + " --csv " + csv.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("erank"), std::string::npos);
  EXPECT_EQ(read_file(csv).substr(0, 26), "name,n,D,k,density,erank\na");
  EXPECT_EQ(run_cli("report " + (dir / "d.jsonl").string() + " " + (dir / "m.jsonl").string()).code, 3);
  write_file(dir / "empty.jsonl", "");
  r = run_cli("report " + (dir / "empty.jsonl").string() + " --kind toy");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("config.D"), 0u);
}

TEST(Cli, ToyRowAndByteIdenticalReruns) {
  const std::string args = "toy --D 6 --r 3 --lambda 0.5 --n 1500 --k 10 --seed 5";
  const auto a = run_cli(args);
  ASSERT_EQ(a.code, 0);
  const Row row = Row::parse(a.out);
  EXPECT_EQ(row["config"]["D"], 6);
  EXPECT_LT(row["rel_error"].get<double>(), 0.2);
  EXPECT_EQ(run_cli(args).out, a.out);
  EXPECT_EQ(run_cli(args, "REFGEO_THREADS=1 ").out, a.out);
  EXPECT_EQ(run_cli(args, "REFGEO_THREADS=3 ").out, a.out);
}
