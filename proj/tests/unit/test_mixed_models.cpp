#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "refgeo/error.hpp"
#include "refgeo/mixed_models.hpp"
#include "support/oracles.hpp"
#include "support/simulate.hpp"

using namespace refgeo;
using hlm::ModelKind;
using hlm::ObservationTable;

namespace {

ObservationTable sim_table(const sim::HlmSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  auto t = sim::simulate(spec, rng);
  return ObservationTable(std::move(t.rows), std::move(t.z));
}

ObservationTable scaled_y(const ObservationTable& t, double a) {
  auto rows = t.rows();
  for (auto& o : rows) o.y *= a;
  return ObservationTable(rows, t.covariates());
}

}  // namespace

TEST(MixtureChi2, Examples) {
  EXPECT_EQ(hlm::mixture_chi2_sf(0.0), 1.0);
  EXPECT_NEAR(hlm::mixture_chi2_sf(2.7055), 0.5 * 0.1 + 0.5 * std::exp(-1.35275), 1e-5);
  EXPECT_NEAR(hlm::mixture_chi2_sf(2.7055), 0.1793, 5e-5);
  EXPECT_NEAR(hlm::mixture_chi2_sf(3.84146), 0.5 * 0.05 + 0.5 * std::exp(-1.92073), 1e-6);
  EXPECT_NEAR(hlm::mixture_chi2_sf(3.84146), 0.0983, 6e-5);  // 0.09825 printed to 4 places
  EXPECT_THROW(hlm::mixture_chi2_sf(-0.1), ArgumentError);
}

TEST(MixtureChi2, MonotoneToZero) {
  double prev = 1.0;
  for (double d = 0.1; d < 200.0; d *= 1.3) {
    const double p = hlm::mixture_chi2_sf(d);
    EXPECT_LT(p, prev);
    prev = p;
  }
  EXPECT_LT(prev, 1e-30);
  EXPECT_EQ(hlm::mixture_chi2_sf(std::numeric_limits<double>::infinity()), 0.0);
}

TEST(NormalTwoSided, KnownQuantiles) {
  EXPECT_EQ(hlm::normal_two_sided_p(0.0), 1.0);
  EXPECT_NEAR(hlm::normal_two_sided_p(1.959963984540054), 0.05, 1e-12);
  EXPECT_NEAR(hlm::normal_two_sided_p(-2.5758293035489), 0.01, 1e-12);
}

TEST(OlsR2, ExactLineAndCorrelationOracle) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 1);
  EXPECT_NEAR(hlm::ols_r2(x, y), 1.0, 1e-15);

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> a(8), b(8);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    const double r2 = hlm::ols_r2(a, b);
    EXPECT_NEAR(r2, oracle::r2(a, b), 1e-12);
    EXPECT_GE(r2, 0.0);
    EXPECT_LE(r2, 1.0);
    std::vector<double> a2, b2;
    for (double v : a) a2.push_back(-3.0 * v + 100.0);
    for (double v : b) b2.push_back(0.01 * v - 7.0);
    EXPECT_NEAR(hlm::ols_r2(a2, b2), r2, 1e-10);
  }
}

TEST(OlsR2, Errors) {
  EXPECT_THROW(hlm::ols_r2(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), DegenerateError);
  EXPECT_THROW(hlm::ols_r2(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ArgumentError);
  EXPECT_THROW(hlm::ols_r2(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), ArgumentError);
}

TEST(ObservationTable, Invariants) {
  using O = hlm::Observation;
  const std::vector<O> one_group{{"a", 1, 1}, {"a", 2, 2}, {"a", 3, 1}};
  EXPECT_THROW(ObservationTable{one_group}, ArgumentError);
  const std::vector<O> short_group{{"a", 1, 1}, {"a", 2, 2}, {"a", 3, 1}, {"b", 1, 1}, {"b", 2, 2}};
  EXPECT_THROW(ObservationTable{short_group}, ArgumentError);
  const std::vector<O> flat_x{{"a", 1, 1}, {"a", 2, 2}, {"a", 3, 1}, {"b", 1, 1}, {"b", 1, 2}, {"b", 1, 3}};
  EXPECT_THROW(ObservationTable{flat_x}, ArgumentError);
  const std::vector<O> ok{{"b", 1, 1}, {"b", 2, 2}, {"b", 3, 1}, {"a", 1, 1}, {"a", 2, 5}, {"a", 3, 3}};
  EXPECT_NO_THROW(ObservationTable{ok});
  EXPECT_EQ(ObservationTable{ok}.groups(), (std::vector<std::string>{"b", "a"}));
  EXPECT_THROW((ObservationTable{ok, {{"a", 1.0}}}), ArgumentError);
  EXPECT_THROW((ObservationTable{ok, {{"a", 1.0}, {"b", 1.0}}}), ArgumentError);
  EXPECT_THROW((ObservationTable{ok, {{"a", 1.0}, {"b", 2.0}, {"c", 3.0}}}), ArgumentError);
  EXPECT_NO_THROW((ObservationTable{ok, {{"a", 1.0}, {"b", 2.0}}}));
}

TEST(ObservationTable, StandardizedMoments) {
  const auto t = sim_table({}, 4).standardized();
  double sx = 0, sy = 0, sxx = 0, syy = 0;
  for (const auto& o : t.rows()) {
    sx += o.x; sy += o.y; sxx += o.x * o.x; syy += o.y * o.y;
  }
  const double n = static_cast<double>(t.rows().size());
  EXPECT_NEAR(sx / n, 0.0, 1e-12);
  EXPECT_NEAR(sy / n, 0.0, 1e-12);
  EXPECT_NEAR(sxx / (n - 1), 1.0, 1e-12);
  EXPECT_NEAR(syy / (n - 1), 1.0, 1e-12);
  double sz = 0, szz = 0;
  for (const auto& [g, z] : t.covariates()) {
    sz += z;
    szz += z * z;
  }
  EXPECT_NEAR(sz, 0.0, 1e-12);
  EXPECT_NEAR(szz / 5.0, 1.0, 1e-12);
}

TEST(ProfileLoglik, MatchesDenseCovarianceOracle) {
  Rng rng(12);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto t = sim_table({}, 50 + seed);
    for (auto kind : {ModelKind::intercepts_only, ModelKind::random_slopes, ModelKind::moderated}) {
      const oracle::DenseModel dense(t, kind);
      Eigen::Matrix2d tau;
      const double t00 = 0.01 + rng.uniform01() * 0.2;
      const double t11 = kind == ModelKind::intercepts_only ? 0.0 : 0.01 + rng.uniform01() * 0.2;
      const double t01 = kind == ModelKind::intercepts_only ? 0.0 : 0.5 * std::sqrt(t00 * t11) * (rng.uniform01() - 0.5);
      tau << t00, t01, t01, t11;
      const double s2 = 0.005 + 0.02 * rng.uniform01();
      const double want = dense.loglik(tau, s2);
      EXPECT_NEAR(hlm::profile_loglik(t, kind, tau, s2), want, 1e-8 * std::abs(want)) << hlm::to_string(kind);
    }
  }
}

TEST(FitHlm, MaximumMatchesDenseNelderMead) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto t = sim_table({}, 70 + seed);
    for (auto kind : {ModelKind::intercepts_only, ModelKind::random_slopes}) {
      const auto fit = hlm::fit_hlm(t, kind, false);
      EXPECT_TRUE(fit.converged);
      const oracle::DenseModel dense(t, kind);
      const double nm = oracle::maximize_dense(dense, {0.2, 0.0, 0.2, std::log(0.02)});
      EXPECT_GE(fit.loglik, nm - 1e-6) << hlm::to_string(kind);
      EXPECT_NEAR(fit.loglik, nm, 1e-5) << hlm::to_string(kind);
      EXPECT_NEAR(fit.loglik, dense.loglik(fit.tau, fit.sigma2), 1e-8 * std::abs(fit.loglik));
    }
  }
}

TEST(FitHlm, FitShape) {
  const auto t = sim_table({}, 3);
  const auto a = hlm::fit_hlm(t, ModelKind::intercepts_only);
  EXPECT_EQ(a.gamma_names, (std::vector<std::string>{"g00", "g10"}));
  EXPECT_EQ(a.tau(1, 1), 0.0);
  EXPECT_EQ(a.tau(0, 1), 0.0);
  EXPECT_TRUE(a.standardized);
  const auto m = hlm::fit_hlm(t, ModelKind::moderated, false);
  EXPECT_EQ(m.gamma_names, (std::vector<std::string>{"g00", "g01", "g10", "g11"}));
  EXPECT_EQ(m.gamma.size(), 4u);
  EXPECT_EQ(m.se_gamma.size(), 4u);
  EXPECT_FALSE(m.standardized);
  EXPECT_GT(m.sigma2, 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m.tau);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
  EXPECT_EQ(m.tau(0, 1), m.tau(1, 0));
  EXPECT_DOUBLE_EQ(m.coefficient("g11"), m.gamma[3]);
  EXPECT_DOUBLE_EQ(m.standard_error("g01"), std::sqrt(m.gamma_cov(1, 1)));
  EXPECT_THROW(a.coefficient("g11"), ArgumentError);

  auto rows = t.rows();
  EXPECT_THROW(hlm::fit_hlm(ObservationTable(rows), ModelKind::moderated), ArgumentError);
}

TEST(FitHlm, NoiselessSharedSlopeLimit) {
  sim::HlmSpec spec;
  spec.tau00 = 0.0;
  spec.tau11 = 0.0;
  spec.sigma2 = 1e-14;
  spec.g10 = 0.7;
  const auto t = sim_table(spec, 8);
  const auto fit = hlm::fit_hlm(t, ModelKind::random_slopes, false);
  EXPECT_NEAR(fit.coefficient("g10"), 0.7, 1e-6);
  EXPECT_LE(fit.tau(1, 1), 1e-8);
}

TEST(FitHlm, SimulationCalibration) {
  // ML tau estimates with 6 groups are biased low; the fixed effects and the
  // residual variance are not (to Monte-Carlo precision).
  const sim::HlmSpec spec;
  const int reps = 200;
  std::vector<double> g00, g10, s2;
  for (int r = 0; r < reps; ++r) {
    const auto fit = hlm::fit_hlm(sim_table(spec, 10000 + static_cast<std::uint64_t>(r)), ModelKind::random_slopes, false);
    g00.push_back(fit.coefficient("g00"));
    g10.push_back(fit.coefficient("g10"));
    s2.push_back(fit.sigma2);
  }
  auto check = [&](const std::vector<double>& v, double truth, const char* what) {
    double m = 0;
    for (double e : v) m += e;
    m /= reps;
    double var = 0;
    for (double e : v) var += (e - m) * (e - m);
    const double se = std::sqrt(var / (reps - 1) / reps);
    EXPECT_LE(std::abs(m - truth), 3.0 * se) << what << " mean " << m << " se " << se;
  };
  check(g00, spec.g00, "g00");
  check(g10, spec.g10, "g10");
  // ML sigma2 carries a downward bias of a few percent at this size
  double m = 0;
  for (double e : s2) m += e;
  m /= reps;
  EXPECT_NEAR(m, spec.sigma2, 0.1 * spec.sigma2);
}

TEST(OmnibusTest, NestingAndRange) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    sim::HlmSpec spec;
    spec.tau11 = seed % 2 ? 0.0 : 0.002;
    const auto r = hlm::omnibus_test(sim_table(spec, 300 + seed));
    EXPECT_GE(r.fits[1].loglik, r.fits[0].loglik - 1e-8);
    EXPECT_GE(r.statistic, 0.0);
    ASSERT_TRUE(r.p_value.has_value());
    EXPECT_GE(*r.p_value, 0.0);
    EXPECT_LE(*r.p_value, 1.0);
    EXPECT_DOUBLE_EQ(*r.p_value, hlm::mixture_chi2_sf(r.statistic));
  }
}

TEST(OmnibusTest, DetectsSlopeVariance) {
  const auto r = hlm::omnibus_test(sim_table({}, 1));
  EXPECT_GT(r.statistic, 20.0);
  EXPECT_LT(*r.p_value, 1e-4);
}

TEST(OmnibusTest, InvariantUnderScalingY) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    sim::HlmSpec spec;
    spec.tau11 = 0.0004;
    const auto t = sim_table(spec, 400 + seed);
    const double d = hlm::omnibus_test(t, false).statistic;
    for (double a : {0.01, 3.0, 250.0}) {
      EXPECT_NEAR(hlm::omnibus_test(scaled_y(t, a), false).statistic, d, 1e-8) << a;
    }
  }
}

TEST(ModerationTest, LinearCovariateExplainsSlopes) {
  sim::HlmSpec spec;
  spec.tau11 = 0.0;
  spec.g11 = 0.3;
  spec.sigma2 = 1e-10;
  const auto t = sim_table(spec, 5);
  const auto r = hlm::moderation_test(t, false);
  EXPECT_NEAR(r.statistic, 0.3, 1e-5);
  EXPECT_LT(*r.p_value, 1e-6);
  EXPECT_NEAR(*r.r2_slope, 1.0, 1e-6);
  ASSERT_EQ(r.fits.size(), 2u);
  EXPECT_EQ(r.fits[0].kind, ModelKind::moderated);
  EXPECT_EQ(r.fits[1].kind, ModelKind::random_slopes);
}

TEST(ModerationTest, InvariantToAffineInputsWhenStandardized) {
  const auto t = sim_table({}, 77);
  const auto base = hlm::moderation_test(t);
  auto rows = t.rows();
  for (auto& o : rows) {
    o.x = 4.0 * o.x - 10.0;
    o.y = 0.02 * o.y + 3.0;
  }
  auto z = t.covariates();
  for (auto& [g, v] : z) v = -7.0 * v + 1.5;
  const auto moved = hlm::moderation_test(ObservationTable(rows, z));
  EXPECT_NEAR(*moved.p_value, *base.p_value, 1e-6);
  EXPECT_NEAR(*moved.r2_slope, *base.r2_slope, 1e-6);
  EXPECT_NEAR(std::abs(moved.statistic), std::abs(base.statistic), 1e-6);
}

TEST(ModerationTest, NeedsSlopeVariance) {
  sim::HlmSpec spec;
  spec.tau11 = 0.0;
  spec.sigma2 = 1e-12;
  EXPECT_THROW(hlm::moderation_test(sim_table(spec, 2), false), DegenerateError);
  auto rows = sim_table({}, 2).rows();
  EXPECT_THROW(hlm::moderation_test(ObservationTable(rows)), ArgumentError);
}
