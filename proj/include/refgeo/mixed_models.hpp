#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace refgeo::hlm {

enum class ModelKind { intercepts_only, random_slopes, moderated };

std::string to_string(ModelKind kind);

struct Observation {
  std::string group;
  double x = 0.0;
  double y = 0.0;
};

/// Long-format observations grouped by dataset, plus an optional per-group
/// covariate. Validated on construction:
///   - at least 2 groups, at least 3 observations per group,
///   - x non-constant within every group,
///   - covariates, when given, cover every group exactly and vary across groups.
class ObservationTable {
 public:
  explicit ObservationTable(std::vector<Observation> rows,
                            std::map<std::string, double> covariates = {});

  const std::vector<Observation>& rows() const { return rows_; }
  /// Group identifiers in order of first appearance.
  const std::vector<std::string>& groups() const { return groups_; }
  const std::map<std::string, double>& covariates() const { return covariates_; }
  bool has_covariates() const { return !covariates_.empty(); }

  /// z-scores x and y over all observations and z over groups (sample sd).
  ObservationTable standardized() const;

 private:
  std::vector<Observation> rows_;
  std::map<std::string, double> covariates_;
  std::vector<std::string> groups_;
};

struct HlmFit {
  ModelKind kind = ModelKind::random_slopes;
  /// intercepts_only / random_slopes: {g00, g10}; moderated: {g00, g01, g10, g11}.
  std::vector<double> gamma;
  std::vector<std::string> gamma_names;
  std::vector<double> se_gamma;
  Eigen::MatrixXd gamma_cov;  ///< (X^T V^-1 X)^-1 at the fitted variance parameters
  Eigen::Matrix2d tau = Eigen::Matrix2d::Zero();  ///< [[t00, t01], [t01, t11]]
  double sigma2 = 0.0;
  double loglik = 0.0;  ///< maximized ML log-likelihood, Gaussian constant included
  bool converged = false;
  bool standardized = false;
  int iterations = 0;

  double coefficient(const std::string& name) const;
  double standard_error(const std::string& name) const;
};

/// Maximum-likelihood fit of a two-level linear model
///   y_ij = b0j + b1j x_ij + e_ij,  e ~ N(0, sigma2)
/// with b0j random (all kinds), b1j random for random_slopes/moderated,
/// and both coefficients shifted by gamma * z_j for moderated.
/// Fixed effects are profiled out by GLS; the relative random-effect
/// covariance is optimized over log-Cholesky factors with BFGS.
HlmFit fit_hlm(const ObservationTable& table, ModelKind kind, bool standardize = true);

/// ML log-likelihood of the model at given variance parameters, with the
/// fixed effects at their GLS estimate. Exposed for diagnostics and tests.
double profile_loglik(const ObservationTable& table, ModelKind kind, const Eigen::Matrix2d& tau,
                      double sigma2);

enum class TestKind { omnibus, moderation, ols_attribution };

std::string to_string(TestKind kind);

struct TestReport {
  TestKind kind = TestKind::omnibus;
  double statistic = 0.0;  ///< D, gamma_11 or R^2
  std::optional<double> p_value;
  std::optional<double> r2_slope;
  std::optional<double> wald_z;
  bool standardized = false;
  std::vector<HlmFit> fits;
};

/// LRT of random intercepts (null) against random intercepts and slopes:
/// D = max(0, -2(logL0 - logL1)), p from the 50:50 chi2_1 / chi2_2 mixture.
TestReport omnibus_test(const ObservationTable& table, bool standardize = true);

/// Wald test of the cross-level interaction gamma_11 in the moderated
/// model, with R^2_slope = 1 - t11(moderated) / t11(random slopes).
/// DegenerateError when the random-slopes t11 is <= 1e-12.
TestReport moderation_test(const ObservationTable& table, bool standardize = true);

/// R^2 of the OLS line of y on x (= squared Pearson correlation).
double ols_r2(std::span<const double> x, std::span<const double> y);

/// 0.5 * P(chi2_1 > d) + 0.5 * P(chi2_2 > d).
double mixture_chi2_sf(double d);

/// Two-sided standard-normal tail probability of |z|.
double normal_two_sided_p(double z);

}  // namespace refgeo::hlm
