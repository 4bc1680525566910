#include "refgeo/mixed_models.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "refgeo/error.hpp"

namespace refgeo::hlm {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kRelTol = 1e-8;
// log-Cholesky diagonals are kept in [-kLogBound, kLogBound]; e^-60 relative
// variance is numerically indistinguishable from the tau = 0 boundary
constexpr double kLogBound = 30.0;

struct GroupData {
  Eigen::MatrixXd fixed;   // n_j x p
  Eigen::MatrixXd random;  // n_j x q
  Eigen::VectorXd y;
};

std::size_t random_dim(ModelKind kind) { return kind == ModelKind::intercepts_only ? 1 : 2; }

std::vector<std::string> gamma_names(ModelKind kind) {
  if (kind == ModelKind::moderated) return {"g00", "g01", "g10", "g11"};
  return {"g00", "g10"};
}

std::vector<GroupData> build_groups(const ObservationTable& t, ModelKind kind) {
  if (kind == ModelKind::moderated && !t.has_covariates()) {
    throw ArgumentError("moderated model requires a group covariate");
  }
  const std::size_t p = kind == ModelKind::moderated ? 4 : 2;
  const std::size_t q = random_dim(kind);
  std::vector<GroupData> groups;
  for (const auto& g : t.groups()) {
    std::vector<const Observation*> obs;
    for (const auto& o : t.rows()) {
      if (o.group == g) obs.push_back(&o);
    }
    GroupData d;
    const auto n = static_cast<Eigen::Index>(obs.size());
    d.fixed.resize(n, static_cast<Eigen::Index>(p));
    d.random.resize(n, static_cast<Eigen::Index>(q));
    d.y.resize(n);
    const double z = kind == ModelKind::moderated ? t.covariates().at(g) : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = obs[static_cast<std::size_t>(i)]->x;
      d.y[i] = obs[static_cast<std::size_t>(i)]->y;
      if (kind == ModelKind::moderated) {
        d.fixed.row(i) << 1.0, z, x, x * z;
      } else {
        d.fixed.row(i) << 1.0, x;
      }
      d.random(i, 0) = 1.0;
      if (q == 2) d.random(i, 1) = x;
    }
    groups.push_back(std::move(d));
  }
  return groups;
}

// Lower Cholesky factor of the relative covariance tau / sigma2 from
// log-Cholesky parameters.
Eigen::Matrix2d relative_factor(const std::vector<double>& theta) {
  Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
  l(0, 0) = std::exp(theta[0]);
  if (theta.size() == 3) {
    l(1, 0) = theta[1];
    l(1, 1) = std::exp(theta[2]);
  }
  return l;
}

struct Profile {
  double loglik = -std::numeric_limits<double>::infinity();
  double sigma2 = 0.0;
  Eigen::VectorXd beta;
  Eigen::MatrixXd info;  // X^T W^-1 X
};

// Profiled ML likelihood in penalized least-squares form: per group the block
// [Z L, X, y; I, 0, 0] is reduced by QR, which yields log|I + L'Z'ZL| from the
// leading q x q triangle and the GLS system for (beta, rss) from the rest.
// Nothing here inverts V, so near-exact fits (tau / sigma2 ~ 1e12) stay accurate.
class ProfiledLikelihood {
 public:
  ProfiledLikelihood(std::vector<GroupData> groups) : groups_(std::move(groups)) {
    for (const auto& g : groups_) total_ += static_cast<double>(g.y.size());
  }

  Profile evaluate(const Eigen::Matrix2d& factor) const {
    const auto p = groups_.front().fixed.cols();
    const auto q = groups_.front().random.cols();
    const Eigen::MatrixXd lambda = factor.topLeftCorner(q, q);
    const Eigen::Index width = p + 1;
    Eigen::MatrixXd reduced = Eigen::MatrixXd::Zero(width * static_cast<Eigen::Index>(groups_.size()), width);
    double logdet = 0.0;
    Eigen::Index row = 0;
    for (const auto& g : groups_) {
      const auto n = g.y.size();
      Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n + q, q + width);
      block.topLeftCorner(n, q) = g.random * lambda;
      block.block(0, q, n, p) = g.fixed;
      block.col(q + p).head(n) = g.y;
      block.bottomLeftCorner(q, q).setIdentity();
      const Eigen::HouseholderQR<Eigen::MatrixXd> qr(block);
      const Eigen::MatrixXd& r = qr.matrixQR();
      for (Eigen::Index i = 0; i < q; ++i) logdet += 2.0 * std::log(std::abs(r(i, i)));
      const Eigen::Index kept = std::min(n + q, q + width) - q;
      reduced.middleRows(row, kept) = r.block(q, q, kept, width).triangularView<Eigen::Upper>();
      row += kept;
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(reduced.topRows(row));
    if (row < width) throw NumericalError("GLS normal equations are singular");
    const Eigen::MatrixXd r = qr.matrixQR().topRows(width).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd rx = r.topLeftCorner(p, p);
    const double scale = rx.diagonal().cwiseAbs().maxCoeff();
    if (!(rx.diagonal().cwiseAbs().minCoeff() > 1e-12 * scale)) {
      throw NumericalError("GLS normal equations are singular");
    }
    Profile out;
    out.beta = rx.triangularView<Eigen::Upper>().solve(r.col(p).head(p));
    const double rss = r(p, p) * r(p, p);
    if (!(rss > 0.0)) throw NumericalError("residual variance vanished; the model fits exactly");
    out.sigma2 = rss / total_;
    out.loglik = -0.5 * total_ * (std::log(2.0 * std::numbers::pi * out.sigma2) + 1.0) - 0.5 * logdet;
    out.info = rx.transpose() * rx;
    return out;
  }

  double operator()(const std::vector<double>& theta) const {
    return evaluate(relative_factor(theta)).loglik;
  }

  const std::vector<GroupData>& groups() const { return groups_; }

 private:
  std::vector<GroupData> groups_;
  double total_ = 0.0;
};

std::vector<double> clamp_theta(std::vector<double> theta) {
  theta[0] = std::clamp(theta[0], -kLogBound, kLogBound);
  if (theta.size() == 3) {
    theta[1] = std::clamp(theta[1], -1e8, 1e8);
    theta[2] = std::clamp(theta[2], -kLogBound, kLogBound);
  }
  return theta;
}

struct OptimResult {
  std::vector<double> theta;
  double loglik;
  int iterations;
  bool converged;
};

// BFGS ascent on the profiled log-likelihood with central-difference
// gradients and Armijo backtracking.
OptimResult maximize(const ProfiledLikelihood& f, std::vector<double> x) {
  const std::size_t dim = x.size();
  x = clamp_theta(std::move(x));

  auto value = [&](const std::vector<double>& t) {
    try {
      return f(t);
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  auto gradient = [&](const std::vector<double>& t) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(t[i]));
      auto up = t, down = t;
      up[i] += h;
      down[i] -= h;
      g[static_cast<Eigen::Index>(i)] = (value(up) - value(down)) / (2.0 * h);
    }
    return g;
  };

  double fx = value(x);
  if (!std::isfinite(fx)) throw NumericalError("log-likelihood is not finite at the start point");
  Eigen::VectorXd g = gradient(x);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                                    static_cast<Eigen::Index>(dim));
  bool reset_once = false;

  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    const double scale = std::max(1.0, std::abs(fx));
    if (g.lpNorm<Eigen::Infinity>() <= 1e-9 * scale) return {x, fx, iter - 1, true};

    Eigen::VectorXd dir = h_inv * g;  // ascent direction
    if (dir.dot(g) <= 0.0 || !dir.allFinite()) {
      h_inv.setIdentity();
      dir = g;
    }
    const double max_step = dir.lpNorm<Eigen::Infinity>();
    if (max_step > 5.0) dir *= 5.0 / max_step;

    double alpha = 1.0;
    std::vector<double> trial;
    double f_trial = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial = x;
      for (std::size_t i = 0; i < dim; ++i) trial[i] += alpha * dir[static_cast<Eigen::Index>(i)];
      trial = clamp_theta(std::move(trial));
      f_trial = value(trial);
      if (std::isfinite(f_trial) && f_trial >= fx + 1e-4 * alpha * g.dot(dir)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // no ascent left at working precision: stationary unless the gradient
      // still clearly points somewhere, in which case retry from steepest ascent once
      if (g.lpNorm<Eigen::Infinity>() <= 1e-4 * scale) return {x, fx, iter, true};
      if (reset_once) return {x, fx, iter, false};
      reset_once = true;
      h_inv.setIdentity();
      continue;
    }
    reset_once = false;

    Eigen::VectorXd s(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) s[static_cast<Eigen::Index>(i)] = trial[i] - x[i];
    const Eigen::VectorXd g_new = gradient(trial);
    const double change = std::abs(f_trial - fx);
    x = std::move(trial);
    const double f_old = fx;
    fx = f_trial;

    // BFGS update for maximization: work with the negated objective
    const Eigen::VectorXd yv = -(g_new - g);
    g = g_new;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                                            static_cast<Eigen::Index>(dim));
      h_inv = (eye - rho * s * yv.transpose()) * h_inv * (eye - rho * yv * s.transpose()) +
              rho * s * s.transpose();
    }

    // relative log-likelihood tolerance; the gradient guard only rules out
    // stalls on a slope, since finite-difference gradients are noisy near the optimum
    const double new_scale = std::max(1.0, std::abs(f_old));
    if (change <= kRelTol * new_scale && g.lpNorm<Eigen::Infinity>() <= 1e-4 * new_scale) {
      return {x, fx, iter, true};
    }
  }
  return {x, fx, kMaxIterations, false};
}

struct OlsLine {
  double intercept;
  double slope;
  double rss;
};

OlsLine ols_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  const double rss = (y.array() - intercept - slope * x.array()).square().sum();
  return {intercept, slope, rss};
}

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double e : v) ss += (e - mean) * (e - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double e : v) s += (e - mean) * (e - mean);
  return s / static_cast<double>(v.size() - 1);
}

// Start point from per-group OLS: intercept/slope sample variances relative
// to the pooled residual variance.
std::vector<double> ols_start(const std::vector<GroupData>& groups, std::size_t q) {
  std::vector<double> intercepts, slopes;
  double rss = 0.0;
  double dof = 0.0;
  for (const auto& g : groups) {
    // x sits in fixed-design column 1, or column 2 for the moderated design
    const Eigen::VectorXd x = g.fixed.col(g.fixed.cols() == 4 ? 2 : 1);
    const OlsLine fit = ols_line(x, g.y);
    intercepts.push_back(fit.intercept);
    slopes.push_back(fit.slope);
    rss += fit.rss;
    dof += static_cast<double>(g.y.size()) - 2.0;
  }
  const double pooled = std::max(rss / std::max(dof, 1.0), 1e-300);
  auto log_sd = [&](double var) {
    return std::clamp(0.5 * std::log(std::max(var / pooled, 1e-12)), -10.0, 10.0);
  };
  if (q == 1) return {log_sd(sample_variance(intercepts))};
  return {log_sd(sample_variance(intercepts)), 0.0, log_sd(sample_variance(slopes))};
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::intercepts_only:
      return "intercepts_only";
    case ModelKind::random_slopes:
      return "random_slopes";
    case ModelKind::moderated:
      return "moderated";
  }
  return "unknown";
}

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::omnibus:
      return "omnibus";
    case TestKind::moderation:
      return "moderation";
    case TestKind::ols_attribution:
      return "ols_attribution";
  }
  return "unknown";
}

ObservationTable::ObservationTable(std::vector<Observation> rows,
                                   std::map<std::string, double> covariates)
    : rows_(std::move(rows)), covariates_(std::move(covariates)) {
  std::map<std::string, std::vector<double>> xs;
  for (const auto& o : rows_) {
    if (!std::isfinite(o.x) || !std::isfinite(o.y)) {
      throw ArgumentError("observation in group '" + o.group + "' has a non-finite value");
    }
    if (!xs.contains(o.group)) groups_.push_back(o.group);
    xs[o.group].push_back(o.x);
  }
  if (groups_.size() < 2) {
    throw ArgumentError("need at least 2 groups, got " + std::to_string(groups_.size()));
  }
  for (const auto& [g, v] : xs) {
    if (v.size() < 3) {
      throw ArgumentError("group '" + g + "' has " + std::to_string(v.size()) +
                          " observations; at least 3 required");
    }
    if (std::ranges::all_of(v, [&](double x) { return x == v.front(); })) {
      throw ArgumentError("x is constant within group '" + g + "'");
    }
  }
  if (!covariates_.empty()) {
    for (const auto& g : groups_) {
      if (!covariates_.contains(g)) throw ArgumentError("no covariate value for group '" + g + "'");
    }
    for (const auto& [g, z] : covariates_) {
      if (!xs.contains(g)) throw ArgumentError("covariate given for unknown group '" + g + "'");
      if (!std::isfinite(z)) throw ArgumentError("covariate of group '" + g + "' is not finite");
    }
    const double first = covariates_.begin()->second;
    if (std::ranges::all_of(covariates_, [&](const auto& kv) { return kv.second == first; })) {
      throw ArgumentError("covariate is constant across groups");
    }
  }
}

ObservationTable ObservationTable::standardized() const {
  const auto moments = mean_sd;
  std::vector<double> xs, ys;
  for (const auto& o : rows_) {
    xs.push_back(o.x);
    ys.push_back(o.y);
  }
  const auto [mx, sx] = moments(xs);
  const auto [my, sy] = moments(ys);
  if (!(sy > 0.0)) throw DegenerateError("y is constant; cannot standardize");
  std::vector<Observation> out = rows_;
  for (auto& o : out) {
    o.x = (o.x - mx) / sx;
    o.y = (o.y - my) / sy;
  }
  std::map<std::string, double> cov = covariates_;
  if (!cov.empty()) {
    std::vector<double> zs;
    for (const auto& g : groups_) zs.push_back(covariates_.at(g));
    const auto [mz, sz] = moments(zs);
    for (auto& [g, z] : cov) z = (z - mz) / sz;
  }
  return ObservationTable(std::move(out), std::move(cov));
}

double HlmFit::coefficient(const std::string& name) const {
  for (std::size_t i = 0; i < gamma_names.size(); ++i) {
    if (gamma_names[i] == name) return gamma[i];
  }
  throw ArgumentError("model " + to_string(kind) + " has no coefficient " + name);
}

double HlmFit::standard_error(const std::string& name) const {
  for (std::size_t i = 0; i < gamma_names.size(); ++i) {
    if (gamma_names[i] == name) return se_gamma[i];
  }
  throw ArgumentError("model " + to_string(kind) + " has no coefficient " + name);
}

HlmFit fit_hlm(const ObservationTable& table, ModelKind kind, bool standardize) {
  const ObservationTable data = standardize ? table.standardized() : table;
  // The optimum is equivariant under affine maps of x and y, so the search runs
  // on z-scored data and the result is mapped back to the data scale.
  const ObservationTable work = data.standardized();
  const ProfiledLikelihood likelihood(build_groups(work, kind));
  const std::size_t q = random_dim(kind);

  std::vector<std::vector<double>> starts;
  starts.push_back(ols_start(likelihood.groups(), q));
  if (q == 2) {
    // near-boundary starts: from the random-intercepts optimum with a
    // negligible slope variance, so the fit can never end below it
    const ProfiledLikelihood intercepts(build_groups(work, ModelKind::intercepts_only));
    const OptimResult base = maximize(intercepts, ols_start(intercepts.groups(), 1));
    starts.push_back({base.theta[0], 0.0, -10.0});
    auto shrunk = starts.front();
    shrunk[2] -= 3.0;
    starts.push_back(shrunk);
  }

  std::optional<OptimResult> best;
  for (const auto& s : starts) {
    OptimResult r;
    try {
      r = maximize(likelihood, s);
    } catch (const NumericalError&) {
      continue;
    }
    if (!best || r.loglik > best->loglik || (r.converged && !best->converged && r.loglik >= best->loglik - 1e-10)) {
      best = r;
    }
  }
  if (!best) throw NumericalError("log-likelihood could not be evaluated at any start point");
  if (!best->converged) {
    throw ConvergenceError("mixed-model fit (" + to_string(kind) + ") did not converge in " +
                               std::to_string(kMaxIterations) + " iterations",
                           best->theta, best->loglik);
  }

  std::vector<double> xs;
  for (const auto& o : data.rows()) xs.push_back(o.x);
  const auto [mx, sx] = mean_sd(xs);
  Eigen::Matrix2d to_data;
  to_data << 1.0, -mx / sx, 0.0, 1.0 / sx;
  const Eigen::Matrix2d factor = to_data * relative_factor(best->theta);
  const Eigen::Matrix2d delta = factor * factor.transpose();
  const Profile prof = ProfiledLikelihood(build_groups(data, kind)).evaluate(factor);
  HlmFit fit;
  fit.kind = kind;
  fit.gamma.assign(prof.beta.data(), prof.beta.data() + prof.beta.size());
  fit.gamma_names = gamma_names(kind);
  fit.sigma2 = prof.sigma2;
  fit.tau = prof.sigma2 * delta;
  if (q == 1) fit.tau(0, 1) = fit.tau(1, 0) = fit.tau(1, 1) = 0.0;
  fit.loglik = prof.loglik;
  fit.gamma_cov = prof.sigma2 * prof.info.inverse();
  for (Eigen::Index i = 0; i < fit.gamma_cov.rows(); ++i) {
    fit.se_gamma.push_back(std::sqrt(fit.gamma_cov(i, i)));
  }
  fit.converged = true;
  fit.standardized = standardize;
  fit.iterations = best->iterations;
  return fit;
}

double profile_loglik(const ObservationTable& table, ModelKind kind, const Eigen::Matrix2d& tau,
                      double sigma2) {
  if (!(sigma2 > 0.0)) throw ArgumentError("sigma2 must be positive");
  const auto groups = build_groups(table, kind);
  const auto q = static_cast<Eigen::Index>(random_dim(kind));
  const auto p = groups.front().fixed.cols();
  const Eigen::MatrixXd t = tau.topLeftCorner(q, q);

  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors;
  double logdet = 0.0;
  double total = 0.0;
  for (const auto& g : groups) {
    Eigen::MatrixXd v = g.random * t * g.random.transpose();
    v.diagonal().array() += sigma2;
    factors.emplace_back(v);
    const auto& llt = factors.back();
    if (llt.info() != Eigen::Success) throw NumericalError("group covariance not positive definite");
    info += g.fixed.transpose() * llt.solve(g.fixed);
    xty += g.fixed.transpose() * llt.solve(g.y);
    for (Eigen::Index i = 0; i < g.y.size(); ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i));
    total += static_cast<double>(g.y.size());
  }
  const Eigen::VectorXd beta = info.ldlt().solve(xty);
  double quad = 0.0;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    const Eigen::VectorXd r = groups[j].y - groups[j].fixed * beta;
    quad += r.dot(factors[j].solve(r));
  }
  return -0.5 * (total * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

double mixture_chi2_sf(double d) {
  if (!(d >= 0.0)) throw ArgumentError("mixture chi-square statistic must be >= 0");
  if (std::isinf(d)) return 0.0;
  const double q1 = std::erfc(std::sqrt(d / 2.0));
  const double q2 = std::exp(-d / 2.0);
  return 0.5 * q1 + 0.5 * q2;
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

TestReport omnibus_test(const ObservationTable& table, bool standardize) {
  HlmFit null_fit = fit_hlm(table, ModelKind::intercepts_only, standardize);
  HlmFit alt_fit = fit_hlm(table, ModelKind::random_slopes, standardize);
  TestReport r;
  r.kind = TestKind::omnibus;
  r.statistic = std::max(0.0, -2.0 * (null_fit.loglik - alt_fit.loglik));
  r.p_value = mixture_chi2_sf(r.statistic);
  r.standardized = standardize;
  r.fits = {std::move(null_fit), std::move(alt_fit)};
  return r;
}

TestReport moderation_test(const ObservationTable& table, bool standardize) {
  if (!table.has_covariates()) throw ArgumentError("moderation test requires a group covariate");
  HlmFit moderated = fit_hlm(table, ModelKind::moderated, standardize);
  HlmFit omnibus = fit_hlm(table, ModelKind::random_slopes, standardize);
  const double tau11_omn = omnibus.tau(1, 1);
  if (tau11_omn <= 1e-12) {
    throw DegenerateError("random-slopes model has no slope variance (tau11 = " +
                          std::to_string(tau11_omn) + "); R^2_slope is undefined");
  }
  TestReport r;
  r.kind = TestKind::moderation;
  r.statistic = moderated.coefficient("g11");
  r.wald_z = r.statistic / moderated.standard_error("g11");
  r.p_value = normal_two_sided_p(*r.wald_z);
  r.r2_slope = 1.0 - moderated.tau(1, 1) / tau11_omn;
  r.standardized = standardize;
  r.fits = {std::move(moderated), std::move(omnibus)};
  return r;
}

double ols_r2(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("x and y lengths differ");
  if (x.size() < 3) throw ArgumentError("OLS R^2 needs at least 3 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DegenerateError("x is constant; OLS slope undefined");
  if (!(syy > 0.0)) throw DegenerateError("y is constant; R^2 undefined");
  // R^2 = 1 - RSS/TSS computed from the fitted line
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = (y[i] - my) - slope * (x[i] - mx);
    rss += e * e;
  }
  return std::clamp(1.0 - rss / syy, 0.0, 1.0);
}

}  // namespace refgeo::hlm
