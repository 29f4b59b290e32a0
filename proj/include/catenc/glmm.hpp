#pragma once

#include <string>
#include <vector>

#include "catenc/table.hpp"

namespace catenc {

enum class GlmmFamily { gaussian, binomial };

struct GlmmOptions {
  /// Outer search tolerance on the log variance parameter.
  double outer_tolerance = 1e-9;
  int outer_max_iterations = 200;
  /// Inner Newton stops when the penalized objective changes by less than this.
  double inner_tolerance = 1e-10;
  int inner_max_iterations = 100;
  /// Gaussian search range for lambda = tau2 / sigma2.
  double lambda_min = 1e-10;
  double lambda_max = 1e10;
  /// Binomial search range for tau2.
  double tau2_min = 1e-8;
  double tau2_max = 1e6;
  /// Grid points used to bracket the outer optimum before golden-section.
  int bracket_points = 41;
};

/// Fixed intercept, variance components and per-level conditional modes of a
/// single-factor random-intercept model.
struct RandomInterceptFit {
  GlmmFamily family = GlmmFamily::gaussian;
  double beta0 = 0.0;
  double sigma2 = 0.0;  // residual variance; gaussian only
  double tau2 = 0.0;
  std::vector<std::string> levels;
  std::vector<double> modes;  // parallel to levels
  double deviance = 0.0;
  bool converged = false;
  int n_iter = 0;

  /// Linear predictor beta0 + u_l for a training level index.
  double linear_predictor(std::size_t level) const { return beta0 + modes[level]; }
  /// u_l / tau (unit-variance scale); 0 when tau2 == 0.
  double spherical_mode(std::size_t level) const;
};

/// Level-grouped sufficient statistics for the Gaussian model.
struct GaussianGroups {
  std::vector<double> count;
  std::vector<double> mean;
  std::vector<double> within_ss;  // sum of squared deviations from the level mean

  double total_count() const;
};

GaussianGroups group_gaussian(const std::vector<std::int32_t>& level_of_row, const std::vector<double>& y,
                              std::size_t n_levels);

struct ProfiledDeviance {
  double deviance = 0.0;  // -2 log-likelihood including the 2*pi constant
  double beta0 = 0.0;
  double sigma2 = 0.0;
};

/// -2 log-likelihood with beta0 and sigma2 profiled out, at lambda = tau2/sigma2.
ProfiledDeviance profile_deviance_gaussian(const GaussianGroups& groups, double lambda);

RandomInterceptFit fit_gaussian_ranint(const GaussianGroups& groups, const GlmmOptions& options = {});
RandomInterceptFit fit_gaussian_ranint(const Column& column, const Column& target, const GlmmOptions& options = {});

/// Per-level trial counts and successes for the binomial model.
struct BinomialGroups {
  std::vector<double> trials;
  std::vector<double> successes;
};

BinomialGroups group_binomial(const std::vector<std::int32_t>& level_of_row, const std::vector<int>& y,
                              std::size_t n_levels);

struct LaplaceResult {
  double deviance = 0.0;
  double beta0 = 0.0;
  std::vector<double> modes;
  /// Penalized negative log-likelihood after each accepted Newton step
  /// (first entry is the starting point).
  std::vector<double> objective_trace;
  int iterations = 0;
};

struct NewtonStart {
  double beta0 = 0.0;
  std::vector<double> modes;
};

/// Laplace-approximate -2 log marginal likelihood at fixed tau2. The inner
/// penalized mode over (beta0, u) is found by damped Newton.
LaplaceResult laplace_deviance_binomial(const BinomialGroups& groups, double tau2, const GlmmOptions& options = {},
                                        const NewtonStart* start = nullptr);

RandomInterceptFit fit_binomial_ranint(const BinomialGroups& groups, const GlmmOptions& options = {});
/// One-vs-rest fit: rows whose target class id equals `positive_class` are successes.
RandomInterceptFit fit_binomial_ranint(const Column& column, const Column& target, int positive_class,
                                       const GlmmOptions& options = {});

}  // namespace catenc
