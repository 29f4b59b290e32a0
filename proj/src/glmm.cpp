#include "catenc/glmm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "catenc/error.hpp"

namespace catenc {
namespace {

struct LineMinimum {
  double t = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Grid bracketing followed by golden-section search on [t_lo, t_hi].
LineMinimum minimize_bracketed(const std::function<double(double)>& f, double t_lo, double t_hi,
                               const GlmmOptions& options) {
  const int k = std::max(options.bracket_points, 3);
  const double step = (t_hi - t_lo) / (k - 1);
  std::size_t best = 0;
  std::vector<double> values(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    values[static_cast<std::size_t>(i)] = f(t_lo + step * i);
    if (values[static_cast<std::size_t>(i)] < values[best]) best = static_cast<std::size_t>(i);
  }
  double a = t_lo + step * static_cast<double>(best == 0 ? 0 : best - 1);
  double b = t_lo + step * static_cast<double>(std::min<std::size_t>(best + 1, static_cast<std::size_t>(k - 1)));

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  LineMinimum out;
  while (out.iterations < options.outer_max_iterations && (b - a) > options.outer_tolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++out.iterations;
  }
  out.converged = (b - a) <= options.outer_tolerance;
  // Compare the interior estimate against the bracket ends, which golden
  // section never evaluates.
  out.t = 0.5 * (a + b);
  out.value = f(out.t);
  for (double edge : {a, b}) {
    const double fe = f(edge);
    if (fe < out.value) {
      out.t = edge;
      out.value = fe;
    }
  }
  if (values[best] < out.value) {
    out.t = t_lo + step * static_cast<double>(best);
    out.value = values[best];
  }
  return out;
}

double logistic(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow.
double softplus(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

double bernoulli_nll(const BinomialGroups& g, double beta0, const std::vector<double>& u) {
  double v = 0.0;
  for (std::size_t l = 0; l < g.trials.size(); ++l) {
    if (g.trials[l] == 0) continue;
    const double eta = beta0 + u[l];
    v -= g.successes[l] * eta - g.trials[l] * softplus(eta);
  }
  return v;
}

double penalized_objective(const BinomialGroups& g, double beta0, const std::vector<double>& u, double tau2) {
  double pen = 0.0;
  for (double ul : u) pen += ul * ul;
  return bernoulli_nll(g, beta0, u) + pen / (2.0 * tau2);
}

std::vector<std::string> observed_levels(const Column& column) { return column.levels; }

void check_binomial(const BinomialGroups& g) {
  double n = 0.0;
  double s = 0.0;
  for (std::size_t l = 0; l < g.trials.size(); ++l) {
    n += g.trials[l];
    s += g.successes[l];
  }
  if (n == 0.0) throw DataError("binomial random-intercept fit needs at least one row");
  if (s <= 0.0 || s >= n) throw DataError("binomial random-intercept fit needs both classes present");
}

}  // namespace

double RandomInterceptFit::spherical_mode(std::size_t level) const {
  return tau2 > 0.0 ? modes[level] / std::sqrt(tau2) : 0.0;
}

double GaussianGroups::total_count() const {
  double n = 0.0;
  for (double c : count) n += c;
  return n;
}

GaussianGroups group_gaussian(const std::vector<std::int32_t>& level_of_row, const std::vector<double>& y,
                              std::size_t n_levels) {
  if (level_of_row.size() != y.size()) throw InvalidArgument("level and target lengths differ");
  GaussianGroups g;
  g.count.assign(n_levels, 0.0);
  g.mean.assign(n_levels, 0.0);
  g.within_ss.assign(n_levels, 0.0);
  // Welford update per level.
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw DataError("non-finite target value");
    const auto l = static_cast<std::size_t>(level_of_row[i]);
    g.count[l] += 1.0;
    const double delta = y[i] - g.mean[l];
    g.mean[l] += delta / g.count[l];
    g.within_ss[l] += delta * (y[i] - g.mean[l]);
  }
  return g;
}

ProfiledDeviance profile_deviance_gaussian(const GaussianGroups& g, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
  const double n = g.total_count();
  if (n < 2) throw DataError("profiled deviance needs at least 2 rows");
  double sw = 0.0;
  double swy = 0.0;
  double ss = 0.0;
  double logdet = 0.0;
  for (std::size_t l = 0; l < g.count.size(); ++l) {
    const double nl = g.count[l];
    if (nl == 0) continue;
    const double w = nl / (1.0 + lambda * nl);
    sw += w;
    swy += w * g.mean[l];
    ss += g.within_ss[l];
    logdet += std::log1p(lambda * nl);
  }
  ProfiledDeviance out;
  out.beta0 = swy / sw;
  double q = ss;
  for (std::size_t l = 0; l < g.count.size(); ++l) {
    const double nl = g.count[l];
    if (nl == 0) continue;
    const double r = g.mean[l] - out.beta0;
    q += nl / (1.0 + lambda * nl) * r * r;
  }
  out.sigma2 = q / n;
  if (!(out.sigma2 > 0.0)) throw DataError("profiled residual variance is zero; deviance undefined");
  out.deviance = n * (std::log(2.0 * std::numbers::pi * out.sigma2) + 1.0) + logdet;
  return out;
}

RandomInterceptFit fit_gaussian_ranint(const GaussianGroups& g, const GlmmOptions& options) {
  const double n = g.total_count();
  if (n < 2) throw DataError("gaussian random-intercept fit needs at least 2 rows");
  RandomInterceptFit fit;
  fit.family = GlmmFamily::gaussian;
  fit.modes.assign(g.count.size(), 0.0);

  double total_ss = 0.0;
  double grand = 0.0;
  for (std::size_t l = 0; l < g.count.size(); ++l) grand += g.count[l] * g.mean[l];
  grand /= n;
  for (std::size_t l = 0; l < g.count.size(); ++l) {
    const double r = g.mean[l] - grand;
    total_ss += g.within_ss[l] + g.count[l] * r * r;
  }
  if (!(total_ss > 0.0) || total_ss <= 1e-24 * n * std::max(1.0, grand * grand)) {
    // Constant target: no variance to split.
    fit.beta0 = grand;
    fit.converged = true;
    return fit;
  }

  const double t_lo = std::log(options.lambda_min);
  const double t_hi = std::log(options.lambda_max);
  auto objective = [&](double t) {
    try {
      return profile_deviance_gaussian(g, std::exp(t)).deviance;
    } catch (const DataError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const auto best = minimize_bracketed(objective, t_lo, t_hi, options);
  double lambda = std::exp(best.t);
  const auto at_zero = profile_deviance_gaussian(g, 0.0);
  if (best.t - t_lo < 1e-6 || at_zero.deviance <= best.value) lambda = 0.0;

  ProfiledDeviance pd;
  try {
    pd = profile_deviance_gaussian(g, lambda);
  } catch (const DataError&) {
    throw DataError("gaussian random-intercept fit is degenerate: zero residual variance");
  }
  fit.beta0 = pd.beta0;
  fit.sigma2 = pd.sigma2;
  fit.tau2 = lambda * pd.sigma2;
  fit.deviance = pd.deviance;
  fit.converged = best.converged || lambda == 0.0;
  fit.n_iter = best.iterations;
  for (std::size_t l = 0; l < g.count.size(); ++l) {
    const double nl = g.count[l];
    fit.modes[l] = nl == 0 ? 0.0 : (nl * lambda / (1.0 + nl * lambda)) * (g.mean[l] - fit.beta0);
  }
  return fit;
}

RandomInterceptFit fit_gaussian_ranint(const Column& column, const Column& target, const GlmmOptions& options) {
  if (!column.is_categorical()) throw InvalidArgument("random-intercept grouping column must be categorical");
  if (target.is_categorical()) throw InvalidArgument("gaussian random-intercept fit needs a numeric target");
  if (column.missing_count() > 0) throw DataError("grouping column " + column.name + " has missing values");
  auto fit = fit_gaussian_ranint(group_gaussian(column.codes, target.values, column.levels.size()), options);
  fit.levels = observed_levels(column);
  return fit;
}

BinomialGroups group_binomial(const std::vector<std::int32_t>& level_of_row, const std::vector<int>& y,
                              std::size_t n_levels) {
  if (level_of_row.size() != y.size()) throw InvalidArgument("level and target lengths differ");
  BinomialGroups g;
  g.trials.assign(n_levels, 0.0);
  g.successes.assign(n_levels, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto l = static_cast<std::size_t>(level_of_row[i]);
    g.trials[l] += 1.0;
    if (y[i] != 0) g.successes[l] += 1.0;
  }
  return g;
}

LaplaceResult laplace_deviance_binomial(const BinomialGroups& g, double tau2, const GlmmOptions& options,
                                        const NewtonStart* start) {
  if (!(tau2 >= 0.0)) throw InvalidArgument("tau2 must be non-negative");
  check_binomial(g);
  const std::size_t n_levels = g.trials.size();
  double n = 0.0;
  double s = 0.0;
  for (std::size_t l = 0; l < n_levels; ++l) {
    n += g.trials[l];
    s += g.successes[l];
  }

  LaplaceResult out;
  out.modes.assign(n_levels, 0.0);
  if (tau2 == 0.0) {
    out.beta0 = logit(s / n);
    const double nll = bernoulli_nll(g, out.beta0, out.modes);
    out.objective_trace.push_back(nll);
    out.deviance = 2.0 * nll;
    return out;
  }

  double beta0 = start ? start->beta0 : logit(s / n);
  std::vector<double> u = start && start->modes.size() == n_levels ? start->modes : std::vector<double>(n_levels, 0.0);
  double obj = penalized_objective(g, beta0, u, tau2);
  out.objective_trace.push_back(obj);

  std::vector<double> h(n_levels), gu(n_levels), du(n_levels), trial_u(n_levels);
  const double inv_tau2 = 1.0 / tau2;
  bool converged = false;
  int iter = 0;
  for (; iter < options.inner_max_iterations; ++iter) {
    // Gradient and Hessian of the penalized negative log-likelihood. The
    // Hessian is an arrow matrix: diagonal in u plus a dense beta0 row.
    double g_beta = 0.0;
    double h_beta = 0.0;
    double grad_max = 0.0;
    for (std::size_t l = 0; l < n_levels; ++l) {
      const double p = logistic(beta0 + u[l]);
      const double r = g.successes[l] - g.trials[l] * p;
      h[l] = g.trials[l] * p * (1.0 - p);
      gu[l] = -r + u[l] * inv_tau2;
      g_beta -= r;
      h_beta += h[l];
      grad_max = std::max(grad_max, std::abs(gu[l]));
    }
    grad_max = std::max(grad_max, std::abs(g_beta));
    if (grad_max < 1e-12 * std::max(1.0, n)) {
      converged = true;
      break;
    }
    // Schur complement on beta0.
    double schur = h_beta;
    double rhs = -g_beta;
    for (std::size_t l = 0; l < n_levels; ++l) {
      const double d = h[l] + inv_tau2;
      schur -= h[l] * h[l] / d;
      rhs += h[l] * gu[l] / d;
    }
    const double dbeta = schur > 0.0 ? rhs / schur : 0.0;
    for (std::size_t l = 0; l < n_levels; ++l) du[l] = (-gu[l] - h[l] * dbeta) / (h[l] + inv_tau2);

    double step = 1.0;
    bool accepted = false;
    double trial_obj = obj;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      for (std::size_t l = 0; l < n_levels; ++l) trial_u[l] = u[l] + step * du[l];
      trial_obj = penalized_objective(g, beta0 + step * dbeta, trial_u, tau2);
      if (trial_obj <= obj) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (grad_max < 1e-6 * std::max(1.0, n)) {
        converged = true;
        break;
      }
      throw ConvergenceError("inner Newton could not reduce the penalized objective", iter, obj);
    }
    beta0 += step * dbeta;
    u.swap(trial_u);
    const double change = obj - trial_obj;
    obj = trial_obj;
    out.objective_trace.push_back(obj);
    if (change < options.inner_tolerance) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) throw ConvergenceError("inner Newton did not converge", iter, obj);

  double curvature = 0.0;
  for (std::size_t l = 0; l < n_levels; ++l) {
    const double p = logistic(beta0 + u[l]);
    curvature += std::log1p(tau2 * g.trials[l] * p * (1.0 - p));
  }
  out.beta0 = beta0;
  out.modes = std::move(u);
  out.iterations = iter;
  out.deviance = 2.0 * obj + curvature;
  return out;
}

RandomInterceptFit fit_binomial_ranint(const BinomialGroups& g, const GlmmOptions& options) {
  check_binomial(g);
  RandomInterceptFit fit;
  fit.family = GlmmFamily::binomial;

  NewtonStart warm;
  warm.beta0 = 0.0;
  bool have_warm = false;
  auto objective = [&](double t) {
    const auto r = laplace_deviance_binomial(g, std::exp(t), options, have_warm ? &warm : nullptr);
    warm.beta0 = r.beta0;
    warm.modes = r.modes;
    have_warm = true;
    return r.deviance;
  };
  const double t_lo = std::log(options.tau2_min);
  const double t_hi = std::log(options.tau2_max);
  const auto best = minimize_bracketed(objective, t_lo, t_hi, options);

  double tau2 = std::exp(best.t);
  const auto at_zero = laplace_deviance_binomial(g, 0.0, options);
  if (best.t - t_lo < 1e-6 || at_zero.deviance <= best.value) tau2 = 0.0;

  // Final solve from a cold start so the result does not depend on the
  // search path.
  const auto r = laplace_deviance_binomial(g, tau2, options);
  fit.beta0 = r.beta0;
  fit.tau2 = tau2;
  fit.modes = r.modes;
  fit.deviance = r.deviance;
  fit.converged = best.converged || tau2 == 0.0;
  fit.n_iter = best.iterations;
  return fit;
}

RandomInterceptFit fit_binomial_ranint(const Column& column, const Column& target, int positive_class,
                                       const GlmmOptions& options) {
  if (!column.is_categorical()) throw InvalidArgument("random-intercept grouping column must be categorical");
  if (!target.is_categorical()) throw InvalidArgument("binomial random-intercept fit needs a categorical target");
  if (column.missing_count() > 0) throw DataError("grouping column " + column.name + " has missing values");
  std::vector<int> y(target.codes.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = target.codes[i] == positive_class ? 1 : 0;
  auto fit = fit_binomial_ranint(group_binomial(column.codes, y, column.levels.size()), options);
  fit.levels = observed_levels(column);
  return fit;
}

}  // namespace catenc
