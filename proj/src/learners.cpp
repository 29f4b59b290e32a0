#include "catenc/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "catenc/error.hpp"
#include "catenc/folds.hpp"

namespace catenc {
namespace {

class FeaturelessModel final : public FittedLearner {
 public:
  explicit FeaturelessModel(Eigen::RowVectorXd row) : row_(std::move(row)) {}

 protected:
  Eigen::MatrixXd predict_selected(const Eigen::MatrixXd& x) const override {
    return row_.replicate(x.rows(), 1);
  }

 private:
  Eigen::RowVectorXd row_;
};

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(cols[k]));
  return out;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
  return out;
}

double logistic(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double softplus(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

Eigen::MatrixXd normalize_rows(Eigen::MatrixXd scores) {
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double s = scores.row(i).sum();
    if (s > 0)
      scores.row(i) /= s;
    else
      scores.row(i).setConstant(1.0 / static_cast<double>(scores.cols()));
  }
  return scores;
}

std::vector<double> lambda_grid(const Eigen::MatrixXd& x, int size, double weight) {
  double scale = 1.0;
  if (x.cols() > 0 && x.rows() > 0) {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const double trace = (x.rowwise() - mean).squaredNorm();
    if (trace > 0) scale = weight * trace / static_cast<double>(x.cols());
  }
  std::vector<double> grid;
  for (int k = 0; k < size; ++k) {
    const double e = size > 1 ? -6.0 + 9.0 * k / (size - 1) : 0.0;
    grid.push_back(scale * std::pow(10.0, e));
  }
  return grid;
}

Eigen::MatrixXd ridge_scores(const Task& task, const std::vector<Eigen::VectorXd>& coef, const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  auto linear = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
    return (x * b.tail(b.size() - 1)).array() + b(0);
  };
  if (!task.is_classification()) return linear(coef[0]);
  if (task.kind == TaskKind::binary) {
    Eigen::MatrixXd out(n, 2);
    const Eigen::VectorXd eta = linear(coef[0]);
    for (Eigen::Index i = 0; i < n; ++i) {
      out(i, 1) = logistic(eta(i));
      out(i, 0) = 1.0 - out(i, 1);
    }
    return out;
  }
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(coef.size()));
  for (std::size_t c = 0; c < coef.size(); ++c) {
    const Eigen::VectorXd eta = linear(coef[c]);
    for (Eigen::Index i = 0; i < n; ++i) out(i, static_cast<Eigen::Index>(c)) = logistic(eta(i));
  }
  return normalize_rows(std::move(out));
}

std::vector<Eigen::VectorXd> ridge_fit_all(const Task& task, const Eigen::MatrixXd& x, const Target& t, double lambda) {
  std::vector<Eigen::VectorXd> coef;
  if (!task.is_classification()) {
    coef.push_back(ridge_regression(x, Eigen::Map<const Eigen::VectorXd>(t.y.data(), static_cast<Eigen::Index>(t.y.size())), lambda));
    return coef;
  }
  auto indicator = [&](int c) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(t.cls.size()));
    for (std::size_t i = 0; i < t.cls.size(); ++i) y(static_cast<Eigen::Index>(i)) = t.cls[i] == c ? 1.0 : 0.0;
    return y;
  };
  if (task.kind == TaskKind::binary) {
    coef.push_back(ridge_logistic(x, indicator(1), lambda));
  } else {
    for (int c = 0; c < task.n_classes; ++c) coef.push_back(ridge_logistic(x, indicator(c), lambda));
  }
  return coef;
}

double prediction_loss(const Task& task, const Eigen::MatrixXd& pred, const Target& t) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (task.is_classification()) {
      loss -= std::log(std::clamp(pred(i, t.cls[ui]), 1e-15, 1.0));
    } else {
      const double r = pred(i, 0) - t.y[ui];
      loss += r * r;
    }
  }
  return loss;
}

}  // namespace

std::string_view to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::featureless:
      return "featureless";
    case LearnerKind::knn:
      return "knn";
    case LearnerKind::ridge:
      return "ridge";
  }
  return "unknown";
}

LearnerKind learner_kind_from_string(std::string_view s) {
  if (s == "featureless" || s == "FL") return LearnerKind::featureless;
  if (s == "knn" || s == "kNN") return LearnerKind::knn;
  if (s == "ridge") return LearnerKind::ridge;
  throw InvalidArgument("unknown learner kind '" + std::string(s) + "'");
}

LearnerSpec LearnerSpec::knn(int k, std::optional<int> filter_top) {
  LearnerSpec s;
  s.kind = LearnerKind::knn;
  s.k = k;
  s.filter_top = filter_top;
  return s;
}

LearnerSpec LearnerSpec::ridge() {
  LearnerSpec s;
  s.kind = LearnerKind::ridge;
  return s;
}

void LearnerSpec::validate() const {
  if (k < 1) throw InvalidArgument("knn k must be at least 1");
  if (filter_top && *filter_top < 1) throw InvalidArgument("filter_top must be at least 1");
  if (ridge_cv_folds < 2) throw InvalidArgument("ridge CV needs at least 2 folds");
  if (ridge_grid_size < 1) throw InvalidArgument("ridge grid needs at least one value");
  if (ridge_lambda && !(*ridge_lambda >= 0.0)) throw InvalidArgument("ridge lambda must be non-negative");
}

std::string LearnerSpec::label() const {
  switch (kind) {
    case LearnerKind::featureless:
      return "featureless";
    case LearnerKind::knn: {
      if (k == 15 && filter_top == std::optional<int>(25)) return "knn";
      return "knn-k" + std::to_string(k) + "-f" + (filter_top ? std::to_string(*filter_top) : std::string("all"));
    }
    case LearnerKind::ridge:
      return "ridge";
  }
  return "unknown";
}

Target Target::from_table(const DataTable& table) {
  Target t;
  t.task = table.task();
  if (t.task.is_classification())
    t.cls = table.class_ids();
  else
    t.y = table.target_values();
  return t;
}

Target Target::subset(const std::vector<std::size_t>& rows) const {
  Target t;
  t.task = task;
  for (auto r : rows) {
    if (task.is_classification())
      t.cls.push_back(cls[r]);
    else
      t.y.push_back(y[r]);
  }
  return t;
}

Eigen::MatrixXd FittedLearner::predict(const Eigen::MatrixXd& x) const {
  if (selected_.empty()) return predict_selected(x);
  return predict_selected(select_columns(x, selected_));
}

std::unique_ptr<FittedLearner> fit_featureless(const Target& target) {
  const auto n = target.size();
  if (n == 0) throw DataError("featureless learner needs at least one training row");
  if (!target.task.is_classification()) {
    Eigen::RowVectorXd row(1);
    row(0) = std::accumulate(target.y.begin(), target.y.end(), 0.0) / static_cast<double>(n);
    return std::make_unique<FeaturelessModel>(row);
  }
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(target.task.n_classes);
  for (int c : target.cls) row(c) += 1.0;
  row /= static_cast<double>(n);
  return std::make_unique<FeaturelessModel>(row);
}

std::vector<int> equal_frequency_bins(const std::vector<double>& values, int bins) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  const auto n = sorted.size();
  for (int b = 1; b < bins; ++b) {
    const auto idx = static_cast<std::size_t>(b) * n / static_cast<std::size_t>(bins);
    if (idx < n && (cuts.empty() || sorted[idx] > cuts.back())) cuts.push_back(sorted[idx]);
  }
  std::vector<int> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin());
  return out;
}

std::vector<double> information_gain(const Eigen::MatrixXd& x, const Target& target, int bins) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<int> ybin;
  int ny = 0;
  if (target.task.is_classification()) {
    ybin = target.cls;
    ny = target.task.n_classes;
  } else {
    ybin = equal_frequency_bins(target.y, bins);
    ny = bins;
  }
  std::vector<double> out(static_cast<std::size_t>(x.cols()), 0.0);
  if (n == 0) return out;
  std::vector<double> py(static_cast<std::size_t>(ny), 0.0);
  for (int b : ybin) py[static_cast<std::size_t>(b)] += 1.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = x(static_cast<Eigen::Index>(i), j);
    const auto xb = equal_frequency_bins(col, bins);
    std::vector<double> joint(static_cast<std::size_t>(bins * ny), 0.0);
    std::vector<double> px(static_cast<std::size_t>(bins), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      joint[static_cast<std::size_t>(xb[i] * ny + ybin[i])] += 1.0;
      px[static_cast<std::size_t>(xb[i])] += 1.0;
    }
    double mi = 0.0;
    const double dn = static_cast<double>(n);
    for (int a = 0; a < bins; ++a) {
      for (int b = 0; b < ny; ++b) {
        const double j_ab = joint[static_cast<std::size_t>(a * ny + b)];
        if (j_ab == 0) continue;
        mi += (j_ab / dn) * std::log(j_ab * dn / (px[static_cast<std::size_t>(a)] * py[static_cast<std::size_t>(b)]));
      }
    }
    out[static_cast<std::size_t>(j)] = std::max(0.0, mi);
  }
  return out;
}

std::vector<std::size_t> info_gain_filter(const Eigen::MatrixXd& x, const Target& target, int top) {
  if (top < 1) throw InvalidArgument("filter_top must be at least 1");
  std::vector<std::size_t> idx(static_cast<std::size_t>(x.cols()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (static_cast<std::size_t>(top) >= idx.size()) return idx;
  const auto gain = information_gain(x, target);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return gain[a] > gain[b]; });
  idx.resize(static_cast<std::size_t>(top));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::unique_ptr<KnnModel> KnnModel::fit(const Eigen::MatrixXd& x, const Target& target, int k) {
  if (k < 1) throw InvalidArgument("knn k must be at least 1");
  if (static_cast<std::size_t>(k) > target.size() || static_cast<Eigen::Index>(target.size()) != x.rows())
    throw InvalidArgument("knn k=" + std::to_string(k) + " exceeds training rows " + std::to_string(target.size()));
  auto m = std::make_unique<KnnModel>();
  m->k_ = k;
  m->target_ = target;
  const auto n = x.rows();
  m->mean_ = x.colwise().mean().transpose();
  m->scale_ = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = n > 1 ? (x.col(j).array() - m->mean_(j)).square().sum() / static_cast<double>(n - 1) : 0.0;
    if (var > 1e-300) m->scale_(j) = 1.0 / std::sqrt(var);
  }
  m->train_ = x;
  return m;
}

std::vector<std::size_t> KnnModel::neighbours(const Eigen::VectorXd& query) const {
  // Differences are taken before scaling so mirror-image rows tie exactly.
  const auto n = static_cast<std::size_t>(train_.rows());
  std::vector<std::pair<double, std::size_t>> d(n);
  for (std::size_t i = 0; i < n; ++i)
    d[i] = {((train_.row(static_cast<Eigen::Index>(i)).transpose() - query).array() * scale_.array()).square().sum(), i};
  const auto k = static_cast<std::size_t>(k_);
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = d[j].second;
  return out;
}

Eigen::MatrixXd KnnModel::predict_selected(const Eigen::MatrixXd& x) const {
  const bool cls = target_.task.is_classification();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), cls ? target_.task.n_classes : 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto nb = neighbours(x.row(i).transpose());
    for (auto j : nb) {
      if (cls)
        out(i, target_.cls[j]) += 1.0;
      else
        out(i, 0) += target_.y[j];
    }
    out.row(i) /= static_cast<double>(nb.size());
  }
  return out;
}

Eigen::VectorXd ridge_regression(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  const auto p = x.cols();
  const Eigen::RowVectorXd xm = x.colwise().mean();
  const double ym = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - xm;
  Eigen::MatrixXd a = xc.transpose() * xc;
  a.diagonal().array() += lambda;
  const Eigen::VectorXd slopes = a.ldlt().solve(xc.transpose() * (y.array() - ym).matrix());
  Eigen::VectorXd out(p + 1);
  out(0) = ym - xm.dot(slopes);
  out.tail(p) = slopes;
  return out;
}

Eigen::VectorXd ridge_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  const auto n = x.rows();
  const auto p = x.cols();
  Eigen::MatrixXd xa(n, p + 1);
  xa.col(0).setOnes();
  xa.rightCols(p) = x;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  const double ybar = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
  beta(0) = std::log(ybar / (1.0 - ybar));
  auto objective = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = xa * b;
    double v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) v += softplus(eta(i)) - y(i) * eta(i);
    return v + 0.5 * lambda * b.tail(p).squaredNorm();
  };
  double obj = objective(beta);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd eta = xa * beta;
    Eigen::VectorXd prob(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = logistic(eta(i));
      w(i) = prob(i) * (1.0 - prob(i));
    }
    Eigen::VectorXd grad = xa.transpose() * (prob - y);
    grad.tail(p) += lambda * beta.tail(p);
    Eigen::MatrixXd h = xa.transpose() * w.asDiagonal() * xa;
    h.diagonal().tail(p).array() += lambda;
    h(0, 0) += 1e-10;
    const Eigen::VectorXd step = h.ldlt().solve(grad);
    double t = 1.0;
    bool accepted = false;
    double trial_obj = obj;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      trial_obj = objective(beta - t * step);
      if (trial_obj <= obj) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    beta -= t * step;
    const double change = obj - trial_obj;
    obj = trial_obj;
    if (change < 1e-10 * std::max(1.0, std::abs(obj))) break;
  }
  return beta;
}

std::unique_ptr<RidgeModel> RidgeModel::fit(const Eigen::MatrixXd& x, const Target& target, const LearnerSpec& spec) {
  auto m = std::make_unique<RidgeModel>();
  m->task_ = target.task;
  double lambda = spec.ridge_lambda.value_or(0.0);
  if (!spec.ridge_lambda) {
    const double weight = target.task.is_classification() ? 0.25 : 1.0;
    const auto grid = lambda_grid(x, spec.ridge_grid_size, weight);
    const auto n = target.size();
    const int folds = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(spec.ridge_cv_folds), n));
    if (folds >= 2) {
      bool stratify = target.task.is_classification();
      if (stratify) {
        std::vector<std::size_t> counts(static_cast<std::size_t>(target.task.n_classes), 0);
        for (int c : target.cls) ++counts[static_cast<std::size_t>(c)];
        stratify = std::find(counts.begin(), counts.end(), std::size_t{0}) == counts.end();
      }
      const auto assignment = stratify ? stratified_kfold(target.cls, target.task.n_classes, n, folds, spec.seed)
                                       : stratified_kfold({}, 0, n, folds, spec.seed);
      std::vector<double> loss(grid.size(), 0.0);
      for (int f = 0; f < folds; ++f) {
        const auto tr = assignment.train_rows(f);
        const auto te = assignment.test_rows(f);
        const auto xtr = select_rows(x, tr);
        const auto xte = select_rows(x, te);
        const auto ttr = target.subset(tr);
        const auto tte = target.subset(te);
        for (std::size_t g = 0; g < grid.size(); ++g)
          loss[g] += prediction_loss(target.task, ridge_scores(target.task, ridge_fit_all(target.task, xtr, ttr, grid[g]), xte), tte);
      }
      lambda = grid[static_cast<std::size_t>(std::min_element(loss.begin(), loss.end()) - loss.begin())];
    } else {
      lambda = grid.back();
    }
  }
  m->lambda_ = lambda;
  m->coef_ = ridge_fit_all(target.task, x, target, lambda);
  return m;
}

Eigen::MatrixXd RidgeModel::predict_selected(const Eigen::MatrixXd& x) const { return ridge_scores(task_, coef_, x); }

std::unique_ptr<FittedLearner> fit_learner(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Target& target) {
  spec.validate();
  if (spec.kind == LearnerKind::featureless) return fit_featureless(target);
  std::vector<std::size_t> selected;
  Eigen::MatrixXd xs = x;
  if (spec.filter_top && static_cast<Eigen::Index>(*spec.filter_top) < x.cols()) {
    selected = info_gain_filter(x, target, *spec.filter_top);
    xs = select_columns(x, selected);
  }
  std::unique_ptr<FittedLearner> model;
  if (spec.kind == LearnerKind::knn) {
    auto m = KnnModel::fit(xs, target, spec.k);
    m->selected_ = selected;
    model = std::move(m);
  } else {
    auto m = RidgeModel::fit(xs, target, spec);
    m->selected_ = selected;
    model = std::move(m);
  }
  return model;
}

}  // namespace catenc
