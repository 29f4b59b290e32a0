#include "catenc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace catenc {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::rmse:
      return "rmse";
    case Metric::auc:
      return "auc";
    case Metric::aunu:
      return "aunu";
  }
  return "unknown";
}

Metric metric_from_string(std::string_view s) {
  if (s == "rmse") return Metric::rmse;
  if (s == "auc") return Metric::auc;
  if (s == "aunu") return Metric::aunu;
  throw InvalidArgument("unknown metric '" + std::string(s) + "'");
}

Metric metric_for(const Task& task) {
  switch (task.kind) {
    case TaskKind::regression:
      return Metric::rmse;
    case TaskKind::binary:
      return Metric::auc;
    case TaskKind::multiclass:
      return Metric::aunu;
  }
  return Metric::rmse;
}

bool higher_is_better(Metric m) { return m != Metric::rmse; }

double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.empty()) throw InvalidArgument("rmse of an empty vector");
  if (pred.size() != truth.size()) throw InvalidArgument("rmse inputs differ in length");
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("auc inputs differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  // Twice the Mann-Whitney U, kept integral so the ratio is exact.
  std::uint64_t twice_u = 0, n_pos = 0, n_neg = 0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t e = g;
    std::uint64_t pos = 0, neg = 0;
    while (e < order.size() && scores[order[e]] == scores[order[g]]) {
      (labels[order[e]] != 0 ? pos : neg) += 1;
      ++e;
    }
    twice_u += pos * (2 * n_neg + neg);
    n_pos += pos;
    n_neg += neg;
    g = e;
  }
  if (n_pos == 0 || n_neg == 0) throw DegenerateFold("auc needs both classes in the fold");
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double aunu(const Eigen::MatrixXd& scores, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(scores.rows()) != labels.size()) throw InvalidArgument("aunu inputs differ in length");
  const auto n_classes = scores.cols();
  double total = 0.0;
  std::vector<double> col(labels.size());
  std::vector<int> is_c(labels.size());
  for (Eigen::Index c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      col[i] = scores(static_cast<Eigen::Index>(i), c);
      is_c[i] = labels[i] == c ? 1 : 0;
    }
    total += auc(col, is_c);
  }
  return total / static_cast<double>(n_classes);
}

double evaluate(Metric metric, const Eigen::MatrixXd& pred, const Target& truth) {
  switch (metric) {
    case Metric::rmse: {
      std::vector<double> p(pred.col(0).data(), pred.col(0).data() + pred.rows());
      return rmse(p, truth.y);
    }
    case Metric::auc: {
      std::vector<double> p(pred.col(1).data(), pred.col(1).data() + pred.rows());
      return auc(p, truth.cls);
    }
    case Metric::aunu:
      return aunu(pred, truth.cls);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

TTest corrected_ttest(const std::vector<double>& diffs, double n_train, double n_test) {
  const auto j = diffs.size();
  if (j < 2) throw InvalidArgument("corrected t-test needs at least 2 differences");
  if (!(n_train > 0) || n_test < 0) throw InvalidArgument("corrected t-test needs positive training size");
  const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(j);
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  const double var = ss / static_cast<double>(j - 1);
  TTest out;
  out.df = static_cast<int>(j - 1);
  if (var == 0.0) {
    out.t = mean > 0 ? std::numeric_limits<double>::infinity()
                     : (mean < 0 ? -std::numeric_limits<double>::infinity() : 0.0);
    out.p_one_sided = mean > 0 ? 0.0 : (mean < 0 ? 1.0 : 0.5);
    return out;
  }
  out.t = mean / std::sqrt((1.0 / static_cast<double>(j) + n_test / n_train) * var);
  const boost::math::students_t dist(static_cast<double>(out.df));
  out.p_one_sided = boost::math::cdf(boost::math::complement(dist, out.t));
  return out;
}

Relation Relation::empty(std::vector<std::string> labels) {
  Relation r;
  const auto m = labels.size();
  r.labels = std::move(labels);
  r.dominance.assign(m, std::vector<bool>(m, false));
  return r;
}

void Relation::validate() const {
  const auto m = labels.size();
  if (dominance.size() != m) throw InvalidArgument("relation matrix size differs from label count");
  for (std::size_t i = 0; i < m; ++i) {
    if (dominance[i].size() != m) throw InvalidArgument("relation matrix is not square");
    if (dominance[i][i]) throw InvalidArgument("relation has a reflexive pair for " + labels[i]);
    for (std::size_t k = i + 1; k < m; ++k)
      if (dominance[i][k] && dominance[k][i])
        throw InvalidArgument("relation has both " + labels[i] + " > " + labels[k] + " and the reverse");
  }
}

Relation build_relation(const std::vector<ConditionScores>& conditions, Metric metric, double n_train,
                        double n_test, double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw InvalidArgument("alpha must be in (0, 0.5]");
  std::vector<const ConditionScores*> kept;
  std::vector<std::string> excluded;
  for (const auto& c : conditions) {
    if (c.failed)
      excluded.push_back(c.label);
    else
      kept.push_back(&c);
  }
  std::vector<std::string> labels;
  for (auto* c : kept) labels.push_back(c->label);
  auto rel = Relation::empty(std::move(labels));
  rel.excluded = std::move(excluded);
  const double sign = higher_is_better(metric) ? 1.0 : -1.0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t k = 0; k < kept.size(); ++k) {
      if (i == k) continue;
      const auto& a = kept[i]->values;
      const auto& b = kept[k]->values;
      if (a.size() != b.size()) throw InvalidArgument("conditions have different fold counts");
      std::vector<double> diffs;
      for (std::size_t f = 0; f < a.size(); ++f)
        if (!std::isnan(a[f]) && !std::isnan(b[f])) diffs.push_back(sign * (a[f] - b[f]));
      if (diffs.size() < 2) continue;
      rel.set(i, k, corrected_ttest(diffs, n_train, n_test).p_one_sided < alpha);
    }
  }
  return rel;
}

}  // namespace catenc
