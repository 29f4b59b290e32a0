#include "catenc/cart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "catenc/error.hpp"
#include "catenc/folds.hpp"

namespace catenc {
namespace {

struct Stats {
  double n = 0.0;
  double sum = 0.0;
  double sumsq = 0.0;
  std::vector<double> cls;

  void add(const Stats& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
    for (std::size_t c = 0; c < cls.size(); ++c) cls[c] += o.cls[c];
  }
  void sub(const Stats& o) {
    n -= o.n;
    sum -= o.sum;
    sumsq -= o.sumsq;
    for (std::size_t c = 0; c < cls.size(); ++c) cls[c] -= o.cls[c];
  }
  double risk(bool classification) const {
    if (n <= 0.0) return 0.0;
    if (classification) {
      double sq = 0.0;
      for (double c : cls) sq += c * c;
      return std::max(0.0, n - sq / n);
    }
    return std::max(0.0, sumsq - sum * sum / n);
  }
};

// Row-level view of the training data for one tree fit.
struct RowData {
  std::vector<std::size_t> level;  // index into the level dictionary
  std::vector<double> y;           // regression
  std::vector<int> cls;            // classification
};

struct Problem {
  const std::vector<std::string>* labels = nullptr;
  std::size_t n_levels = 0;
  bool classification = false;
  int n_classes = 0;
  TaskKind kind = TaskKind::regression;
};

std::vector<Stats> level_stats(const Problem& pb, const RowData& rows) {
  std::vector<Stats> st(pb.n_levels);
  for (auto& s : st) s.cls.assign(static_cast<std::size_t>(pb.n_classes), 0.0);
  for (std::size_t i = 0; i < rows.level.size(); ++i) {
    auto& s = st[rows.level[i]];
    s.n += 1.0;
    if (pb.classification) {
      s.cls[static_cast<std::size_t>(rows.cls[i])] += 1.0;
    } else {
      s.sum += rows.y[i];
      s.sumsq += rows.y[i] * rows.y[i];
    }
  }
  return st;
}

// Scores used for ordering; returns level indices sorted by score with
// observed levels first.
std::vector<std::size_t> order_by_stats(const Problem& pb, const std::vector<Stats>& st) {
  std::vector<double> score(pb.n_levels, 0.0);
  if (!pb.classification) {
    for (std::size_t l = 0; l < pb.n_levels; ++l) score[l] = st[l].n > 0 ? st[l].sum / st[l].n : 0.0;
  } else if (pb.kind == TaskKind::binary) {
    for (std::size_t l = 0; l < pb.n_levels; ++l) score[l] = st[l].n > 0 ? st[l].cls[1] / st[l].n : 0.0;
  } else {
    const auto c = static_cast<Eigen::Index>(pb.n_classes);
    double total = 0.0;
    for (const auto& s : st) total += s.n;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(c);
    std::vector<Eigen::VectorXd> props(pb.n_levels, Eigen::VectorXd::Zero(c));
    for (std::size_t l = 0; l < pb.n_levels; ++l) {
      if (st[l].n == 0) continue;
      for (Eigen::Index k = 0; k < c; ++k) props[l](k) = st[l].cls[static_cast<std::size_t>(k)] / st[l].n;
      mean += (st[l].n / total) * props[l];
    }
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(c, c);
    for (std::size_t l = 0; l < pb.n_levels; ++l) {
      if (st[l].n == 0) continue;
      const Eigen::VectorXd d = props[l] - mean;
      cov += (st[l].n / total) * d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd v = es.eigenvectors().col(c - 1);
    Eigen::Index arg = 0;
    for (Eigen::Index k = 1; k < c; ++k)
      if (std::abs(v(k)) > std::abs(v(arg)) + 1e-12) arg = k;
    if (v(arg) < 0) v = -v;
    for (std::size_t l = 0; l < pb.n_levels; ++l) score[l] = props[l].dot(v);
  }
  std::vector<std::size_t> order(pb.n_levels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const bool oa = st[a].n > 0;
    const bool ob = st[b].n > 0;
    if (oa != ob) return oa;
    if (!oa) return false;
    return score[a] < score[b];
  });
  return order;
}

struct FittedTree {
  std::vector<std::size_t> axis;       // level index per ordered position (observed only)
  std::vector<std::size_t> position;   // ordered position per level index, npos if unobserved
  std::vector<LevelTree::Node> nodes;
  std::vector<double> alphas;
};

constexpr std::size_t kNoPos = static_cast<std::size_t>(-1);

int grow(const Problem& pb, const std::vector<Stats>& axis_stats, std::size_t lo, std::size_t hi, int depth,
         const CartOptions& opt, std::vector<LevelTree::Node>& nodes) {
  Stats total;
  total.cls.assign(static_cast<std::size_t>(pb.n_classes), 0.0);
  for (std::size_t k = lo; k < hi; ++k) total.add(axis_stats[k]);
  LevelTree::Node node;
  node.lo = lo;
  node.hi = hi;
  node.count = total.n;
  node.risk = total.risk(pb.classification);
  node.depth = depth;
  node.mean = total.n > 0 ? total.sum / total.n : 0.0;
  node.class_counts = total.cls;
  const int id = static_cast<int>(nodes.size());
  nodes.push_back(node);

  if (depth >= opt.max_depth || total.n < static_cast<double>(opt.min_split_size) || hi - lo < 2) return id;
  const double min_node = static_cast<double>(opt.min_node_size);
  Stats left;
  left.cls.assign(static_cast<std::size_t>(pb.n_classes), 0.0);
  Stats right = total;
  double best_gain = 0.0;
  std::size_t best_k = 0;
  for (std::size_t k = lo + 1; k < hi; ++k) {
    left.add(axis_stats[k - 1]);
    right.sub(axis_stats[k - 1]);
    if (left.n < min_node || right.n < min_node) continue;
    const double gain = node.risk - left.risk(pb.classification) - right.risk(pb.classification);
    if (gain > best_gain) {
      best_gain = gain;
      best_k = k;
    }
  }
  if (best_k == 0 || best_gain <= 1e-12 * std::max(1.0, node.risk)) return id;
  const int l = grow(pb, axis_stats, lo, best_k, depth + 1, opt, nodes);
  const int r = grow(pb, axis_stats, best_k, hi, depth + 1, opt, nodes);
  nodes[static_cast<std::size_t>(id)].left = l;
  nodes[static_cast<std::size_t>(id)].right = r;
  return id;
}

void collapse_subtree(std::vector<LevelTree::Node>& nodes, std::vector<std::uint8_t>& collapsed, std::size_t i,
                      double alpha) {
  if (collapsed[i]) return;
  collapsed[i] = 1;
  nodes[i].prune_alpha = alpha;
  if (nodes[i].left >= 0) {
    collapse_subtree(nodes, collapsed, static_cast<std::size_t>(nodes[i].left), alpha);
    collapse_subtree(nodes, collapsed, static_cast<std::size_t>(nodes[i].right), alpha);
  }
}

// Weakest-link pruning. Sets prune_alpha on every internal node and returns
// the increasing complexity sequence, starting at 0 for the full tree.
std::vector<double> cost_complexity_path(std::vector<LevelTree::Node>& nodes) {
  std::vector<double> alphas{0.0};
  std::vector<std::uint8_t> collapsed(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].left < 0) collapsed[i] = 1;
  std::vector<double> sub_risk(nodes.size());
  std::vector<double> sub_leaves(nodes.size());
  while (!collapsed[0]) {
    // Children always have larger indices than their parent.
    for (std::size_t i = nodes.size(); i-- > 0;) {
      if (collapsed[i]) {
        sub_risk[i] = nodes[i].risk;
        sub_leaves[i] = 1.0;
      } else {
        const auto l = static_cast<std::size_t>(nodes[i].left);
        const auto r = static_cast<std::size_t>(nodes[i].right);
        sub_risk[i] = sub_risk[l] + sub_risk[r];
        sub_leaves[i] = sub_leaves[l] + sub_leaves[r];
      }
    }
    std::vector<double> g(nodes.size(), std::numeric_limits<double>::infinity());
    double g_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (collapsed[i]) continue;
      g[i] = (nodes[i].risk - sub_risk[i]) / (sub_leaves[i] - 1.0);
      g_min = std::min(g_min, g[i]);
    }
    const double alpha = std::max(g_min, alphas.back());
    const double tol = 1e-12 * std::max(1.0, std::abs(g_min));
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (!collapsed[i] && g[i] <= g_min + tol) collapse_subtree(nodes, collapsed, i, alpha);
    if (alpha > alphas.back()) alphas.push_back(alpha);
  }
  return alphas;
}

// Terminal node indices of the subtree pruned at complexity `alpha`, in
// axis order.
std::vector<std::size_t> terminal_nodes(const std::vector<LevelTree::Node>& nodes, double alpha) {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    const auto& nd = nodes[i];
    if (nd.left < 0 || nd.prune_alpha <= alpha) {
      out.push_back(i);
    } else {
      stack.push_back(static_cast<std::size_t>(nd.right));
      stack.push_back(static_cast<std::size_t>(nd.left));
    }
  }
  return out;
}

FittedTree fit_tree(const Problem& pb, const RowData& rows, const CartOptions& opt) {
  FittedTree t;
  const auto st = level_stats(pb, rows);
  const auto order = order_by_stats(pb, st);
  t.position.assign(pb.n_levels, kNoPos);
  std::vector<Stats> axis_stats;
  for (auto l : order) {
    if (st[l].n == 0) break;
    t.position[l] = t.axis.size();
    t.axis.push_back(l);
    axis_stats.push_back(st[l]);
  }
  if (t.axis.empty()) return t;
  if (rows.level.size() < opt.min_split_size) {
    CartOptions root_only = opt;
    root_only.max_depth = 0;
    grow(pb, axis_stats, 0, axis_stats.size(), 0, root_only, t.nodes);
  } else {
    grow(pb, axis_stats, 0, axis_stats.size(), 0, opt, t.nodes);
  }
  t.alphas = cost_complexity_path(t.nodes);
  return t;
}

// Prediction loss of a terminal node for one held-out row: squared error for
// regression, Gini (Brier) loss for classification.
double node_loss(const Problem& pb, const LevelTree::Node& nd, double y, int cls) {
  if (!pb.classification) {
    const double r = y - nd.mean;
    return r * r;
  }
  double loss = 1.0;
  for (std::size_t c = 0; c < nd.class_counts.size(); ++c) {
    const double p = nd.count > 0 ? nd.class_counts[c] / nd.count : 0.0;
    loss += p * p - (static_cast<int>(c) == cls ? 2.0 * p : 0.0);
  }
  return loss;
}

std::size_t largest_terminal(const std::vector<LevelTree::Node>& nodes, const std::vector<std::size_t>& terms) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < terms.size(); ++k)
    if (nodes[terms[k]].count > nodes[terms[best]].count) best = k;
  return best;
}

Problem make_problem(const Column& column, const Task& task) {
  Problem pb;
  pb.labels = &column.levels;
  pb.n_levels = column.levels.size();
  pb.classification = task.is_classification();
  pb.n_classes = task.n_classes;
  pb.kind = task.kind;
  return pb;
}

RowData make_rows(const Column& column, const Column& target, const Task& task) {
  if (!column.is_categorical()) throw InvalidArgument("tree feature must be categorical");
  if (column.size() != target.size()) throw InvalidArgument("feature and target lengths differ");
  if (task.is_classification() != target.is_categorical()) throw InvalidArgument("target kind does not match task");
  RowData rows;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column.missing[i]) continue;
    rows.level.push_back(static_cast<std::size_t>(column.codes[i]));
    if (task.is_classification())
      rows.cls.push_back(target.codes[i]);
    else
      rows.y.push_back(target.values[i]);
  }
  return rows;
}

}  // namespace

std::vector<std::size_t> order_levels(const Column& column, const Column& target, const Task& task) {
  const auto pb = make_problem(column, task);
  return order_by_stats(pb, level_stats(pb, make_rows(column, target, task)));
}

int LevelTree::largest_leaf() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < leaf_counts.size(); ++k)
    if (leaf_counts[k] > leaf_counts[best]) best = k;
  return static_cast<int>(best) + 1;
}

int LevelTree::assign_leaf(std::string_view label) const {
  auto it = leaf_index_.find(std::string(label));
  return it == leaf_index_.end() ? largest_leaf() : it->second;
}

std::vector<std::pair<std::size_t, std::size_t>> LevelTree::leaves_at(double a) const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (nodes.empty()) return out;
  for (auto i : terminal_nodes(nodes, a)) out.emplace_back(nodes[i].lo, nodes[i].hi);
  return out;
}

LevelTree grow_and_prune(const Column& column, const Column& target, const Task& task, std::uint64_t seed,
                         const CartOptions& options) {
  const auto pb = make_problem(column, task);
  const auto rows = make_rows(column, target, task);
  auto full = fit_tree(pb, rows, options);

  LevelTree tree;
  for (auto l : full.axis) tree.ordered_levels.push_back(column.levels[l]);
  if (full.nodes.empty()) {
    tree.leaf_counts = {0.0};
    return tree;
  }

  std::size_t chosen = 0;
  const auto& alphas = full.alphas;
  const std::size_t n = rows.level.size();
  if (alphas.size() > 1 && n >= static_cast<std::size_t>(options.cv_folds)) {
    std::vector<double> betas(alphas.size());
    for (std::size_t k = 0; k + 1 < alphas.size(); ++k) betas[k] = std::sqrt(alphas[k] * alphas[k + 1]);
    betas.back() = alphas.back() * 2.0;

    std::vector<int> cls_for_folds = rows.cls;
    const auto folds = stratified_kfold(cls_for_folds, pb.classification ? pb.n_classes : 0, n, options.cv_folds, seed);
    std::vector<std::vector<double>> loss(betas.size(), std::vector<double>(n, 0.0));
    for (int f = 0; f < options.cv_folds; ++f) {
      RowData train;
      std::vector<std::size_t> test;
      for (std::size_t i = 0; i < n; ++i) {
        if (folds.fold_of_row[i] == f) {
          test.push_back(i);
          continue;
        }
        train.level.push_back(rows.level[i]);
        if (pb.classification)
          train.cls.push_back(rows.cls[i]);
        else
          train.y.push_back(rows.y[i]);
      }
      const auto sub = fit_tree(pb, train, options);
      for (std::size_t k = 0; k < betas.size(); ++k) {
        const auto terms = terminal_nodes(sub.nodes, betas[k]);
        const auto fallback = terms[largest_terminal(sub.nodes, terms)];
        for (auto i : test) {
          const auto pos = sub.position[rows.level[i]];
          std::size_t node = fallback;
          if (pos != kNoPos) {
            for (auto t : terms) {
              if (sub.nodes[t].lo <= pos && pos < sub.nodes[t].hi) {
                node = t;
                break;
              }
            }
          }
          loss[k][i] = node_loss(pb, sub.nodes[node], pb.classification ? 0.0 : rows.y[i],
                                 pb.classification ? rows.cls[i] : 0);
        }
      }
    }
    std::vector<double> err(betas.size()), se(betas.size());
    for (std::size_t k = 0; k < betas.size(); ++k) {
      const double mean = std::accumulate(loss[k].begin(), loss[k].end(), 0.0) / static_cast<double>(n);
      double ss = 0.0;
      for (double v : loss[k]) ss += (v - mean) * (v - mean);
      err[k] = mean;
      se[k] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n)) : 0.0;
    }
    const auto best = static_cast<std::size_t>(std::min_element(err.begin(), err.end()) - err.begin());
    const double threshold = err[best] + options.se_rule * se[best];
    chosen = best;
    for (std::size_t k = best; k < err.size(); ++k)
      if (err[k] <= threshold) chosen = k;
  }

  tree.nodes = full.nodes;
  tree.alpha_sequence = alphas;
  tree.alpha = alphas[chosen];
  const auto terms = terminal_nodes(tree.nodes, tree.alpha);
  tree.n_leaves = static_cast<int>(terms.size());
  tree.leaf_of_level.assign(tree.ordered_levels.size(), 0);
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto& nd = tree.nodes[terms[k]];
    tree.leaf_counts.push_back(nd.count);
    for (std::size_t p = nd.lo; p < nd.hi; ++p) {
      tree.leaf_of_level[p] = static_cast<int>(k) + 1;
      tree.leaf_index_.emplace(tree.ordered_levels[p], static_cast<int>(k) + 1);
    }
  }
  return tree;
}

}  // namespace catenc
