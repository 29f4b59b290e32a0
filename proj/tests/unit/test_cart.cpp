#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "../support/builders.hpp"
#include "catenc/cart.hpp"

using namespace catenc;
using testkit::cat;
using testkit::num;

namespace {

Task regression() { return {TaskKind::regression, 0}; }
Task binary() { return {TaskKind::binary, 2}; }

Column binary_target(const std::vector<int>& y) {
  std::vector<std::int32_t> codes(y.begin(), y.end());
  return Column::from_codes("y", {"n", "p"}, codes);
}

}  // namespace

TEST_CASE("order_levels") {
  SUBCASE("binary by positive rate") {
    std::vector<std::string> x;
    std::vector<int> y;
    auto add = [&](const char* l, int pos, int n) {
      for (int i = 0; i < n; ++i) {
        x.push_back(l);
        y.push_back(i < pos ? 1 : 0);
      }
    };
    add("a", 9, 10);
    add("b", 1, 10);
    add("c", 5, 10);
    const auto col = cat("x", x);
    const auto ord = order_levels(col, binary_target(y), binary());
    std::vector<std::string> names;
    for (auto i : ord) names.push_back(col.levels[i]);
    CHECK(names == std::vector<std::string>{"b", "c", "a"});
  }
  SUBCASE("regression ties keep first appearance") {
    const auto col = cat("x", {"q", "p", "r", "q", "p", "r"});
    const auto ord = order_levels(col, num("y", {1, 1, 1, 1, 1, 1}), regression());
    CHECK(ord == std::vector<std::size_t>{0, 1, 2});
  }
  SUBCASE("multiclass follows the leading eigenvector of the weighted covariance") {
    // 4 levels x 3 classes, hand-built counts.
    const int counts[4][3] = {{8, 1, 1}, {1, 8, 1}, {1, 1, 8}, {4, 4, 2}};
    std::vector<std::string> x;
    std::vector<std::int32_t> y;
    for (int l = 0; l < 4; ++l)
      for (int c = 0; c < 3; ++c)
        for (int k = 0; k < counts[l][c]; ++k) {
          x.push_back("l" + std::to_string(l));
          y.push_back(c);
        }
    const auto col = cat("x", x);
    const auto ord = order_levels(col, Column::from_codes("y", {"a", "b", "c"}, y), {TaskKind::multiclass, 3});
    // Oracle: proportions P (4x3), weights n_l/N, weighted covariance, PC1 scores.
    Eigen::MatrixXd p(4, 3);
    Eigen::VectorXd w(4);
    for (int l = 0; l < 4; ++l) {
      double n = 0;
      for (int c = 0; c < 3; ++c) n += counts[l][c];
      for (int c = 0; c < 3; ++c) p(l, c) = counts[l][c] / n;
      w(l) = n;
    }
    w /= w.sum();
    const Eigen::RowVectorXd mean = w.transpose() * p;
    const Eigen::MatrixXd centered = p.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * w.asDiagonal() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd scores = centered * es.eigenvectors().col(2);
    std::vector<std::size_t> by_score{0, 1, 2, 3};
    std::stable_sort(by_score.begin(), by_score.end(), [&](auto a, auto b) { return scores(static_cast<Eigen::Index>(a)) < scores(static_cast<Eigen::Index>(b)); });
    auto reversed = by_score;
    std::reverse(reversed.begin(), reversed.end());
    CHECK((ord == by_score || ord == reversed));
  }
}

TEST_CASE("grow_and_prune") {
  SUBCASE("constant target gives a root-only tree") {
    std::vector<std::string> x;
    for (int i = 0; i < 60; ++i) x.push_back("l" + std::to_string(i % 6));
    const auto tree = grow_and_prune(cat("x", x), num("y", std::vector<double>(60, 2.0)), regression(), 1);
    CHECK(tree.n_leaves == 1);
    CHECK(tree.assign_leaf("l3") == 1);
    CHECK(tree.assign_leaf("unseen") == 1);
  }
  SUBCASE("fewer than 20 rows gives the root") {
    const auto tree = grow_and_prune(cat("x", {"a", "b", "a", "b"}), num("y", {0, 10, 0, 10}), regression(), 1);
    CHECK(tree.n_leaves == 1);
  }
  SUBCASE("two separated groups give two leaves") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0, 0.1);
    std::vector<std::string> x;
    std::vector<double> y;
    for (int i = 0; i < 200; ++i) {
      const int l = i % 6;
      x.push_back("l" + std::to_string(l));
      y.push_back((l < 3 ? 0.0 : 10.0) + g(rng));
    }
    const auto tree = grow_and_prune(cat("x", x), num("y", y), regression(), 7);
    CHECK(tree.n_leaves == 2);
    CHECK(tree.assign_leaf("l0") == tree.assign_leaf("l1"));
    CHECK(tree.assign_leaf("l1") == tree.assign_leaf("l2"));
    CHECK(tree.assign_leaf("l3") == tree.assign_leaf("l4"));
    CHECK(tree.assign_leaf("l4") == tree.assign_leaf("l5"));
    CHECK(tree.assign_leaf("l0") != tree.assign_leaf("l5"));
  }
  SUBCASE("pure noise prunes to the root in most seeds") {
    int roots = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::mt19937_64 rng(seed + 100);
      std::normal_distribution<double> g(0, 1);
      std::vector<std::string> x;
      std::vector<double> y;
      for (int i = 0; i < 500; ++i) {
        x.push_back("l" + std::to_string(rng() % 50));
        y.push_back(g(rng));
      }
      if (grow_and_prune(cat("x", x), num("y", y), regression(), seed).n_leaves == 1) ++roots;
    }
    CHECK(roots >= 18);
  }
  SUBCASE("structural invariants") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0, 1);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<std::string> x;
      std::vector<int> yb;
      const int L = 3 + static_cast<int>(rng() % 20);
      std::vector<double> eff(static_cast<std::size_t>(L));
      for (auto& e : eff) e = 2 * g(rng);
      for (int i = 0; i < 300; ++i) {
        const int l = static_cast<int>(rng() % static_cast<std::uint64_t>(L));
        x.push_back("l" + std::to_string(l));
        yb.push_back(eff[static_cast<std::size_t>(l)] + g(rng) > 0 ? 1 : 0);
      }
      const auto col = cat("x", x);
      const auto tree = grow_and_prune(col, binary_target(yb), binary(), static_cast<std::uint64_t>(rep));
      // Dense ids 1..K, every level mapped.
      std::set<int> ids;
      for (const auto& l : col.levels) {
        const int id = tree.assign_leaf(l);
        CHECK(id >= 1);
        CHECK(id <= tree.n_leaves);
        ids.insert(id);
      }
      CHECK(static_cast<int>(ids.size()) == tree.n_leaves);
      // Splits strictly reduce impurity.
      for (const auto& n : tree.nodes)
        if (n.left >= 0)
          CHECK(tree.nodes[static_cast<std::size_t>(n.left)].risk + tree.nodes[static_cast<std::size_t>(n.right)].risk < n.risk);
      // The chosen subtree is on the pruning path.
      CHECK(std::find(tree.alpha_sequence.begin(), tree.alpha_sequence.end(), tree.alpha) != tree.alpha_sequence.end());
      // Nested: leaf count non-increasing along the path.
      std::size_t prev = std::numeric_limits<std::size_t>::max();
      for (double a : tree.alpha_sequence) {
        const auto k = tree.leaves_at(a).size();
        CHECK(k <= prev);
        prev = k;
      }
    }
  }
  SUBCASE("ordered split equals the best subset split") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(0, 1);
    for (int rep = 0; rep < 20; ++rep) {
      const int L = 2 + static_cast<int>(rng() % 8);
      std::vector<double> eff(static_cast<std::size_t>(L));
      for (auto& e : eff) e = g(rng);
      std::vector<std::string> x;
      std::vector<double> y;
      std::vector<int> lev;
      for (int i = 0; i < 120; ++i) {
        const int l = i < L ? i : static_cast<int>(rng() % static_cast<std::uint64_t>(L));
        lev.push_back(l);
        x.push_back("l" + std::to_string(l));
        y.push_back(eff[static_cast<std::size_t>(l)] + g(rng));
      }
      CartOptions opt;
      opt.min_node_size = 1;
      opt.min_split_size = 2;
      const auto tree = grow_and_prune(cat("x", x), num("y", y), regression(), 1, opt);
      REQUIRE(tree.nodes.size() >= 1);
      const auto& root = tree.nodes[0];
      if (root.left < 0) continue;
      const double ordered = tree.nodes[static_cast<std::size_t>(root.left)].risk + tree.nodes[static_cast<std::size_t>(root.right)].risk;
      double best = std::numeric_limits<double>::infinity();
      for (unsigned mask = 1; mask + 1 < (1u << L); ++mask) {
        double s[2] = {0, 0}, ss[2] = {0, 0}, n[2] = {0, 0};
        for (std::size_t i = 0; i < y.size(); ++i) {
          const int side = (mask >> lev[i]) & 1u;
          s[side] += y[i];
          ss[side] += y[i] * y[i];
          n[side] += 1;
        }
        double sse = 0;
        for (int k = 0; k < 2; ++k) sse += ss[k] - s[k] * s[k] / n[k];
        best = std::min(best, sse);
      }
      CHECK(ordered == doctest::Approx(best).epsilon(1e-9));
    }
  }
}

TEST_CASE("assign_leaf sends unseen labels to the largest node") {
  std::vector<std::string> x;
  std::vector<double> y;
  for (int i = 0; i < 100; ++i) {
    const bool big = i < 60;
    x.push_back(big ? "big" + std::to_string(i % 3) : "small" + std::to_string(i % 2));
    y.push_back(big ? 0.0 : 50.0);
  }
  const auto tree = grow_and_prune(cat("x", x), num("y", y), regression(), 3);
  REQUIRE(tree.n_leaves == 2);
  CHECK(tree.assign_leaf("new") == tree.assign_leaf("big0"));
  CHECK(tree.leaf_counts[static_cast<std::size_t>(tree.largest_leaf() - 1)] == 60.0);
}
