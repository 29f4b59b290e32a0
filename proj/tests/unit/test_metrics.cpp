#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "catenc/metrics.hpp"

using namespace catenc;

TEST_CASE("rmse") {
  CHECK(rmse({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(rmse({0, 0}, {3, 4}) == doctest::Approx(2.5 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(rmse({1.5, 2.5, 3.5}, {1, 2, 3}) == doctest::Approx(0.5));
}

TEST_CASE("auc") {
  CHECK(auc({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == 1.0);
  CHECK(auc({0.9, 0.8, 0.7, 0.85}, {1, 1, 0, 0}) == 0.75);
  CHECK(auc({0.3, 0.3, 0.3}, {1, 0, 1}) == 0.5);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), DegenerateFold);
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> s(40);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
      s[i] = static_cast<double>(rng() % 7) / 7.0;
      y[i] = static_cast<int>(i % 3 == 0);
    }
    CHECK(auc(s, y) == oracle::brute_auc(s, y));
  }
}

TEST_CASE("aunu") {
  Eigen::MatrixXd s(6, 3);
  s << 0.6, 0.3, 0.1,  //
      0.2, 0.5, 0.3,   //
      0.1, 0.2, 0.7,   //
      0.4, 0.4, 0.2,   //
      0.3, 0.3, 0.4,   //
      0.5, 0.1, 0.4;
  const std::vector<int> y{0, 1, 2, 1, 2, 0};
  double mean = 0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> col(6);
    std::vector<int> lab(6);
    for (int i = 0; i < 6; ++i) {
      col[static_cast<std::size_t>(i)] = s(i, c);
      lab[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] == c;
    }
    mean += oracle::brute_auc(col, lab) / 3.0;
  }
  CHECK(aunu(s, y) == doctest::Approx(mean).epsilon(1e-15));
  CHECK(aunu(Eigen::MatrixXd::Constant(6, 3, 1.0 / 3), y) == 0.5);
  CHECK_THROWS_AS(aunu(s, {0, 1, 1, 1, 0, 0}), DegenerateFold);
}

TEST_CASE("corrected t-test") {
  auto z = corrected_ttest({0, 0, 0}, 100, 25);
  CHECK(z.t == 0.0);
  CHECK(z.p_one_sided == 0.5);
  const auto r = corrected_ttest({1, 2, 3, 4, 5}, 100, 25);
  CHECK(r.t == doctest::Approx(3.0 / std::sqrt(0.45 * 2.5)).epsilon(1e-12));
  CHECK(std::abs(r.t - 2.828) < 1e-3);
  CHECK(r.df == 4);
  CHECK(r.p_one_sided < 0.05);
  const std::vector<double> d{0.3, -0.1, 0.5, 0.2, 0.05};
  CHECK(corrected_ttest(d, 100, 0).t == doctest::Approx(oracle::paired_t(d)).epsilon(1e-12));
  CHECK(corrected_ttest({1, 1, 1}, 10, 2).p_one_sided == 0.0);
  CHECK(corrected_ttest({-1, -1, -1}, 10, 2).p_one_sided == 1.0);
}

TEST_CASE("relations") {
  SUBCASE("identical values: no dominance") {
    const auto rel = build_relation({{"a", {0.7, 0.8, 0.75}}, {"b", {0.7, 0.8, 0.75}}}, Metric::auc, 80, 20);
    CHECK(!rel.beats(0, 1));
    CHECK(!rel.beats(1, 0));
  }
  SUBCASE("uniformly better wins; lower rmse is better") {
    const auto rel = build_relation({{"a", {1.0, 1.1, 0.9, 1.05, 0.95}}, {"b", {2.0, 2.1, 1.9, 2.05, 1.95}}},
                                    Metric::rmse, 80, 20);
    CHECK(rel.beats(0, 1));
    CHECK(!rel.beats(1, 0));
    rel.validate();
  }
  SUBCASE("failed conditions are excluded") {
    ConditionScores f{"f", {}, true};
    const auto rel = build_relation({{"a", {0.6, 0.7}}, f}, Metric::auc, 80, 20);
    CHECK(rel.size() == 1);
    CHECK(rel.excluded == std::vector<std::string>{"f"});
  }
  SUBCASE("planted order is recovered") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> g(0, 0.01);
      std::vector<ConditionScores> c{{"a", {}}, {"b", {}}, {"c", {}}};
      for (int f = 0; f < 5; ++f) {
        const double base = 0.7 + 0.05 * g(rng) / 0.01;
        for (int k = 0; k < 3; ++k) c[static_cast<std::size_t>(k)].values.push_back(base - 0.1 * k + g(rng));
      }
      const auto rel = build_relation(c, Metric::auc, 800, 200);
      bool ok = true;
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) ok = ok && rel.beats(i, j) == (i < j);
      hits += ok;
    }
    CHECK(hits >= 18);
  }
}
