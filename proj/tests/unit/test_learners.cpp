#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "catenc/error.hpp"
#include "catenc/learners.hpp"

using namespace catenc;

namespace {

Target reg(std::vector<double> y) {
  Target t;
  t.task = {TaskKind::regression, 0};
  t.y = std::move(y);
  return t;
}

Target cls(std::vector<int> y, int c) {
  Target t;
  t.task = {c == 2 ? TaskKind::binary : TaskKind::multiclass, c};
  t.cls = std::move(y);
  return t;
}

}  // namespace

TEST_CASE("learner specs") {
  CHECK(LearnerSpec::knn().label() == "knn");
  CHECK(LearnerSpec::knn(5, std::nullopt).label() == "knn-k5-fall");
  CHECK(LearnerSpec::featureless().label() == "featureless");
  CHECK(learner_kind_from_string("kNN") == LearnerKind::knn);
  LearnerSpec bad = LearnerSpec::knn(0);
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("featureless") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 2);
  auto m = fit_featureless(reg({1, 2, 3}));
  const auto p = m->predict(Eigen::MatrixXd::Random(5, 2));
  CHECK(p.rows() == 5);
  CHECK((p.array() == 2.0).all());

  auto b = fit_featureless(cls({1, 1, 1, 1, 1, 1, 1, 0, 0, 0}, 2));
  const auto pb = b->predict(x);
  CHECK(pb(0, 1) == doctest::Approx(0.7));
  CHECK(pb(2, 0) == doctest::Approx(0.3));

  auto u = fit_featureless(cls({0, 1, 2, 3}, 4));
  CHECK((u->predict(x).array() == 0.25).all());
}

TEST_CASE("information gain") {
  std::mt19937_64 rng(3);
  SUBCASE("perfect feature equals the target entropy") {
    std::vector<int> y;
    Eigen::MatrixXd x(100, 2);
    for (int i = 0; i < 100; ++i) {
      y.push_back(i % 3 == 0);
      x(i, 0) = static_cast<double>(rng() % 1000);
      x(i, 1) = y.back();
    }
    const auto ig = information_gain(x, cls(y, 2));
    const double p = 34.0 / 100.0;
    const double h = -(p * std::log(p) + (1 - p) * std::log(1 - p));
    CHECK(ig[1] == doctest::Approx(h).epsilon(1e-12));
    CHECK(ig[1] > ig[0]);
    CHECK(info_gain_filter(x, cls(y, 2), 1) == std::vector<std::size_t>{1});
  }
  SUBCASE("independent feature is near zero") {
    std::normal_distribution<double> g(0, 1);
    std::vector<int> y;
    Eigen::MatrixXd x(2000, 1);
    for (int i = 0; i < 2000; ++i) {
      x(i, 0) = g(rng);
      y.push_back(static_cast<int>(rng() % 2));
    }
    CHECK(information_gain(x, cls(y, 2))[0] < 0.02);
  }
  SUBCASE("top above column count keeps everything") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(30, 10);
    std::vector<double> y(30);
    std::iota(y.begin(), y.end(), 0.0);
    const auto keep = info_gain_filter(x, reg(y), 25);
    CHECK(keep.size() == 10);
  }
  SUBCASE("equal-frequency bins") {
    const auto b = equal_frequency_bins({5, 1, 1, 1, 3, 4, 2, 8, 9, 7}, 5);
    CHECK(b[1] == b[2]);
    CHECK(b[2] == b[3]);
    CHECK(*std::max_element(b.begin(), b.end()) <= 4);
    CHECK(b[8] >= b[7]);
  }
}

TEST_CASE("knn") {
  // Six 2-D points; the oracle standardizes with the sample sd and brute-forces distances.
  Eigen::MatrixXd x(6, 2);
  x << 0, 0, 1, 0, 0, 2, 3, 3, 4, 1, 1, 1;
  const std::vector<double> y{1, 2, 3, 4, 5, 6};
  const auto model = KnnModel::fit(x, reg(y), 3);
  const Eigen::RowVectorXd mu = x.colwise().mean();
  Eigen::RowVectorXd sd(2);
  for (int j = 0; j < 2; ++j) sd(j) = 1.0 / std::sqrt((x.col(j).array() - mu(j)).square().sum() / 5.0);
  for (const auto& q : std::vector<Eigen::Vector2d>{{0.5, 0.5}, {3, 2}, {0, 1}, {2, 2}}) {
    std::vector<std::pair<double, std::size_t>> d;
    for (int i = 0; i < 6; ++i) {
      const Eigen::RowVectorXd diff = ((x.row(i) - q.transpose()).array() * sd.array()).matrix();
      d.emplace_back(diff.squaredNorm(), static_cast<std::size_t>(i));
    }
    std::sort(d.begin(), d.end());
    const auto nb = model->neighbours(q);
    REQUIRE(nb.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(nb[k] == d[k].second);
    const double expect = (y[d[0].second] + y[d[1].second] + y[d[2].second]) / 3.0;
    Eigen::MatrixXd qm(1, 2);
    qm.row(0) = q.transpose();
    CHECK(model->predict(qm)(0, 0) == doctest::Approx(expect));
  }
  SUBCASE("k=1 recovers training targets") {
    const auto one = KnnModel::fit(x, reg(y), 1);
    const auto p = one->predict(x);
    for (int i = 0; i < 6; ++i) CHECK(p(i, 0) == y[static_cast<std::size_t>(i)]);
  }
  SUBCASE("k=n equals featureless") {
    const std::vector<int> c{0, 1, 1, 2, 2, 2};
    const auto all = KnnModel::fit(x, cls(c, 3), 6);
    const auto fl = fit_featureless(cls(c, 3));
    const Eigen::MatrixXd q = Eigen::MatrixXd::Random(4, 2);
    CHECK((all->predict(q) - fl->predict(q)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("distance ties go to the earlier row") {
    Eigen::MatrixXd t(3, 1);
    t << -1, 1, 5;
    const auto m = KnnModel::fit(t, reg({10, 20, 30}), 1);
    CHECK(m->neighbours(Eigen::VectorXd::Zero(1)) == std::vector<std::size_t>{0});
  }
}

TEST_CASE("ridge") {
  SUBCASE("near-OLS slope") {
    Eigen::MatrixXd x(20, 1);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
      x(i, 0) = i;
      y(i) = 2.0 * i;
    }
    const auto b = ridge_regression(x, y, 1e-6);
    CHECK(std::abs(b(1) - 2.0) < 1e-3);
  }
  SUBCASE("normal equations oracle") {
    Eigen::MatrixXd x(5, 2);
    x << 1, 2, 0, 1, 3, -1, 2, 2, -1, 0;
    Eigen::VectorXd y(5);
    y << 1, 0, 4, 3, -2;
    const auto b = ridge_regression(x, y, 1.0);
    Eigen::MatrixXd a(5, 3);
    a << Eigen::VectorXd::Ones(5), x;
    Eigen::MatrixXd pen = Eigen::MatrixXd::Identity(3, 3);
    pen(0, 0) = 0.0;
    const Eigen::VectorXd oracle = (a.transpose() * a + pen).fullPivLu().solve(a.transpose() * y);
    CHECK((b - oracle).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("huge penalty gives intercept-only") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(30, 3);
    const Eigen::VectorXd y = Eigen::VectorXd::Random(30);
    const auto b = ridge_regression(x, y, 1e14);
    CHECK(b.tail(3).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(b(0) == doctest::Approx(y.mean()).epsilon(1e-8));
  }
  SUBCASE("slope norm decreases in lambda") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(40, 4);
    const Eigen::VectorXd y = x * Eigen::Vector4d(1, -2, 0.5, 3) + 0.1 * Eigen::VectorXd::Random(40);
    double prev = std::numeric_limits<double>::infinity();
    for (double lam : {1e-3, 1e-1, 1.0, 10.0, 100.0}) {
      const double nrm = ridge_regression(x, y, lam).tail(4).norm();
      CHECK(nrm <= prev);
      prev = nrm;
    }
    double prevl = std::numeric_limits<double>::infinity();
    Eigen::VectorXd y01(40);
    for (int i = 0; i < 40; ++i) y01(i) = y(i) > 0;
    for (double lam : {1e-2, 1.0, 10.0, 100.0}) {
      const double nrm = ridge_logistic(x, y01, lam).tail(4).norm();
      CHECK(nrm <= prevl + 1e-12);
      prevl = nrm;
    }
  }
  SUBCASE("class scores are probabilities") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(90, 3);
    std::vector<int> c(90);
    for (int i = 0; i < 90; ++i) c[static_cast<std::size_t>(i)] = x(i, 0) > 0.3 ? 2 : (x(i, 1) > 0 ? 1 : 0);
    auto spec = LearnerSpec::ridge();
    spec.seed = 4;
    const auto m = fit_learner(spec, x, cls(c, 3));
    const auto p = m->predict(Eigen::MatrixXd::Random(25, 3));
    CHECK(p.cols() == 3);
    CHECK((p.array() >= 0).all());
    CHECK(((p.rowwise().sum().array() - 1.0).abs() < 1e-12).all());
  }
}
