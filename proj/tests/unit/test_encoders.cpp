#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "../support/builders.hpp"
#include "catenc/encoders.hpp"
#include "catenc/error.hpp"
#include "catenc/preprocess.hpp"

using namespace catenc;
using testkit::cat;
using testkit::num;

namespace {

std::vector<std::string> levels_n(int n, int rows_each = 1) {
  std::vector<std::string> v;
  for (int r = 0; r < rows_each; ++r)
    for (int l = 0; l < n; ++l) v.push_back("v" + std::to_string(l));
  return v;
}

std::vector<std::string> repeat(std::initializer_list<std::pair<const char*, int>> spec) {
  std::vector<std::string> v;
  for (auto [label, n] : spec)
    for (int i = 0; i < n; ++i) v.push_back(label);
  return v;
}

}  // namespace

TEST_CASE("routing: glmm encodes high-cardinality columns, one-hot for the rest") {
  auto big = levels_n(300);
  auto small = levels_n(8);
  small.resize(300, "v0");
  std::vector<double> y(300, 0.0);
  y[0] = 1;
  auto t = testkit::table({cat("big", big), cat("small", small), num("y", y)});
  EncoderSpec spec;
  spec.strategy = Strategy::glmm;
  spec.hct = 25;
  const auto plan = apply_hct_routing(t, spec);
  CHECK(plan.route_of("big") == Route::encoded);
  CHECK(plan.route_of("small") == Route::one_hot);
}

TEST_CASE("routing: remove deletes columns above the threshold") {
  auto t = testkit::table({cat("c", levels_n(14)), num("y", std::vector<double>(14, 1.0))});
  EncoderSpec spec;
  spec.strategy = Strategy::remove;
  spec.hct = 10;
  CHECK(apply_hct_routing(t, spec).route_of("c") == Route::removed);
  spec.hct = 14;
  CHECK(apply_hct_routing(t, spec).route_of("c") == Route::one_hot);
}

TEST_CASE("spec validation and labels") {
  EncoderSpec s;
  s.hct = 1;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.hct = 10;
  s.glmm_folds = 1;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.glmm_folds = 5;
  s.strategy = Strategy::glmm;
  CHECK(s.condition() == "glmm-5CV");
  s.glmm_folds = 0;
  CHECK(s.condition() == "glmm-noCV");
  CHECK(strategy_from_string("one-hot") == Strategy::one_hot);
  CHECK_THROWS_AS(strategy_from_string("bogus"), InvalidArgument);
}

TEST_CASE("integer encoder") {
  const auto col = cat("c", {"c", "a", "b", "c"});
  const auto enc = IntegerEncoder::fit(col);
  CHECK(enc->code_of("c") == 1.0);
  CHECK(enc->code_of("a") == 2.0);
  CHECK(enc->code_of("b") == 3.0);
  const auto out = enc->transform(cat("c", {"z"}));
  REQUIRE(out.size() == 1);
  CHECK(out[0].is_missing(0));
  const auto filled = impute_stage2(testkit::table({out[0], num("y", {1})}), enc->fallbacks());
  CHECK(filled.column(0).values[0] == 1.0);  // mode level c
  SUBCASE("bijection with 1..L, also when shuffled") {
    const auto many = cat("m", levels_n(37, 2));
    for (bool shuffle : {false, true}) {
      const auto e = IntegerEncoder::fit(many, shuffle, 99);
      std::set<double> codes;
      for (const auto& l : many.levels) codes.insert(e->code_of(l));
      CHECK(codes.size() == 37);
      CHECK(*codes.begin() == 1.0);
      CHECK(*codes.rbegin() == 37.0);
    }
  }
}

TEST_CASE("frequency encoder") {
  const auto enc = FrequencyEncoder::fit(cat("c", {"a", "a", "b"}));
  const auto out = enc->transform(cat("c", {"a", "b", "c"}));
  CHECK(out[0].values == std::vector<double>{2, 1, 1});
  const auto uniform = cat("u", levels_n(4, 25));
  CHECK(FrequencyEncoder::fit(uniform)->transform(uniform)[0].values == std::vector<double>(100, 25.0));
  SUBCASE("conservation: distinct-level values sum to N") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<std::string> v(1 + rng() % 60);
      for (auto& s : v) s = std::to_string(rng() % 9);
      const auto c = cat("c", v);
      const auto e = FrequencyEncoder::fit(c);
      const auto lv = cat("c", c.levels);
      const auto vals = e->transform(lv)[0].values;
      double sum = 0;
      for (double x : vals) sum += x;
      CHECK(sum == static_cast<double>(v.size()));
    }
  }
}

TEST_CASE("indicator encoder with collapsing") {
  const auto col = cat("f", repeat({{"a", 5}, {"b", 3}, {"c", 1}, {"d", 1}}));
  SUBCASE("one-hot keeps hct-1 levels plus OTHER") {
    const auto enc = IndicatorEncoder::fit(col, IndicatorVariant::one_hot, 3);
    CHECK(enc->output_levels() == std::vector<std::string>{"a", "b", kOtherLevel});
    const auto out = enc->transform(cat("f", {"d"}));
    REQUIRE(out.size() == 3);
    CHECK(out[0].values[0] == 0.0);
    CHECK(out[1].values[0] == 0.0);
    CHECK(out[2].values[0] == 1.0);
    const auto unseen = enc->transform(cat("f", {"zz"}));
    for (const auto& c : unseen) CHECK(c.values[0] == 0.0);
  }
  SUBCASE("dummy drops the alphabetical first kept level") {
    const auto enc = IndicatorEncoder::fit(col, IndicatorVariant::dummy, 3);
    CHECK(enc->reference() == "a");
    CHECK(enc->output_levels() == std::vector<std::string>{"b", kOtherLevel});
    const auto out = enc->transform(cat("f", {"a"}));
    for (const auto& c : out) CHECK(c.values[0] == 0.0);
  }
  SUBCASE("no collapsing when levels fit") {
    const auto enc = IndicatorEncoder::fit(col, IndicatorVariant::one_hot, 10);
    CHECK_FALSE(enc->has_other());
    CHECK(enc->output_levels().size() == 4);
  }
  SUBCASE("reserved OTHER label is rejected") {
    CHECK_THROWS_AS(IndicatorEncoder::fit(cat("f", {"a", kOtherLevel}), IndicatorVariant::one_hot, 5), DataError);
  }
  SUBCASE("row sums and monotone kept counts") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 40; ++rep) {
      std::vector<std::string> v(5 + rng() % 80);
      for (auto& s : v) s = "l" + std::to_string(rng() % 15);
      const auto c = cat("c", v);
      std::size_t prev = 0;
      for (int hct = 2; hct <= 20; ++hct) {
        const auto oh = IndicatorEncoder::fit(c, IndicatorVariant::one_hot, hct);
        CHECK(oh->kept_levels().size() >= prev);
        prev = oh->kept_levels().size();
        const auto cols = oh->transform(c);
        const auto dm = IndicatorEncoder::fit(c, IndicatorVariant::dummy, hct)->transform(c);
        for (std::size_t i = 0; i < v.size(); ++i) {
          double s = 0, sd = 0;
          for (const auto& k : cols) s += k.values[i];
          for (const auto& k : dm) sd += k.values[i];
          CHECK(s == 1.0);
          CHECK((sd == 0.0 || sd == 1.0));
        }
      }
    }
  }
}

TEST_CASE("hash encoder") {
  SUBCASE("hash size 1 gives no columns") {
    const auto enc = HashEncoder::fit(cat("c", {"a", "b", "c"}), 1, 0);
    CHECK(enc->active_columns().empty());
    CHECK(enc->transform(cat("c", {"a"})).empty());
  }
  SUBCASE("deterministic and bounded width") {
    const auto col = cat("c", levels_n(100));
    const auto a = HashEncoder::fit(col, 25, 42);
    const auto b = HashEncoder::fit(col, 25, 42);
    CHECK(a->active_columns() == b->active_columns());
    CHECK(a->active_columns().size() <= 25);
    for (const auto& l : col.levels) {
      CHECK(a->column_of(l) == b->column_of(l));
      CHECK(a->column_of(l) >= 1);
      CHECK(a->column_of(l) <= 25);
    }
    CHECK(stable_hash("abc", 1) == stable_hash("abc", 1));
    CHECK(stable_hash("abc", 1) != stable_hash("abc", 2));
  }
  SUBCASE("unseen labels hash the same way") {
    const auto enc = HashEncoder::fit(cat("c", levels_n(50)), 10, 3);
    const auto out = enc->transform(cat("c", {"never-seen"}));
    double s = 0;
    for (const auto& c : out) s += c.values[0];
    CHECK(s <= 1.0);
  }
}

TEST_CASE("fitted encoder transform replays the training encoding") {
  std::mt19937_64 rng(11);
  std::vector<std::string> a(60), b(60);
  std::vector<double> y(60), z(60);
  for (std::size_t i = 0; i < 60; ++i) {
    a[i] = "a" + std::to_string(rng() % 30);
    b[i] = "b" + std::to_string(rng() % 4);
    y[i] = static_cast<double>(rng() % 100) / 10.0;
    z[i] = static_cast<double>(i);
  }
  auto t = testkit::table({cat("a", a), cat("b", b), num("z", z), num("y", y)});
  for (auto s : {Strategy::integer, Strategy::frequency, Strategy::one_hot, Strategy::dummy, Strategy::hash,
                 Strategy::leaf, Strategy::impact, Strategy::glmm, Strategy::remove}) {
    CAPTURE(to_string(s));
    EncoderSpec spec;
    spec.strategy = s;
    spec.hct = 10;
    const auto fit = fit_encoder(t, spec);
    const auto replay = fit.encoder.transform(t);
    REQUIRE(replay.n_columns() == fit.training_encoding.n_columns());
    for (std::size_t j = 0; j < replay.n_columns(); ++j) {
      CHECK(replay.column(j).name == fit.training_encoding.column(j).name);
      CHECK(replay.column(j).values == fit.training_encoding.column(j).values);
      CHECK(replay.column(j).codes == fit.training_encoding.column(j).codes);
    }
  }
  SUBCASE("numeric-only table is unchanged") {
    auto n = testkit::table({num("z", z), num("y", y)});
    EncoderSpec spec;
    spec.strategy = Strategy::integer;
    const auto fit = fit_encoder(n, spec);
    CHECK(fit.encoder.transform(n).column(0).values == z);
  }
  SUBCASE("schema mismatch") {
    EncoderSpec spec;
    const auto fit = fit_encoder(t, spec);
    auto other = testkit::table({cat("q", a), cat("b", b), num("z", z), num("y", y)});
    CHECK_THROWS_AS(fit.encoder.transform(other), DataError);
  }
}
