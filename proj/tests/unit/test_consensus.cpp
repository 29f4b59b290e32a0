#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "catenc/consensus.hpp"

using namespace catenc;

namespace {

std::vector<std::string> names(std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

Relation random_relation(std::size_t m, std::mt19937_64& rng) {
  auto r = Relation::empty(names(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto u = rng() % 3;
      if (u == 1) r.set(i, j, true);
      if (u == 2) r.set(j, i, true);
    }
  return r;
}

Relation strict(std::vector<int> tier) { return WeakOrder{std::move(tier)}.to_relation(names(3)); }

}  // namespace

TEST_CASE("symdiff distance") {
  const auto e = Relation::empty(names(3));
  const auto s = strict({1, 2, 3});
  CHECK(symdiff_distance(s, s) == 0);
  CHECK(symdiff_distance(e, s) == 3);
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t m = 2 + rng() % 5;
    const auto a = random_relation(m, rng), b = random_relation(m, rng), c = random_relation(m, rng);
    CHECK(symdiff_distance(a, b) == symdiff_distance(b, a));
    CHECK(symdiff_distance(a, c) <= symdiff_distance(a, b) + symdiff_distance(b, c));
    CHECK((symdiff_distance(a, b) == 0) == (a.dominance == b.dominance));
  }
}

TEST_CASE("weak orders") {
  CHECK(WeakOrder::normalized({5, 2, 5, 9}).tier == std::vector<int>{2, 1, 2, 3});
  CHECK_THROWS(WeakOrder{{1, 3}}.validate());
  CHECK(oracle::all_weak_orders(3).size() == 13);
  CHECK(oracle::all_weak_orders(6).size() == 4683);
}

TEST_CASE("consensus") {
  SUBCASE("identical strict orders") {
    const std::vector<Relation> rels(3, strict({2, 1, 3}));
    const auto c = consensus_weak_order(rels);
    CHECK(c.order.tier == std::vector<int>{2, 1, 3});
    CHECK(c.total_distance == 0);
    CHECK(c.exact);
  }
  SUBCASE("majority order") {
    const std::vector<Relation> rels{strict({1, 2, 3}), strict({1, 2, 3}), strict({3, 2, 1})};
    const auto c = consensus_exhaustive(rels);
    CHECK(c.order.tier == std::vector<int>{1, 2, 3});
    CHECK(c.total_distance == 6);
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (const auto& t : oracle::all_weak_orders(3)) best = std::min(best, total_distance(rels, WeakOrder{t}));
    CHECK(best == 6);
  }
  SUBCASE("dominant condition sits alone in tier 1") {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 30; ++rep) {
      const std::size_t m = 3 + rng() % 3;
      std::vector<Relation> rels;
      for (int b = 0; b < 4; ++b) {
        auto r = random_relation(m, rng);
        for (std::size_t j = 1; j < m; ++j) {
          r.set(0, j, true);
          r.set(j, 0, false);
        }
        rels.push_back(r);
      }
      const auto c = consensus_exhaustive(rels);
      for (const auto& t : oracle::all_weak_orders(static_cast<int>(m))) {
        if (total_distance(rels, WeakOrder{t}) != c.total_distance) continue;
        CHECK(t[0] == 1);
        CHECK(std::count(t.begin(), t.end(), 1) == 1);
      }
    }
  }
  SUBCASE("exhaustive is optimal and the local search matches it") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 30; ++rep) {
      const std::size_t m = 2 + rng() % 4;
      std::vector<Relation> rels;
      for (int b = 0; b < 5; ++b) rels.push_back(random_relation(m, rng));
      const auto ex = consensus_exhaustive(rels);
      std::size_t best = std::numeric_limits<std::size_t>::max();
      std::vector<int> first;
      for (const auto& t : oracle::all_weak_orders(static_cast<int>(m))) {
        const auto d = total_distance(rels, WeakOrder{t});
        if (d < best) {
          best = d;
          first = t;
        }
      }
      CHECK(ex.total_distance == best);
      CHECK(ex.order.tier == first);
      CHECK(consensus_local_search(rels, 50, static_cast<std::uint64_t>(rep)).total_distance == best);
    }
  }
  SUBCASE("large m uses local search") {
    std::mt19937_64 rng(9);
    std::vector<Relation> rels;
    for (int b = 0; b < 3; ++b) rels.push_back(random_relation(9, rng));
    const auto c = consensus_weak_order(rels, 1);
    CHECK(!c.exact);
    c.order.validate();
    CHECK(c.total_distance == total_distance(rels, c.order));
  }
}

TEST_CASE("complete linkage") {
  SUBCASE("identical relations merge first at height zero") {
    const auto a = Relation::empty(names(4));
    auto b = Relation::empty(names(4));
    b.set(0, 1, true);
    const auto d = complete_linkage(std::vector<Relation>{b, a, a});
    REQUIRE(d.merges.size() == 2);
    CHECK(d.merges[0].a == 1);
    CHECK(d.merges[0].b == 2);
    CHECK(d.merges[0].height == 0.0);
  }
  SUBCASE("block structure") {
    const auto r0 = strict({1, 2, 3});
    auto r1 = r0;
    r1.set(1, 2, false);
    const auto r2 = strict({3, 2, 1});
    auto r3 = r2;
    r3.set(2, 1, false);
    const auto d = complete_linkage(std::vector<Relation>{r0, r2, r1, r3});
    REQUIRE(d.merges.size() == 3);
    // First two merges pair {0,2} and {1,3}; the last joins the blocks.
    CHECK(d.merges[0].a == 0);
    CHECK(d.merges[0].b == 2);
    CHECK(d.merges[1].a == 1);
    CHECK(d.merges[1].b == 3);
    CHECK(d.merges[2].size == 4);
    CHECK(d.merges[2].height == 6.0);
  }
  SUBCASE("heights are non-decreasing and ids follow the merge count") {
    std::mt19937_64 rng(3);
    std::vector<Relation> rels;
    for (int b = 0; b < 7; ++b) rels.push_back(random_relation(5, rng));
    const auto d = complete_linkage(rels);
    CHECK(d.n_leaves == 7);
    for (std::size_t k = 1; k < d.merges.size(); ++k) CHECK(d.merges[k].height >= d.merges[k - 1].height);
    for (std::size_t k = 0; k < d.merges.size(); ++k) {
      CHECK(d.merges[k].a < 7 + k);
      CHECK(d.merges[k].b < 7 + k);
    }
  }
}
