#include "catenc/consensus.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "catenc/error.hpp"
#include "catenc/random.hpp"

namespace catenc {
namespace {

void check_labels(const Relation& a, const Relation& b) {
  if (a.labels != b.labels) throw InvalidArgument("relations are over different condition sets");
}

/// counts[i][j] = number of relations in which i beats j.
struct PairCounts {
  std::size_t m = 0;
  std::size_t n_relations = 0;
  std::vector<std::size_t> counts;

  explicit PairCounts(const std::vector<Relation>& relations) {
    if (relations.empty()) throw InvalidArgument("consensus needs at least one relation");
    m = relations.front().size();
    n_relations = relations.size();
    counts.assign(m * m, 0);
    for (const auto& r : relations) {
      check_labels(relations.front(), r);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          if (i != j && r.beats(i, j)) ++counts[i * m + j];
    }
  }

  std::size_t cost(const std::vector<int>& tier) const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        const auto c = counts[i * m + j];
        total += tier[i] < tier[j] ? n_relations - c : c;
      }
    return total;
  }
};

bool better(std::size_t cost, const std::vector<int>& tier, std::size_t best_cost, const std::vector<int>& best) {
  return cost < best_cost || (cost == best_cost && tier < best);
}

/// Steepest descent; candidate moves place one item into an existing tier or
/// a new tier at any gap. Returns the local optimum (normalized) and its cost.
std::pair<std::vector<int>, std::size_t> descend(const PairCounts& pc, std::vector<int> tier) {
  tier = WeakOrder::normalized(std::move(tier)).tier;
  auto cost = pc.cost(tier);
  const auto m = pc.m;
  while (true) {
    std::vector<int> best = tier;
    auto best_cost = cost;
    const int n_tiers = *std::max_element(tier.begin(), tier.end());
    for (std::size_t i = 0; i < m; ++i) {
      // Tier positions on a doubled scale: even values 2..2T are existing
      // tiers, odd values 1..2T+1 are new tiers in the gaps.
      for (int pos = 1; pos <= 2 * n_tiers + 1; ++pos) {
        std::vector<int> cand(m);
        for (std::size_t k = 0; k < m; ++k) cand[k] = 2 * tier[k];
        cand[i] = pos;
        auto norm = WeakOrder::normalized(std::move(cand)).tier;
        if (norm == tier) continue;
        const auto c = pc.cost(norm);
        if (better(c, norm, best_cost, best)) {
          best_cost = c;
          best = std::move(norm);
        }
      }
    }
    // Adjacent-tier merges.
    for (int t = 1; t < n_tiers; ++t) {
      std::vector<int> cand = tier;
      for (auto& v : cand)
        if (v > t) --v;
      const auto c = pc.cost(cand);
      if (better(c, cand, best_cost, best)) {
        best_cost = c;
        best = std::move(cand);
      }
    }
    if (best_cost >= cost) return {tier, cost};
    tier = std::move(best);
    cost = best_cost;
  }
}

}  // namespace

std::size_t symdiff_distance(const Relation& a, const Relation& b) {
  check_labels(a, b);
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (i != j && a.beats(i, j) != b.beats(i, j)) ++d;
  return d;
}

int WeakOrder::n_tiers() const { return tier.empty() ? 0 : *std::max_element(tier.begin(), tier.end()); }

Relation WeakOrder::to_relation(std::vector<std::string> labels) const {
  if (labels.size() != tier.size()) throw InvalidArgument("label count differs from weak order size");
  auto r = Relation::empty(std::move(labels));
  for (std::size_t i = 0; i < tier.size(); ++i)
    for (std::size_t j = 0; j < tier.size(); ++j) r.set(i, j, beats(i, j));
  return r;
}

WeakOrder WeakOrder::normalized(std::vector<int> tier) {
  std::set<int> values(tier.begin(), tier.end());
  std::vector<int> sorted(values.begin(), values.end());
  for (auto& v : tier) v = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin()) + 1;
  return WeakOrder{std::move(tier)};
}

void WeakOrder::validate() const {
  const int t = n_tiers();
  std::vector<bool> seen(static_cast<std::size_t>(t) + 1, false);
  for (int v : tier) {
    if (v < 1) throw InvalidArgument("weak order tiers start at 1");
    seen[static_cast<std::size_t>(v)] = true;
  }
  for (int k = 1; k <= t; ++k)
    if (!seen[static_cast<std::size_t>(k)]) throw InvalidArgument("weak order tiers are not contiguous");
}

std::size_t total_distance(const std::vector<Relation>& relations, const WeakOrder& order) {
  if (relations.empty()) return 0;
  if (order.size() != relations.front().size()) throw InvalidArgument("weak order size differs from relations");
  return PairCounts(relations).cost(order.tier);
}

Consensus consensus_exhaustive(const std::vector<Relation>& relations) {
  const PairCounts pc(relations);
  const auto m = pc.m;
  if (m > kMaxExhaustive) throw InvalidArgument("exhaustive consensus supports at most 6 conditions");
  Consensus out;
  out.exact = true;
  if (m == 0) return out;
  // Lexicographic enumeration of [1..m]^m keeping contiguous vectors, so the
  // first optimum found is the lexicographically smallest.
  std::vector<int> tier(m, 1);
  std::size_t best_cost = std::numeric_limits<std::size_t>::max();
  std::vector<int> used(m + 2);
  while (true) {
    std::fill(used.begin(), used.end(), 0);
    int top = 0;
    for (int v : tier) {
      used[static_cast<std::size_t>(v)] = 1;
      top = std::max(top, v);
    }
    bool contiguous = true;
    for (int k = 1; k <= top; ++k) contiguous = contiguous && used[static_cast<std::size_t>(k)];
    if (contiguous) {
      const auto c = pc.cost(tier);
      if (c < best_cost) {
        best_cost = c;
        out.order.tier = tier;
      }
    }
    std::size_t pos = m;
    while (pos > 0 && tier[pos - 1] == static_cast<int>(m)) {
      tier[pos - 1] = 1;
      --pos;
    }
    if (pos == 0) break;
    ++tier[pos - 1];
  }
  out.total_distance = best_cost;
  return out;
}

Consensus consensus_local_search(const std::vector<Relation>& relations, int restarts, std::uint64_t seed) {
  const PairCounts pc(relations);
  const auto m = pc.m;
  Consensus out;
  if (m == 0) return out;
  if (restarts < 1) throw InvalidArgument("local search needs at least one restart");
  std::vector<std::vector<int>> starts;
  starts.emplace_back(m, 1);
  // Net-wins start: tiers ordered by (wins - losses) across relations.
  std::vector<int> net(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) net[i] += static_cast<int>(pc.counts[i * m + j]) - static_cast<int>(pc.counts[j * m + i]);
  std::vector<int> copeland(m);
  for (std::size_t i = 0; i < m; ++i) copeland[i] = -net[i];
  starts.push_back(std::move(copeland));
  std::mt19937_64 rng(seed);
  while (starts.size() < static_cast<std::size_t>(restarts)) {
    std::vector<int> t(m);
    for (auto& v : t) v = static_cast<int>(uniform_below(rng, m)) + 1;
    starts.push_back(std::move(t));
  }
  starts.resize(static_cast<std::size_t>(restarts));
  std::size_t best_cost = std::numeric_limits<std::size_t>::max();
  std::vector<int> best;
  for (auto& s : starts) {
    auto [tier, cost] = descend(pc, std::move(s));
    if (better(cost, tier, best_cost, best)) {
      best_cost = cost;
      best = std::move(tier);
    }
  }
  out.order.tier = std::move(best);
  out.total_distance = best_cost;
  out.exact = false;
  return out;
}

Consensus consensus_weak_order(const std::vector<Relation>& relations, std::uint64_t seed) {
  if (relations.empty()) throw InvalidArgument("consensus needs at least one relation");
  if (relations.front().size() <= kMaxExhaustive) return consensus_exhaustive(relations);
  return consensus_local_search(relations, 50, seed);
}

Dendrogram complete_linkage(const std::vector<std::vector<double>>& distance) {
  const auto n = distance.size();
  if (n < 2) throw InvalidArgument("clustering needs at least two items");
  for (const auto& row : distance)
    if (row.size() != n) throw InvalidArgument("distance matrix is not square");
  struct Cluster {
    std::size_t id;
    std::size_t min_leaf;
    std::vector<std::size_t> leaves;
  };
  std::vector<Cluster> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({i, i, {i}});
  Dendrogram out;
  out.n_leaves = n;
  auto linkage = [&](const Cluster& a, const Cluster& b) {
    double d = 0.0;
    for (auto i : a.leaves)
      for (auto j : b.leaves) d = std::max(d, distance[i][j]);
    return d;
  };
  while (active.size() > 1) {
    std::size_t best_a = 0, best_b = 1;
    double best_d = std::numeric_limits<double>::infinity();
    // `active` stays sorted by min_leaf, so scanning in order and keeping the
    // first strict minimum yields the smallest-leaf tie-break.
    for (std::size_t a = 0; a < active.size(); ++a)
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double d = linkage(active[a], active[b]);
        if (d < best_d) {
          best_d = d;
          best_a = a;
          best_b = b;
        }
      }
    Cluster merged{n + out.merges.size(), active[best_a].min_leaf, active[best_a].leaves};
    merged.leaves.insert(merged.leaves.end(), active[best_b].leaves.begin(), active[best_b].leaves.end());
    out.merges.push_back({active[best_a].id, active[best_b].id, best_d, merged.leaves.size()});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    active[best_a] = std::move(merged);
  }
  return out;
}

Dendrogram complete_linkage(const std::vector<Relation>& relations) {
  std::vector<std::vector<double>> d(relations.size(), std::vector<double>(relations.size(), 0.0));
  for (std::size_t i = 0; i < relations.size(); ++i)
    for (std::size_t j = i + 1; j < relations.size(); ++j)
      d[i][j] = d[j][i] = static_cast<double>(symdiff_distance(relations[i], relations[j]));
  return complete_linkage(d);
}

}  // namespace catenc
