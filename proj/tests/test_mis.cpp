#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "cpaft/errors.hpp"
#include "cpaft/mis.hpp"
#include "oracles.hpp"

using namespace cpaft;
using namespace cpaft::mis;
using Ids = std::vector<std::uint64_t>;
using Edges = std::vector<std::pair<std::uint64_t, std::uint64_t>>;

namespace {

std::map<std::uint64_t, Ids> adjacency(const Ids& ids, const Edges& edges) {
  std::map<std::uint64_t, Ids> adj;
  for (auto id : ids) adj[id];
  for (auto [a, b] : edges) adj[a].push_back(b), adj[b].push_back(a);
  return adj;
}

// Contiguous split of the ID-ordered vertices into n parts.
std::vector<int> contiguous_owner(std::size_t size, int n, std::mt19937_64& rng) {
  std::vector<std::size_t> cuts;
  for (int k = 0; k < n - 1; ++k) cuts.push_back(size ? rng() % (size + 1) : 0);
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> owner(size);
  for (std::size_t i = 0; i < size; ++i)
    owner[i] = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), i) - cuts.begin());
  return owner;
}

}  // namespace

TEST_SUITE("mis") {
  TEST_CASE("graph construction") {
    const Edges e{{1, 2}};
    const ConflictGraph g({3, 1, 2}, e);
    CHECK(g.ids() == Ids{1, 2, 3});
    CHECK(g.adjacent(1, 2));
    CHECK(g.adjacent(2, 1));
    CHECK_FALSE(g.adjacent(1, 3));
    CHECK(g.edge_count() == 1);
    const Edges dup_self{{1, 1}};
    CHECK_THROWS_AS(ConflictGraph({1, 2}, dup_self), PreconditionError);
    CHECK_THROWS_AS(ConflictGraph({1, 1}, Edges{}), PreconditionError);
    const Edges unknown{{1, 7}};
    CHECK_THROWS_AS(ConflictGraph({1, 2}, unknown), PreconditionError);
  }

  TEST_CASE("conflict predicate examples") {
    const double h = 0.1;
    const Triangle far1{{Point{0, 0}, Point{0.1, 0}, Point{0.05, 0.08}}};
    const Triangle far2{{Point{0.3, 0}, Point{0.4, 0}, Point{0.35, 0.08}}};
    CHECK_FALSE(in_conflict({1, {0.0, 0.0}, h, far1}, {2, {3 * h, 0.0}, h, far2}, ConflictRule::Proximity, 1e-12));
    CHECK(in_conflict({1, {0.5, 0.5}, h, far1}, {2, {0.5, 0.5}, h, far2}, ConflictRule::Proximity, 1e-12));
    const std::vector<ConflictItem> dup{{1, {0, 0}, h, far1}, {1, {1, 1}, h, far2}};
    CHECK_THROWS_AS(build_conflict_graph(dup, ConflictRule::Proximity, 1e-12), PreconditionError);
  }

  TEST_CASE("sweep-and-prune construction equals all pairs") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0), hh(0.02, 0.1);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<ConflictItem> items;
      const int n = trial < 50 ? 12 : 60;
      for (int k = 0; k < n; ++k) {
        const Point p{u(rng), u(rng)};
        const double h = hh(rng);
        const Triangle t{{Point{p.x - h, p.y - h}, Point{p.x + h, p.y - h}, p}};
        items.push_back({std::uint64_t(1000 - 7 * k), p, h, t});
      }
      for (auto rule : {ConflictRule::Proximity, ConflictRule::ProximityAndOverlap}) {
        const auto g = build_conflict_graph(items, rule, 1e-12);
        for (std::size_t i = 0; i < items.size(); ++i)
          for (std::size_t j = i + 1; j < items.size(); ++j) {
            const bool oracle_edge =
                distance(items[i].p, items[j].p) < items[i].h + items[j].h ||
                (rule == ConflictRule::ProximityAndOverlap && triangles_interfere(items[i].tri, items[j].tri, 1e-12));
            CHECK(g.adjacent(items[i].id, items[j].id) == oracle_edge);
          }
      }
    }
  }

  TEST_CASE("cpmis examples") {
    const auto run = [](Ids ids, Edges e, int n = 1) {
      const ConflictGraph g(std::move(ids), e);
      std::vector<int> owner(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) owner[i] = static_cast<int>(i % n);
      return cpmis_run(g, owner, n, kUncapped);
    };
    auto r = run({5}, {});
    CHECK(r.accepted == Ids{5});
    CHECK(r.discarded.empty());
    CHECK(r.pending.empty());
    CHECK(r.iterations == 1);

    r = run({0, 1, 2}, {{0, 1}, {1, 2}}, 2);
    CHECK(r.accepted == Ids{0, 2});
    CHECK(r.discarded == Ids{1});

    r = run({0, 1, 2, 3, 4, 5}, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}}, 3);
    CHECK(r.accepted == Ids{0});
    CHECK(r.discarded == Ids{1, 2, 3, 4, 5});
  }

  TEST_CASE("sequential oracle examples") {
    CHECK(sequential_mis_oracle(ConflictGraph({}, Edges{})).empty());
    CHECK(sequential_mis_oracle(ConflictGraph({0, 1, 2}, Edges{{0, 1}, {1, 2}, {0, 2}})) == Ids{0});
    CHECK(sequential_mis_oracle(ConflictGraph({0, 1, 2, 3, 4}, Edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}})) ==
          Ids{0, 2});
  }

  TEST_CASE("random graphs: every partition agrees with the greedy oracle") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 150; ++trial) {
      const std::size_t n = 1 + rng() % 24;
      const double density = 0.1 + 0.4 * double(rng() % 1000) / 1000.0;
      Ids ids;
      for (std::size_t k = 0; k < n; ++k) ids.push_back(3 * k + rng() % 3);
      Edges edges;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (double(rng() % 1000) / 1000.0 < density) edges.emplace_back(ids[i], ids[j]);
      const ConflictGraph g(ids, edges);
      const auto expected = oracle::greedy_mis(adjacency(ids, edges));
      CHECK(sequential_mis_oracle(g) == expected);
      for (int parts = 1; parts <= 4; ++parts) {
        const auto owner = contiguous_owner(g.size(), parts, rng);
        const auto r = cpmis_run(g, owner, parts, kUncapped);
        CHECK(r.complete);
        CHECK(r.accepted == expected);
        CHECK(is_independent(g, r.accepted));
        CHECK(is_maximal(g, r.accepted));
        CHECK(r.accepted.front() == g.id(0));
        std::size_t per_rank = 0;
        for (const auto& a : r.accepted_per_rank) per_rank += a.size();
        CHECK(per_rank == r.accepted.size());
        CHECK(r.accepted.size() + r.discarded.size() == g.size());
      }
    }
  }

  TEST_CASE("capped rounds still return an independent set and progress each round") {
    std::mt19937_64 rng(23);
    Ids ids;
    Edges edges;
    for (std::uint64_t k = 0; k < 40; ++k) ids.push_back(k);
    for (std::uint64_t k = 0; k + 1 < 40; ++k) edges.emplace_back(k + 1, k);  // path: one resolution per round
    const ConflictGraph g(ids, edges);
    std::vector<int> owner(40);
    for (int k = 0; k < 40; ++k) owner[k] = k / 10;
    std::size_t last_pending = g.size();
    for (int cap = 1; cap <= 4; ++cap) {
      const auto r = cpmis_run(g, owner, 4, cap);
      CHECK(r.iterations == cap);
      CHECK(is_independent(g, r.accepted));
      CHECK(r.pending.size() < last_pending);
      last_pending = r.pending.size();
    }
    (void)rng;
  }

  TEST_CASE("thread count does not change the result") {
    std::mt19937_64 rng(24);
    Ids ids;
    Edges edges;
    for (std::uint64_t k = 0; k < 200; ++k) ids.push_back(k);
    for (int e = 0; e < 600; ++e) {
      const auto a = rng() % 200, b = rng() % 200;
      if (a != b) edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    const ConflictGraph g(ids, edges);
    const auto owner = contiguous_owner(g.size(), 4, rng);
    const auto one = cpmis_run(g, owner, 4, kUncapped, 1);
    const auto four = cpmis_run(g, owner, 4, kUncapped, 4);
    CHECK(one.accepted == four.accepted);
    CHECK(one.accepted_per_rank == four.accepted_per_rank);
  }

  TEST_CASE("missing ghost is an overlap violation") {
    const ConflictGraph g({0, 1}, Edges{{0, 1}});
    auto views = split_graph(g, std::vector<int>{0, 1}, 2);
    views[0].ghosts.clear();
    CHECK_THROWS_AS(cpmis_run(views, kUncapped), OverlapViolation);
  }
}
