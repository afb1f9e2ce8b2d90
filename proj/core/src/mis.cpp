#include "cpaft/mis.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>

#include "cpaft/errors.hpp"
#include "cpaft/runtime.hpp"

namespace cpaft::mis {

ConflictGraph::ConflictGraph(std::vector<std::uint64_t> ids,
                             std::span<const std::pair<std::uint64_t, std::uint64_t>> edges)
    : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end())
    throw PreconditionError("conflict graph: duplicate vertex ID");
  adj_.resize(ids_.size());
  for (auto [a, b] : edges) {
    if (a == b) throw PreconditionError("conflict graph: self loop on ID " + std::to_string(a));
    const auto i = static_cast<std::uint32_t>(index_of(a));
    const auto j = static_cast<std::uint32_t>(index_of(b));
    adj_[i].push_back(j);
    adj_[j].push_back(i);
  }
  for (auto& a : adj_) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
}

std::size_t ConflictGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& a : adj_) n += a.size();
  return n / 2;
}

std::size_t ConflictGraph::index_of(std::uint64_t id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) throw PreconditionError("conflict graph: unknown ID " + std::to_string(id));
  return static_cast<std::size_t>(it - ids_.begin());
}

bool ConflictGraph::adjacent(std::uint64_t a, std::uint64_t b) const {
  const auto& n = adj_[index_of(a)];
  return std::binary_search(n.begin(), n.end(), static_cast<std::uint32_t>(index_of(b)));
}

bool in_conflict(const ConflictItem& a, const ConflictItem& b, ConflictRule rule, double tol) {
  if (distance(a.p, b.p) < a.h + b.h) return true;
  return rule == ConflictRule::ProximityAndOverlap && triangles_interfere(a.tri, b.tri, tol);
}

ConflictGraph build_conflict_graph(std::span<const ConflictItem> items, ConflictRule rule, double tol) {
  struct Box {
    double x0, y0, x1, y1;
  };
  std::vector<Box> boxes;
  boxes.reserve(items.size());
  for (const auto& it : items) {
    Box b{it.p.x - it.h, it.p.y - it.h, it.p.x + it.h, it.p.y + it.h};
    if (rule == ConflictRule::ProximityAndOverlap)
      for (const Point& q : it.tri.p) {
        b.x0 = std::min(b.x0, q.x - tol);
        b.y0 = std::min(b.y0, q.y - tol);
        b.x1 = std::max(b.x1, q.x + tol);
        b.y1 = std::max(b.y1, q.y + tol);
      }
    boxes.push_back(b);
  }
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].x0 < boxes[b].x0 || (boxes[a].x0 == boxes[b].x0 && items[a].id < items[b].id);
  });

  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  for (std::size_t s = 0; s < order.size(); ++s) {
    const std::size_t i = order[s];
    for (std::size_t t = s + 1; t < order.size() && boxes[order[t]].x0 <= boxes[i].x1; ++t) {
      const std::size_t j = order[t];
      if (boxes[j].y0 > boxes[i].y1 || boxes[i].y0 > boxes[j].y1) continue;
      if (in_conflict(items[i], items[j], rule, tol)) edges.emplace_back(items[i].id, items[j].id);
    }
  }
  std::vector<std::uint64_t> ids;
  ids.reserve(items.size());
  for (const auto& it : items) ids.push_back(it.id);
  return ConflictGraph(std::move(ids), edges);
}

std::vector<RankGraph> split_graph(const ConflictGraph& graph, std::span<const int> owner, int n_ranks) {
  if (owner.size() != graph.size()) throw PreconditionError("split_graph: owner vector size mismatch");
  std::vector<RankGraph> out(n_ranks);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const int r = owner[i];
    if (r < 0 || r >= n_ranks) throw PreconditionError("split_graph: owner out of range");
    auto& rg = out[r];
    rg.owned.push_back(graph.id(i));
    auto& nb = rg.neighbors.emplace_back();
    for (std::uint32_t j : graph.neighbors(i)) {
      nb.push_back(graph.id(j));
      if (owner[j] != r) rg.ghosts.emplace_back(graph.id(j), owner[j]);
    }
  }
  for (auto& rg : out) {
    std::sort(rg.ghosts.begin(), rg.ghosts.end());
    rg.ghosts.erase(std::unique(rg.ghosts.begin(), rg.ghosts.end()), rg.ghosts.end());
  }
  return out;
}

namespace {

enum class Status : std::uint8_t { Pending, Accepted, Discarded };

struct StatusMsg {
  std::uint64_t id;
  Status status;
};

struct ClaimMsg {
  std::uint64_t owned_by_receiver;
  std::uint64_t claimed_neighbor;
};

struct RankState {
  std::unordered_map<std::uint64_t, Status> status;  // owned and ghost
  std::unordered_map<std::uint64_t, int> ghost_owner;
  std::unordered_map<std::uint64_t, std::size_t> slot;  // owned id -> position
  std::vector<std::vector<int>> readers;                // per owned: ranks holding it as ghost
  std::vector<std::uint64_t> changed;
  std::size_t pending = 0;
};

}  // namespace

MisResult cpmis_run(std::span<const RankGraph> ranks, int max_iterations, int n_threads) {
  const int n = static_cast<int>(ranks.size());
  if (n == 0) throw PreconditionError("cpmis_run: no ranks");
  bsp::Runtime rt(n, n_threads);
  std::vector<RankState> state(n);

  // Setup: local completeness, then a claim exchange that checks every
  // cross-rank edge is known to both endpoint owners.
  bsp::Exchange<ClaimMsg> claims(n);
  rt.superstep([&](int r) {
    const auto& g = ranks[r];
    auto& st = state[r];
    for (std::size_t k = 0; k < g.owned.size(); ++k) {
      st.status[g.owned[k]] = Status::Pending;
      st.slot[g.owned[k]] = k;
    }
    for (auto [id, o] : g.ghosts) {
      st.status.emplace(id, Status::Pending);
      st.ghost_owner[id] = o;
    }
    st.readers.resize(g.owned.size());
    for (std::size_t k = 0; k < g.owned.size(); ++k) {
      for (std::uint64_t u : g.neighbors[k]) {
        if (st.slot.count(u)) continue;
        const auto it = st.ghost_owner.find(u);
        if (it == st.ghost_owner.end())
          throw OverlapViolation("MIS: rank " + std::to_string(r) + " vertex " + std::to_string(g.owned[k]) +
                                 " has neighbor " + std::to_string(u) + " outside its ghost layer");
        st.readers[k].push_back(it->second);
        claims.send(r, it->second, {u, g.owned[k]});
      }
      auto& rd = st.readers[k];
      std::sort(rd.begin(), rd.end());
      rd.erase(std::unique(rd.begin(), rd.end()), rd.end());
    }
    st.pending = g.owned.size();
  });
  rt.superstep([&](int r) {
    const auto& g = ranks[r];
    for (const auto& d : claims.deliver(r, [](const ClaimMsg& m) { return std::pair(m.owned_by_receiver, m.claimed_neighbor); })) {
      const auto it = state[r].slot.find(d.msg.owned_by_receiver);
      const bool ok = it != state[r].slot.end() &&
                      std::binary_search(g.neighbors[it->second].begin(), g.neighbors[it->second].end(),
                                         d.msg.claimed_neighbor);
      if (!ok)
        throw OverlapViolation("MIS: rank " + std::to_string(d.source) + " sees edge " +
                               std::to_string(d.msg.claimed_neighbor) + "-" + std::to_string(d.msg.owned_by_receiver) +
                               " that owner rank " + std::to_string(r) + " does not");
    }
  });

  MisResult result;
  auto global_pending = [&] {
    std::size_t p = 0;
    for (const auto& st : state) p += st.pending;
    return p;
  };

  while (global_pending() > 0 && (max_iterations < 0 || result.iterations < max_iterations)) {
    ++result.iterations;
    bsp::Exchange<std::uint64_t> demotions(n);
    // Steps 1 and 2: local minima among pending neighbors become accepted,
    // their pending neighbors are demoted (ghost demotions go to owners).
    rt.superstep([&](int r) {
      const auto& g = ranks[r];
      auto& st = state[r];
      st.changed.clear();
      std::vector<std::size_t> selected;
      for (std::size_t k = 0; k < g.owned.size(); ++k) {
        const std::uint64_t v = g.owned[k];
        if (st.status.at(v) != Status::Pending) continue;
        bool minimal = true;
        for (std::uint64_t u : g.neighbors[k])
          if (u < v && st.status.at(u) == Status::Pending) {
            minimal = false;
            break;
          }
        if (minimal) selected.push_back(k);
      }
      for (std::size_t k : selected) {
        st.status[g.owned[k]] = Status::Accepted;
        st.changed.push_back(g.owned[k]);
      }
      for (std::size_t k : selected)
        for (std::uint64_t u : g.neighbors[k]) {
          auto& s = st.status.at(u);
          if (s != Status::Pending) continue;
          s = Status::Discarded;
          if (st.slot.count(u))
            st.changed.push_back(u);
          else
            demotions.send(r, st.ghost_owner.at(u), u);
        }
    });
    // Step 3a: owners apply demotions and publish every change to readers.
    bsp::Exchange<StatusMsg> publish(n);
    rt.superstep([&](int r) {
      auto& st = state[r];
      for (const auto& d : demotions.deliver(r, [](std::uint64_t id) { return id; })) {
        auto& s = st.status.at(d.msg);
        if (s == Status::Accepted)
          throw InvariantViolation("MIS: accepted vertex " + std::to_string(d.msg) + " demoted by rank " +
                                   std::to_string(d.source));
        if (s == Status::Pending) {
          s = Status::Discarded;
          st.changed.push_back(d.msg);
        }
      }
      std::sort(st.changed.begin(), st.changed.end());
      for (std::uint64_t v : st.changed)
        for (int dst : st.readers[st.slot.at(v)]) publish.send(r, dst, {v, st.status.at(v)});
      std::size_t p = 0;
      for (std::uint64_t v : ranks[r].owned) p += st.status.at(v) == Status::Pending ? 1 : 0;
      st.pending = p;
    });
    // Step 3b: ghost mirrors take the owners' view.
    rt.superstep([&](int r) {
      for (const auto& d : publish.deliver(r, [](const StatusMsg& m) { return m.id; }))
        state[r].status[d.msg.id] = d.msg.status;
    });
  }

  result.complete = global_pending() == 0;
  result.accepted_per_rank.resize(n);
  for (int r = 0; r < n; ++r)
    for (std::uint64_t v : ranks[r].owned) {
      switch (state[r].status.at(v)) {
        case Status::Accepted:
          result.accepted.push_back(v);
          result.accepted_per_rank[r].push_back(v);
          break;
        case Status::Discarded: result.discarded.push_back(v); break;
        case Status::Pending: result.pending.push_back(v); break;
      }
    }
  for (auto* v : {&result.accepted, &result.discarded, &result.pending}) std::sort(v->begin(), v->end());
  return result;
}

MisResult cpmis_run(const ConflictGraph& graph, std::span<const int> owner, int n_ranks, int max_iterations,
                    int n_threads) {
  const auto views = split_graph(graph, owner, n_ranks);
  return cpmis_run(views, max_iterations, n_threads);
}

std::vector<std::uint64_t> sequential_mis_oracle(const ConflictGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<Status> st(n, Status::Pending);
  std::size_t pending = n;
  while (pending > 0) {
    std::vector<std::size_t> round;
    for (std::size_t i = 0; i < n; ++i) {
      if (st[i] != Status::Pending) continue;
      const auto& nb = graph.neighbors(i);
      // Neighbor lists are ascending by index, which is ascending by ID.
      const bool minimal = std::none_of(nb.begin(), nb.end(), [&](std::uint32_t j) {
        return j < i && st[j] == Status::Pending;
      });
      if (minimal) round.push_back(i);
    }
    for (std::size_t i : round) st[i] = Status::Accepted;
    for (std::size_t i : round)
      for (std::uint32_t j : graph.neighbors(i))
        if (st[j] == Status::Pending) st[j] = Status::Discarded;
    pending = static_cast<std::size_t>(std::count(st.begin(), st.end(), Status::Pending));
  }
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (st[i] == Status::Accepted) out.push_back(graph.id(i));
  return out;
}

bool is_independent(const ConflictGraph& graph, std::span<const std::uint64_t> set) {
  for (std::size_t a = 0; a < set.size(); ++a)
    for (std::size_t b = a + 1; b < set.size(); ++b)
      if (graph.adjacent(set[a], set[b])) return false;
  return true;
}

bool is_maximal(const ConflictGraph& graph, std::span<const std::uint64_t> set) {
  std::vector<bool> in(graph.size(), false);
  for (std::uint64_t v : set) in[graph.index_of(v)] = true;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (in[i]) continue;
    const auto& nb = graph.neighbors(i);
    if (std::none_of(nb.begin(), nb.end(), [&](std::uint32_t j) { return in[j]; })) return false;
  }
  return true;
}

}  // namespace cpaft::mis
