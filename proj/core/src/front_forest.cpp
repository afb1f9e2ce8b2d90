#include "cpaft/front_forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "cpaft/errors.hpp"

namespace cpaft::forest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

sfc::BoundingBox empty_box() { return {{kInf, kInf}, {-kInf, -kInf}}; }

sfc::BoundingBox segment_box(const Front& f) {
  return {{std::min(f.ends[0].x, f.ends[1].x), std::min(f.ends[0].y, f.ends[1].y)},
          {std::max(f.ends[0].x, f.ends[1].x), std::max(f.ends[0].y, f.ends[1].y)}};
}

void expand(sfc::BoundingBox& b, const sfc::BoundingBox& o) {
  b.lo.x = std::min(b.lo.x, o.lo.x);
  b.lo.y = std::min(b.lo.y, o.lo.y);
  b.hi.x = std::max(b.hi.x, o.hi.x);
  b.hi.y = std::max(b.hi.y, o.hi.y);
}

// Lower bound on the distance between anything inside two boxes.
double box_gap(const sfc::BoundingBox& a, const sfc::BoundingBox& b) {
  const double dx = std::max({0.0, a.lo.x - b.hi.x, b.lo.x - a.hi.x});
  const double dy = std::max({0.0, a.lo.y - b.hi.y, b.lo.y - a.hi.y});
  return std::hypot(dx, dy);
}

bool by_gi(const IndexedFront& a, const IndexedFront& b) { return a.gi < b.gi; }

}  // namespace

FrontTree::FrontTree(sfc::BoundingBox region) {
  Node root;
  root.box = region;
  root.segs = empty_box();
  nodes_.push_back(root);
}

int FrontTree::quadrant(const Node& n, Point p) const {
  const Point c = midpoint(n.box.lo, n.box.hi);
  return (p.x > c.x ? 1 : 0) + (p.y > c.y ? 2 : 0);
}

void FrontTree::split(int node) {
  const Point lo = nodes_[node].box.lo, hi = nodes_[node].box.hi;
  const Point c = midpoint(lo, hi);
  const int depth = nodes_[node].depth + 1;
  for (int q = 0; q < 4; ++q) {
    Node child;
    child.box.lo = {(q & 1) ? c.x : lo.x, (q & 2) ? c.y : lo.y};
    child.box.hi = {(q & 1) ? hi.x : c.x, (q & 2) ? hi.y : c.y};
    child.segs = empty_box();
    child.depth = depth;
    nodes_[node].child[q] = static_cast<int>(nodes_.size());
    nodes_.push_back(child);
  }
  auto items = std::move(nodes_[node].items);
  nodes_[node].items.clear();
  for (std::uint32_t slot : items) {
    Node& n = nodes_[node];
    Node& ch = nodes_[n.child[quadrant(n, entries_[slot].front.mid())]];
    ch.items.push_back(slot);
    ch.count += 1;
    expand(ch.segs, segment_box(entries_[slot].front));
  }
}

void FrontTree::insert(const IndexedFront& f) {
  if (index_.count(f.gi.value)) throw PreconditionError("FrontTree::insert: duplicate global index");
  const Point m = f.front.mid();
  if (!nodes_[0].box.contains(m)) throw PreconditionError("FrontTree::insert: front outside the tree region");

  std::uint32_t slot;
  if (!free_.empty()) {
    slot = free_.back();
    free_.pop_back();
    entries_[slot] = f;
  } else {
    slot = static_cast<std::uint32_t>(entries_.size());
    entries_.push_back(f);
  }
  index_.emplace(f.gi.value, slot);

  const auto sb = segment_box(f.front);
  int node = 0;
  for (;;) {
    Node& n = nodes_[node];
    n.count += 1;
    expand(n.segs, sb);
    if (!n.leaf()) {
      node = n.child[quadrant(n, m)];
      continue;
    }
    n.items.push_back(slot);
    if (n.items.size() <= 1 || n.depth >= kMaxDepth) return;
    // Split until the new front is separated from the one already here.
    split(node);
    Node& parent = nodes_[node];
    node = parent.child[quadrant(parent, m)];
    if (nodes_[node].items.size() <= 1) return;
    // Both fronts landed in the same child: undo its bookkeeping for the
    // new front and keep descending.
    Node& ch = nodes_[node];
    ch.items.erase(std::find(ch.items.begin(), ch.items.end(), slot));
    ch.count -= 1;
    ch.segs = empty_box();
    for (std::uint32_t s : ch.items) expand(ch.segs, segment_box(entries_[s].front));
  }
}

void FrontTree::refresh(int node) {
  Node& n = nodes_[node];
  n.segs = empty_box();
  if (n.leaf()) {
    for (std::uint32_t s : n.items) expand(n.segs, segment_box(entries_[s].front));
    return;
  }
  for (int c : n.child) expand(n.segs, nodes_[c].segs);
}

void FrontTree::remove(sfc::GlobalIndex gi) {
  auto it = index_.find(gi.value);
  if (it == index_.end()) throw PreconditionError("FrontTree::remove: global index not present");
  const std::uint32_t slot = it->second;
  const Point m = entries_[slot].front.mid();

  std::vector<int> path{0};
  while (!nodes_[path.back()].leaf()) path.push_back(nodes_[path.back()].child[quadrant(nodes_[path.back()], m)]);
  auto& items = nodes_[path.back()].items;
  items.erase(std::find(items.begin(), items.end(), slot));
  index_.erase(it);
  free_.push_back(slot);

  for (auto p = path.rbegin(); p != path.rend(); ++p) {
    Node& n = nodes_[*p];
    n.count -= 1;
    if (!n.leaf() && n.count <= 1) {
      // Collapse the subtree back into a leaf; orphaned nodes stay unused.
      std::vector<std::uint32_t> keep;
      std::vector<int> stack(n.child.begin(), n.child.end());
      while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        if (nodes_[c].leaf())
          keep.insert(keep.end(), nodes_[c].items.begin(), nodes_[c].items.end());
        else
          stack.insert(stack.end(), nodes_[c].child.begin(), nodes_[c].child.end());
      }
      nodes_[*p].child = {-1, -1, -1, -1};
      nodes_[*p].items = std::move(keep);
    }
    refresh(*p);
  }
}

void FrontTree::query_into(const Front& f, double radius, std::uint64_t skip, bool use_skip,
                           std::vector<IndexedFront>& out) const {
  const auto qb = segment_box(f);
  const Segment qs = f.segment();
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.count == 0 || box_gap(n.segs, qb) >= radius) continue;
    if (!n.leaf()) {
      stack.insert(stack.end(), n.child.begin(), n.child.end());
      continue;
    }
    for (std::uint32_t s : n.items) {
      const IndexedFront& e = entries_[s];
      if (use_skip && e.gi.value == skip) continue;
      if (dist_front_front(e.front.segment(), qs) < radius) out.push_back(e);
    }
  }
  std::sort(out.begin(), out.end(), by_gi);
}

std::vector<IndexedFront> FrontTree::query(const Front& f, double radius, sfc::GlobalIndex self) const {
  std::vector<IndexedFront> out;
  query_into(f, radius, self.value, true, out);
  return out;
}

std::vector<IndexedFront> FrontTree::query(const Front& f, double radius) const {
  std::vector<IndexedFront> out;
  query_into(f, radius, 0, false, out);
  return out;
}

std::size_t FrontTree::max_leaf_occupancy() const {
  std::size_t best = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.leaf())
      best = std::max(best, n.items.size());
    else
      stack.insert(stack.end(), n.child.begin(), n.child.end());
  }
  return best;
}

int FrontTree::depth() const {
  int best = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    best = std::max(best, n.depth);
    if (!n.leaf()) stack.insert(stack.end(), n.child.begin(), n.child.end());
  }
  return best;
}

std::size_t FrontTree::leaf_count() const {
  std::size_t leaves = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.leaf())
      ++leaves;
    else
      stack.insert(stack.end(), n.child.begin(), n.child.end());
  }
  return leaves;
}

std::vector<IndexedFront> neighbor_scan(std::span<const IndexedFront> fronts, const Front& f, double radius,
                                        sfc::GlobalIndex self) {
  std::vector<IndexedFront> out;
  for (const auto& e : fronts)
    if (e.gi != self && dist_front_front(e.front.segment(), f.segment()) < radius) out.push_back(e);
  std::sort(out.begin(), out.end(), by_gi);
  return out;
}

int required_delta(double box_edge, double h_max, double gamma_factor) {
  if (!(box_edge > 0.0) || !(h_max > 0.0) || !(gamma_factor > 0.0))
    throw PreconditionError("required_delta: inputs must be positive");
  return std::max(1, static_cast<int>(std::ceil(gamma_factor * h_max / box_edge)));
}

namespace {

template <class T>
void put(std::vector<std::byte>& out, const T& v) {
  const auto* p = reinterpret_cast<const std::byte*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(const std::byte*& p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  p += sizeof(T);
  return v;
}

}  // namespace

void pack_front(const IndexedFront& f, std::vector<std::byte>& out) {
  put(out, f.gi.value);
  for (const Point& e : f.front.ends) {
    put(out, e.x);
    put(out, e.y);
  }
  put(out, f.front.vertex_ids[0]);
  put(out, f.front.vertex_ids[1]);
  put(out, f.front.normal.x);
  put(out, f.front.normal.y);
  put(out, f.front.h);
  put(out, f.front.creation_id);
}

std::vector<IndexedFront> unpack_fronts(std::span<const std::byte> bytes, int source_rank) {
  if (bytes.size() % kGhostRecordBytes != 0) throw InvariantViolation("ghost payload has a truncated record");
  std::vector<IndexedFront> out;
  out.reserve(bytes.size() / kGhostRecordBytes);
  const std::byte* p = bytes.data();
  const std::byte* end = p + bytes.size();
  while (p < end) {
    IndexedFront f;
    f.source_rank = source_rank;
    f.gi.value = get<std::uint64_t>(p);
    for (Point& e : f.front.ends) {
      e.x = get<double>(p);
      e.y = get<double>(p);
    }
    f.front.vertex_ids[0] = get<VertexId>(p);
    f.front.vertex_ids[1] = get<VertexId>(p);
    f.front.normal.x = get<double>(p);
    f.front.normal.y = get<double>(p);
    f.front.h = get<double>(p);
    f.front.creation_id = get<CreationId>(p);
    out.push_back(f);
  }
  return out;
}

std::vector<int> ghost_destinations(const sfc::BackgroundGrid& grid, const sfc::Partition& partition,
                                    sfc::CellCoord cell, int delta, int self) {
  std::vector<int> dest;
  const std::int64_t n = grid.cells_per_side();
  for (std::int64_t dy = -delta; dy <= delta; ++dy) {
    const std::int64_t y = std::int64_t{cell.y} + dy;
    if (y < 0 || y >= n) continue;
    for (std::int64_t dx = -delta; dx <= delta; ++dx) {
      const std::int64_t x = std::int64_t{cell.x} + dx;
      if (x < 0 || x >= n) continue;
      const sfc::CellCoord c{static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)};
      const int r = partition.owner_of(sfc::hilbert_index(c, grid.level()));
      if (r != self) dest.push_back(r);
    }
  }
  std::sort(dest.begin(), dest.end());
  dest.erase(std::unique(dest.begin(), dest.end()), dest.end());
  return dest;
}

std::vector<OverlapSet> build_overlap(const sfc::BackgroundGrid& grid, const sfc::Partition& partition,
                                      std::span<const std::vector<IndexedFront>> owned, int delta) {
  const int n = partition.n_ranks();
  const auto un = static_cast<std::size_t>(n);
  if (owned.size() != un) throw PreconditionError("build_overlap: one front list per rank required");

  // Pack: outbox[src][dst].
  std::vector<std::vector<std::vector<std::byte>>> outbox(un, std::vector<std::vector<std::byte>>(un));
  for (int src = 0; src < n; ++src)
    for (const auto& f : owned[src])
      for (int dst : ghost_destinations(grid, partition, grid.cell_of(f.front.mid()), delta, src))
        pack_front(f, outbox[src][dst]);

  // Unpack in ascending source rank, then GI.
  std::vector<OverlapSet> sets(un);
  for (int dst = 0; dst < n; ++dst) {
    auto& s = sets[dst];
    s.delta = delta;
    s.owned = owned[dst];
    std::sort(s.owned.begin(), s.owned.end(), by_gi);
    for (int src = 0; src < n; ++src) {
      auto got = unpack_fronts(outbox[src][dst], src);
      s.ghosts.insert(s.ghosts.end(), got.begin(), got.end());
    }
    std::sort(s.ghosts.begin(), s.ghosts.end(), by_gi);
  }
  return sets;
}

}  // namespace cpaft::forest
