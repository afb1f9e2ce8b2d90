#include "cpaft/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "cpaft/errors.hpp"
#include "cpaft/front_forest.hpp"
#include "cpaft/runtime.hpp"

namespace cpaft::pipeline {

using forest::IndexedFront;

namespace {

void register_front(MeshState& s, const Front& f) {
  const EdgeKey key{f.vertex_ids[0], f.vertex_ids[1]};
  if (s.front_by_edge.count(key))
    throw InvariantViolation("front " + std::to_string(key.first) + "->" + std::to_string(key.second) +
                             " created twice");
  s.fronts.emplace(f.creation_id, f);
  s.front_by_edge.emplace(key, f.creation_id);
}

Point centroid(const Triangle& t) {
  return {(t.p[0].x + t.p[1].x + t.p[2].x) / 3.0, (t.p[0].y + t.p[1].y + t.p[2].y) / 3.0};
}

// Area of the intersection of two counter-clockwise triangles (convex clip).
double overlap_area(const Triangle& t1, const Triangle& t2) {
  std::vector<Point> poly(t1.p.begin(), t1.p.end());
  for (int k = 0; k < 3 && !poly.empty(); ++k) {
    const Point a = t2.p[k], b = t2.p[(k + 1) % 3];
    std::vector<Point> next;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point p = poly[i], q = poly[(i + 1) % poly.size()];
      const double dp = orient2d(a, b, p), dq = orient2d(a, b, q);
      if (dp >= 0.0) next.push_back(p);
      if ((dp >= 0.0) != (dq >= 0.0)) next.push_back(p + (dp / (dp - dq)) * (q - p));
    }
    poly = std::move(next);
  }
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) area += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * area;
}

struct CandidateMsg {
  std::uint64_t gi;
  mis::ConflictItem item;
};

sfc::BackgroundGrid make_grid(const Boundary& boundary, const GenerateParams& params) {
  const auto pts = boundary.all_vertices();
  const auto bbox = sfc::BoundingBox::of(pts);
  const int level = params.sfc_level > 0 ? params.sfc_level : sfc::level_for_scale(params.advance.h_max, bbox);
  return sfc::BackgroundGrid(bbox, level);
}

}  // namespace

MeshState initial_state(const Boundary& boundary, const advance::AdvanceParams& params) {
  validate_boundary(boundary);
  MeshState s;
  for (const auto& loop : boundary.loops) {
    const VertexId first = s.mesh.vertices.size();
    const std::size_t n = loop.vertices.size();
    for (const Point& p : loop.vertices) s.mesh.add_vertex(p, true);
    for (std::size_t k = 0; k < n; ++k) {
      const VertexId a = first + k, b = first + (k + 1) % n;
      const double h = std::clamp(loop.h[k], params.h_min, params.h_max);
      register_front(s, make_front(a, s.mesh.vertices[a], b, s.mesh.vertices[b], h, s.next_creation_id++));
      s.boundary_edges.emplace_back(a, b);
    }
  }
  s.volume_initial = s.volume_remaining = front_volume(s);
  return s;
}

double front_volume(const MeshState& state) {
  double twice = 0.0;
  for (const auto& [cid, f] : state.fronts) twice += cross(f.ends[0], f.ends[1]);
  return 0.5 * twice;
}

std::uint64_t termination_bound(const advance::AdvanceParams& params, double v0) {
  if (!(v0 > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::ceil(v0 / params.min_element_area()));
}

Generator::Generator(const Boundary& boundary, const GenerateParams& params)
    : params_(params),
      state_(initial_state(boundary, params.advance)),
      grid_(make_grid(boundary, params)),
      partition_(sfc::Partition::single(grid_.cell_count())) {
  params_.advance.validate();
  if (params_.n_ranks < 1) throw PreconditionError("n_ranks must be >= 1");
  tol_ = kRelativeTolerance * grid_.bbox().diagonal();
  params_.advance.tolerance = std::max(params_.advance.tolerance, tol_);
  stats_.v0 = state_.volume_initial;
  stats_.termination_bound = termination_bound(params_.advance, stats_.v0);
  stats_.sfc_level = grid_.level();
  stats_.min_commit_area = std::numeric_limits<double>::infinity();
  stats_.volume_history.push_back(state_.volume_remaining);
}

void Generator::repartition(std::span<const sfc::FrontKey> keys) {
  std::map<std::uint64_t, double> w;
  const sfc::LoadIndicator unit_front{1, 0}, unit_element{0, 1};
  for (const auto& k : keys) w[k.box.value] += unit_front.value();
  for (auto [box, count] : elements_per_box_) w[box] += unit_element.value() * double(count);
  std::vector<sfc::BoxWeight> weights;
  weights.reserve(w.size());
  for (auto [box, x] : w) weights.push_back({sfc::BoxIndex{box}, x});
  partition_ = sfc::partition_boxes(weights, grid_.cell_count(), params_.n_ranks);
  ++stats_.repartitions;
}

void Generator::add_element(VertexId a, VertexId b, VertexId c, int owner_rank) {
  Element e{{a, b, c}, owner_rank, state_.next_sequence++};
  const Triangle t = state_.mesh.triangle(e);
  state_.element_area += t.signed_area();
  ++elements_per_box_[grid_.box_of(centroid(t)).value];
  state_.mesh.elements.push_back(e);
}

void Generator::retire_front(CreationId cid) {
  const auto it = state_.fronts.find(cid);
  state_.front_by_edge.erase({it->second.vertex_ids[0], it->second.vertex_ids[1]});
  state_.fronts.erase(it);
}

void Generator::add_or_close_front(VertexId a, VertexId b, double h) {
  const auto rev = state_.front_by_edge.find({b, a});
  if (rev != state_.front_by_edge.end()) {
    retire_front(rev->second);
    return;
  }
  const auto& v = state_.mesh.vertices;
  register_front(state_, make_front(a, v[a], b, v[b], h, state_.next_creation_id++));
}

void Generator::commit(const advance::Candidate& c, int owner_rank) {
  const auto it = state_.fronts.find(c.front.creation_id);
  if (it == state_.fronts.end() || it->second.vertex_ids != c.front.vertex_ids)
    throw InvariantViolation("accepted candidate for front " + std::to_string(c.front.creation_id) +
                             " whose front was already retired this iteration");
  const VertexId a = c.front.vertex_ids[0], b = c.front.vertex_ids[1];
  const VertexId v =
      c.kind == advance::CandidateKind::NewPoint ? state_.mesh.add_vertex(c.point, false) : c.vertex;
  if (c.kind == advance::CandidateKind::ExistingVertex && !state_.mesh.alive[v])
    throw InvariantViolation("candidate references retired vertex " + std::to_string(v));
  const double area = signed_area(state_.mesh.vertices[a], state_.mesh.vertices[b], state_.mesh.vertices[v]);
  if (area < params_.advance.min_element_area())
    throw InvariantViolation("committed element area " + std::to_string(area) + " below the measure floor");
  stats_.min_commit_area = std::min(stats_.min_commit_area, area);
  add_element(a, b, v, owner_rank);
  retire_front(c.front.creation_id);
  add_or_close_front(a, v, c.new_front_h);
  add_or_close_front(v, b, c.new_front_h);
  ++stats_.commits;
}

IterationRecord Generator::iteration_step() {
  IterationRecord rec;
  rec.fronts = state_.fronts.size();
  if (state_.done()) return rec;
  ++passes_;
  const std::size_t pass_cap = stats_.termination_bound + 4 * state_.boundary_edges.size() + 64;
  if (passes_ > pass_cap) throw InvariantViolation("main loop exceeded " + std::to_string(pass_cap) + " passes");

  // Decomposition keys for the live fronts, in creation order.
  std::vector<const Front*> live;
  std::vector<sfc::FrontKey> keys;
  live.reserve(state_.fronts.size());
  keys.reserve(state_.fronts.size());
  double lmax = 0.0;
  for (const auto& [cid, f] : state_.fronts) {
    live.push_back(&f);
    keys.push_back({grid_.box_of(f.mid()), cid});
    lmax = std::max(lmax, f.length());
  }

  bool due = passes_ == 1 || (params_.repartition_interval > 0 && (passes_ - 1) % params_.repartition_interval == 0);
  if (!due && params_.n_ranks > 1) {
    std::vector<sfc::LoadIndicator> load(params_.n_ranks);
    for (const auto& k : keys) ++load[partition_.owner_of(k.box)].front_count;
    for (auto [box, count] : elements_per_box_) load[partition_.owner_of(sfc::BoxIndex{box})].element_count += count;
    due = sfc::needs_repartition(load);
  }
  if (due) {
    repartition(keys);
    rec.repartitioned = true;
  }

  const auto gi = sfc::assign_global_indices(keys, partition_);
  const int n = partition_.n_ranks();
  std::vector<std::vector<IndexedFront>> owned(n);
  for (std::size_t i = 0; i < live.size(); ++i) {
    const int r = partition_.owner_of(keys[i].box);
    owned[r].push_back({gi[i], *live[i], r});
  }
  for (auto& o : owned)
    std::sort(o.begin(), o.end(), [](const IndexedFront& a, const IndexedFront& b) { return a.gi < b.gi; });

  // Overlap depth: neighbor queries reach gamma*h_max past a front, and a
  // conflicting candidate's front sits within 5 h_max of the owned front.
  const double h_max = params_.advance.h_max;
  const double reach = std::max(5.0 * h_max, lmax + params_.advance.gamma_factor * h_max);
  const int delta = std::max(1, static_cast<int>(std::ceil(reach / grid_.box_edge())));
  stats_.delta_max = std::max(stats_.delta_max, delta);

  bsp::Runtime rt(n, params_.n_threads);

  // Ghost exchange with the fixed binary record.
  bsp::Exchange<std::vector<std::byte>> ghost_mail(n);
  rt.superstep([&](int r) {
    std::vector<std::vector<std::byte>> out(n);
    for (const auto& f : owned[r])
      for (int dst : forest::ghost_destinations(grid_, partition_, grid_.cell_of(f.front.mid()), delta, r))
        forest::pack_front(f, out[dst]);
    for (int dst = 0; dst < n; ++dst)
      if (!out[dst].empty()) ghost_mail.send(r, dst, std::move(out[dst]));
  });

  // Overlapping forest and proposals.
  const Point lo = grid_.bbox().lo;
  const double side = grid_.box_edge() * double(grid_.cells_per_side());
  const sfc::BoundingBox region{lo, {lo.x + side, lo.y + side}};
  std::vector<std::vector<advance::Candidate>> proposals(n);
  rt.superstep([&](int r) {
    forest::FrontTree tree(region);
    for (const auto& f : owned[r]) tree.insert(f);
    for (const auto& d : ghost_mail.deliver(r, [](const std::vector<std::byte>&) { return 0; }))
      for (const auto& g : forest::unpack_fronts(d.msg, d.source)) tree.insert(g);
    for (const auto& f : owned[r]) {
      const auto neighbors = tree.query(f.front, params_.advance.gamma(f.front.h), f.gi);
      if (auto c = advance::propose(f, neighbors, params_.advance)) proposals[r].push_back(*c);
    }
  });
  for (const auto& p : proposals) rec.candidates += p.size();


  if (rec.candidates == 0) {
    merge_fallback();
    rec.merged = true;
    rec.fronts = state_.fronts.size();
  } else {
    // Candidate exchange to the ranks ghosting each front, then the
    // per-rank conflict graphs.
    bsp::Exchange<CandidateMsg> cand_mail(n);
    rt.superstep([&](int r) {
      for (const auto& c : proposals[r]) {
        const mis::ConflictItem item{c.front_gi.value, c.point, c.front.h, c.triangle()};
        for (int dst : forest::ghost_destinations(grid_, partition_, grid_.cell_of(c.front.mid()), delta, r))
          cand_mail.send(r, dst, {c.front_gi.value, item});
      }
    });
    std::vector<mis::RankGraph> views(n);
    rt.superstep([&](int r) {
      std::vector<mis::ConflictItem> items;
      for (const auto& c : proposals[r]) items.push_back({c.front_gi.value, c.point, c.front.h, c.triangle()});
      auto& view = views[r];
      for (const auto& d : cand_mail.deliver(r, [](const CandidateMsg& m) { return m.gi; })) {
        items.push_back(d.msg.item);
        view.ghosts.emplace_back(d.msg.gi, d.source);
      }
      const auto graph = mis::build_conflict_graph(items, params_.conflict_rule, tol_);
      for (const auto& c : proposals[r]) {
        view.owned.push_back(c.front_gi.value);
        auto& nb = view.neighbors.emplace_back();
        for (std::uint32_t j : graph.neighbors(graph.index_of(c.front_gi.value))) nb.push_back(graph.id(j));
      }
      std::sort(view.ghosts.begin(), view.ghosts.end());
    });
    const auto sel = mis::cpmis_run(views, params_.mis_max_iterations, params_.n_threads);
    rec.mis_rounds = sel.iterations;
    rec.accepted = sel.accepted.size();

    // Commit in ascending GI; vertex and creation ids follow that order.
    std::vector<std::pair<const advance::Candidate*, int>> chosen;
    for (int r = 0; r < n; ++r) {
      const auto& acc = sel.accepted_per_rank[r];
      for (const auto& c : proposals[r])
        if (std::binary_search(acc.begin(), acc.end(), c.front_gi.value)) chosen.emplace_back(&c, r);
    }
    std::sort(chosen.begin(), chosen.end(),
              [](const auto& a, const auto& b) { return a.first->front_gi < b.first->front_gi; });
    const double before = state_.volume_remaining;
    const double area_before = state_.element_area;
    for (const auto& [c, r] : chosen) commit(*c, r);
    rec.committed = chosen.size();
    if (rec.committed == 0) throw InvariantViolation("iteration with candidates committed nothing");
    ++state_.iteration;

    state_.volume_remaining = front_volume(state_);
    const double scale = tol_ * grid_.bbox().diagonal();
    const double committed_area = state_.element_area - area_before;
    if (std::abs((before - state_.volume_remaining) - committed_area) > 1e3 * scale + 1e-12 * std::abs(before))
      throw InvariantViolation("front volume drop does not match committed element area");
    if (before - state_.volume_remaining < double(rec.committed) * params_.advance.min_element_area() - 1e3 * scale)
      throw InvariantViolation("volume decrement below the per-commit floor");
    if (state_.iteration > stats_.termination_bound)
      throw InvariantViolation("iteration count " + std::to_string(state_.iteration) + " exceeds termination bound " +
                               std::to_string(stats_.termination_bound));
  }

  if (rec.merged) state_.volume_remaining = front_volume(state_);
  rec.volume = state_.volume_remaining;
  if (rec.volume > stats_.volume_history.back() + 1e3 * tol_ * grid_.bbox().diagonal())
    throw InvariantViolation("front volume increased");
  stats_.volume_history.push_back(rec.volume);
  stats_.iterations = state_.iteration;
  stats_.merges = state_.merges;
  if (params_.check_invariants) check_invariants();
  stats_.records.push_back(rec);
  return rec;
}

void Generator::run() {
  while (!state_.done()) iteration_step();
}

void Generator::check_invariants() const {
  std::map<VertexId, int> balance;
  for (const auto& [cid, f] : state_.fronts) {
    ++balance[f.vertex_ids[0]];
    --balance[f.vertex_ids[1]];
    const auto it = state_.front_by_edge.find({f.vertex_ids[0], f.vertex_ids[1]});
    if (it == state_.front_by_edge.end() || it->second != cid) throw InvariantViolation("front edge index out of sync");
  }
  if (state_.front_by_edge.size() != state_.fronts.size()) throw InvariantViolation("front edge index out of sync");
  for (auto [v, b] : balance)
    if (b != 0) throw InvariantViolation("fronts do not form closed loops at vertex " + std::to_string(v));
  const double total = state_.element_area + state_.volume_remaining;
  if (std::abs(total - state_.volume_initial) > 1e-9 * std::abs(state_.volume_initial))
    throw InvariantViolation("element area plus front volume drifted from the domain area");
}

// ---------------------------------------------------------------------------
// Merge fallback.

namespace {

struct MergeContext {
  MeshState& s;
  double tol;

  std::set<VertexId> front_vertices() const {
    std::set<VertexId> out;
    for (const auto& [cid, f] : s.fronts) {
      out.insert(f.vertex_ids[0]);
      out.insert(f.vertex_ids[1]);
    }
    return out;
  }
};

// Moves `cluster` onto `survivor` at `target`. Elements and fronts that
// collapse are dropped; opposite front pairs cancel. Returns false when the
// result duplicates a front.
bool apply_merge(MeshState& s, const std::vector<VertexId>& cluster, VertexId survivor, Point target) {
  auto remap = [&](VertexId v) { return std::binary_search(cluster.begin(), cluster.end(), v) ? survivor : v; };
  for (VertexId v : cluster)
    if (v != survivor) s.mesh.alive[v] = false;
  s.mesh.vertices[survivor] = target;

  std::vector<Element> kept;
  kept.reserve(s.mesh.elements.size());
  for (Element e : s.mesh.elements) {
    for (auto& v : e.vertex_ids) v = remap(v);
    const auto& id = e.vertex_ids;
    if (id[0] == id[1] || id[1] == id[2] || id[0] == id[2]) continue;
    kept.push_back(e);
  }
  s.mesh.elements = std::move(kept);

  std::map<EdgeKey, Front> next;
  for (const auto& [cid, f] : s.fronts) {
    const VertexId a = remap(f.vertex_ids[0]), b = remap(f.vertex_ids[1]);
    if (a == b) continue;
    if (next.count({a, b})) return false;
    next.emplace(EdgeKey{a, b}, make_front(a, s.mesh.vertices[a], b, s.mesh.vertices[b], f.h, f.creation_id));
  }
  s.fronts.clear();
  s.front_by_edge.clear();
  for (const auto& [key, f] : next) {
    if (next.count({key.second, key.first})) continue;  // zero-width pair
    s.fronts.emplace(f.creation_id, f);
    s.front_by_edge.emplace(key, f.creation_id);
  }
  return true;
}

double element_area_sum(const Mesh& m) {
  double a = 0.0;
  for (const auto& e : m.elements) a += m.triangle(e).signed_area();
  return a;
}

sfc::BoundingBox box_of(const Triangle& t) {
  return sfc::BoundingBox::of(std::span<const Point>(t.p.data(), 3));
}

bool boxes_overlap(const sfc::BoundingBox& a, const sfc::BoundingBox& b, double tol) {
  return a.lo.x <= b.hi.x + tol && b.lo.x <= a.hi.x + tol && a.lo.y <= b.hi.y + tol && b.lo.y <= a.hi.y + tol;
}

// Mesh and front validity around vertex `v` after a local modification.
bool valid_around(const MeshState& s, VertexId v, double tol, double volume_before) {
  const Mesh& m = s.mesh;
  std::vector<std::size_t> touched;
  for (std::size_t k = 0; k < m.elements.size(); ++k) {
    const auto& id = m.elements[k].vertex_ids;
    if (id[0] == v || id[1] == v || id[2] == v) touched.push_back(k);
  }
  for (std::size_t k : touched) {
    const Triangle t = m.triangle(m.elements[k]);
    const double longest = std::max({distance(t.p[0], t.p[1]), distance(t.p[1], t.p[2]), distance(t.p[2], t.p[0])});
    if (!(t.signed_area() > kRelativeTolerance * longest * longest)) return false;
    const auto bt = box_of(t);
    for (std::size_t j = 0; j < m.elements.size(); ++j) {
      if (j == k) continue;
      const Triangle u = m.triangle(m.elements[j]);
      if (!boxes_overlap(bt, box_of(u), tol)) continue;
      if (overlap_area(t, u) > 1e-9 * std::max(t.signed_area(), u.signed_area())) return false;
    }
    for (const auto& [cid, f] : s.fronts)
      if (element_contains_front(t, f.segment(), tol)) return false;
  }
  for (const auto& [cid, f] : s.fronts) {
    if (f.vertex_ids[0] != v && f.vertex_ids[1] != v) continue;
    for (const auto& [cid2, g] : s.fronts)
      if (cid2 != cid && fronts_intersect(f.segment(), g.segment(), tol)) return false;
    for (const auto& e : m.elements)
      if (element_contains_front(m.triangle(e), f.segment(), tol)) return false;
  }
  std::map<VertexId, int> balance;
  for (const auto& [cid, f] : s.fronts) {
    ++balance[f.vertex_ids[0]];
    --balance[f.vertex_ids[1]];
  }
  for (auto [u, b] : balance)
    if (b != 0) return false;
  return front_volume(s) <= volume_before + tol;
}

}  // namespace

std::string Generator::merge_fallback() {
  if (state_.done()) throw PreconditionError("merge fallback with no fronts");
  ++state_.merges;

  // f_m: the minimum-GI live front.
  std::vector<sfc::FrontKey> keys;
  for (const auto& [cid, f] : state_.fronts) keys.push_back({grid_.box_of(f.mid()), cid});
  const auto gi = sfc::assign_global_indices(keys, partition_);
  std::vector<std::size_t> order(keys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gi[a] < gi[b]; });
  const Front fm = state_.fronts.at(keys[order.front()].creation_id);

  std::vector<Front> hood{fm};
  for (const auto& [cid, g] : state_.fronts)
    if (cid != fm.creation_id && dist_front_front(fm.segment(), g.segment()) < params_.advance.gamma(fm.h))
      hood.push_back(g);

  const MeshState saved = state_;
  const auto saved_boxes = elements_per_box_;
  const double volume_before = front_volume(state_);
  auto restore = [&] {
    state_ = saved;
    elements_per_box_ = saved_boxes;
  };
  auto finish = [&] {
    state_.element_area = element_area_sum(state_.mesh);
    state_.volume_remaining = front_volume(state_);
    elements_per_box_.clear();
    for (const auto& e : state_.mesh.elements) ++elements_per_box_[grid_.box_of(centroid(state_.mesh.triangle(e))).value];
  };
  auto try_merge = [&](std::vector<VertexId> cluster) -> bool {
    std::sort(cluster.begin(), cluster.end());
    cluster.erase(std::unique(cluster.begin(), cluster.end()), cluster.end());
    std::vector<VertexId> frozen;
    for (VertexId v : cluster)
      if (state_.mesh.boundary[v]) frozen.push_back(v);
    if (frozen.size() > 1) return false;
    VertexId survivor = frozen.empty() ? cluster.front() : frozen.front();
    Point target = state_.mesh.vertices[survivor];
    if (frozen.empty()) {
      double sx = 0.0, sy = 0.0;
      for (VertexId v : cluster) {
        sx += state_.mesh.vertices[v].x;
        sy += state_.mesh.vertices[v].y;
      }
      target = {sx / double(cluster.size()), sy / double(cluster.size())};
    }
    if (apply_merge(state_, cluster, survivor, target) && valid_around(state_, survivor, tol_, volume_before)) {
      finish();
      return true;
    }
    restore();
    return false;
  };

  // 1. Collapse the whole neighborhood to one point.
  {
    std::vector<VertexId> cluster;
    for (const auto& f : hood) cluster.insert(cluster.end(), f.vertex_ids.begin(), f.vertex_ids.end());
    if (try_merge(cluster)) return "cluster";
  }
  // 2. Pairwise edge collapses, shortest front first.
  {
    std::vector<Front> by_length = hood;
    std::sort(by_length.begin(), by_length.end(), [](const Front& a, const Front& b) {
      return a.length() < b.length() || (a.length() == b.length() && a.creation_id < b.creation_id);
    });
    for (const auto& f : by_length)
      if (try_merge({f.vertex_ids[0], f.vertex_ids[1]})) return "pair";
  }
  // 3. Close a front against the visible vertex of widest angle.
  const auto candidates = MergeContext{state_, tol_}.front_vertices();
  for (std::size_t oi : order) {
    const Front f = state_.fronts.at(keys[oi].creation_id);
    const VertexId a = f.vertex_ids[0], b = f.vertex_ids[1];
    const Point pa = f.ends[0], pb = f.ends[1];
    std::vector<std::pair<double, VertexId>> ranked;
    for (VertexId v : candidates) {
      if (v == a || v == b) continue;
      const Point pv = state_.mesh.vertices[v];
      if (orientation_sign(pa, pb, pv, tol_) <= 0) continue;
      const Vec2 da = pa - pv, db = pb - pv;
      ranked.emplace_back(-std::atan2(std::abs(cross(da, db)), dot(da, db)), v);
    }
    std::sort(ranked.begin(), ranked.end());
    for (auto [neg_angle, v] : ranked) {
      const Point pv = state_.mesh.vertices[v];
      const Triangle tri{{pa, pb, pv}};
      const Segment e1{pa, pv}, e2{pv, pb};
      bool ok = true;
      for (const auto& [cid, g] : state_.fronts) {
        if (cid == f.creation_id) continue;
        const auto& id = g.vertex_ids;
        const bool closes1 = id[0] == v && id[1] == a, closes2 = id[0] == b && id[1] == v;
        if ((id[0] == a && id[1] == v) || (id[0] == v && id[1] == b)) ok = false;
        if (ok && !closes1 && fronts_intersect(e1, g.segment(), tol_)) ok = false;
        if (ok && !closes2 && fronts_intersect(e2, g.segment(), tol_)) ok = false;
        if (ok && element_contains_front(tri, g.segment(), tol_)) ok = false;
        if (!ok) break;
      }
      if (!ok) continue;
      const int owner = partition_.owner_of(grid_.box_of(f.mid()));
      add_element(a, b, v, owner);
      retire_front(f.creation_id);
      add_or_close_front(a, v, f.h);
      add_or_close_front(v, b, f.h);
      state_.volume_remaining = front_volume(state_);
      return "closure";
    }
  }
  throw InvariantViolation("merge fallback found no repair for the remaining " + std::to_string(state_.fronts.size()) +
                           " fronts");
}

GenerateResult generate(const Boundary& boundary, const GenerateParams& params) {
  Generator g(boundary, params);
  g.run();
  return {std::move(g.state()), g.stats()};
}

std::vector<EdgeKey> mesh_boundary_edges(const Mesh& mesh) {
  std::map<EdgeKey, int> count;
  std::map<EdgeKey, EdgeKey> directed;
  for (const auto& e : mesh.elements)
    for (int k = 0; k < 3; ++k) {
      const VertexId a = e.vertex_ids[k], b = e.vertex_ids[(k + 1) % 3];
      const EdgeKey u{std::min(a, b), std::max(a, b)};
      ++count[u];
      directed[u] = {a, b};
    }
  std::vector<EdgeKey> out;
  for (const auto& [u, c] : count)
    if (c == 1) out.push_back(directed[u]);
  std::sort(out.begin(), out.end());
  return out;
}

void write_manifest(std::ostream& os, const GenerateParams& params, const RunStats& stats, const MeshState& state,
                    const std::string& mesh_hash) {
  const auto& a = params.advance;
  os << std::setprecision(17);
  os << "beta1: " << a.beta1 << "\nbeta2: " << a.beta2 << "\neta: " << a.eta << "\nepsilon: " << a.epsilon
     << "\nh_min: " << a.h_min << "\nh_max: " << a.h_max << "\ngamma_factor: " << a.gamma_factor
     << "\nmutual_obstruction: " << (a.mutual_obstruction ? "on" : "off")
     << "\nexisting_vertex_bias: " << a.existing_vertex_bias << '\n';
  os << "n_ranks: " << params.n_ranks << "\nn_threads: " << params.n_threads << "\nsfc_level: " << stats.sfc_level
     << "\ndelta_max: " << stats.delta_max << "\nrepartitions: " << stats.repartitions << '\n';
  os << "iterations: " << stats.iterations << "\nmerges: " << stats.merges
     << "\ntermination_bound: " << stats.termination_bound << "\nV0: " << stats.v0 << '\n';
  os << "elements: " << state.mesh.elements.size() << "\nvertices: " << state.mesh.live_vertex_count() << '\n';
  os << "mesh_hash: " << mesh_hash << '\n';
}

}  // namespace cpaft::pipeline
