#include "cpaft/advancer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "cpaft/errors.hpp"
#include "cpaft/quality.hpp"

namespace cpaft::advance {

double AdvanceParams::reach(double h) const { return std::min(3.0 * h, 1.5 * h_max); }

void AdvanceParams::validate() const {
  if (!(beta2 > 0.0 && beta2 <= beta1 && beta1 < 1.0))
    throw PreconditionError("advance parameters: require 0 < beta2 <= beta1 < 1");
  if (!(eta > 0.0 && eta < 1.0)) throw PreconditionError("advance parameters: require 0 < eta < 1");
  if (!(epsilon > 0.0)) throw PreconditionError("advance parameters: require epsilon > 0");
  if (!(h_min > 0.0 && h_min <= h_max)) throw PreconditionError("advance parameters: require 0 < h_min <= h_max");
  if (!(gamma_factor > 0.0)) throw PreconditionError("advance parameters: require gamma_factor > 0");
  if (!(existing_vertex_bias > 0.0 && existing_vertex_bias <= 1.0))
    throw PreconditionError("advance parameters: require 0 < existing_vertex_bias <= 1");
}

namespace {

using forest::IndexedFront;

constexpr VertexId kNoVertex = ~VertexId{0};

struct NewEdge {
  Segment seg;
  VertexId from = kNoVertex;
  VertexId to = kNoVertex;
  bool closing = false;  // coincides with an existing front of opposite direction
};

// Vertices of the neighbor fronts, ascending by id.
std::map<VertexId, Point> neighbor_vertices(std::span<const IndexedFront> neighbors) {
  std::map<VertexId, Point> out;
  for (const auto& g : neighbors)
    for (int k = 0; k < 2; ++k) out.emplace(g.front.vertex_ids[k], g.front.ends[k]);
  return out;
}

// Geometric legality shared by both criteria: measure floor, new edges do
// not cross nearby fronts, the element contains no front. Fills `edges`.
bool element_clear(const Front& f, Point p, VertexId apex, std::span<const IndexedFront> neighbors,
                   const AdvanceParams& params, std::array<NewEdge, 2>& edges) {
  const Triangle tri{{f.ends[0], f.ends[1], p}};
  if (!(tri.signed_area() >= params.min_element_area()) || !(tri.signed_area() > 0.0)) return false;

  edges[0] = {{f.ends[0], p}, f.vertex_ids[0], apex, false};
  edges[1] = {{p, f.ends[1]}, apex, f.vertex_ids[1], false};
  if (apex != kNoVertex) {
    for (auto& e : edges)
      for (const auto& g : neighbors) {
        const auto& ids = g.front.vertex_ids;
        if (ids[0] == e.to && ids[1] == e.from) e.closing = true;
        if (ids[0] == e.from && ids[1] == e.to) return false;  // would duplicate a front
      }
  }
  const double tol = params.tolerance;
  for (const auto& e : edges) {
    if (e.closing) continue;
    for (const auto& g : neighbors)
      if (fronts_intersect(e.seg, g.front.segment(), tol)) return false;
  }
  for (const auto& g : neighbors)
    if (element_contains_front(tri, g.front.segment(), tol)) return false;
  return true;
}

bool mutually_obstructed(const std::array<NewEdge, 2>& edges, std::span<const IndexedFront> neighbors,
                         const AdvanceParams& params) {
  for (const auto& e : edges) {
    if (e.closing) continue;
    const Vec2 ne = left_normal(e.seg);
    for (const auto& g : neighbors) {
      const auto& ids = g.front.vertex_ids;
      if (ids[0] == e.from || ids[0] == e.to || ids[1] == e.from || ids[1] == e.to) continue;
      if (dot(ne, g.front.normal) >= 0.0) continue;
      const Point ideal = perpendicular_candidate(g.front, std::numbers::sqrt3 / 2.0 * g.front.h);
      if (dist_point_front(ideal, e.seg) < params.beta2 * g.front.h) return true;
    }
  }
  return false;
}

}  // namespace

bool check_criterion_a(const Front& f, Point p, std::span<const IndexedFront> neighbors, const AdvanceParams& params) {
  const double h = f.h;
  if (signed_line_distance(f.ends[0], f.ends[1], p) < params.eta * h) return false;

  std::array<NewEdge, 2> edges;
  if (!element_clear(f, p, kNoVertex, neighbors, params, edges)) return false;

  const double min_gap = params.beta1 * h;
  for (const auto& [id, u] : neighbor_vertices(neighbors)) {
    if (id == f.vertex_ids[0] || id == f.vertex_ids[1]) continue;
    for (const auto& e : edges)
      if (dist_point_front(u, e.seg) < min_gap) return false;
  }
  for (const auto& g : neighbors)
    if (dist_point_front(p, g.front.segment()) < min_gap) return false;
  return true;
}

bool check_criterion_b(const Front& f, VertexId v, Point p, std::span<const IndexedFront> neighbors,
                       const AdvanceParams& params) {
  const double h = f.h;
  if (v == f.vertex_ids[0] || v == f.vertex_ids[1]) return false;
  if (signed_line_distance(f.ends[0], f.ends[1], p) < params.eta * h) return false;
  if (distance(p, f.mid()) > params.reach(h)) return false;
  // Keeps the whole element inside the Neighbor(f) search radius.
  if (!(dist_point_front(p, f.segment()) < params.gamma(h))) return false;

  std::array<NewEdge, 2> edges;
  if (!element_clear(f, p, v, neighbors, params, edges)) return false;

  const double min_gap = params.beta2 * h;
  for (const auto& [id, u] : neighbor_vertices(neighbors)) {
    if (id == f.vertex_ids[0] || id == f.vertex_ids[1] || id == v) continue;
    for (const auto& e : edges)
      if (!e.closing && dist_point_front(u, e.seg) < min_gap) return false;
  }
  if (params.mutual_obstruction && mutually_obstructed(edges, neighbors, params)) return false;
  return true;
}

std::optional<Candidate> propose(const IndexedFront& f, std::span<const IndexedFront> neighbors_in,
                                 const AdvanceParams& params) {
  std::vector<IndexedFront> neighbors(neighbors_in.begin(), neighbors_in.end());
  std::sort(neighbors.begin(), neighbors.end(), [](const auto& a, const auto& b) { return a.gi < b.gi; });

  std::optional<Candidate> best_existing, best_new;
  auto consider = [](std::optional<Candidate>& best, Candidate c) {
    c.quality = quality::alpha(c.triangle());
    // Evaluation order supplies the remaining tie-breaks: existing vertices
    // by ascending id, ladder heights from the top, so a lower height must
    // win an exact tie explicitly.
    if (!best || c.quality > best->quality ||
        (c.quality == best->quality && c.kind == CandidateKind::NewPoint && c.height < best->height))
      best = c;
  };

  const Front& front = f.front;
  for (const auto& [id, p] : neighbor_vertices(neighbors)) {
    if (!check_criterion_b(front, id, p, neighbors, params)) continue;
    double h_sum = 0.0;
    int h_count = 0;
    for (const auto& g : neighbors)
      if (g.front.vertex_ids[0] == id || g.front.vertex_ids[1] == id) {
        h_sum += g.front.h;
        ++h_count;
      }
    Candidate c;
    c.front_gi = f.gi;
    c.front = front;
    c.point = p;
    c.kind = CandidateKind::ExistingVertex;
    c.vertex = id;
    c.height = signed_line_distance(front.ends[0], front.ends[1], p);
    c.new_front_h = 0.5 * (front.h + h_sum / h_count);
    consider(best_existing, c);
  }
  for (double frac : kHeightLadder) {
    const double height = frac * std::numbers::sqrt3 / 2.0 * front.h;
    const Point p = perpendicular_candidate(front, height);
    if (!check_criterion_a(front, p, neighbors, params)) continue;
    Candidate c;
    c.front_gi = f.gi;
    c.front = front;
    c.point = p;
    c.kind = CandidateKind::NewPoint;
    c.height = height;
    c.new_front_h = front.h;
    consider(best_new, c);
  }
  if (best_existing && (!best_new || best_existing->quality >= params.existing_vertex_bias * best_new->quality))
    return best_existing;
  return best_new;
}

}  // namespace cpaft::advance
