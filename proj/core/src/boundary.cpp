#include "cpaft/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cpaft/errors.hpp"

namespace cpaft {

double BoundaryLoop::signed_area() const {
  double a = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t k = 0; k < n; ++k) a += cross(vertices[k], vertices[(k + 1) % n]);
  return 0.5 * a;
}

std::size_t Boundary::edge_count() const {
  std::size_t n = 0;
  for (const auto& l : loops) n += l.edge_count();
  return n;
}

double Boundary::area() const {
  double a = 0.0;
  for (const auto& l : loops) a += l.signed_area();
  return a;
}

std::vector<Point> Boundary::all_vertices() const {
  std::vector<Point> out;
  for (const auto& l : loops) out.insert(out.end(), l.vertices.begin(), l.vertices.end());
  return out;
}

double Boundary::min_h() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& l : loops)
    for (double h : l.h) m = std::min(m, h);
  return m;
}

double Boundary::max_h() const {
  double m = 0.0;
  for (const auto& l : loops)
    for (double h : l.h) m = std::max(m, h);
  return m;
}

bool point_in_loop(Point p, const BoundaryLoop& loop) {
  bool inside = false;
  const auto& v = loop.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y) && p.x < (v[j].x - v[i].x) * (p.y - v[i].y) / (v[j].y - v[i].y) + v[i].x)
      inside = !inside;
  }
  return inside;
}

namespace {

[[noreturn]] void fail(std::size_t loop, const std::string& what) {
  throw InputError("boundary loop " + std::to_string(loop) + ": " + what);
}

[[noreturn]] void fail(std::size_t loop, std::size_t edge, const std::string& what) {
  throw InputError("boundary loop " + std::to_string(loop) + ", edge " + std::to_string(edge) + ": " + what);
}

double diagonal(const std::vector<Point>& pts) {
  double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
  for (const Point& p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return std::hypot(x1 - x0, y1 - y0);
}

}  // namespace

void validate_boundary(const Boundary& b) {
  if (b.loops.empty()) throw InputError("boundary: no loops");
  std::map<std::pair<double, double>, std::size_t> seen;  // vertex -> loop
  for (std::size_t li = 0; li < b.loops.size(); ++li) {
    const auto& loop = b.loops[li];
    const std::size_t n = loop.vertices.size();
    if (n < 3) fail(li, "needs at least 3 vertices, has " + std::to_string(n));
    if (loop.h.size() != n) fail(li, "expected one h value per edge");
    if (li == 0 && loop.hole) fail(li, "the first loop must be the outer boundary");
    if (li > 0 && !loop.hole) fail(li, "only one outer loop is supported; further loops must be holes");
    for (std::size_t k = 0; k < n; ++k) {
      const Point a = loop.vertices[k], c = loop.vertices[(k + 1) % n];
      if (!is_finite(a)) fail(li, k, "non-finite coordinate");
      if (a == c) fail(li, k, "zero-length edge");
      if (!(loop.h[k] > 0.0) || !std::isfinite(loop.h[k])) fail(li, k, "h must be positive");
      if (!seen.emplace(std::pair(a.x, a.y), li).second) fail(li, k, "vertex repeated (pinched or touching loops)");
    }
  }

  // Pairwise edge crossings across all loops.
  struct E {
    Segment s;
    std::size_t loop, edge;
    double x0, x1;
  };
  std::vector<E> edges;
  for (std::size_t li = 0; li < b.loops.size(); ++li) {
    const auto& v = b.loops[li].vertices;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const Segment s{v[k], v[(k + 1) % v.size()]};
      edges.push_back({s, li, k, std::min(s.a.x, s.b.x), std::max(s.a.x, s.b.x)});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const E& a, const E& c) { return a.x0 < c.x0; });
  const double tol = kRelativeTolerance * diagonal(b.all_vertices());
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = i + 1; j < edges.size() && edges[j].x0 <= edges[i].x1 + tol; ++j)
      if (fronts_intersect(edges[i].s, edges[j].s, tol)) {
        const auto& [lo, hi] = std::minmax(edges[i], edges[j], [](const E& a, const E& c) {
          return std::pair(a.loop, a.edge) < std::pair(c.loop, c.edge);
        });
        fail(lo.loop, lo.edge, "self-intersection with loop " + std::to_string(hi.loop) + " edge " + std::to_string(hi.edge));
      }

  // Orientation is only meaningful once the loops are known to be simple.
  for (std::size_t li = 0; li < b.loops.size(); ++li) {
    const auto& loop = b.loops[li];
    const double area = loop.signed_area();
    if (!loop.hole && !(area > 0.0))
      fail(li, "outer loop must be counter-clockwise (signed area " + std::to_string(area) + ")");
    if (loop.hole && !(area < 0.0)) fail(li, "hole loop must be clockwise (signed area " + std::to_string(area) + ")");
  }
  for (std::size_t li = 1; li < b.loops.size(); ++li)
    if (!point_in_loop(b.loops[li].vertices[0], b.loops[0])) fail(li, "hole lies outside the outer loop");
}

}  // namespace cpaft
