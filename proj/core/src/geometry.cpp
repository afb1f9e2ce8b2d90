#include "cpaft/geometry.hpp"

#include <algorithm>
#include <limits>

#include "cpaft/errors.hpp"

namespace cpaft {

bool is_finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

Vec2 left_normal(Segment s) {
  const Vec2 d = s.b - s.a;
  const double len = norm(d);
  if (!(len > 0.0)) throw DegenerateGeometry("zero-length front: corrupted front");
  return {-d.y / len, d.x / len};
}

Front make_front(VertexId v0, Point p0, VertexId v1, Point p1, double h, CreationId creation_id) {
  Front f;
  f.vertex_ids = {v0, v1};
  f.ends = {p0, p1};
  f.normal = left_normal({p0, p1});
  f.h = h;
  f.creation_id = creation_id;
  return f;
}

double local_tolerance(std::initializer_list<Point> pts) {
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  for (const Point& p : pts) {
    lo_x = std::min(lo_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_x = std::max(hi_x, p.x);
    hi_y = std::max(hi_y, p.y);
  }
  return kRelativeTolerance * std::hypot(hi_x - lo_x, hi_y - lo_y);
}

double signed_line_distance(Point a, Point b, Point c) {
  const double len = distance(a, b);
  if (!(len > 0.0)) throw DegenerateGeometry("zero-length front: corrupted front");
  return orient2d(a, b, c) / len;
}

int orientation_sign(Point a, Point b, Point c, double tol) {
  const double d = signed_line_distance(a, b, c);
  if (d > tol) return 1;
  if (d < -tol) return -1;
  return 0;
}

namespace {

void require_nondegenerate(Segment s) {
  if (s.a == s.b) throw DegenerateGeometry("zero-length front: corrupted front");
}

double point_segment_distance(Point p, Point a, Point b) {
  const Vec2 d = b - a;
  const double len2 = dot(d, d);
  const double t = dot(p - a, d) / len2;
  if (t <= 0.0) return distance(p, a);
  if (t >= 1.0) return distance(p, b);
  // Perpendicular form: exactly zero for points on the segment.
  return std::abs(cross(d, p - a)) / std::sqrt(len2);
}

// Canonical operand order so that (a, b) and (b, a) evaluate identically.
std::pair<Segment, Segment> canonical_pair(Segment a, Segment b) {
  if (lex_less(a.b, a.a)) std::swap(a.a, a.b);
  if (lex_less(b.b, b.a)) std::swap(b.a, b.b);
  if (lex_less(b.a, a.a) || (b.a == a.a && lex_less(b.b, a.b))) std::swap(a, b);
  return {a, b};
}

bool proper_or_touching(Segment a, Segment b, double tol) {
  const int o1 = orientation_sign(a.a, a.b, b.a, tol);
  const int o2 = orientation_sign(a.a, a.b, b.b, tol);
  const int o3 = orientation_sign(b.a, b.b, a.a, tol);
  const int o4 = orientation_sign(b.a, b.b, a.b, tol);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  return point_segment_distance(b.a, a.a, a.b) <= tol || point_segment_distance(b.b, a.a, a.b) <= tol ||
         point_segment_distance(a.a, b.a, b.b) <= tol || point_segment_distance(a.b, b.a, b.b) <= tol;
}

}  // namespace

bool fronts_intersect(Segment a, Segment b) {
  return fronts_intersect(a, b, local_tolerance({a.a, a.b, b.a, b.b}));
}

bool fronts_intersect(Segment a, Segment b, double tol) {
  require_nondegenerate(a);
  require_nondegenerate(b);
  const auto [s, t] = canonical_pair(a, b);

  // Exactly shared endpoints.
  const bool aa = s.a == t.a, ab = s.a == t.b, ba = s.b == t.a, bb = s.b == t.b;
  const int shared = int(aa) + int(ab) + int(ba) + int(bb);
  if (shared >= 2) return true;  // same segment, possibly reversed
  if (shared == 1) {
    const Point common = (aa || ab) ? s.a : s.b;
    const Point x = (aa || ab) ? s.b : s.a;
    const Point y = (aa || ba) ? t.b : t.a;
    // Adjacent fronts only intersect when they fold back over each other.
    const bool collinear = std::abs(signed_line_distance(common, x, y)) <= tol;
    return collinear && dot(x - common, y - common) > 0.0;
  }
  return proper_or_touching(s, t, tol);
}

bool element_contains_front(const Triangle& tri, Segment s) {
  return element_contains_front(tri, s, local_tolerance({tri.p[0], tri.p[1], tri.p[2], s.a, s.b}));
}

bool element_contains_front(const Triangle& tri, Segment s, double tol) {
  std::array<Point, 3> p = tri.p;
  const double area2 = orient2d(p[0], p[1], p[2]);
  if (std::abs(area2) <= tol * std::max({distance(p[0], p[1]), distance(p[1], p[2]), distance(p[2], p[0])}))
    throw DegenerateGeometry("degenerate element: collinear vertices");
  if (area2 < 0.0) std::swap(p[1], p[2]);

  // Clip the parameter interval [0, 1] against the three open half-planes
  // shrunk inward by tol.
  double lo = 0.0, hi = 1.0;
  for (int e = 0; e < 3; ++e) {
    const Point u = p[e], w = p[(e + 1) % 3];
    const double d0 = signed_line_distance(u, w, s.a) - tol;
    const double d1 = signed_line_distance(u, w, s.b) - tol;
    if (d0 <= 0.0 && d1 <= 0.0) return false;
    if (d0 > 0.0 && d1 > 0.0) continue;
    const double t = d0 / (d0 - d1);
    if (d0 <= 0.0)
      lo = std::max(lo, t);
    else
      hi = std::min(hi, t);
  }
  return lo < hi;
}

double dist_point_front(Point p, Segment s) {
  require_nondegenerate(s);
  return point_segment_distance(p, s.a, s.b);
}

double dist_front_front(Segment a, Segment b) {
  require_nondegenerate(a);
  require_nondegenerate(b);
  const auto [s, t] = canonical_pair(a, b);
  const double tol = local_tolerance({s.a, s.b, t.a, t.b});
  if (proper_or_touching(s, t, tol)) return 0.0;
  return std::min({point_segment_distance(t.a, s.a, s.b), point_segment_distance(t.b, s.a, s.b),
                   point_segment_distance(s.a, t.a, t.b), point_segment_distance(s.b, t.a, t.b)});
}

Point perpendicular_candidate(const Front& f, double height) {
  if (!(height > 0.0)) throw PreconditionError("perpendicular_candidate: height must be positive");
  return f.mid() + height * f.normal;
}

Radii inradius_circumradius(const Triangle& tri) {
  const double a = distance(tri.p[1], tri.p[2]);
  const double b = distance(tri.p[2], tri.p[0]);
  const double c = distance(tri.p[0], tri.p[1]);
  const double area = std::abs(tri.signed_area());
  const double longest = std::max({a, b, c});
  if (!(area > kRelativeTolerance * longest * longest))
    throw DegenerateGeometry("degenerate element: collinear vertices");
  const double s = 0.5 * (a + b + c);
  return {area / s, a * b * c / (4.0 * area)};
}

bool triangles_interfere(const Triangle& t1, const Triangle& t2, double tol) {
  for (int i = 0; i < 3; ++i) {
    const Segment e1{t1.p[i], t1.p[(i + 1) % 3]};
    for (int j = 0; j < 3; ++j) {
      const Segment e2{t2.p[j], t2.p[(j + 1) % 3]};
      if (fronts_intersect(e1, e2, tol)) return true;
    }
  }
  // No boundary contact beyond shared vertices: either disjoint, or one
  // triangle lies inside the other.
  auto strictly_inside = [tol](const Triangle& t, Point q) {
    int sgn = t.signed_area() > 0.0 ? 1 : -1;
    for (int e = 0; e < 3; ++e)
      if (sgn * signed_line_distance(t.p[e], t.p[(e + 1) % 3], q) <= tol) return false;
    return true;
  };
  for (const Point& q : t2.p)
    if (strictly_inside(t1, q)) return true;
  for (const Point& q : t1.p)
    if (strictly_inside(t2, q)) return true;
  // Identical triangles share all vertices and no edges cross.
  int shared = 0;
  for (const Point& q : t1.p)
    shared += int(q == t2.p[0] || q == t2.p[1] || q == t2.p[2]);
  return shared == 3;
}

}  // namespace cpaft
