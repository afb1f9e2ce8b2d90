#pragma once

// 2D geometric kernel: points, fronts, elements and the predicates the
// advancing-front criteria are built from. Every function here is pure.

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace cpaft {

using VertexId = std::uint64_t;
using CreationId = std::uint64_t;

inline constexpr int kDim = 2;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

using Point = Vec2;

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(b - a); }
constexpr Point midpoint(Point a, Point b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

/// Lexicographic (x, then y) order; used to canonicalize operand order.
constexpr bool lex_less(Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

bool is_finite(Point p);

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
constexpr double orient2d(Point a, Point b, Point c) { return cross(b - a, c - a); }

/// Signed area of the triangle (a, b, c); positive when counter-clockwise.
constexpr double signed_area(Point a, Point b, Point c) { return 0.5 * orient2d(a, b, c); }

struct Segment {
  Point a;
  Point b;

  double length() const { return distance(a, b); }
  Point mid() const { return midpoint(a, b); }
};

/// Oriented boundary facet of the unmeshed region. The unmeshed region lies
/// on the left of `ends[0] -> ends[1]`, i.e. along `normal`.
struct Front {
  std::array<VertexId, 2> vertex_ids{};
  std::array<Point, 2> ends{};
  Vec2 normal{};
  double h = 0.0;
  CreationId creation_id = 0;

  Segment segment() const { return {ends[0], ends[1]}; }
  Point mid() const { return midpoint(ends[0], ends[1]); }
  double length() const { return distance(ends[0], ends[1]); }
};

/// Builds a front between two stored vertices; the normal is the left unit
/// normal of the directed edge. Throws DegenerateGeometry for a zero-length edge.
Front make_front(VertexId v0, Point p0, VertexId v1, Point p1, double h, CreationId creation_id);

/// Left unit normal of the directed segment.
Vec2 left_normal(Segment s);

struct Element {
  std::array<VertexId, 3> vertex_ids{};
  int owner_rank = 0;
  /// Global creation order; decomposition-invariant.
  std::uint64_t sequence = 0;
};

struct Triangle {
  std::array<Point, 3> p{};

  double signed_area() const { return cpaft::signed_area(p[0], p[1], p[2]); }
};

/// Absolute tolerance used for coordinate comparisons: 1e-12 of an extent.
inline constexpr double kRelativeTolerance = 1e-12;

/// Tolerance scaled by the bounding-box diagonal of the given points.
double local_tolerance(std::initializer_list<Point> pts);

/// Signed distance of `c` from the line through (a, b), positive on the left.
double signed_line_distance(Point a, Point b, Point c);

/// -1, 0 or +1 depending on which side of line (a, b) point c lies, treating
/// anything within `tol` of the line as collinear.
int orientation_sign(Point a, Point b, Point c, double tol);

/// True iff the closed segments share a point, except that two segments
/// whose only common point is an exactly shared endpoint are not considered
/// intersecting. Throws DegenerateGeometry on a zero-length segment.
bool fronts_intersect(Segment a, Segment b);
bool fronts_intersect(Segment a, Segment b, double tol);

/// True iff some part of `s` lies strictly inside the triangle.
bool element_contains_front(const Triangle& tri, Segment s);
bool element_contains_front(const Triangle& tri, Segment s, double tol);

double dist_point_front(Point p, Segment s);

/// Minimum distance between closed segments; 0 when they intersect. Exactly
/// symmetric in its operands.
double dist_front_front(Segment a, Segment b);

/// Point at `height` from the front's midpoint along its inward normal.
Point perpendicular_candidate(const Front& f, double height);

struct Radii {
  double inradius = 0.0;
  double circumradius = 0.0;
};

/// (R_i, R_c) with R_i = area / semiperimeter and R_c = abc / (4 area).
/// Throws DegenerateGeometry for collinear vertices.
Radii inradius_circumradius(const Triangle& tri);

/// True iff the two closed triangles share any point other than a common
/// vertex (shared vertices compared by exact coordinates).
bool triangles_interfere(const Triangle& t1, const Triangle& t2, double tol);

}  // namespace cpaft
