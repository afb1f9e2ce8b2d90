#pragma once

#include <string>
#include <vector>

#include "cpaft/geometry.hpp"

namespace cpaft {

/// One closed boundary loop. Edge k runs from vertices[k] to
/// vertices[(k + 1) % n] and carries target scale h[k].
struct BoundaryLoop {
  std::vector<Point> vertices;
  std::vector<double> h;
  /// Holes run clockwise, the outer loop counter-clockwise, so the domain
  /// is always on the left of every edge.
  bool hole = false;

  std::size_t edge_count() const { return vertices.size(); }
  double signed_area() const;
};

struct Boundary {
  std::vector<BoundaryLoop> loops;

  std::size_t edge_count() const;
  /// Signed area of the enclosed domain (outer minus holes).
  double area() const;
  std::vector<Point> all_vertices() const;
  double min_h() const;
  double max_h() const;
};

/// Throws InputError naming the loop (and edge where it applies) when a loop
/// has fewer than three vertices, a zero-length or non-finite edge, the
/// wrong orientation, a repeated vertex, crosses itself or another loop, or
/// a hole lies outside the outer loop.
void validate_boundary(const Boundary& b);

/// Even-odd point-in-polygon test against one loop.
bool point_in_loop(Point p, const BoundaryLoop& loop);

}  // namespace cpaft
