#pragma once

// Reference boundaries used by the tests, benchmarks and data/ files. Every
// edge carries the nominal scale h passed in.

#include "cpaft/boundary.hpp"

namespace cpaft::shapes {

/// [0,1]^2 with round(1/h) edges per side.
Boundary unit_square(double h);

/// [0,2]^2 minus [1,2]^2, edges of length h.
Boundary l_shape(double h);

struct GearSpec {
  int teeth = 12;
  double root_radius = 1.8;
  double tip_radius = 2.0;
  /// Angular width of a tooth at the tip, radians.
  double tip_width = 0.15707963267948966;  // pi / 20
  /// Angular width of a tooth at the root, radians.
  double root_width = 0.22689280275926285;  // 13 degrees
  double hole_radius = 0.8;                 // 0 for no hole
  double h = 0.1;
};

/// Star-like gear outline with an optional concentric clockwise hole.
Boundary gear(const GearSpec& spec = {});

/// Regular hexagon of the given side centered at the origin.
Boundary hexagon(double side, double h);

/// Regular n-gon inscribed in a circle of `radius`; h = edge length.
Boundary disk(double radius, int n);

/// Subdivides a closed polyline so no edge exceeds h (straight edges only).
BoundaryLoop subdivide(const std::vector<Point>& corners, double h, bool hole);

}  // namespace cpaft::shapes
