#include "cpaft/shapes.hpp"

#include <cmath>
#include <numbers>

#include "cpaft/errors.hpp"

namespace cpaft::shapes {

namespace {

Point polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

// Points strictly after `from` up to `to` along the straight edge, spaced <= h.
void straight(std::vector<Point>& out, Point from, Point to, double h) {
  const int n = std::max(1, static_cast<int>(std::ceil(distance(from, to) / h - 1e-9)));
  for (int k = 1; k <= n; ++k) {
    const double t = double(k) / n;
    out.push_back(k == n ? to : Point{from.x + t * (to.x - from.x), from.y + t * (to.y - from.y)});
  }
}

// Arc of radius r from angle a0 to a1 (counter-clockwise), excluding a0.
void arc(std::vector<Point>& out, double r, double a0, double a1, double h) {
  const int n = std::max(1, static_cast<int>(std::ceil(r * (a1 - a0) / h - 1e-9)));
  for (int k = 1; k <= n; ++k) out.push_back(polar(r, a0 + (a1 - a0) * double(k) / n));
}

BoundaryLoop with_h(std::vector<Point> pts, double h, bool hole) {
  BoundaryLoop loop;
  loop.h.assign(pts.size(), h);
  loop.vertices = std::move(pts);
  loop.hole = hole;
  return loop;
}

}  // namespace

BoundaryLoop subdivide(const std::vector<Point>& corners, double h, bool hole) {
  if (!(h > 0.0)) throw PreconditionError("subdivide: h must be positive");
  std::vector<Point> pts;
  for (std::size_t k = 0; k < corners.size(); ++k) {
    pts.push_back(corners[k]);
    std::vector<Point> inner;
    straight(inner, corners[k], corners[(k + 1) % corners.size()], h);
    inner.pop_back();
    pts.insert(pts.end(), inner.begin(), inner.end());
  }
  return with_h(std::move(pts), h, hole);
}

Boundary unit_square(double h) {
  const int n = std::max(1, static_cast<int>(std::lround(1.0 / h)));
  std::vector<Point> pts;
  for (int side = 0; side < 4; ++side)
    for (int k = 0; k < n; ++k) {
      const double t = double(k) / n;
      switch (side) {
        case 0: pts.push_back({t, 0.0}); break;
        case 1: pts.push_back({1.0, t}); break;
        case 2: pts.push_back({1.0 - t, 1.0}); break;
        default: pts.push_back({0.0, 1.0 - t}); break;
      }
    }
  return {{with_h(std::move(pts), h, false)}};
}

Boundary l_shape(double h) {
  return {{subdivide({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, h, false)}};
}

Boundary gear(const GearSpec& g) {
  if (g.teeth < 3 || !(g.tip_radius > g.root_radius) || !(g.root_radius > g.hole_radius))
    throw PreconditionError("gear: inconsistent dimensions");
  const double pitch = 2.0 * std::numbers::pi / g.teeth;
  if (!(g.root_width < pitch) || !(g.tip_width <= g.root_width)) throw PreconditionError("gear: teeth overlap");
  std::vector<Point> pts;
  for (int t = 0; t < g.teeth; ++t) {
    const double c = t * pitch;
    const double r0 = c - 0.5 * g.root_width, t0 = c - 0.5 * g.tip_width;
    const double t1 = c + 0.5 * g.tip_width, r1 = c + 0.5 * g.root_width;
    const double next_r0 = c + pitch - 0.5 * g.root_width;
    if (t == 0) pts.push_back(polar(g.root_radius, r0));
    straight(pts, polar(g.root_radius, r0), polar(g.tip_radius, t0), g.h);
    arc(pts, g.tip_radius, t0, t1, g.h);
    straight(pts, polar(g.tip_radius, t1), polar(g.root_radius, r1), g.h);
    arc(pts, g.root_radius, r1, next_r0, g.h);
  }
  pts.pop_back();  // the last root arc ends on the first vertex
  Boundary b{{with_h(std::move(pts), g.h, false)}};
  if (g.hole_radius > 0.0) {
    const int n = std::max(6, static_cast<int>(std::ceil(2.0 * std::numbers::pi * g.hole_radius / g.h)));
    std::vector<Point> hole;
    for (int k = 0; k < n; ++k) hole.push_back(polar(g.hole_radius, -2.0 * std::numbers::pi * k / n));
    b.loops.push_back(with_h(std::move(hole), g.h, true));
  }
  return b;
}

Boundary hexagon(double side, double h) {
  std::vector<Point> corners;
  for (int k = 0; k < 6; ++k) corners.push_back(polar(side, k * std::numbers::pi / 3.0));
  return {{subdivide(corners, h, false)}};
}

Boundary disk(double radius, int n) {
  if (n < 3) throw PreconditionError("disk: need at least 3 edges");
  std::vector<Point> pts;
  for (int k = 0; k < n; ++k) pts.push_back(polar(radius, 2.0 * std::numbers::pi * k / n));
  const double h = 2.0 * radius * std::sin(std::numbers::pi / n);
  return {{with_h(std::move(pts), h, false)}};
}

}  // namespace cpaft::shapes
