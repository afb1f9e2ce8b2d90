#pragma once

// Candidate generation for a single front under Criteria A (new points) and
// B (existing vertices).

#include <optional>
#include <span>
#include <vector>

#include "cpaft/front_forest.hpp"
#include "cpaft/geometry.hpp"

namespace cpaft::advance {

struct AdvanceParams {
  double beta1 = 0.40;
  double beta2 = 0.15;
  double eta = 0.15;
  /// Minimum element measure coefficient: committed elements have area at
  /// least epsilon * eta * h_min^2.
  double epsilon = 0.5;
  double h_min = 1.0;
  double h_max = 1.0;
  /// Neighbor(f) radius is gamma_factor * h.
  double gamma_factor = 1.5;
  bool mutual_obstruction = false;
  /// An existing vertex is taken over the best new point when its element
  /// quality reaches this fraction of the new point's. 1 is a plain argmax.
  double existing_vertex_bias = 0.7;
  /// Absolute coordinate tolerance; 1e-12 of the domain diagonal.
  double tolerance = 1e-12;

  /// R(h_M, h_m, h) = min(3h, 1.5 h_M).
  double reach(double h) const;
  double gamma(double h) const { return gamma_factor * h; }
  double min_element_area() const { return epsilon * eta * h_min * h_min; }

  /// Throws PreconditionError unless 0 < beta2 <= beta1 < 1, 0 < eta < 1,
  /// epsilon > 0 and 0 < h_min <= h_max.
  void validate() const;
};

enum class CandidateKind { ExistingVertex = 0, NewPoint = 1 };

struct Candidate {
  sfc::GlobalIndex front_gi;
  Front front;
  Point point;
  CandidateKind kind = CandidateKind::NewPoint;
  VertexId vertex = 0;  // meaningful for ExistingVertex
  double quality = 0.0;
  double height = 0.0;  // perpendicular distance of `point` from the front
  /// Local scale given to the fronts this advancement creates.
  double new_front_h = 0.0;

  Triangle triangle() const { return {{front.ends[0], front.ends[1], point}}; }
};

/// Heights tried for the perpendicular new point, as fractions of sqrt(3)/2 h.
inline constexpr double kHeightLadder[] = {1.0, 0.8, 0.6};

/// Criterion A for a new point p. `neighbors` is Neighbor(f).
bool check_criterion_a(const Front& f, Point p, std::span<const forest::IndexedFront> neighbors,
                       const AdvanceParams& params);

/// Criterion B for the existing vertex `v` (coordinates `p`).
bool check_criterion_b(const Front& f, VertexId v, Point p, std::span<const forest::IndexedFront> neighbors,
                       const AdvanceParams& params);

/// Best legal advancement for `f`. The best existing vertex (max alpha,
/// then smaller id) passing B competes with the best ladder point (max
/// alpha, then lower height) passing A; the existing vertex wins when its
/// alpha is at least existing_vertex_bias times the new point's.
std::optional<Candidate> propose(const forest::IndexedFront& f, std::span<const forest::IndexedFront> neighbors,
                                 const AdvanceParams& params);

}  // namespace cpaft::advance
