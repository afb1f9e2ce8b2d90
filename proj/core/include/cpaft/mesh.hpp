#pragma once

#include <cstdint>
#include <vector>

#include "cpaft/geometry.hpp"

namespace cpaft {

/// Vertex and element store shared by the generator, smoothing and IO.
/// Vertex ids index `vertices`; ids retired by merging stay allocated with
/// `alive[id] == false` so numbering never shifts.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<bool> boundary;
  std::vector<bool> alive;
  std::vector<Element> elements;

  VertexId add_vertex(Point p, bool on_boundary) {
    vertices.push_back(p);
    boundary.push_back(on_boundary);
    alive.push_back(true);
    return vertices.size() - 1;
  }

  Triangle triangle(const Element& e) const {
    return {{vertices[e.vertex_ids[0]], vertices[e.vertex_ids[1]], vertices[e.vertex_ids[2]]}};
  }

  std::size_t live_vertex_count() const {
    std::size_t n = 0;
    for (bool a : alive) n += a ? 1 : 0;
    return n;
  }
};

}  // namespace cpaft
