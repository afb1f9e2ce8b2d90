#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpaft/errors.hpp"
#include "cpaft/io.hpp"
#include "cpaft/pipeline.hpp"
#include "cpaft/shapes.hpp"

using namespace cpaft;
using namespace cpaft::io;

namespace {

std::string error_of(const std::string& json) {
  try {
    parse_boundary_json(json);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Mesh one_triangle() {
  Mesh m;
  m.add_vertex({0, 0}, true);
  m.add_vertex({1, 0}, true);
  m.add_vertex({0, 1}, true);
  m.elements = {{{0, 1, 2}, 0, 0}};
  return m;
}

Mesh small_mesh() {
  const Boundary b = shapes::l_shape(0.25);
  pipeline::GenerateParams p;
  p.advance.h_min = p.advance.h_max = 0.25;
  p.n_ranks = 2;
  return pipeline::generate(b, p).state.mesh;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("square JSON") {
    const auto got = parse_boundary_json(R"({"format":"cpaft-boundary","version":1,
      "loops":[{"orientation":"ccw","vertices":[[0,0],[1,0],[1,1],[0,1]]}]})");
    REQUIRE(got.boundary.loops.size() == 1);
    CHECK(got.boundary.edge_count() == 4);
    for (double h : got.boundary.loops[0].h) CHECK(h == 1.0);  // defaults to edge length
    CHECK(got.warnings.empty());
  }

  TEST_CASE("diagnostics name the loop and edge") {
    const auto reversed = error_of(R"({"loops":[{"orientation":"ccw","vertices":[[0,0],[0,1],[1,1],[1,0]]}]})");
    CHECK(reversed.find("loop 0") != std::string::npos);
    CHECK(reversed.find("counter-clockwise") != std::string::npos);

    const auto eight = error_of(R"({"loops":[{"vertices":[[0,0],[1,1],[1,0],[0,1]]}]})");
    CHECK(eight.find("self-intersection") != std::string::npos);
    CHECK(eight.find("edge") != std::string::npos);

    CHECK(error_of(R"({"loops":[{"closed":false,"vertices":[[0,0],[1,0],[1,1]]}]})").find("open") !=
          std::string::npos);
    CHECK(error_of(R"({"loops":[{"vertices":[[0,0],[1,0]]}]})").find("at least 3") != std::string::npos);
    CHECK(error_of(R"({"loops":[{"vertices":[[0,0],[1,0],[1,1]],"h":[0.1,0.1]}]})").find("h values") !=
          std::string::npos);
    CHECK_FALSE(error_of("{not json").empty());
  }

  TEST_CASE("holes must be clockwise and inside") {
    const std::string outer = R"({"orientation":"ccw","vertices":[[0,0],[4,0],[4,4],[0,4]]})";
    CHECK(error_of(R"({"loops":[)" + outer + R"(,{"orientation":"cw","vertices":[[1,1],[1,2],[2,2],[2,1]]}]})")
              .empty());
    CHECK(error_of(R"({"loops":[)" + outer + R"(,{"orientation":"cw","vertices":[[1,1],[2,1],[2,2],[1,2]]}]})")
              .find("loop 1") != std::string::npos);
    CHECK(error_of(R"({"loops":[)" + outer + R"(,{"orientation":"cw","vertices":[[5,5],[5,6],[6,6],[6,5]]}]})")
              .find("loop 1") != std::string::npos);
  }

  TEST_CASE("scales are clamped with a warning") {
    const auto got = parse_boundary_json(
        R"({"loops":[{"vertices":[[0,0],[1,0],[1,1],[0,1]],"h":[0.01,0.5,0.5,3.0]}]})", {0.1, 1.0});
    CHECK(got.boundary.loops[0].h == std::vector<double>{0.1, 0.5, 0.5, 1.0});
    CHECK(got.warnings.size() == 1);
  }

  TEST_CASE("poly input") {
    const auto got = parse_boundary_poly(R"(# square with a square hole, listed clockwise
8 2 0 0
1 0 0
2 0 4
3 4 4
4 4 0
5 1 1
6 3 1
7 3 3
8 1 3
8 0
1 1 2
2 2 3
3 3 4
4 4 1
5 5 6
6 6 7
7 7 8
8 8 5
)");
    REQUIRE(got.boundary.loops.size() == 2);
    CHECK(got.boundary.loops[0].signed_area() > 0.0);
    CHECK(got.boundary.loops[1].hole);
    CHECK(got.boundary.loops[1].signed_area() < 0.0);
    CHECK(got.boundary.area() == doctest::Approx(12.0));
    CHECK_THROWS_AS(parse_boundary_poly("3 2 0 0\n1 0 0\n2 1 0\n3 0 1\n2 0\n1 1 2\n2 2 3\n"), InputError);
  }

  TEST_CASE("JSON round trip of a boundary") {
    const Boundary b = shapes::gear();
    const auto again = parse_boundary_json(boundary_to_json(b));
    REQUIRE(again.boundary.loops.size() == b.loops.size());
    for (std::size_t l = 0; l < b.loops.size(); ++l) {
      CHECK(again.boundary.loops[l].vertices == b.loops[l].vertices);
      CHECK(again.boundary.loops[l].h == b.loops[l].h);
      CHECK(again.boundary.loops[l].hole == b.loops[l].hole);
    }
  }

  TEST_CASE("shipped data files load") {
    for (const char* name : {"square.json", "l_shape.json", "gear.json", "hexagon.json", "disk768.json"}) {
      const std::filesystem::path p = std::filesystem::path(CPAFT_DATA_DIR) / name;
      CHECK_NOTHROW(load_boundary(p, format_for(p)));
    }
  }

  TEST_CASE("VTK export of one triangle") {
    std::ostringstream os;
    write_vtk(os, one_triangle());
    const std::string text = os.str();
    CHECK(text.rfind("# vtk DataFile Version", 0) == 0);
    CHECK(text.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
    CHECK(text.find("POINTS 3 double") != std::string::npos);
    CHECK(text.find("CELLS 1 4") != std::string::npos);
    CHECK(text.find("CELL_TYPES 1\n5") != std::string::npos);
    CHECK(text.find("SCALARS alpha") != std::string::npos);
  }

  TEST_CASE("export is deterministic and round-trips") {
    const Mesh m = small_mesh();
    const auto dir = std::filesystem::temp_directory_path();
    const auto a = dir / "cpaft_io_a.vtk", b = dir / "cpaft_io_b.vtk";
    export_mesh(m, a, MeshFormat::Vtk);
    export_mesh(m, b, MeshFormat::Vtk);
    CHECK(slurp(a) == slurp(b));
    const Mesh back = read_vtk(a);
    CHECK(back.vertices == m.vertices);  // all ids live, so compaction is the identity
    REQUIRE(back.elements.size() == m.elements.size());
    CHECK(canonical_hash(back) == canonical_hash(m));
    CHECK_THROWS_AS(export_mesh(m, dir / "no_such_dir" / "x.vtk", MeshFormat::Vtk), Error);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
  }

  TEST_CASE("OBJ export") {
    std::ostringstream os;
    write_obj(os, one_triangle());
    CHECK(os.str().find("v 0 0 0\n") != std::string::npos);
    CHECK(os.str().find("f 1 2 3\n") != std::string::npos);
  }

  TEST_CASE("malformed VTK is an input error") {
    std::istringstream bad("# vtk DataFile Version 3.0\nx\nBINARY\n");
    CHECK_THROWS_AS(read_vtk(bad), InputError);
  }

  TEST_CASE("canonical hash") {
    const Mesh m = small_mesh();
    CHECK(canonical_hash(m) == canonical_hash(small_mesh()));
    CHECK(canonical_hash(m).size() == 64);

    Mesh relabeled = m;
    for (auto& e : relabeled.elements) e.owner_rank = 7 - e.owner_rank;
    CHECK(canonical_hash(relabeled) == canonical_hash(m));

    Mesh nudged = m;
    nudged.vertices[5].x = std::nextafter(nudged.vertices[5].x, INFINITY);
    CHECK(canonical_hash(nudged) != canonical_hash(m));

    Mesh rotated = m;  // same triangle, different starting vertex
    auto& ids = rotated.elements[0].vertex_ids;
    std::rotate(ids.begin(), ids.begin() + 1, ids.end());
    CHECK(canonical_hash(rotated) == canonical_hash(m));

    Mesh dropped = m;
    dropped.elements.pop_back();
    CHECK(canonical_hash(dropped) != canonical_hash(m));
  }
}
