#include "cpaft/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "cpaft/errors.hpp"
#include "cpaft/quality.hpp"
#include "json.hpp"

namespace cpaft::io {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Defaults missing h to edge length, then clamps into the effective limits.
void finish_scales(LoadedBoundary& out, const ScaleLimits& limits) {
  const auto lo = limits.h_min ? limits.h_min : out.declared.h_min;
  const auto hi = limits.h_max ? limits.h_max : out.declared.h_max;
  if (lo && hi && *lo > *hi) throw InputError("h_min exceeds h_max");
  for (std::size_t li = 0; li < out.boundary.loops.size(); ++li) {
    auto& loop = out.boundary.loops[li];
    const std::size_t n = loop.vertices.size();
    if (loop.h.empty())
      for (std::size_t k = 0; k < n; ++k) loop.h.push_back(distance(loop.vertices[k], loop.vertices[(k + 1) % n]));
    std::size_t clamped = 0;
    for (double& h : loop.h) {
      const double c = std::clamp(h, lo.value_or(h), hi.value_or(h));
      if (c != h) ++clamped;
      h = c;
    }
    if (clamped)
      out.warnings.push_back("loop " + std::to_string(li) + ": " + std::to_string(clamped) +
                             " edge scale(s) clamped into [h_min, h_max]");
  }
  validate_boundary(out.boundary);
}

}  // namespace

BoundaryFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".poly" ? BoundaryFormat::PolyText : BoundaryFormat::Json;
}

LoadedBoundary load_boundary(const std::filesystem::path& path, BoundaryFormat format, const ScaleLimits& limits) {
  const std::string text = read_file(path);
  return format == BoundaryFormat::Json ? parse_boundary_json(text, limits) : parse_boundary_poly(text, limits);
}

LoadedBoundary parse_boundary_json(const std::string& text, const ScaleLimits& limits) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("boundary JSON: ") + e.what());
  }
  LoadedBoundary out;
  try {
    if (doc.contains("format") && doc["format"] != "cpaft-boundary")
      throw InputError("boundary JSON: unknown format tag " + doc["format"].dump());
    if (doc.contains("version") && doc["version"].get<int>() != 1)
      throw InputError("boundary JSON: unsupported version " + doc["version"].dump());
    if (doc.contains("h_min")) out.declared.h_min = doc["h_min"].get<double>();
    if (doc.contains("h_max")) out.declared.h_max = doc["h_max"].get<double>();
    if (!doc.contains("loops") || !doc["loops"].is_array()) throw InputError("boundary JSON: missing \"loops\" array");
    std::size_t li = 0;
    for (const auto& jl : doc["loops"]) {
      const std::string where = "boundary loop " + std::to_string(li);
      BoundaryLoop loop;
      const std::string orient = jl.value("orientation", std::string("ccw"));
      if (orient != "ccw" && orient != "cw") throw InputError(where + ": orientation must be \"ccw\" or \"cw\"");
      loop.hole = orient == "cw";
      if (jl.contains("closed") && !jl["closed"].get<bool>()) throw InputError(where + ": loop is open");
      for (const auto& v : jl.at("vertices")) {
        if (!v.is_array() || v.size() != 2) throw InputError(where + ": vertices must be [x, y] pairs");
        loop.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
      }
      // A repeated first vertex at the end is accepted as explicit closure.
      if (loop.vertices.size() > 1 && loop.vertices.front() == loop.vertices.back()) loop.vertices.pop_back();
      if (jl.contains("h")) {
        const auto& jh = jl["h"];
        if (jh.is_number()) {
          loop.h.assign(loop.vertices.size(), jh.get<double>());
        } else {
          for (const auto& x : jh) loop.h.push_back(x.get<double>());
          if (loop.h.size() != loop.vertices.size())
            throw InputError(where + ": expected " + std::to_string(loop.vertices.size()) + " h values, got " +
                             std::to_string(loop.h.size()));
        }
      }
      out.boundary.loops.push_back(std::move(loop));
      ++li;
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("boundary JSON: ") + e.what());
  }
  finish_scales(out, limits);
  return out;
}

LoadedBoundary parse_boundary_poly(const std::string& text, const ScaleLimits& limits) {
  // Strip comments, then read whitespace-separated numbers.
  std::istringstream lines(text);
  std::string line, clean;
  while (std::getline(lines, line)) clean += line.substr(0, line.find('#')) + '\n';
  std::istringstream in(clean);
  auto need = [&](auto& x, const char* what) {
    if (!(in >> x)) throw InputError(std::string("poly: expected ") + what);
  };

  std::size_t nv = 0, dim = 0, nattr = 0, nmark = 0;
  need(nv, "vertex count");
  need(dim, "dimension");
  need(nattr, "attribute count");
  need(nmark, "boundary marker flag");
  if (dim != 2) throw InputError("poly: only 2D input is supported");
  std::map<long, Point> pts;
  for (std::size_t i = 0; i < nv; ++i) {
    long idx;
    Point p;
    need(idx, "vertex index");
    need(p.x, "x");
    need(p.y, "y");
    double skip;
    for (std::size_t a = 0; a < nattr + nmark; ++a) need(skip, "vertex attribute");
    if (!pts.emplace(idx, p).second) throw InputError("poly: duplicate vertex index " + std::to_string(idx));
  }
  std::size_t ns = 0, smark = 0;
  need(ns, "segment count");
  need(smark, "segment marker flag");
  std::map<long, std::vector<long>> adj;
  for (std::size_t i = 0; i < ns; ++i) {
    long idx, a, b;
    need(idx, "segment index");
    need(a, "segment endpoint");
    need(b, "segment endpoint");
    double skip;
    for (std::size_t m = 0; m < smark; ++m) need(skip, "segment marker");
    if (!pts.count(a) || !pts.count(b))
      throw InputError("poly: segment " + std::to_string(idx) + " references an unknown vertex");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (const auto& [v, nb] : adj)
    if (nb.size() != 2)
      throw InputError("poly: vertex " + std::to_string(v) + " has " + std::to_string(nb.size()) +
                       " segments; loops must be open-free and unbranched (open loop)");

  // Walk cycles from the lowest unvisited vertex.
  std::map<long, bool> used;
  std::vector<BoundaryLoop> loops;
  for (const auto& [start, nb] : adj) {
    if (used[start]) continue;
    BoundaryLoop loop;
    long prev = -1, cur = start;
    do {
      used[cur] = true;
      loop.vertices.push_back(pts.at(cur));
      const auto& n2 = adj.at(cur);
      const long next = (n2[0] != prev || n2[0] == n2[1]) ? n2[0] : n2[1];
      prev = cur;
      cur = next;
    } while (cur != start);
    loops.push_back(std::move(loop));
  }
  if (loops.empty()) throw InputError("poly: no segments");
  // The loop of largest area is the outer boundary; orient CCW, holes CW.
  std::size_t outer = 0;
  for (std::size_t i = 0; i < loops.size(); ++i)
    if (std::abs(loops[i].signed_area()) > std::abs(loops[outer].signed_area())) outer = i;
  std::rotate(loops.begin(), loops.begin() + static_cast<long>(outer), loops.begin() + static_cast<long>(outer) + 1);
  LoadedBoundary out;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    auto& l = loops[i];
    l.hole = i > 0;
    const double a = l.signed_area();
    if ((l.hole && a > 0.0) || (!l.hole && a < 0.0)) std::reverse(l.vertices.begin(), l.vertices.end());
    out.boundary.loops.push_back(std::move(l));
  }
  finish_scales(out, limits);
  return out;
}

std::string boundary_to_json(const Boundary& b) {
  std::ostringstream os;
  os << "{\n  \"format\": \"cpaft-boundary\",\n  \"version\": 1,\n  \"loops\": [\n";
  for (std::size_t li = 0; li < b.loops.size(); ++li) {
    const auto& l = b.loops[li];
    os << "    {\n      \"orientation\": \"" << (l.hole ? "cw" : "ccw") << "\",\n      \"vertices\": [";
    for (std::size_t k = 0; k < l.vertices.size(); ++k)
      os << (k ? ", " : "") << (k % 4 == 0 ? "\n        " : "") << '[' << num(l.vertices[k].x) << ", "
         << num(l.vertices[k].y) << ']';
    os << "\n      ],\n      \"h\": ";
    const bool uniform = std::all_of(l.h.begin(), l.h.end(), [&](double h) { return h == l.h.front(); });
    if (uniform && !l.h.empty()) {
      os << num(l.h.front());
    } else {
      os << '[';
      for (std::size_t k = 0; k < l.h.size(); ++k) os << (k ? ", " : "") << num(l.h[k]);
      os << ']';
    }
    os << "\n    }" << (li + 1 < b.loops.size() ? "," : "") << '\n';
  }
  os << "  ]\n}\n";
  return os.str();
}

namespace {

struct Compacted {
  std::vector<VertexId> ids;         // live ids ascending
  std::map<VertexId, std::size_t> index;
  std::vector<const Element*> elements;  // export order
};

Compacted compact(const Mesh& mesh) {
  Compacted c;
  for (VertexId v = 0; v < mesh.vertices.size(); ++v)
    if (mesh.alive[v]) {
      c.index[v] = c.ids.size();
      c.ids.push_back(v);
    }
  for (const auto& e : mesh.elements) c.elements.push_back(&e);
  std::sort(c.elements.begin(), c.elements.end(), [](const Element* a, const Element* b) {
    return std::pair(a->owner_rank, a->sequence) < std::pair(b->owner_rank, b->sequence);
  });
  return c;
}

}  // namespace

void write_vtk(std::ostream& os, const Mesh& mesh) {
  const Compacted c = compact(mesh);
  const std::size_t m = c.elements.size();
  os << "# vtk DataFile Version 3.0\ncpaft triangle mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << c.ids.size() << " double\n";
  for (VertexId v : c.ids) os << num(mesh.vertices[v].x) << ' ' << num(mesh.vertices[v].y) << " 0\n";
  os << "CELLS " << m << ' ' << 4 * m << '\n';
  for (const Element* e : c.elements)
    os << "3 " << c.index.at(e->vertex_ids[0]) << ' ' << c.index.at(e->vertex_ids[1]) << ' '
       << c.index.at(e->vertex_ids[2]) << '\n';
  os << "CELL_TYPES " << m << '\n';
  for (std::size_t i = 0; i < m; ++i) os << "5\n";
  os << "CELL_DATA " << m << "\nSCALARS alpha double 1\nLOOKUP_TABLE default\n";
  for (const Element* e : c.elements) os << num(quality::alpha(mesh.triangle(*e))) << '\n';
  os << "POINT_DATA " << c.ids.size() << "\nSCALARS boundary int 1\nLOOKUP_TABLE default\n";
  for (VertexId v : c.ids) os << (mesh.boundary[v] ? 1 : 0) << '\n';
}

void write_obj(std::ostream& os, const Mesh& mesh) {
  const Compacted c = compact(mesh);
  os << "# cpaft triangle mesh\n";
  for (VertexId v : c.ids) os << "v " << num(mesh.vertices[v].x) << ' ' << num(mesh.vertices[v].y) << " 0\n";
  for (const Element* e : c.elements)
    os << "f " << c.index.at(e->vertex_ids[0]) + 1 << ' ' << c.index.at(e->vertex_ids[1]) + 1 << ' '
       << c.index.at(e->vertex_ids[2]) + 1 << '\n';
}

void export_mesh(const Mesh& mesh, const std::filesystem::path& path, MeshFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  if (format == MeshFormat::Vtk)
    write_vtk(out, mesh);
  else
    write_obj(out, mesh);
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

Mesh read_vtk(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# vtk DataFile", 0) != 0) throw InputError("vtk: missing header");
  std::getline(is, line);  // title
  std::string word;
  if (!(is >> word) || word != "ASCII") throw InputError("vtk: only ASCII files are supported");
  if (!(is >> word) || word != "DATASET" || !(is >> word) || word != "UNSTRUCTURED_GRID")
    throw InputError("vtk: expected DATASET UNSTRUCTURED_GRID");
  Mesh mesh;
  std::size_t n_points = 0;
  std::vector<int> boundary_flags;
  bool on_points = false;
  std::size_t data_count = 0;
  while (is >> word) {
    if (word == "POINTS") {
      std::string type;
      if (!(is >> n_points >> type)) throw InputError("vtk: bad POINTS line");
      for (std::size_t i = 0; i < n_points; ++i) {
        double x, y, z;
        if (!(is >> x >> y >> z)) throw InputError("vtk: truncated POINTS");
        mesh.add_vertex({x, y}, false);
      }
    } else if (word == "CELLS") {
      std::size_t m, total;
      if (!(is >> m >> total)) throw InputError("vtk: bad CELLS line");
      for (std::size_t i = 0; i < m; ++i) {
        std::size_t k;
        Element e;
        if (!(is >> k) || k != 3) throw InputError("vtk: only triangle cells are supported");
        for (auto& v : e.vertex_ids)
          if (!(is >> v) || v >= n_points) throw InputError("vtk: cell references a missing point");
        e.sequence = i;
        mesh.elements.push_back(e);
      }
    } else if (word == "CELL_TYPES") {
      std::size_t m;
      is >> m;
      for (std::size_t i = 0; i < m; ++i) {
        int t;
        if (!(is >> t) || t != 5) throw InputError("vtk: only VTK_TRIANGLE (5) cells are supported");
      }
    } else if (word == "CELL_DATA" || word == "POINT_DATA") {
      on_points = word == "POINT_DATA";
      if (!(is >> data_count)) throw InputError("vtk: bad " + word + " line");
    } else if (word == "SCALARS") {
      std::string name, type;
      if (!(is >> name >> type)) throw InputError("vtk: bad SCALARS line");
      std::getline(is, line);  // optional component count
      std::string lut, table;
      if (!(is >> lut >> table) || lut != "LOOKUP_TABLE") throw InputError("vtk: SCALARS without LOOKUP_TABLE");
      for (std::size_t i = 0; i < data_count; ++i) {
        double x;
        if (!(is >> x)) throw InputError("vtk: truncated " + name + " data");
        if (on_points && name == "boundary") boundary_flags.push_back(static_cast<int>(x));
      }
    } else {
      throw InputError("vtk: unsupported section " + word);
    }
  }
  if (boundary_flags.size() == n_points)
    for (std::size_t i = 0; i < n_points; ++i) mesh.boundary[i] = boundary_flags[i] != 0;
  return mesh;
}

Mesh read_vtk(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_vtk(in);
}

std::string canonical_hash(const Mesh& mesh) {
  std::vector<unsigned char> buf;
  auto put = [&](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>(x >> (8 * i)));
  };
  std::uint64_t live = 0;
  for (bool a : mesh.alive) live += a ? 1 : 0;
  put(live);
  for (VertexId v = 0; v < mesh.vertices.size(); ++v) {
    if (!mesh.alive[v]) continue;
    put(v);
    put(std::bit_cast<std::uint64_t>(mesh.vertices[v].x));
    put(std::bit_cast<std::uint64_t>(mesh.vertices[v].y));
  }
  std::vector<std::array<VertexId, 3>> tris;
  tris.reserve(mesh.elements.size());
  for (const auto& e : mesh.elements) {
    auto t = e.vertex_ids;
    std::rotate(t.begin(), std::min_element(t.begin(), t.end()), t.end());
    tris.push_back(t);
  }
  std::sort(tris.begin(), tris.end());
  put(tris.size());
  for (const auto& t : tris)
    for (VertexId v : t) put(v);

  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), buf.data(), buf.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
    throw Error("SHA-256 computation failed");
  std::string hex;
  static constexpr char digits[] = "0123456789abcdef";
  for (unsigned i = 0; i < len; ++i) {
    hex += digits[md[i] >> 4];
    hex += digits[md[i] & 15];
  }
  return hex;
}

}  // namespace cpaft::io
