#pragma once

// Boundary ingestion, mesh export and the canonical mesh hash.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cpaft/boundary.hpp"
#include "cpaft/mesh.hpp"

namespace cpaft::io {

enum class BoundaryFormat { Json, PolyText };

struct ScaleLimits {
  std::optional<double> h_min;
  std::optional<double> h_max;
};

struct LoadedBoundary {
  Boundary boundary;
  /// Scale limits declared by the file itself, if any.
  ScaleLimits declared;
  std::vector<std::string> warnings;
};

/// Picks the format from the extension: .poly is poly-text, anything else JSON.
BoundaryFormat format_for(const std::filesystem::path& path);

/// Parses and validates a boundary. Edge h defaults to the edge length and
/// is clamped into `limits` (or the file's declared limits) with a warning
/// per clamped loop. Throws InputError with the offending loop and edge.
LoadedBoundary load_boundary(const std::filesystem::path& path, BoundaryFormat format, const ScaleLimits& limits = {});
LoadedBoundary parse_boundary_json(const std::string& text, const ScaleLimits& limits = {});
LoadedBoundary parse_boundary_poly(const std::string& text, const ScaleLimits& limits = {});

std::string boundary_to_json(const Boundary& b);

enum class MeshFormat { Vtk, Obj };

/// Vertices are written compacted in ascending id order, elements in
/// ascending (owner rank, creation order). Throws Error if unwritable.
void export_mesh(const Mesh& mesh, const std::filesystem::path& path, MeshFormat format);
void write_vtk(std::ostream& os, const Mesh& mesh);
void write_obj(std::ostream& os, const Mesh& mesh);

/// Reads the legacy ASCII unstructured grids written by write_vtk (and
/// other triangle-only legacy files). Throws InputError on malformed input.
Mesh read_vtk(std::istream& is);
Mesh read_vtk(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of the canonical serialization: live vertex count,
/// each live vertex (id, coordinate bit patterns) in ascending id, element
/// count, and each element's id triple rotated to start at its smallest id,
/// triples sorted ascending. All integers little-endian 64-bit.
std::string canonical_hash(const Mesh& mesh);

}  // namespace cpaft::io
