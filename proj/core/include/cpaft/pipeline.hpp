#pragma once

// The parallel advancing-front driver: per iteration it decomposes the live
// fronts along the Hilbert curve, builds the overlapping forest, proposes
// one advancement per owned front, selects a conflict-free subset with the
// consistent MIS and commits it in global-index order.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpaft/advancer.hpp"
#include "cpaft/boundary.hpp"
#include "cpaft/mesh.hpp"
#include "cpaft/mis.hpp"
#include "cpaft/sfc_partition.hpp"

namespace cpaft::pipeline {

struct GenerateParams {
  advance::AdvanceParams advance;
  int n_ranks = 1;
  /// Worker threads backing the logical ranks; never affects the output.
  int n_threads = 1;
  /// Background grid level; 0 selects one from h_max.
  int sfc_level = 0;
  /// Unconditional repartition period, in iterations.
  int repartition_interval = 5;
  int mis_max_iterations = mis::kDefaultMaxIterations;
  mis::ConflictRule conflict_rule = mis::ConflictRule::ProximityAndOverlap;
  /// Verify loop closure and area bookkeeping after every iteration.
  bool check_invariants = true;
};

using EdgeKey = std::pair<VertexId, VertexId>;

struct MeshState {
  Mesh mesh;
  std::map<CreationId, Front> fronts;  // live fronts by creation id
  std::map<EdgeKey, CreationId> front_by_edge;
  std::vector<EdgeKey> boundary_edges;  // the initial fronts, by vertex id
  CreationId next_creation_id = 0;
  std::uint64_t next_sequence = 0;
  /// Iterations that committed at least one advancement.
  std::size_t iteration = 0;
  std::size_t merges = 0;
  double volume_initial = 0.0;
  /// Area enclosed by the live fronts.
  double volume_remaining = 0.0;
  double element_area = 0.0;

  bool done() const { return fronts.empty(); }
};

/// Fronts and frozen vertices for a validated boundary, with per-edge h
/// clamped into [h_min, h_max].
MeshState initial_state(const Boundary& boundary, const advance::AdvanceParams& params);

/// Shoelace area of the region bounded by the live fronts.
double front_volume(const MeshState& state);

/// ceil(V0 / (epsilon eta h_min^2)); 0 for an empty domain.
std::uint64_t termination_bound(const advance::AdvanceParams& params, double v0);

struct IterationRecord {
  std::size_t fronts = 0;
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::size_t committed = 0;
  int mis_rounds = 0;
  bool repartitioned = false;
  bool merged = false;
  double volume = 0.0;
};

struct RunStats {
  std::size_t iterations = 0;
  std::size_t merges = 0;
  std::size_t commits = 0;
  std::size_t repartitions = 0;
  std::uint64_t termination_bound = 0;
  int sfc_level = 0;
  int delta_max = 0;
  double v0 = 0.0;
  double min_commit_area = 0.0;
  std::vector<double> volume_history;
  std::vector<IterationRecord> records;
};

/// Step-by-step driver. The grid and bookkeeping live across iterations.
class Generator {
 public:
  Generator(const Boundary& boundary, const GenerateParams& params);

  MeshState& state() { return state_; }
  const MeshState& state() const { return state_; }
  const RunStats& stats() const { return stats_; }
  const sfc::Partition& partition() const { return partition_; }
  const sfc::BackgroundGrid& grid() const { return grid_; }

  /// One pass of the main loop: propose, select, commit. Falls back to a
  /// single merge when no front has a legal advancement.
  IterationRecord iteration_step();

  /// Runs until no fronts remain. Throws InvariantViolation if the
  /// termination bound is exceeded.
  void run();

  /// Resolves one stuck front, returning a description of the repair used.
  std::string merge_fallback();

 private:
  void repartition(std::span<const sfc::FrontKey> keys);
  void commit(const advance::Candidate& c, int owner_rank);
  void add_element(VertexId a, VertexId b, VertexId c, int owner_rank);
  void retire_front(CreationId cid);
  void add_or_close_front(VertexId a, VertexId b, double h);
  void check_invariants() const;

  GenerateParams params_;
  MeshState state_;
  RunStats stats_;
  sfc::BackgroundGrid grid_;
  sfc::Partition partition_;
  std::map<std::uint64_t, std::uint64_t> elements_per_box_;
  std::size_t passes_ = 0;
  double tol_ = 0.0;
};

struct GenerateResult {
  MeshState state;
  RunStats stats;
};

GenerateResult generate(const Boundary& boundary, const GenerateParams& params);

/// Text manifest: parameters, decomposition, iteration counts and hash.
void write_manifest(std::ostream& os, const GenerateParams& params, const RunStats& stats, const MeshState& state,
                    const std::string& mesh_hash);

/// Edges used by exactly one element, as directed pairs following element
/// orientation.
std::vector<EdgeKey> mesh_boundary_edges(const Mesh& mesh);

}  // namespace cpaft::pipeline
