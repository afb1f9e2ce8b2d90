#pragma once

// Conflict graph over candidate advancements and the consistent parallel
// maximal independent set used to pick a non-interfering subset of them.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cpaft/geometry.hpp"

namespace cpaft::mis {

/// Graph with vertices identified by unique 64-bit IDs (the GI of the
/// proposing front). Internally vertices are dense indices in ID order.
class ConflictGraph {
 public:
  ConflictGraph() = default;
  /// Throws PreconditionError on duplicate IDs, self loops or unknown endpoints.
  ConflictGraph(std::vector<std::uint64_t> ids, std::span<const std::pair<std::uint64_t, std::uint64_t>> edges);

  std::size_t size() const { return ids_.size(); }
  std::size_t edge_count() const;
  std::uint64_t id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::uint64_t>& ids() const { return ids_; }
  /// Neighbors of vertex index i, ascending.
  const std::vector<std::uint32_t>& neighbors(std::size_t i) const { return adj_[i]; }
  /// Dense index of an ID; throws PreconditionError if absent.
  std::size_t index_of(std::uint64_t id) const;
  bool adjacent(std::uint64_t a, std::uint64_t b) const;

 private:
  std::vector<std::uint64_t> ids_;
  std::vector<std::vector<std::uint32_t>> adj_;
};

/// What a candidate contributes to conflict detection.
struct ConflictItem {
  std::uint64_t id = 0;
  Point p;
  double h = 0.0;
  Triangle tri;
};

enum class ConflictRule {
  /// dist(p_i, p_j) < h_i + h_j only.
  Proximity,
  /// Proximity, or the two tentative elements interfere geometrically.
  ProximityAndOverlap,
};

bool in_conflict(const ConflictItem& a, const ConflictItem& b, ConflictRule rule, double tol);

/// Sweep-and-prune construction over candidate bounding boxes. Throws
/// PreconditionError on duplicate IDs.
ConflictGraph build_conflict_graph(std::span<const ConflictItem> items, ConflictRule rule, double tol);

/// One logical rank's view: owned vertex IDs plus ghost vertex IDs (with
/// their owners), and adjacency lists for the owned vertices only.
struct RankGraph {
  std::vector<std::uint64_t> owned;
  std::vector<std::pair<std::uint64_t, int>> ghosts;
  /// neighbors[k] lists the IDs adjacent to owned[k], ascending.
  std::vector<std::vector<std::uint64_t>> neighbors;
};

/// Splits a global graph into rank views given each vertex's owner (indexed
/// like graph.ids()).
std::vector<RankGraph> split_graph(const ConflictGraph& graph, std::span<const int> owner, int n_ranks);

struct MisResult {
  std::vector<std::uint64_t> accepted;  // ascending
  std::vector<std::uint64_t> discarded;
  std::vector<std::uint64_t> pending;
  std::vector<std::vector<std::uint64_t>> accepted_per_rank;
  int iterations = 0;
  /// Terminated with no pending vertex, so `accepted` is maximal.
  bool complete = false;
};

inline constexpr int kDefaultMaxIterations = 10;
inline constexpr int kUncapped = -1;

/// Consistent independent-set selection over BSP supersteps. Throws OverlapViolation when a rank's
/// adjacency references a vertex missing from the owner's view, which means
/// the ghost layer was sized too small. `max_iterations < 0` runs uncapped.
MisResult cpmis_run(std::span<const RankGraph> ranks, int max_iterations = kDefaultMaxIterations, int n_threads = 1);
MisResult cpmis_run(const ConflictGraph& graph, std::span<const int> owner, int n_ranks,
                    int max_iterations = kDefaultMaxIterations, int n_threads = 1);

/// Single-process rounds of local-minimum selection, run to completion.
std::vector<std::uint64_t> sequential_mis_oracle(const ConflictGraph& graph);

bool is_independent(const ConflictGraph& graph, std::span<const std::uint64_t> set);
bool is_maximal(const ConflictGraph& graph, std::span<const std::uint64_t> set);

}  // namespace cpaft::mis
