#pragma once

// Per-rank quadtree over fronts, the δ-layer ghost exchange that builds the
// overlapping forest, and Neighbor(f) range queries.

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "cpaft/geometry.hpp"
#include "cpaft/sfc_partition.hpp"

namespace cpaft::forest {

/// A front together with its global index and the rank that owns it.
struct IndexedFront {
  sfc::GlobalIndex gi;
  Front front;
  int source_rank = 0;
};

/// Quadtree keyed on front midpoints. Leaves hold one front, except at the
/// maximum depth where coincident midpoints share a small bucket.
class FrontTree {
 public:
  static constexpr int kMaxDepth = 24;
  static constexpr std::size_t kBucketLimit = 8;

  explicit FrontTree(sfc::BoundingBox region);

  /// Throws PreconditionError on a duplicate GI or a midpoint outside the region.
  void insert(const IndexedFront& f);
  /// Throws PreconditionError if the GI is not stored.
  void remove(sfc::GlobalIndex gi);

  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }
  bool contains(sfc::GlobalIndex gi) const { return index_.count(gi.value) != 0; }

  /// Stored fronts with dist_front_front(stored, f) < radius, excluding the
  /// front whose GI equals `self`, sorted by GI.
  std::vector<IndexedFront> query(const Front& f, double radius, sfc::GlobalIndex self) const;
  std::vector<IndexedFront> query(const Front& f, double radius) const;

  // Structure introspection for tests.
  std::size_t max_leaf_occupancy() const;
  int depth() const;
  std::size_t leaf_count() const;

 private:
  struct Node {
    sfc::BoundingBox box;
    sfc::BoundingBox segs;  // union of stored segment bounding boxes
    std::array<int, 4> child{-1, -1, -1, -1};
    std::vector<std::uint32_t> items;
    std::size_t count = 0;
    int depth = 0;
    bool leaf() const { return child[0] < 0; }
  };

  int quadrant(const Node& n, Point p) const;
  void split(int node);
  void refresh(int node);
  void query_into(const Front& f, double radius, std::uint64_t skip, bool use_skip,
                  std::vector<IndexedFront>& out) const;

  std::vector<Node> nodes_;
  std::vector<IndexedFront> entries_;
  std::vector<std::uint32_t> free_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;  // gi -> entry slot
};

/// Brute-force Neighbor(f) over a flat list; the oracle the tree is checked against.
std::vector<IndexedFront> neighbor_scan(std::span<const IndexedFront> fronts, const Front& f, double radius,
                                        sfc::GlobalIndex self);

/// ceil(gamma_factor * h_max / box_edge), at least 1.
int required_delta(double box_edge, double h_max, double gamma_factor);

struct OverlapSet {
  std::vector<IndexedFront> owned;
  std::vector<IndexedFront> ghosts;  // sorted by GI, tagged with their source rank
  int delta = 1;
};

/// Fixed-layout ghost payload: GI, endpoint coordinates, endpoint vertex
/// ids, normal, h, creation id. Native little-endian 64-bit fields.
inline constexpr std::size_t kGhostRecordBytes = 8 + 4 * 8 + 2 * 8 + 2 * 8 + 8 + 8;
void pack_front(const IndexedFront& f, std::vector<std::byte>& out);
std::vector<IndexedFront> unpack_fronts(std::span<const std::byte> bytes, int source_rank);

/// Ranks (other than `self`) owning a box within `delta` Chebyshev layers of
/// the box containing `cell`. Ascending, unique.
std::vector<int> ghost_destinations(const sfc::BackgroundGrid& grid, const sfc::Partition& partition,
                                    sfc::CellCoord cell, int delta, int self);

/// Ghost exchange: every rank receives the fronts of other ranks whose box is
/// within `delta` box layers of one of its own boxes. `owned[r]` holds rank
/// r's fronts.
std::vector<OverlapSet> build_overlap(const sfc::BackgroundGrid& grid, const sfc::Partition& partition,
                                      std::span<const std::vector<IndexedFront>> owned, int delta);

}  // namespace cpaft::forest
