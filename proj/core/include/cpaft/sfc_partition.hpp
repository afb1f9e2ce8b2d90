#pragma once

// Hilbert-ordered background grid, contiguous SFC partitioning, load
// indicators and the decomposition-invariant global front index.

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "cpaft/geometry.hpp"

namespace cpaft::sfc {

/// Position of a background box along the Hilbert curve.
struct BoxIndex {
  std::uint64_t value = 0;
  friend constexpr auto operator<=>(BoxIndex, BoxIndex) = default;
};

/// Rank of a front in the (box, creation id) total order over the live
/// front set. Invariant under any contiguous repartitioning.
struct GlobalIndex {
  std::uint64_t value = 0;
  friend constexpr auto operator<=>(GlobalIndex, GlobalIndex) = default;
};

struct CellCoord {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  friend constexpr bool operator==(CellCoord, CellCoord) = default;
};

struct BoundingBox {
  Point lo;
  Point hi;

  double longest_edge() const;
  double diagonal() const;
  bool contains(Point p) const;
  static BoundingBox of(std::span<const Point> pts);
};

inline constexpr int kMinLevel = 2;
inline constexpr int kMaxLevel = 16;

/// Hilbert index of cell (x, y) on a 2^level grid. Level-1 order is
/// (0,0) (0,1) (1,1) (1,0). Throws PreconditionError on out-of-range input.
BoxIndex hilbert_index(CellCoord cell, int level);

/// Inverse of hilbert_index.
CellCoord hilbert_cell(BoxIndex index, int level);

/// Level-L Cartesian cover of a square of side `bbox.longest_edge()`
/// anchored at bbox.lo.
class BackgroundGrid {
 public:
  BackgroundGrid(BoundingBox bbox, int level);

  const BoundingBox& bbox() const { return bbox_; }
  int level() const { return level_; }
  double box_edge() const { return box_edge_; }
  std::uint32_t cells_per_side() const { return 1u << level_; }
  std::uint64_t cell_count() const { return std::uint64_t{cells_per_side()} * cells_per_side(); }

  /// Cell containing p; points on the max face clamp inward, cell-boundary
  /// ties go to the lower cell. Throws PreconditionError outside the bbox.
  CellCoord cell_of(Point p) const;
  BoxIndex box_of(Point p) const { return hilbert_index(cell_of(p), level_); }

 private:
  BoundingBox bbox_;
  int level_;
  double box_edge_;
};

BoxIndex box_of_point(Point p, const BackgroundGrid& grid);

/// Smallest level whose box edge is <= 2 h_max, clamped to [2, 16].
int level_for_scale(double h_max, const BoundingBox& bbox);

struct Range {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  bool contains(BoxIndex b) const { return b.value >= begin && b.value < end; }
  friend constexpr bool operator==(Range, Range) = default;
};

/// Contiguous half-open box ranges, one per rank, ascending and covering
/// [0, cell_count).
struct Partition {
  std::vector<Range> ranges;
  /// Some rank received zero weight because there are fewer weighted boxes
  /// than ranks.
  bool has_empty_ranks = false;
  /// The load indicators satisfy min W > 0.5 max W.
  bool balanced = true;

  int n_ranks() const { return static_cast<int>(ranges.size()); }
  int owner_of(BoxIndex b) const;
  static Partition single(std::uint64_t cell_count);
};

struct LoadIndicator {
  std::uint64_t front_count = 0;
  std::uint64_t element_count = 0;
  double k_f = 3.0;
  double k_e = 1.0;

  double value() const { return k_f * double(front_count) + k_e * double(element_count); }
};

/// Sparse per-box weight; boxes absent from the list weigh zero.
struct BoxWeight {
  BoxIndex box;
  double weight = 0.0;
};

/// Greedy prefix-sum split at total/n targets. When that misses the
/// min W > 0.5 max W balance rule, min-max and max-min splits are tried,
/// plus an exact search for short lists. `weights` must be sorted by box
/// and hold unique boxes.
Partition partition_boxes(std::span<const BoxWeight> weights, std::uint64_t cell_count, int n_ranks);

/// Dense convenience overload: weights[k] is the weight of box k.
Partition partition_boxes(std::span<const double> weights, int n_ranks);

/// min W_i <= 0.5 max W_i.
bool needs_repartition(std::span<const LoadIndicator> indicators);

/// A front reduced to the two keys that define its global order.
struct FrontKey {
  BoxIndex box;
  CreationId creation_id = 0;
  friend constexpr auto operator<=>(const FrontKey&, const FrontKey&) = default;
};

/// Global index of the front with key `key` among `fronts`, computed the
/// distributed way: local index inside its owning rank plus the sizes of
/// all lower ranks. Throws PreconditionError if the key is absent.
GlobalIndex global_index(const FrontKey& key, std::span<const FrontKey> fronts, const Partition& partition);

/// Global indices for every front, in input order, computed rank by rank.
std::vector<GlobalIndex> assign_global_indices(std::span<const FrontKey> fronts, const Partition& partition);

}  // namespace cpaft::sfc
