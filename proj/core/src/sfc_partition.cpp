#include "cpaft/sfc_partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cpaft/errors.hpp"

namespace cpaft::sfc {

double BoundingBox::longest_edge() const { return std::max(hi.x - lo.x, hi.y - lo.y); }
double BoundingBox::diagonal() const { return distance(lo, hi); }
bool BoundingBox::contains(Point p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }

BoundingBox BoundingBox::of(std::span<const Point> pts) {
  if (pts.empty()) throw PreconditionError("bounding box of an empty point set");
  BoundingBox b{pts.front(), pts.front()};
  for (const Point& p : pts) {
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

namespace {

void check_level(int level) {
  if (level < 1 || level > kMaxLevel) throw PreconditionError("SFC level out of range: " + std::to_string(level));
}

}  // namespace

BoxIndex hilbert_index(CellCoord cell, int level) {
  check_level(level);
  const std::uint32_t n = 1u << level;
  if (cell.x >= n || cell.y >= n) throw PreconditionError("hilbert_index: cell outside the grid");
  std::uint64_t x = cell.x, y = cell.y, d = 0;
  for (std::uint64_t s = n / 2; s > 0; s /= 2) {
    const std::uint64_t rx = (x & s) ? 1 : 0;
    const std::uint64_t ry = (y & s) ? 1 : 0;
    d += s * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = s - 1 - (x & (s - 1));
        y = s - 1 - (y & (s - 1));
      }
      std::swap(x, y);
    }
  }
  return BoxIndex{d};
}

CellCoord hilbert_cell(BoxIndex index, int level) {
  check_level(level);
  const std::uint64_t n = std::uint64_t{1} << level;
  if (index.value >= n * n) throw PreconditionError("hilbert_cell: index outside the grid");
  std::uint64_t t = index.value, x = 0, y = 0;
  for (std::uint64_t s = 1; s < n; s *= 2) {
    const std::uint64_t rx = 1 & (t / 2);
    const std::uint64_t ry = 1 & (t ^ rx);
    if (ry == 0) {
      if (rx == 1) {
        x = s - 1 - x;
        y = s - 1 - y;
      }
      std::swap(x, y);
    }
    x += s * rx;
    y += s * ry;
    t /= 4;
  }
  return {static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)};
}

BackgroundGrid::BackgroundGrid(BoundingBox bbox, int level) : bbox_(bbox), level_(level) {
  check_level(level);
  const double edge = bbox.longest_edge();
  if (!(edge > 0.0)) throw PreconditionError("background grid over an empty bounding box");
  box_edge_ = edge / double(1u << level);
}

CellCoord BackgroundGrid::cell_of(Point p) const {
  const double tol = kRelativeTolerance * bbox_.diagonal();
  if (!is_finite(p) || p.x < bbox_.lo.x - tol || p.x > bbox_.hi.x + tol || p.y < bbox_.lo.y - tol ||
      p.y > bbox_.hi.y + tol)
    throw PreconditionError("box_of_point: point outside the background grid");
  const std::int64_t max_cell = std::int64_t{cells_per_side()} - 1;
  auto axis = [&](double v, double lo) {
    // ceil - 1 sends a point lying exactly on a cell boundary to the lower cell.
    const double scaled = (v - lo) / box_edge_;
    auto c = static_cast<std::int64_t>(std::ceil(scaled)) - 1;
    return static_cast<std::uint32_t>(std::clamp<std::int64_t>(c, 0, max_cell));
  };
  return {axis(p.x, bbox_.lo.x), axis(p.y, bbox_.lo.y)};
}

BoxIndex box_of_point(Point p, const BackgroundGrid& grid) { return grid.box_of(p); }

int level_for_scale(double h_max, const BoundingBox& bbox) {
  if (!(h_max > 0.0)) throw PreconditionError("level_for_scale: h_max must be positive");
  const double edge = bbox.longest_edge();
  int level = kMinLevel;
  while (level < kMaxLevel && edge / double(1u << level) > 2.0 * h_max) ++level;
  return level;
}

int Partition::owner_of(BoxIndex b) const {
  auto it = std::upper_bound(ranges.begin(), ranges.end(), b.value,
                             [](std::uint64_t v, const Range& r) { return v < r.end; });
  if (it == ranges.end()) throw PreconditionError("box index outside the partition");
  return static_cast<int>(it - ranges.begin());
}

Partition Partition::single(std::uint64_t cell_count) { return Partition{{Range{0, cell_count}}, false, true}; }

namespace {

std::vector<double> range_loads(std::span<const BoxWeight> weights, const std::vector<std::size_t>& cuts) {
  std::vector<double> loads(cuts.size() - 1, 0.0);
  for (std::size_t r = 0; r + 1 < cuts.size(); ++r)
    for (std::size_t j = cuts[r]; j < cuts[r + 1]; ++j) loads[r] += weights[j].weight;
  return loads;
}

double balance_ratio(const std::vector<double>& loads) {
  const auto [mn, mx] = std::minmax_element(loads.begin(), loads.end());
  return *mx > 0.0 ? *mn / *mx : 1.0;
}

// Cuts (entry positions) minimizing the maximum load; every rank gets at
// least one entry.
std::vector<std::size_t> min_max_cuts(std::span<const BoxWeight> weights, int n) {
  const std::size_t m = weights.size();
  auto fill = [&](double cap) {
    std::vector<std::size_t> cuts{0};
    double load = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t ranks_left = std::size_t(n) - (cuts.size() - 1);
      const bool must_cut = m - j < ranks_left;  // one entry per remaining rank
      if (j > cuts.back() && (load + weights[j].weight > cap || must_cut) && cuts.size() < std::size_t(n)) {
        cuts.push_back(j);
        load = 0.0;
      }
      load += weights[j].weight;
    }
    cuts.push_back(m);
    return cuts;
  };
  double lo = 0.0, hi = 0.0;
  for (const auto& w : weights) {
    lo = std::max(lo, w.weight);
    hi += w.weight;
  }
  for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto cuts = fill(mid);
    const auto loads = range_loads(weights, cuts);
    if (*std::max_element(loads.begin(), loads.end()) <= mid)
      hi = mid;
    else
      lo = mid;
  }
  return fill(hi);
}

// Cuts maximizing the minimum load. Min-max alone can tie on a split whose
// smallest part is starved; trying both catches those.
std::vector<std::size_t> max_min_cuts(std::span<const BoxWeight> weights, int n) {
  const std::size_t m = weights.size();
  auto fill = [&](double floor) {
    std::vector<std::size_t> cuts{0};
    double load = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t ranks_left = std::size_t(n) - (cuts.size() - 1);
      const bool must_cut = m - j < ranks_left;
      if (j > cuts.back() && (load >= floor || must_cut) && cuts.size() < std::size_t(n)) {
        cuts.push_back(j);
        load = 0.0;
      }
      load += weights[j].weight;
    }
    cuts.push_back(m);
    return cuts;
  };
  double lo = 0.0, hi = 0.0;
  for (const auto& w : weights) hi += w.weight;
  hi /= n;
  for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto loads = range_loads(weights, fill(mid));
    if (*std::min_element(loads.begin(), loads.end()) >= mid)
      lo = mid;
    else
      hi = mid;
  }
  return fill(lo);
}

// Exhaustive search for a split with every load in (M/2, M], trying each
// contiguous range sum as M. Cubic in the entry count per candidate, so
// only used for short lists; returns empty when no such split exists.
constexpr std::size_t kExactSearchLimit = 48;

std::vector<std::size_t> exact_balanced_cuts(std::span<const BoxWeight> weights, int n) {
  const std::size_t m = weights.size();
  std::vector<double> prefix(m + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) prefix[j + 1] = prefix[j] + weights[j].weight;
  std::vector<double> candidates;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j <= m; ++j) candidates.push_back(prefix[j] - prefix[i]);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> parent(std::size_t(n) + 1, std::vector<std::size_t>(m + 1, none));
  for (double cap : candidates) {
    for (auto& row : parent) std::fill(row.begin(), row.end(), none);
    parent[0][0] = 0;
    for (int k = 1; k <= n; ++k)
      for (std::size_t j = 1; j <= m; ++j)
        for (std::size_t i = 0; i < j; ++i) {
          const double load = prefix[j] - prefix[i];
          if (parent[k - 1][i] != none && load <= cap && load > 0.5 * cap) {
            parent[k][j] = i;
            break;
          }
        }
    if (parent[n][m] == none) continue;
    std::vector<std::size_t> cuts(std::size_t(n) + 1);
    cuts[n] = m;
    for (int k = n; k > 0; --k) cuts[k - 1] = parent[k][cuts[k]];
    return cuts;
  }
  return {};
}

}  // namespace

Partition partition_boxes(std::span<const BoxWeight> weights, std::uint64_t cell_count, int n_ranks) {
  if (n_ranks < 1) throw PreconditionError("partition_boxes: n_ranks must be >= 1");
  double total = 0.0;
  std::size_t nonzero = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j].weight < 0.0) throw PreconditionError("partition_boxes: negative weight");
    if (j > 0 && !(weights[j - 1].box < weights[j].box))
      throw PreconditionError("partition_boxes: weights must be sorted by unique box");
    total += weights[j].weight;
    nonzero += weights[j].weight > 0.0 ? 1 : 0;
  }
  if (!(total > 0.0)) throw PreconditionError("partition_boxes: total weight must be positive");

  const std::size_t m = weights.size();
  std::vector<double> prefix(m + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) prefix[j + 1] = prefix[j] + weights[j].weight;

  // Greedy: cut at the prefix position closest to each k * total / n target.
  std::vector<std::size_t> cuts{0};
  for (int k = 1; k < n_ranks; ++k) {
    const double target = total * double(k) / double(n_ranks);
    const std::size_t prev = cuts.back();
    auto it = std::lower_bound(prefix.begin() + std::ptrdiff_t(prev), prefix.end(), target);
    std::size_t j = it == prefix.end() ? m : std::size_t(it - prefix.begin());
    if (j > prev && std::abs(prefix[j - 1] - target) < std::abs(prefix[j] - target)) --j;
    cuts.push_back(j);
  }
  cuts.push_back(m);

  auto loads = range_loads(weights, cuts);
  if (balance_ratio(loads) <= 0.5 && nonzero >= std::size_t(n_ranks)) {
    // Min-max contiguous split over the nonzero entries only, so every rank
    // can receive weight.
    std::vector<BoxWeight> nz;
    std::vector<std::size_t> nz_pos;
    for (std::size_t j = 0; j < m; ++j)
      if (weights[j].weight > 0.0) {
        nz.push_back(weights[j]);
        nz_pos.push_back(j);
      }
    std::vector<std::vector<std::size_t>> alternatives{min_max_cuts(nz, n_ranks), max_min_cuts(nz, n_ranks)};
    if (nz.size() <= kExactSearchLimit) {
      auto exact = exact_balanced_cuts(nz, n_ranks);
      if (!exact.empty()) alternatives.push_back(std::move(exact));
    }
    for (const auto& alt : alternatives) {
      std::vector<std::size_t> mapped{0};
      for (std::size_t r = 1; r + 1 < alt.size(); ++r) mapped.push_back(nz_pos[alt[r]]);
      mapped.push_back(m);
      auto alt_loads = range_loads(weights, mapped);
      if (balance_ratio(alt_loads) > balance_ratio(loads)) {
        cuts = std::move(mapped);
        loads = std::move(alt_loads);
      }
    }
  }

  Partition p;
  p.ranges.reserve(std::size_t(n_ranks));
  for (int r = 0; r < n_ranks; ++r) {
    const std::uint64_t b = r == 0 ? 0 : (cuts[r] < m ? weights[cuts[r]].box.value : cell_count);
    const std::uint64_t e =
        r + 1 == n_ranks ? cell_count : (cuts[r + 1] < m ? weights[cuts[r + 1]].box.value : cell_count);
    p.ranges.push_back({b, std::max(b, e)});
  }
  p.has_empty_ranks = std::any_of(loads.begin(), loads.end(), [](double w) { return w <= 0.0; });
  p.balanced = balance_ratio(loads) > 0.5;
  return p;
}

Partition partition_boxes(std::span<const double> weights, int n_ranks) {
  std::vector<BoxWeight> sparse;
  sparse.reserve(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) sparse.push_back({BoxIndex{k}, weights[k]});
  return partition_boxes(sparse, weights.size(), n_ranks);
}

bool needs_repartition(std::span<const LoadIndicator> indicators) {
  if (indicators.empty()) throw PreconditionError("needs_repartition: no indicators");
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
  for (const auto& w : indicators) {
    mn = std::min(mn, w.value());
    mx = std::max(mx, w.value());
  }
  return mn <= 0.5 * mx;
}

std::vector<GlobalIndex> assign_global_indices(std::span<const FrontKey> fronts, const Partition& partition) {
  const int n = partition.n_ranks();
  std::vector<std::vector<std::size_t>> owned(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < fronts.size(); ++i) owned[static_cast<std::size_t>(partition.owner_of(fronts[i].box))].push_back(i);

  std::vector<GlobalIndex> gi(fronts.size());
  std::uint64_t offset = 0;  // sum of |F_i| over lower ranks
  for (auto& local : owned) {
    std::sort(local.begin(), local.end(), [&](std::size_t a, std::size_t b) { return fronts[a] < fronts[b]; });
    for (std::size_t id = 0; id < local.size(); ++id) gi[local[id]] = GlobalIndex{offset + id};
    offset += local.size();
  }
  return gi;
}

GlobalIndex global_index(const FrontKey& key, std::span<const FrontKey> fronts, const Partition& partition) {
  const int rank = partition.owner_of(key.box);
  bool found = false;
  std::uint64_t local_id = 0, lower = 0;
  for (const FrontKey& f : fronts) {
    const int r = partition.owner_of(f.box);
    if (r < rank) ++lower;
    if (r == rank) {
      if (f == key) found = true;
      if (f < key) ++local_id;
    }
  }
  if (!found) throw PreconditionError("global_index: front not present in the front set");
  return GlobalIndex{local_id + lower};
}

}  // namespace cpaft::sfc
