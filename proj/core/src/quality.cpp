#include "cpaft/quality.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "cpaft/runtime.hpp"
#include "cpaft/sfc_partition.hpp"

namespace cpaft::quality {

double alpha(const Triangle& t) {
  const Radii r = inradius_circumradius(t);
  return std::min(1.0, 2.0 * r.inradius / r.circumradius);
}

std::size_t bin_of(double a) {
  for (std::size_t b = QualityReport::kBinLower.size(); b-- > 1;)
    if (a >= QualityReport::kBinLower[b]) return b;
  return 0;
}

double QualityReport::fraction(std::size_t bin) const {
  return element_count ? double(bins[bin]) / double(element_count) : 0.0;
}

void QualityReport::write_csv(std::ostream& os) const {
  os << "bin,count,fraction\n";
  for (std::size_t b = 0; b < bins.size(); ++b)
    os << kBinLabel[b] << ',' << bins[b] << ',' << std::setprecision(6) << fraction(b) << '\n';
}

void QualityReport::write_text(std::ostream& os) const {
  os << "elements: " << element_count << '\n';
  for (std::size_t b = 0; b < bins.size(); ++b)
    os << "  alpha " << std::left << std::setw(10) << kBinLabel[b] << std::right << std::setw(10) << bins[b] << "  "
       << std::fixed << std::setprecision(2) << 100.0 * fraction(b) << "%\n";
  os << std::defaultfloat << std::setprecision(6) << "min alpha:  " << min_alpha << '\n'
     << "mean alpha: " << mean_alpha << '\n';
}

std::vector<double> element_alphas(const Mesh& mesh) {
  std::vector<double> out;
  out.reserve(mesh.elements.size());
  for (const auto& e : mesh.elements) out.push_back(alpha(mesh.triangle(e)));
  return out;
}

QualityReport quality_report(const Mesh& mesh, double threshold) {
  QualityReport rep;
  rep.element_count = mesh.elements.size();
  rep.threshold = threshold;
  if (mesh.elements.empty()) return rep;
  double sum = 0.0;
  rep.min_alpha = std::numeric_limits<double>::infinity();
  for (double a : element_alphas(mesh)) {
    ++rep.bins[bin_of(a)];
    rep.min_alpha = std::min(rep.min_alpha, a);
    sum += a;
    if (a >= threshold) ++rep.at_least_;
  }
  rep.mean_alpha = sum / double(rep.element_count);
  return rep;
}

namespace {

struct PositionMsg {
  VertexId id;
  Point p;
};

// One logical rank's share of the vertex set: the vertices it moves, the
// halo it reads, and the elements it must check for inversion.
struct RankView {
  std::vector<VertexId> owned;
  std::unordered_map<VertexId, Point> local;     // owned + halo positions
  std::vector<std::size_t> incident;             // elements touching an owned vertex
  std::vector<std::vector<int>> halo_readers;    // per owned vertex: ranks ghosting it
};

std::vector<int> vertex_owners(const Mesh& mesh, int n_ranks) {
  std::vector<int> owner(mesh.vertices.size(), 0);
  if (n_ranks == 1 || mesh.elements.empty()) return owner;
  std::vector<Point> live;
  for (VertexId v = 0; v < mesh.vertices.size(); ++v)
    if (mesh.alive[v]) live.push_back(mesh.vertices[v]);
  const auto bbox = sfc::BoundingBox::of(live);
  const int level = std::clamp(static_cast<int>(std::ceil(std::log2(std::sqrt(double(mesh.elements.size()))))) + 1,
                               sfc::kMinLevel, 10);
  const sfc::BackgroundGrid grid(bbox, level);
  std::unordered_map<std::uint64_t, double> w;
  for (const auto& e : mesh.elements) {
    const Triangle t = mesh.triangle(e);
    const Point c{(t.p[0].x + t.p[1].x + t.p[2].x) / 3.0, (t.p[0].y + t.p[1].y + t.p[2].y) / 3.0};
    w[grid.box_of(c).value] += 1.0;
  }
  std::vector<sfc::BoxWeight> weights;
  for (auto [b, x] : w) weights.push_back({sfc::BoxIndex{b}, x});
  std::sort(weights.begin(), weights.end(), [](auto& a, auto& b) { return a.box < b.box; });
  const auto part = sfc::partition_boxes(weights, grid.cell_count(), n_ranks);
  for (VertexId v = 0; v < mesh.vertices.size(); ++v)
    if (mesh.alive[v]) owner[v] = part.owner_of(grid.box_of(mesh.vertices[v]));
  return owner;
}

}  // namespace

SmoothingReport laplacian_smooth(Mesh& mesh, const SmoothingConfig& config) {
  SmoothingReport report;
  const std::size_t nv = mesh.vertices.size();
  if (config.iterations <= 0 || mesh.elements.empty()) return report;

  // Vertex adjacency from elements, each list ascending so sums are ordered.
  std::vector<std::vector<VertexId>> adj(nv);
  std::vector<std::vector<std::size_t>> vertex_elems(nv);
  for (std::size_t k = 0; k < mesh.elements.size(); ++k) {
    const auto& ids = mesh.elements[k].vertex_ids;
    for (int i = 0; i < 3; ++i) {
      vertex_elems[ids[i]].push_back(k);
      for (int j = 0; j < 3; ++j)
        if (i != j) adj[ids[i]].push_back(ids[j]);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  auto movable = [&](VertexId v) { return mesh.alive[v] && !mesh.boundary[v] && !adj[v].empty(); };

  const int n = config.n_ranks;
  const std::vector<int> owner = vertex_owners(mesh, n);
  std::vector<RankView> views(n);
  for (VertexId v = 0; v < nv; ++v)
    if (mesh.alive[v] && !adj[v].empty()) views[owner[v]].owned.push_back(v);
  for (int r = 0; r < n; ++r) {
    auto& view = views[r];
    std::vector<std::size_t> inc;
    view.halo_readers.resize(view.owned.size());
    for (VertexId v : view.owned) {
      view.local[v] = mesh.vertices[v];
      for (VertexId u : adj[v]) view.local.emplace(u, mesh.vertices[u]);
      inc.insert(inc.end(), vertex_elems[v].begin(), vertex_elems[v].end());
    }
    std::sort(inc.begin(), inc.end());
    inc.erase(std::unique(inc.begin(), inc.end()), inc.end());
    view.incident = std::move(inc);
  }
  // Readers of each owned vertex: ranks owning one of its neighbors.
  for (int r = 0; r < n; ++r)
    for (std::size_t i = 0; i < views[r].owned.size(); ++i) {
      auto& readers = views[r].halo_readers[i];
      for (VertexId u : adj[views[r].owned[i]])
        if (owner[u] != r) readers.push_back(owner[u]);
      std::sort(readers.begin(), readers.end());
      readers.erase(std::unique(readers.begin(), readers.end()), readers.end());
    }

  bsp::Runtime rt(n, config.n_threads);
  auto halo_exchange = [&](const std::vector<std::unordered_map<VertexId, Point>>& fresh) {
    bsp::Exchange<PositionMsg> ex(n);
    rt.superstep([&](int r) {
      for (std::size_t i = 0; i < views[r].owned.size(); ++i) {
        const VertexId v = views[r].owned[i];
        for (int dst : views[r].halo_readers[i]) ex.send(r, dst, {v, fresh[r].at(v)});
      }
    });
    rt.superstep([&](int r) {
      for (const auto& d : ex.deliver(r, [](const PositionMsg& m) { return m.id; })) views[r].local[d.msg.id] = d.msg.p;
    });
  };

  std::vector<double> move_sq(nv, 0.0);
  for (int sweep = 0; sweep < config.iterations; ++sweep) {
    // Tentative Jacobi positions from the previous sweep's halo.
    std::vector<std::unordered_map<VertexId, Point>> old_pos(n), tentative(n);
    rt.superstep([&](int r) {
      auto& view = views[r];
      old_pos[r] = view.local;
      for (VertexId v : view.owned) {
        Point next = view.local.at(v);
        if (movable(v)) {
          double sx = 0.0, sy = 0.0;
          for (VertexId u : adj[v]) {
            const Point q = view.local.at(u);
            sx += q.x;
            sy += q.y;
          }
          const double k = double(adj[v].size());
          next = {sx / k, sy / k};
        }
        tentative[r][v] = next;
      }
      for (VertexId v : view.owned) view.local[v] = tentative[r][v];
    });
    halo_exchange(tentative);

    // Rollback to a fixpoint: any element inverted under the current mix of
    // moved and restored positions restores all of its owned vertices.
    for (;;) {
      std::vector<std::size_t> restored(n, 0);
      std::vector<std::unordered_map<VertexId, Point>> current(n);
      rt.superstep([&](int r) {
        auto& view = views[r];
        std::vector<VertexId> undo;
        for (std::size_t k : view.incident) {
          const auto& ids = mesh.elements[k].vertex_ids;
          const double a = signed_area(view.local.at(ids[0]), view.local.at(ids[1]), view.local.at(ids[2]));
          if (a > 0.0) continue;
          for (VertexId v : ids)
            if (owner[v] == r && view.local.at(v) != old_pos[r].at(v)) undo.push_back(v);
        }
        std::sort(undo.begin(), undo.end());
        undo.erase(std::unique(undo.begin(), undo.end()), undo.end());
        for (VertexId v : undo) view.local[v] = old_pos[r].at(v);
        restored[r] = undo.size();
        for (VertexId v : view.owned) current[r][v] = view.local.at(v);
      });
      std::size_t total = 0;
      for (std::size_t c : restored) total += c;
      if (total == 0) break;
      report.rollbacks += total;
      halo_exchange(current);
    }

    // Diagnostic: squared displacement, summed in vertex id order.
    std::fill(move_sq.begin(), move_sq.end(), 0.0);
    for (int r = 0; r < n; ++r)
      for (VertexId v : views[r].owned) {
        const Point d = views[r].local.at(v) - old_pos[r].at(v);
        move_sq[v] = dot(d, d);
      }
    double total = 0.0;
    for (double m : move_sq) total += m;
    if (!report.displacement_sq.empty() && total > report.displacement_sq.back()) report.displacement_monotone = false;
    report.displacement_sq.push_back(total);
  }

  for (int r = 0; r < n; ++r)
    for (VertexId v : views[r].owned) mesh.vertices[v] = views[r].local.at(v);
  return report;
}

}  // namespace cpaft::quality
