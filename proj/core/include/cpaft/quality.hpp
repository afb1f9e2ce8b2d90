#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "cpaft/geometry.hpp"
#include "cpaft/mesh.hpp"

namespace cpaft::quality {

/// Normalized radius ratio 2 R_i / R_c: 1 for an equilateral triangle,
/// tending to 0 for slivers. Throws DegenerateGeometry for collinear input.
double alpha(const Triangle& t);

struct QualityReport {
  /// Lower edges of the bins (0,0.3), [0.3,0.5), [0.5,0.7), [0.7,1.0].
  static constexpr std::array<double, 4> kBinLower{0.0, 0.3, 0.5, 0.7};
  static constexpr std::array<const char*, 4> kBinLabel{"(0,0.3)", "[0.3,0.5)", "[0.5,0.7)", "[0.7,1.0]"};

  std::array<std::size_t, 4> bins{};
  double min_alpha = 0.0;
  double mean_alpha = 0.0;
  std::size_t element_count = 0;

  double fraction(std::size_t bin) const;
  /// Threshold the report was built with, and the exact fraction of
  /// elements reaching it (not bin-based).
  double threshold = 0.3;
  double fraction_at_least_threshold() const {
    return element_count ? double(at_least_) / double(element_count) : 1.0;
  }

  void write_csv(std::ostream& os) const;
  void write_text(std::ostream& os) const;

 private:
  friend QualityReport quality_report(const Mesh&, double);
  std::size_t at_least_ = 0;
};

std::size_t bin_of(double a);

/// Histogram plus extremes; elements are visited in stored order so the
/// mean is reproducible. `threshold` feeds fraction_at_least.
QualityReport quality_report(const Mesh& mesh, double threshold = 0.3);

std::vector<double> element_alphas(const Mesh& mesh);

struct SmoothingConfig {
  int iterations = 3;
  int n_ranks = 1;
  int n_threads = 1;
};

struct SmoothingReport {
  /// Sum of squared vertex moves per sweep, after rollback.
  std::vector<double> displacement_sq;
  std::size_t rollbacks = 0;
  /// Displacement did not grow from one sweep to the next.
  bool displacement_monotone = true;
};

/// Jacobi Laplacian smoothing of interior vertices. Each sweep moves every
/// interior vertex to the mean of its neighbors' previous positions, then
/// restores any vertex belonging to an element the sweep would invert.
/// Vertices are distributed over `n_ranks` logical ranks with a halo
/// exchange per sweep; the result does not depend on the rank count.
SmoothingReport laplacian_smooth(Mesh& mesh, const SmoothingConfig& config);

}  // namespace cpaft::quality
