#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "quasi/volume.hpp"

namespace quasi {

/// Cubic quantile-filter kernel: a d*d*d window (d*d*1 on single-slice
/// volumes) evaluated at level p. p = 0.5 with an odd window is the exact
/// median; p = 0 / p = 1 are the window minimum / maximum.
struct KernelSpec {
  int width = 3;   // odd, >= 1
  double p = 0.5;  // quantile level in [0, 1]

  void validate() const;
  /// Number of entries in the clamped window over a grid with these dims.
  std::size_t window_size(const Dims& dims) const;
  /// Rank of the selected order statistic on the ascending-sorted window.
  std::size_t rank(const Dims& dims) const;
};

/// Frozen linearization of the quantile filter: for every voxel i,
/// source[i] is the flat index of the window entry realizing the quantile
/// (ties resolved to the smallest flat index). Applying the map is a gather,
/// its transpose a scatter-add; the residual operator is identity minus map.
class QuantileMap {
 public:
  QuantileMap() = default;
  QuantileMap(Dims dims, std::vector<std::size_t> source);

  static QuantileMap build(const Volume& vol, const KernelSpec& kernel);

  const Dims& dims() const { return dims_; }
  std::span<const std::size_t> source() const { return source_; }

  /// out[i] = x[source[i]]
  Volume apply(const Volume& x) const;
  /// out[source[i]] += x[i], starting from zeros (exact adjoint of apply).
  Volume apply_transpose(const Volume& x) const;

 private:
  Dims dims_{};
  std::vector<std::size_t> source_;
};

/// Per-voxel order statistic of the replicate-clamped window.
Volume quantile_filter(const Volume& vol, const KernelSpec& kernel);

/// x - map(x), the linearized residual operator.
Volume map_residual(const QuantileMap& map, const Volume& x);
/// Adjoint of map_residual.
Volume map_residual_transpose(const QuantileMap& map, const Volume& x);

/// Nonlinear residual vol - quantile_filter(vol).
Volume quasi_residual(const Volume& vol, const KernelSpec& kernel);

/// L1 norm of the nonlinear residual; the prior's contribution to the
/// objective before weighting.
double quasi_energy(const Volume& vol, const KernelSpec& kernel);

}  // namespace quasi
