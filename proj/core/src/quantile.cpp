#include "quasi/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace quasi {

namespace {

int clamp_coord(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

/// Flat index of the window entry holding the rank-r order statistic around
/// (x, y, z); among equal-valued entries the smallest flat index wins.
/// Clamped coordinates may visit the same voxel more than once; each visit
/// counts as one multiset entry.
std::size_t arg_quantile_at(const Volume& vol, int half, int z_reach,
                            std::size_t rank, int x, int y, int z,
                            std::vector<double>& buf) {
  const Dims& d = vol.dims();
  buf.clear();
  for (int dz = -z_reach; dz <= z_reach; ++dz) {
    const int zz = clamp_coord(z + dz, d.nz);
    for (int dy = -half; dy <= half; ++dy) {
      const int yy = clamp_coord(y + dy, d.ny);
      for (int dx = -half; dx <= half; ++dx) {
        const int xx = clamp_coord(x + dx, d.nx);
        buf.push_back(vol[d.flat(xx, yy, zz)]);
      }
    }
  }
  std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(rank),
                   buf.end());
  const double pivot = buf[rank];

  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (int dz = -z_reach; dz <= z_reach; ++dz) {
    const int zz = clamp_coord(z + dz, d.nz);
    for (int dy = -half; dy <= half; ++dy) {
      const int yy = clamp_coord(y + dy, d.ny);
      for (int dx = -half; dx <= half; ++dx) {
        const int xx = clamp_coord(x + dx, d.nx);
        const std::size_t j = d.flat(xx, yy, zz);
        if (vol[j] == pivot && j < best) best = j;
      }
    }
  }
  return best;
}

}  // namespace

void KernelSpec::validate() const {
  if (width < 1 || width % 2 == 0) {
    throw std::invalid_argument("kernel: width must be odd and positive");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("kernel: quantile level must be in [0, 1]");
  }
}

std::size_t KernelSpec::window_size(const Dims& dims) const {
  const std::size_t w = static_cast<std::size_t>(width);
  return dims.nz == 1 ? w * w : w * w * w;
}

std::size_t KernelSpec::rank(const Dims& dims) const {
  const std::size_t w = window_size(dims);
  return static_cast<std::size_t>(
      std::floor(p * static_cast<double>(w - 1)));
}

QuantileMap::QuantileMap(Dims dims, std::vector<std::size_t> source)
    : dims_(dims), source_(std::move(source)) {
  if (source_.size() != dims_.count()) {
    throw ShapeError("quantile map: source length does not match dims");
  }
  for (std::size_t s : source_) {
    if (s >= dims_.count()) {
      throw std::invalid_argument("quantile map: source index out of range");
    }
  }
}

QuantileMap QuantileMap::build(const Volume& vol, const KernelSpec& kernel) {
  kernel.validate();
  const Dims& d = vol.dims();
  const int half = kernel.width / 2;
  const int z_reach = d.nz == 1 ? 0 : half;
  const std::size_t rank = kernel.rank(d);

  std::vector<std::size_t> source(d.count());
  std::vector<double> buf;
  buf.reserve(kernel.window_size(d));
  for (int z = 0; z < d.nz; ++z) {
    for (int y = 0; y < d.ny; ++y) {
      for (int x = 0; x < d.nx; ++x) {
        source[d.flat(x, y, z)] =
            arg_quantile_at(vol, half, z_reach, rank, x, y, z, buf);
      }
    }
  }

  QuantileMap map;
  map.dims_ = d;
  map.source_ = std::move(source);
  return map;
}

Volume QuantileMap::apply(const Volume& x) const {
  if (!(x.dims() == dims_)) {
    throw ShapeError("quantile map: apply shape mismatch");
  }
  Volume out(dims_);
  for (std::size_t i = 0; i < source_.size(); ++i) out[i] = x[source_[i]];
  return out;
}

Volume QuantileMap::apply_transpose(const Volume& x) const {
  if (!(x.dims() == dims_)) {
    throw ShapeError("quantile map: transpose shape mismatch");
  }
  Volume out(dims_, 0.0);
  for (std::size_t i = 0; i < source_.size(); ++i) out[source_[i]] += x[i];
  return out;
}

Volume quantile_filter(const Volume& vol, const KernelSpec& kernel) {
  return QuantileMap::build(vol, kernel).apply(vol);
}

Volume map_residual(const QuantileMap& map, const Volume& x) {
  Volume out = map.apply(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - out[i];
  return out;
}

Volume map_residual_transpose(const QuantileMap& map, const Volume& x) {
  Volume out = map.apply_transpose(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - out[i];
  return out;
}

Volume quasi_residual(const Volume& vol, const KernelSpec& kernel) {
  return sub(vol, quantile_filter(vol, kernel));
}

double quasi_energy(const Volume& vol, const KernelSpec& kernel) {
  return sum_abs(quasi_residual(vol, kernel));
}

}  // namespace quasi
