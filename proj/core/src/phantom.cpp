#include "quasi/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace quasi {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stateless-keyed stream: the key fixes the sequence, draws advance it.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t frame, std::uint64_t voxel)
      : state_(splitmix64(splitmix64(splitmix64(seed) ^ frame) ^ voxel)) {}

  std::uint64_t next_u64() {
    state_ = splitmix64(state_);
    return state_;
  }
  /// Uniform in (0, 1].
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }
  double next_gaussian() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
  std::uint64_t next_poisson(double lambda) {
    if (!(lambda > 0.0)) return 0;
    if (lambda < 30.0) return poisson_knuth(lambda);
    return poisson_ptrs(lambda);
  }

 private:
  std::uint64_t poisson_knuth(double lambda) {
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double prod = next_unit();
    while (prod > limit) {
      ++k;
      prod *= next_unit();
    }
    return k;
  }

  // Transformed rejection with squeeze (Hormann's PTRS), exact for large
  // rates.
  std::uint64_t poisson_ptrs(double lambda) {
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
      const double u = next_unit() - 0.5;
      const double v = next_unit();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
      const double rhs = kf * loglam - lambda - std::lgamma(kf + 1.0);
      if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
    }
  }

  std::uint64_t state_;
};

std::vector<double> default_levels(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::layered_slab:
      return {0.12, 0.45, 0.22, 0.62, 0.32, 0.78};
    case PhantomKind::nested_ellipsoids:
      return {0.08, 0.55, 0.30, 0.75, 0.45};
    default:
      return {0.15, 0.40, 0.65, 0.90};
  }
}

Volume slab_phantom(const Dims& dims, const std::vector<double>& levels) {
  const int bands = static_cast<int>(levels.size());
  Volume out(dims);
  for (int z = 0; z < dims.nz; ++z) {
    for (int y = 0; y < dims.ny; ++y) {
      const int band = std::min(bands - 1, y * bands / dims.ny);
      const double v = levels[static_cast<std::size_t>(band)];
      for (int x = 0; x < dims.nx; ++x) out[dims.flat(x, y, z)] = v;
    }
  }
  return out;
}

Volume ellipsoid_phantom(const Dims& dims, const std::vector<double>& levels) {
  const int shells = static_cast<int>(levels.size());
  const double cx = 0.5 * (dims.nx - 1);
  const double cy = 0.5 * (dims.ny - 1);
  const double cz = 0.5 * (dims.nz - 1);
  const double rx = std::max(1.0, 0.5 * dims.nx);
  const double ry = std::max(1.0, 0.5 * dims.ny);
  const double rz = std::max(1.0, 0.5 * dims.nz);
  Volume out(dims);
  for (int z = 0; z < dims.nz; ++z) {
    for (int y = 0; y < dims.ny; ++y) {
      for (int x = 0; x < dims.nx; ++x) {
        const double dx = (x - cx) / rx;
        const double dy = (y - cy) / ry;
        const double dz = dims.nz == 1 ? 0.0 : (z - cz) / rz;
        const double rho = std::sqrt(dx * dx + dy * dy + dz * dz);
        double v = levels[0];
        for (int k = 1; k < shells; ++k) {
          const double radius = 0.9 * static_cast<double>(shells - k) /
                                static_cast<double>(shells - 1);
          if (rho <= radius) v = levels[static_cast<std::size_t>(k)];
        }
        out[dims.flat(x, y, z)] = v;
      }
    }
  }
  return out;
}

Volume blocks_phantom(const Dims& dims, const std::vector<double>& levels,
                      std::uint64_t seed) {
  // Octant split; the seed permutes which level lands in which octant.
  std::array<std::size_t, 8> order{};
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::uint64_t s = seed;
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    s = splitmix64(s);
    std::swap(order[i], order[s % (i + 1)]);
  }
  Volume out(dims);
  for (int z = 0; z < dims.nz; ++z) {
    const int bz = dims.nz > 1 && z >= (dims.nz + 1) / 2 ? 1 : 0;
    for (int y = 0; y < dims.ny; ++y) {
      const int by = dims.ny > 1 && y >= (dims.ny + 1) / 2 ? 1 : 0;
      for (int x = 0; x < dims.nx; ++x) {
        const int bx = dims.nx > 1 && x >= (dims.nx + 1) / 2 ? 1 : 0;
        const std::size_t octant =
            order[static_cast<std::size_t>(bx + 2 * by + 4 * bz)];
        out[dims.flat(x, y, z)] = levels[octant % levels.size()];
      }
    }
  }
  return out;
}

}  // namespace

void PhantomSpec::validate() const {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) {
    throw std::invalid_argument("phantom: dims must be positive");
  }
  for (double v : levels) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("phantom: intensities must lie in [0, 1]");
    }
  }
  if (kind == PhantomKind::layered_slab && !levels.empty() &&
      levels.size() < 4) {
    throw std::invalid_argument("phantom: layered slab needs >= 4 layers");
  }
}

Volume make_phantom(const PhantomSpec& spec) {
  spec.validate();
  const std::vector<double> levels =
      spec.levels.empty() ? default_levels(spec.kind) : spec.levels;
  switch (spec.kind) {
    case PhantomKind::layered_slab:
      return slab_phantom(spec.dims, levels);
    case PhantomKind::nested_ellipsoids:
      return ellipsoid_phantom(spec.dims, levels);
    default:
      return blocks_phantom(spec.dims, levels, spec.seed);
  }
}

void NoiseSpec::validate() const {
  switch (kind) {
    case NoiseKind::awgn:
    case NoiseKind::speckle:
      if (!(sigma >= 0.0)) {
        throw std::invalid_argument("noise: sigma must be non-negative");
      }
      break;
    case NoiseKind::poisson:
      if (!(photon_scale > 0.0)) {
        throw std::invalid_argument("noise: photon scale must be positive");
      }
      break;
  }
}

Volume add_noise(const Volume& vol, const NoiseSpec& spec, int frame) {
  spec.validate();
  for (std::size_t i = 0; i < vol.size(); ++i) {
    if (!(vol[i] >= 0.0 && vol[i] <= 1.0)) {
      throw std::invalid_argument("noise: input intensities must be in [0,1]");
    }
  }
  Volume out(vol.dims());
  const std::uint64_t frame_key = static_cast<std::uint64_t>(frame);
  for (std::size_t i = 0; i < vol.size(); ++i) {
    CounterRng rng(spec.seed, frame_key, static_cast<std::uint64_t>(i));
    double v = vol[i];
    switch (spec.kind) {
      case NoiseKind::awgn:
        v += spec.sigma == 0.0 ? 0.0 : spec.sigma * rng.next_gaussian();
        break;
      case NoiseKind::poisson:
        v = static_cast<double>(rng.next_poisson(spec.photon_scale * v)) /
            spec.photon_scale;
        break;
      case NoiseKind::speckle:
        v *= spec.sigma == 0.0 ? 1.0
                               : std::exp(spec.sigma * rng.next_gaussian());
        break;
    }
    out[i] = std::clamp(v, 0.0, kNoiseClipMax);
  }
  return out;
}

VolumeSequence make_sequence(const Volume& truth, int t_frames,
                             const NoiseSpec& spec) {
  if (t_frames < 1) {
    throw std::invalid_argument("sequence: needs at least one frame");
  }
  std::vector<Volume> frames;
  frames.reserve(static_cast<std::size_t>(t_frames));
  for (int t = 0; t < t_frames; ++t) {
    frames.push_back(add_noise(truth, spec, t));
  }
  return VolumeSequence(std::move(frames));
}

Volume to_log_domain(const Volume& vol, double offset) {
  if (!(offset > 0.0)) {
    throw std::invalid_argument("log domain: offset must be positive");
  }
  Volume out(vol.dims());
  for (std::size_t i = 0; i < vol.size(); ++i) {
    if (vol[i] < 0.0) {
      throw std::invalid_argument("log domain: negative intensity");
    }
    out[i] = std::log(vol[i] + offset);
  }
  return out;
}

Volume from_log_domain(const Volume& vol, double offset) {
  if (!(offset > 0.0)) {
    throw std::invalid_argument("log domain: offset must be positive");
  }
  Volume out(vol.dims());
  for (std::size_t i = 0; i < vol.size(); ++i) {
    out[i] = std::exp(vol[i]) - offset;
  }
  return out;
}

}  // namespace quasi
