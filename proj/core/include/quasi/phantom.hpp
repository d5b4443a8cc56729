#pragma once

#include <cstdint>
#include <vector>

#include "quasi/volume.hpp"

namespace quasi {

enum class PhantomKind { layered_slab, nested_ellipsoids, blocks };

/// Synthetic ground-truth description. `levels` are the band/region
/// intensities in [0, 1]; an empty list selects per-kind defaults. The seed
/// only influences kinds with a stochastic layout (octant shuffling of the
/// blocks phantom); layered_slab and nested_ellipsoids are purely geometric.
struct PhantomSpec {
  PhantomKind kind = PhantomKind::layered_slab;
  Dims dims{};
  std::vector<double> levels;
  std::uint64_t seed = 0;

  void validate() const;
};

Volume make_phantom(const PhantomSpec& spec);

enum class NoiseKind { awgn, poisson, speckle };

/// Noise model parameters. Per-voxel draws depend only on
/// (seed, frame index, voxel index), so generation order never matters.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::awgn;
  double sigma = 0.1;            // awgn stddev / speckle log-stddev
  double photon_scale = 1000.0;  // poisson events per unit intensity
  std::uint64_t seed = 0;

  void validate() const;
};

/// Intensity ceiling applied after noise so heavy tails stay finite.
inline constexpr double kNoiseClipMax = 4.0;

/// One noise realization of a clean volume (intensities in [0, 1]).
Volume add_noise(const Volume& vol, const NoiseSpec& spec, int frame = 0);

/// T independent realizations of the same truth, already co-registered by
/// construction.
VolumeSequence make_sequence(const Volume& truth, int t_frames,
                             const NoiseSpec& spec);

/// ln(vol + offset); turns multiplicative noise into additive noise.
Volume to_log_domain(const Volume& vol, double offset = 1e-3);
/// exp(vol) - offset, inverse of to_log_domain.
Volume from_log_domain(const Volume& vol, double offset = 1e-3);

}  // namespace quasi
