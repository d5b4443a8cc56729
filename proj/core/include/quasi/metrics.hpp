#pragma once

#include "quasi/volume.hpp"

namespace quasi {

/// Mean and population standard deviation (divisor n) over a region.
struct RegionStats {
  double mean = 0.0;
  double stddev = 0.0;
};

RegionStats region_stats(const Volume& vol, const Region& region);

/// PSNR ceiling used in place of +inf when the inputs are identical.
inline constexpr double kPsnrCap = 300.0;

/// 10 * log10(peak^2 / MSE) in dB, capped at kPsnrCap.
double psnr(const Volume& ref, const Volume& test, double peak = 1.0);
double psnr(const VolumeSequence& ref, const VolumeSequence& test,
            double peak = 1.0);

/// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03 and dynamic range `peak`, evaluated over valid window positions.
/// Volumes are scored per z-slice and averaged. Slices smaller than the
/// window raise std::invalid_argument.
double ssim(const Volume& ref, const Volume& test, double peak = 1.0);

/// Mean-to-standard-deviation ratio of a foreground region.
double msr(const Volume& vol, const Region& foreground);

/// Contrast-to-noise ratio between a foreground and a background region.
double cnr(const Volume& vol, const Region& foreground,
           const Region& background);

}  // namespace quasi
