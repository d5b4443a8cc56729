#include "quasi/metrics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace quasi {

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;
constexpr double kStddevFloor = 1e-12;

double mse(const Volume& ref, const Volume& test) {
  if (!(ref.dims() == test.dims())) {
    throw ShapeError("psnr: shape mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = ref[i] - test[i];
    acc += d * d;
  }
  return acc / static_cast<double>(ref.size());
}

double psnr_from_mse(double mean_sq, double peak) {
  if (!(peak > 0.0)) {
    throw std::invalid_argument("psnr: peak must be positive");
  }
  if (mean_sq <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mean_sq));
}

std::array<double, kSsimWindow> ssim_kernel() {
  std::array<double, kSsimWindow> k{};
  const int half = kSsimWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double x = static_cast<double>(i - half);
    k[static_cast<std::size_t>(i)] =
        std::exp(-x * x / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable Gaussian filter over the valid region of one slice.
// in: ny x nx row-major; out: (ny-10) x (nx-10).
void gauss_valid(const std::vector<double>& in, int nx, int ny,
                 const std::array<double, kSsimWindow>& k,
                 std::vector<double>& tmp, std::vector<double>& out) {
  const int half = kSsimWindow / 2;
  const int vx = nx - 2 * half;
  const int vy = ny - 2 * half;
  tmp.assign(static_cast<std::size_t>(vx) * static_cast<std::size_t>(ny), 0.0);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < vx; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) {
        acc += k[static_cast<std::size_t>(i)] *
               in[static_cast<std::size_t>(y) * static_cast<std::size_t>(nx) +
                  static_cast<std::size_t>(x + i)];
      }
      tmp[static_cast<std::size_t>(y) * static_cast<std::size_t>(vx) +
          static_cast<std::size_t>(x)] = acc;
    }
  }
  out.assign(static_cast<std::size_t>(vx) * static_cast<std::size_t>(vy), 0.0);
  for (int y = 0; y < vy; ++y) {
    for (int x = 0; x < vx; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) {
        acc += k[static_cast<std::size_t>(i)] *
               tmp[static_cast<std::size_t>(y + i) *
                       static_cast<std::size_t>(vx) +
                   static_cast<std::size_t>(x)];
      }
      out[static_cast<std::size_t>(y) * static_cast<std::size_t>(vx) +
          static_cast<std::size_t>(x)] = acc;
    }
  }
}

double ssim_slice(const std::vector<double>& a, const std::vector<double>& b,
                  int nx, int ny, double peak) {
  static const std::array<double, kSsimWindow> kernel = ssim_kernel();
  const double c1 = (kSsimK1 * peak) * (kSsimK1 * peak);
  const double c2 = (kSsimK2 * peak) * (kSsimK2 * peak);

  const std::size_t n = a.size();
  std::vector<double> aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }

  std::vector<double> tmp, mu_a, mu_b, m_aa, m_bb, m_ab;
  gauss_valid(a, nx, ny, kernel, tmp, mu_a);
  gauss_valid(b, nx, ny, kernel, tmp, mu_b);
  gauss_valid(aa, nx, ny, kernel, tmp, m_aa);
  gauss_valid(bb, nx, ny, kernel, tmp, m_bb);
  gauss_valid(ab, nx, ny, kernel, tmp, m_ab);

  double acc = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double var_a = m_aa[i] - mu_a[i] * mu_a[i];
    const double var_b = m_bb[i] - mu_b[i] * mu_b[i];
    const double cov = m_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den =
        (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
    acc += num / den;
  }
  return acc / static_cast<double>(mu_a.size());
}

}  // namespace

RegionStats region_stats(const Volume& vol, const Region& region) {
  region.validate_in(vol.dims());
  const Dims& dims = vol.dims();
  double sum = 0.0;
  for (int z = region.z; z < region.z + region.d; ++z) {
    for (int y = region.y; y < region.y + region.h; ++y) {
      for (int x = region.x; x < region.x + region.w; ++x) {
        sum += vol[dims.flat(x, y, z)];
      }
    }
  }
  const double n = static_cast<double>(region.count());
  const double mean = sum / n;
  double var = 0.0;
  for (int z = region.z; z < region.z + region.d; ++z) {
    for (int y = region.y; y < region.y + region.h; ++y) {
      for (int x = region.x; x < region.x + region.w; ++x) {
        const double d = vol[dims.flat(x, y, z)] - mean;
        var += d * d;
      }
    }
  }
  return RegionStats{mean, std::sqrt(var / n)};
}

double psnr(const Volume& ref, const Volume& test, double peak) {
  return psnr_from_mse(mse(ref, test), peak);
}

double psnr(const VolumeSequence& ref, const VolumeSequence& test,
            double peak) {
  if (ref.frame_count() != test.frame_count()) {
    throw ShapeError("psnr: sequence frame count mismatch");
  }
  double acc = 0.0;
  for (int t = 0; t < ref.frame_count(); ++t) {
    acc += mse(ref.frame(t), test.frame(t));
  }
  return psnr_from_mse(acc / ref.frame_count(), peak);
}

double ssim(const Volume& ref, const Volume& test, double peak) {
  if (!(ref.dims() == test.dims())) {
    throw ShapeError("ssim: shape mismatch");
  }
  if (!(peak > 0.0)) {
    throw std::invalid_argument("ssim: peak must be positive");
  }
  const Dims& dims = ref.dims();
  if (dims.nx < kSsimWindow || dims.ny < kSsimWindow) {
    throw std::invalid_argument("ssim: slice smaller than the 11x11 window");
  }
  const std::size_t plane =
      static_cast<std::size_t>(dims.nx) * static_cast<std::size_t>(dims.ny);
  std::vector<double> a(plane), b(plane);
  double acc = 0.0;
  for (int z = 0; z < dims.nz; ++z) {
    const std::size_t off = plane * static_cast<std::size_t>(z);
    for (std::size_t i = 0; i < plane; ++i) {
      a[i] = ref[off + i];
      b[i] = test[off + i];
    }
    acc += ssim_slice(a, b, dims.nx, dims.ny, peak);
  }
  return acc / dims.nz;
}

double msr(const Volume& vol, const Region& foreground) {
  const RegionStats s = region_stats(vol, foreground);
  return s.mean / std::max(s.stddev, kStddevFloor);
}

double cnr(const Volume& vol, const Region& foreground,
           const Region& background) {
  const RegionStats f = region_stats(vol, foreground);
  const RegionStats b = region_stats(vol, background);
  const double sf = std::max(f.stddev, kStddevFloor);
  const double sb = std::max(b.stddev, kStddevFloor);
  return std::abs(f.mean - b.mean) / (0.5 * std::sqrt(sf * sf + sb * sb));
}

}  // namespace quasi
