#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace quasi::testing {

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

Volume random_volume(std::mt19937_64& rng, Dims dims, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Volume v(dims);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = dist(rng);
  return v;
}

VolumeSequence random_sequence(std::mt19937_64& rng, int t_frames, Dims dims,
                               double lo, double hi) {
  std::vector<Volume> frames;
  frames.reserve(static_cast<std::size_t>(t_frames));
  for (int t = 0; t < t_frames; ++t) {
    frames.push_back(random_volume(rng, dims, lo, hi));
  }
  return VolumeSequence(std::move(frames));
}

Volume quantile_filter_oracle(const Volume& vol, const KernelSpec& kernel) {
  const Dims& d = vol.dims();
  const int half = kernel.width / 2;
  const int z_half = d.nz == 1 ? 0 : half;
  auto clamp = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };

  Volume out(d);
  std::vector<double> window;
  for (int z = 0; z < d.nz; ++z) {
    for (int y = 0; y < d.ny; ++y) {
      for (int x = 0; x < d.nx; ++x) {
        window.clear();
        for (int dz = -z_half; dz <= z_half; ++dz) {
          for (int dy = -half; dy <= half; ++dy) {
            for (int dx = -half; dx <= half; ++dx) {
              window.push_back(vol[d.flat(clamp(x + dx, d.nx),
                                          clamp(y + dy, d.ny),
                                          clamp(z + dz, d.nz))]);
            }
          }
        }
        std::sort(window.begin(), window.end());
        const std::size_t rank = static_cast<std::size_t>(
            std::floor(kernel.p * static_cast<double>(window.size() - 1)));
        out[d.flat(x, y, z)] = window[rank];
      }
    }
  }
  return out;
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix m(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
  }
  return m;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("dense: size mismatch");
  DenseMatrix m(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double v = (*this)(i, k);
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols_; ++j) {
        m(i, j) += v * rhs(k, j);
      }
    }
  }
  return m;
}

DenseMatrix DenseMatrix::operator+(const DenseMatrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) {
    throw std::invalid_argument("dense: size mismatch");
  }
  DenseMatrix m = *this;
  for (std::size_t i = 0; i < m.a_.size(); ++i) m.a_[i] += rhs.a_[i];
  return m;
}

DenseMatrix DenseMatrix::scaled(double s) const {
  DenseMatrix m = *this;
  for (double& v : m.a_) v *= s;
  return m;
}

std::vector<double> DenseMatrix::mul(std::span<const double> x) const {
  if (x.size() != cols_) throw std::invalid_argument("dense: size mismatch");
  std::vector<double> y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> DenseMatrix::solve(std::vector<double> b) const {
  if (rows_ != cols_ || b.size() != rows_) {
    throw std::invalid_argument("dense solve: size mismatch");
  }
  const std::size_t n = rows_;
  std::vector<double> m = a_;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r * n + col]) > std::abs(m[pivot * n + col])) pivot = r;
    }
    if (m[pivot * n + col] == 0.0) {
      throw std::runtime_error("dense solve: singular matrix");
    }
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(m[pivot * n + j], m[col * n + j]);
      }
      std::swap(b[pivot], b[col]);
    }
    const double diag = m[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = m[r * n + col] / diag;
      if (factor == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) {
        m[r * n + j] -= factor * m[col * n + j];
      }
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t j = ri + 1; j < n; ++j) acc -= m[ri * n + j] * x[j];
    x[ri] = acc / m[ri * n + ri];
  }
  return x;
}

DenseMatrix dense_grad_axis(const Dims& dims, Axis axis) {
  const std::size_t n = dims.count();
  DenseMatrix m(n, n);
  for (int z = 0; z < dims.nz; ++z) {
    for (int y = 0; y < dims.ny; ++y) {
      for (int x = 0; x < dims.nx; ++x) {
        const std::size_t row = dims.flat(x, y, z);
        int nx = x, ny = y, nz = z;
        int pos = 0, extent = 0;
        switch (axis) {
          case Axis::x:
            pos = x;
            extent = dims.nx;
            nx = x + 1;
            break;
          case Axis::y:
            pos = y;
            extent = dims.ny;
            ny = y + 1;
            break;
          case Axis::z:
            pos = z;
            extent = dims.nz;
            nz = z + 1;
            break;
        }
        if (pos < extent - 1) {
          m(row, dims.flat(nx, ny, nz)) += 1.0;
          m(row, row) -= 1.0;
        }
      }
    }
  }
  return m;
}

DenseMatrix dense_grad_temporal(int t_frames, std::size_t block) {
  const std::size_t n = static_cast<std::size_t>(t_frames) * block;
  DenseMatrix m(n, n);
  for (int t = 0; t + 1 < t_frames; ++t) {
    for (std::size_t i = 0; i < block; ++i) {
      const std::size_t row = static_cast<std::size_t>(t) * block + i;
      m(row, row + block) += 1.0;
      m(row, row) -= 1.0;
    }
  }
  return m;
}

DenseMatrix dense_from_map(const QuantileMap& map) {
  const std::size_t n = map.dims().count();
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, map.source()[i]) = 1.0;
  return m;
}

double ssim_oracle(const Volume& ref, const Volume& test, double peak) {
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  std::array<std::array<double, kWin>, kWin> w{};
  double wsum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    for (int j = 0; j < kWin; ++j) {
      const double dy = i - kWin / 2;
      const double dx = j - kWin / 2;
      w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
      wsum += w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  for (auto& row : w) {
    for (double& v : row) v /= wsum;
  }

  const Dims& d = ref.dims();
  if (d.nx < kWin || d.ny < kWin) {
    throw std::invalid_argument("ssim oracle: image smaller than window");
  }
  double slice_acc = 0.0;
  for (int z = 0; z < d.nz; ++z) {
    double acc = 0.0;
    std::size_t count = 0;
    for (int y0 = 0; y0 + kWin <= d.ny; ++y0) {
      for (int x0 = 0; x0 + kWin <= d.nx; ++x0) {
        double ma = 0.0, mb = 0.0;
        for (int i = 0; i < kWin; ++i) {
          for (int j = 0; j < kWin; ++j) {
            const double wij =
                w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            ma += wij * ref[d.flat(x0 + j, y0 + i, z)];
            mb += wij * test[d.flat(x0 + j, y0 + i, z)];
          }
        }
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (int i = 0; i < kWin; ++i) {
          for (int j = 0; j < kWin; ++j) {
            const double wij =
                w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            const double da = ref[d.flat(x0 + j, y0 + i, z)] - ma;
            const double db = test[d.flat(x0 + j, y0 + i, z)] - mb;
            va += wij * da * da;
            vb += wij * db * db;
            cov += wij * da * db;
          }
        }
        acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    }
    slice_acc += acc / static_cast<double>(count);
  }
  return slice_acc / d.nz;
}

std::filesystem::path make_temp_dir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  const auto stamp =
      std::chrono::steady_clock::now().time_since_epoch().count();
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("quasi_" + tag + "_" + std::to_string(stamp) + "_" +
       std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace quasi::testing
