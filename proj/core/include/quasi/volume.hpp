#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "quasi/errors.hpp"

namespace quasi {

/// Grid extents of a volume. A 2-D image is a volume with nz == 1.
struct Dims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  std::size_t flat(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(y) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(z) * static_cast<std::size_t>(nx) *
               static_cast<std::size_t>(ny);
  }
  bool contains(int x, int y, int z) const {
    return x >= 0 && x < nx && y >= 0 && y < ny && z >= 0 && z < nz;
  }
  bool operator==(const Dims&) const = default;
};

/// Axis-aligned box used to select foreground/background statistics regions.
struct Region {
  int x = 0, y = 0, z = 0;  // origin
  int w = 0, h = 0, d = 0;  // extent

  std::size_t count() const {
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
           static_cast<std::size_t>(d);
  }
  /// Throws if the region is empty or not fully contained in `dims`.
  void validate_in(const Dims& dims) const;
};

/// Dense scalar field over an nx*ny*nz grid, stored flat with x fastest.
class Volume {
 public:
  Volume() = default;
  explicit Volume(Dims dims, double fill = 0.0);
  Volume(Dims dims, std::vector<double> data);

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  /// Bounds-checked lookup; throws std::out_of_range outside the grid.
  double at(int x, int y, int z) const;
  double& at(int x, int y, int z);

  /// Replicate-boundary lookup: coordinates clamp to [0, dim-1].
  double at_clamped(int x, int y, int z) const;

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  /// Sub-volume of `z_count` consecutive slices starting at `z_start`.
  Volume slab(int z_start, int z_count) const;

  bool all_finite() const;

 private:
  Dims dims_{};
  std::vector<double> data_;
};

/// Ordered, dimension-homogeneous stack of T >= 1 volumes.
class VolumeSequence {
 public:
  VolumeSequence() = default;
  explicit VolumeSequence(std::vector<Volume> frames);
  static VolumeSequence filled(int t_frames, Dims dims, double fill = 0.0);

  int frame_count() const { return static_cast<int>(frames_.size()); }
  const Dims& dims() const { return frames_.front().dims(); }
  bool empty() const { return frames_.empty(); }

  Volume& frame(int t) { return frames_[static_cast<std::size_t>(t)]; }
  const Volume& frame(int t) const {
    return frames_[static_cast<std::size_t>(t)];
  }

  /// Appends a frame; dims must match existing frames.
  void push_back(Volume frame);

  auto begin() { return frames_.begin(); }
  auto end() { return frames_.end(); }
  auto begin() const { return frames_.begin(); }
  auto end() const { return frames_.end(); }

 private:
  std::vector<Volume> frames_;
};

// Elementwise arithmetic; all binary ops throw ShapeError on dim mismatch.
Volume add(const Volume& a, const Volume& b);
Volume sub(const Volume& a, const Volume& b);
Volume hadamard(const Volume& a, const Volume& b);
Volume scaled(const Volume& a, double s);

/// y += a * x
void axpy_in_place(double a, const Volume& x, Volume& y);
void scale_in_place(double s, Volume& y);

double dot(const Volume& a, const Volume& b);
double sum_abs(const Volume& a);
double max_abs_diff(const Volume& a, const Volume& b);

/// Framewise average of a sequence.
Volume mean_of(const VolumeSequence& seq);

// Sequence counterparts, frame by frame.
void axpy_in_place(double a, const VolumeSequence& x, VolumeSequence& y);
void scale_in_place(double s, VolumeSequence& y);
double dot(const VolumeSequence& a, const VolumeSequence& b);
double sum_abs(const VolumeSequence& a);
double max_abs_diff(const VolumeSequence& a, const VolumeSequence& b);

}  // namespace quasi
