#include "quasi/volume.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace quasi {

namespace {

void require_same_dims(const Dims& a, const Dims& b, const char* op) {
  if (!(a == b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     std::to_string(a.nx) + "x" + std::to_string(a.ny) + "x" +
                     std::to_string(a.nz) + " vs " + std::to_string(b.nx) +
                     "x" + std::to_string(b.ny) + "x" + std::to_string(b.nz));
  }
}

int clamp_coord(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

}  // namespace

void Region::validate_in(const Dims& dims) const {
  if (w <= 0 || h <= 0 || d <= 0) {
    throw std::invalid_argument("region: empty extent");
  }
  if (x < 0 || y < 0 || z < 0 || x + w > dims.nx || y + h > dims.ny ||
      z + d > dims.nz) {
    throw std::invalid_argument("region: not contained in volume");
  }
}

Volume::Volume(Dims dims, double fill) : dims_(dims) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) {
    throw std::invalid_argument("volume: dims must be positive");
  }
  if (!std::isfinite(fill)) {
    throw std::invalid_argument("volume: fill value must be finite");
  }
  data_.assign(dims.count(), fill);
}

Volume::Volume(Dims dims, std::vector<double> data)
    : dims_(dims), data_(std::move(data)) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) {
    throw std::invalid_argument("volume: dims must be positive");
  }
  if (data_.size() != dims.count()) {
    throw ShapeError("volume: data length does not match dims");
  }
  if (!all_finite()) {
    throw std::invalid_argument("volume: data must be finite");
  }
}

double Volume::at(int x, int y, int z) const {
  if (!dims_.contains(x, y, z)) {
    throw std::out_of_range("volume: index out of bounds");
  }
  return data_[dims_.flat(x, y, z)];
}

double& Volume::at(int x, int y, int z) {
  if (!dims_.contains(x, y, z)) {
    throw std::out_of_range("volume: index out of bounds");
  }
  return data_[dims_.flat(x, y, z)];
}

double Volume::at_clamped(int x, int y, int z) const {
  return data_[dims_.flat(clamp_coord(x, dims_.nx), clamp_coord(y, dims_.ny),
                          clamp_coord(z, dims_.nz))];
}

Volume Volume::slab(int z_start, int z_count) const {
  if (z_start < 0 || z_count <= 0 || z_start + z_count > dims_.nz) {
    throw std::out_of_range("slab: slice range outside volume");
  }
  Dims out_dims{dims_.nx, dims_.ny, z_count};
  const std::size_t plane = static_cast<std::size_t>(dims_.nx) *
                            static_cast<std::size_t>(dims_.ny);
  std::vector<double> out(data_.begin() +
                              static_cast<std::ptrdiff_t>(plane * z_start),
                          data_.begin() + static_cast<std::ptrdiff_t>(
                                              plane * (z_start + z_count)));
  return Volume(out_dims, std::move(out));
}

bool Volume::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

VolumeSequence::VolumeSequence(std::vector<Volume> frames)
    : frames_(std::move(frames)) {
  if (frames_.empty()) {
    throw std::invalid_argument("sequence: needs at least one frame");
  }
  for (const Volume& f : frames_) {
    require_same_dims(frames_.front().dims(), f.dims(), "sequence");
  }
}

VolumeSequence VolumeSequence::filled(int t_frames, Dims dims, double fill) {
  if (t_frames < 1) {
    throw std::invalid_argument("sequence: needs at least one frame");
  }
  std::vector<Volume> frames;
  frames.reserve(static_cast<std::size_t>(t_frames));
  for (int t = 0; t < t_frames; ++t) frames.emplace_back(dims, fill);
  return VolumeSequence(std::move(frames));
}

void VolumeSequence::push_back(Volume frame) {
  if (!frames_.empty()) {
    require_same_dims(frames_.front().dims(), frame.dims(), "sequence");
  }
  frames_.push_back(std::move(frame));
}

Volume add(const Volume& a, const Volume& b) {
  require_same_dims(a.dims(), b.dims(), "add");
  Volume out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Volume sub(const Volume& a, const Volume& b) {
  require_same_dims(a.dims(), b.dims(), "sub");
  Volume out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Volume hadamard(const Volume& a, const Volume& b) {
  require_same_dims(a.dims(), b.dims(), "hadamard");
  Volume out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Volume scaled(const Volume& a, double s) {
  Volume out = a;
  scale_in_place(s, out);
  return out;
}

void axpy_in_place(double a, const Volume& x, Volume& y) {
  require_same_dims(x.dims(), y.dims(), "axpy");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void scale_in_place(double s, Volume& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= s;
}

double dot(const Volume& a, const Volume& b) {
  require_same_dims(a.dims(), b.dims(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum_abs(const Volume& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i]);
  return acc;
}

double max_abs_diff(const Volume& a, const Volume& b) {
  require_same_dims(a.dims(), b.dims(), "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

Volume mean_of(const VolumeSequence& seq) {
  Volume out(seq.dims(), 0.0);
  for (const Volume& f : seq) axpy_in_place(1.0, f, out);
  scale_in_place(1.0 / seq.frame_count(), out);
  return out;
}

void axpy_in_place(double a, const VolumeSequence& x, VolumeSequence& y) {
  if (x.frame_count() != y.frame_count()) {
    throw ShapeError("axpy: sequence frame count mismatch");
  }
  for (int t = 0; t < y.frame_count(); ++t) {
    axpy_in_place(a, x.frame(t), y.frame(t));
  }
}

void scale_in_place(double s, VolumeSequence& y) {
  for (Volume& f : y) scale_in_place(s, f);
}

double dot(const VolumeSequence& a, const VolumeSequence& b) {
  if (a.frame_count() != b.frame_count()) {
    throw ShapeError("dot: sequence frame count mismatch");
  }
  double acc = 0.0;
  for (int t = 0; t < a.frame_count(); ++t) acc += dot(a.frame(t), b.frame(t));
  return acc;
}

double sum_abs(const VolumeSequence& a) {
  double acc = 0.0;
  for (const Volume& f : a) acc += sum_abs(f);
  return acc;
}

double max_abs_diff(const VolumeSequence& a, const VolumeSequence& b) {
  if (a.frame_count() != b.frame_count()) {
    throw ShapeError("max_abs_diff: sequence frame count mismatch");
  }
  double m = 0.0;
  for (int t = 0; t < a.frame_count(); ++t) {
    m = std::max(m, max_abs_diff(a.frame(t), b.frame(t)));
  }
  return m;
}

}  // namespace quasi
