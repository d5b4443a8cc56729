#pragma once

#include <span>
#include <vector>

#include "quasi/volume.hpp"

namespace quasi {

enum class Axis : int { x = 0, y = 1, z = 2 };

/// Forward-difference gradient components along the active spatial axes.
struct GradientField {
  std::vector<Axis> axes;
  std::vector<Volume> comp;  // parallel to axes

  static GradientField zeros(const Dims& dims, std::span<const Axis> axes);
};

/// Spatial axes a volume participates in: {x, y}, plus z when nz > 1.
std::vector<Axis> spatial_axes_for(const Dims& dims);

/// out_a[i] = vol[i + e_a] - vol[i], zero on the last slice along a
/// (replicate boundary).
GradientField grad_spatial(const Volume& vol, std::span<const Axis> axes);

/// Exact adjoint of grad_spatial under the standard inner product.
Volume grad_spatial_transpose(const GradientField& field);

/// Forward difference across the frame index; the last frame maps to zero.
VolumeSequence grad_temporal(const VolumeSequence& seq);
VolumeSequence grad_temporal_transpose(const VolumeSequence& seq);

/// Anisotropic TV: sum of absolute values over all components.
double tv_energy(const GradientField& field);

}  // namespace quasi
