#include "quasi/gradients.hpp"

#include <cstddef>

namespace quasi {

namespace {

struct AxisGeom {
  std::size_t stride;
  int extent;
  int sel;  // 0 = x, 1 = y, 2 = z

  int pos(int x, int y, int z) const {
    return sel == 0 ? x : (sel == 1 ? y : z);
  }
};

AxisGeom geom(const Dims& d, Axis a) {
  switch (a) {
    case Axis::x:
      return {1, d.nx, 0};
    case Axis::y:
      return {static_cast<std::size_t>(d.nx), d.ny, 1};
    default:
      return {static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny),
              d.nz, 2};
  }
}

Volume grad_axis(const Volume& vol, Axis a) {
  const Dims& d = vol.dims();
  const AxisGeom g = geom(d, a);
  Volume out(d, 0.0);
  for (int z = 0; z < d.nz; ++z) {
    for (int y = 0; y < d.ny; ++y) {
      for (int x = 0; x < d.nx; ++x) {
        const int pos = g.pos(x, y, z);
        if (pos < g.extent - 1) {
          const std::size_t i = d.flat(x, y, z);
          out[i] = vol[i + g.stride] - vol[i];
        }
      }
    }
  }
  return out;
}

// Adjoint of the forward difference above:
//   out[i] = g[i - stride] * [pos >= 1] - g[i] * [pos <= extent - 2].
void grad_axis_transpose_accum(const Volume& comp, Axis a, Volume& out) {
  const Dims& d = comp.dims();
  const AxisGeom g = geom(d, a);
  for (int z = 0; z < d.nz; ++z) {
    for (int y = 0; y < d.ny; ++y) {
      for (int x = 0; x < d.nx; ++x) {
        const int pos = g.pos(x, y, z);
        const std::size_t i = d.flat(x, y, z);
        double v = 0.0;
        if (pos >= 1) v += comp[i - g.stride];
        if (pos <= g.extent - 2) v -= comp[i];
        out[i] += v;
      }
    }
  }
}

}  // namespace

GradientField GradientField::zeros(const Dims& dims,
                                   std::span<const Axis> axes) {
  GradientField f;
  f.axes.assign(axes.begin(), axes.end());
  f.comp.reserve(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) f.comp.emplace_back(dims, 0.0);
  return f;
}

std::vector<Axis> spatial_axes_for(const Dims& dims) {
  std::vector<Axis> axes{Axis::x, Axis::y};
  if (dims.nz > 1) axes.push_back(Axis::z);
  return axes;
}

GradientField grad_spatial(const Volume& vol, std::span<const Axis> axes) {
  GradientField f;
  f.axes.assign(axes.begin(), axes.end());
  f.comp.reserve(axes.size());
  for (Axis a : axes) f.comp.push_back(grad_axis(vol, a));
  return f;
}

Volume grad_spatial_transpose(const GradientField& field) {
  if (field.comp.empty()) {
    throw std::invalid_argument("gradient transpose: empty field");
  }
  Volume out(field.comp.front().dims(), 0.0);
  for (std::size_t c = 0; c < field.comp.size(); ++c) {
    if (!(field.comp[c].dims() == out.dims())) {
      throw ShapeError("gradient transpose: component shape mismatch");
    }
    grad_axis_transpose_accum(field.comp[c], field.axes[c], out);
  }
  return out;
}

VolumeSequence grad_temporal(const VolumeSequence& seq) {
  const int t_count = seq.frame_count();
  VolumeSequence out = VolumeSequence::filled(t_count, seq.dims(), 0.0);
  for (int t = 0; t < t_count - 1; ++t) {
    out.frame(t) = sub(seq.frame(t + 1), seq.frame(t));
  }
  return out;
}

VolumeSequence grad_temporal_transpose(const VolumeSequence& seq) {
  const int t_count = seq.frame_count();
  VolumeSequence out = VolumeSequence::filled(t_count, seq.dims(), 0.0);
  for (int t = 0; t < t_count; ++t) {
    Volume& o = out.frame(t);
    if (t >= 1) axpy_in_place(1.0, seq.frame(t - 1), o);
    if (t <= t_count - 2) axpy_in_place(-1.0, seq.frame(t), o);
  }
  return out;
}

double tv_energy(const GradientField& field) {
  double acc = 0.0;
  for (const Volume& c : field.comp) acc += sum_abs(c);
  return acc;
}

}  // namespace quasi
