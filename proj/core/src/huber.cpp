#include "quasi/huber.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace quasi {

namespace {

double median_in_place(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid),
                   v.end());
  const double hi = v[mid];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(),
                   v.begin() + static_cast<std::ptrdiff_t>(mid - 1),
                   v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (v[mid - 1] + hi);
}

void collect_residuals(const Volume& f, const Volume& g,
                       std::vector<double>& out) {
  for (std::size_t i = 0; i < f.size(); ++i) out.push_back(f[i] - g[i]);
}

Volume weight_volume(const Volume& f, const Volume& g, double eps) {
  Volume w(f.dims());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = irls_weight(f[i] - g[i], eps);
  }
  return w;
}

// Shared threshold logic over an arbitrary per-frame estimate accessor.
template <class FrameOf>
std::vector<double> thresholds_impl(FrameOf&& estimate_frame, int t_count,
                                    std::size_t voxels,
                                    const VolumeSequence& inputs,
                                    const HuberSpec& spec) {
  std::vector<double> eps(static_cast<std::size_t>(t_count));
  if (spec.mode == HuberMode::fixed) {
    std::fill(eps.begin(), eps.end(), spec.epsilon);
    return eps;
  }
  std::vector<double> residuals;
  if (spec.pooled) {
    residuals.reserve(voxels * static_cast<std::size_t>(t_count));
    for (int t = 0; t < t_count; ++t) {
      collect_residuals(estimate_frame(t), inputs.frame(t), residuals);
    }
    std::fill(eps.begin(), eps.end(), auto_epsilon(residuals));
  } else {
    residuals.reserve(voxels);
    for (int t = 0; t < t_count; ++t) {
      residuals.clear();
      collect_residuals(estimate_frame(t), inputs.frame(t), residuals);
      eps[static_cast<std::size_t>(t)] = auto_epsilon(residuals);
    }
  }
  return eps;
}

}  // namespace

void HuberSpec::validate() const {
  if (mode == HuberMode::fixed && !(epsilon > 0.0)) {
    throw std::invalid_argument("huber: fixed threshold must be positive");
  }
}

double huber_phi(double l, double eps) {
  const double a = std::abs(l);
  return a <= eps ? 0.5 * l * l : eps * (a - 0.5 * eps);
}

double huber_phi_prime(double l, double eps) {
  if (std::abs(l) <= eps) return l;
  return l > 0.0 ? eps : -eps;
}

double irls_weight(double l, double eps) {
  const double a = std::abs(l);
  return a <= eps ? 1.0 : eps / a;
}

double mad_sigma(std::span<const double> residuals) {
  if (residuals.empty()) {
    throw std::invalid_argument("mad: empty residual set");
  }
  std::vector<double> buf(residuals.begin(), residuals.end());
  const double med = median_in_place(buf);
  for (double& v : buf) v = std::abs(v - med);
  const double mad = median_in_place(buf);
  return std::max(1.4826 * mad, kMadSigmaFloor);
}

double auto_epsilon(std::span<const double> residuals) {
  return 1.345 * mad_sigma(residuals);
}

std::vector<double> huber_thresholds(const Volume& f,
                                     const VolumeSequence& inputs,
                                     const HuberSpec& spec) {
  spec.validate();
  if (!(f.dims() == inputs.dims())) {
    throw ShapeError("huber thresholds: estimate and inputs shape mismatch");
  }
  return thresholds_impl([&](int) -> const Volume& { return f; },
                         inputs.frame_count(), f.size(), inputs, spec);
}

std::vector<double> huber_thresholds(const VolumeSequence& f_seq,
                                     const VolumeSequence& inputs,
                                     const HuberSpec& spec) {
  spec.validate();
  if (f_seq.frame_count() != inputs.frame_count() ||
      !(f_seq.dims() == inputs.dims())) {
    throw ShapeError("huber thresholds: sequence shape mismatch");
  }
  return thresholds_impl(
      [&](int t) -> const Volume& { return f_seq.frame(t); },
      inputs.frame_count(), f_seq.dims().count(), inputs, spec);
}

WeightField build_weights(const Volume& f, const VolumeSequence& inputs,
                          const HuberSpec& spec) {
  WeightField field;
  field.epsilons = huber_thresholds(f, inputs, spec);
  field.frames.reserve(field.epsilons.size());
  for (int t = 0; t < inputs.frame_count(); ++t) {
    field.frames.push_back(weight_volume(
        f, inputs.frame(t), field.epsilons[static_cast<std::size_t>(t)]));
  }
  return field;
}

WeightField build_weights(const VolumeSequence& f_seq,
                          const VolumeSequence& inputs,
                          const HuberSpec& spec) {
  WeightField field;
  field.epsilons = huber_thresholds(f_seq, inputs, spec);
  field.frames.reserve(field.epsilons.size());
  for (int t = 0; t < inputs.frame_count(); ++t) {
    field.frames.push_back(
        weight_volume(f_seq.frame(t), inputs.frame(t),
                      field.epsilons[static_cast<std::size_t>(t)]));
  }
  return field;
}

}  // namespace quasi
