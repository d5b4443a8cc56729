#pragma once

#include <span>
#include <vector>

#include "quasi/volume.hpp"

namespace quasi {

enum class HuberMode { fixed, auto_mad };

/// Robust data-fidelity threshold. In auto_mad mode the threshold is
/// re-estimated from the current residuals at every weight update; `pooled`
/// selects one estimate over all frames versus one per frame.
struct HuberSpec {
  HuberMode mode = HuberMode::auto_mad;
  double epsilon = 1e-2;  // used when mode == fixed
  bool pooled = true;

  void validate() const;
};

/// Quadratic below the threshold, linear above: l^2/2 for |l| <= eps,
/// eps*(|l| - eps/2) otherwise.
double huber_phi(double l, double eps);

/// d/dl of huber_phi: l on the quadratic branch, eps*sign(l) beyond.
double huber_phi_prime(double l, double eps);

/// IRLS diagonal weight huber_phi_prime(l)/l with the removable singularity
/// at l = 0 set to 1; always in (0, 1] and satisfies w(l)*l == phi'(l).
double irls_weight(double l, double eps);

/// Scale floor applied to the MAD estimate so constant residuals stay usable.
inline constexpr double kMadSigmaFloor = 1e-6;

/// Robust scale estimate 1.4826 * median(|r - median(r)|), floored.
double mad_sigma(std::span<const double> residuals);

/// 95%-efficiency threshold 1.345 * mad_sigma(residuals).
double auto_epsilon(std::span<const double> residuals);

/// Thresholds a weight update would use at the given iterate, one per input
/// frame (all equal for fixed or pooled estimation).
std::vector<double> huber_thresholds(const Volume& f,
                                     const VolumeSequence& inputs,
                                     const HuberSpec& spec);
std::vector<double> huber_thresholds(const VolumeSequence& f_seq,
                                     const VolumeSequence& inputs,
                                     const HuberSpec& spec);

/// Diagonal IRLS weights, one volume per input frame, with the threshold
/// actually used for each frame.
struct WeightField {
  std::vector<Volume> frames;
  std::vector<double> epsilons;
};

/// Weights for a single estimate against T input frames.
WeightField build_weights(const Volume& f, const VolumeSequence& inputs,
                          const HuberSpec& spec);

/// Weights for a sequence estimate, frame t against input frame t.
WeightField build_weights(const VolumeSequence& f_seq,
                          const VolumeSequence& inputs, const HuberSpec& spec);

}  // namespace quasi
