#pragma once

#include <optional>
#include <vector>

#include "quasi/gradients.hpp"
#include "quasi/huber.hpp"
#include "quasi/quantile.hpp"
#include "quasi/volume.hpp"

namespace quasi {

enum class SolveMode { image, volumetric, volumetric_temporal };

/// Full parameterization of a denoising run: regularization weights,
/// Lagrangian multipliers, iteration counts, kernel and robust-loss setup.
struct SolverConfig {
  double lambda = 0.0;  // quantile-sparsity weight
  double mu = 0.0;      // spatial TV weight
  double omega = 0.0;   // temporal TV weight (sequence output only)

  double alpha = 1.0;  // multiplier enforcing u = f - Q f
  double beta = 1.0;   // multiplier enforcing v = grad f
  double gamma = 1.0;  // multiplier enforcing d = grad_t F

  int k_outer = 20;  // linearization rebuild cadence
  int k_inner = 2;   // iterations per frozen linearization
  int k_cg = 3;      // CG iterations per update
  double cg_tol = 1e-6;

  KernelSpec kernel{};
  HuberSpec huber{};
  SolveMode mode = SolveMode::image;

  /// Doubles the data term of the sequence solver's right-hand side; kept as
  /// an experiment switch, off by default.
  bool mimo_data_factor2 = false;

  void validate() const;
};

struct TraceRecord {
  int outer = 0;
  int inner = 0;
  double energy = 0.0;
  double psnr = 0.0;  // NaN when no reference was supplied
};

/// Soft threshold sign(z) * max(|z| - threshold, 0).
double shrink(double z, double threshold);

/// Iteration state of the single-output solver. Splitting branches exist
/// only for terms present in the objective: a zero lambda leaves `map`
/// disengaged and a zero mu leaves `v` without axes, so inputs that already
/// minimize the remaining terms are exact fixed points of the iteration.
struct MisoState {
  Volume f;
  Volume u, b_u;                  // quantile-residual auxiliary + Bregman
  GradientField v, b_v;           // spatial TV auxiliary + Bregman
  std::optional<QuantileMap> map; // frozen linearization of the filter
  WeightField weights;            // IRLS diagonal
  std::vector<TraceRecord> trace;
};

/// Matrix-free normal operator
///   sum_t W_t x + beta grad^T grad x + alpha M^T M x,  M = I - Q,
/// applying only the branches engaged in the state.
Volume miso_apply_A(const MisoState& state, const SolverConfig& cfg,
                    const Volume& x);

/// Right-hand side
///   sum_t W_t g_t + beta grad^T (v - b_v) + alpha M^T (u - b_u).
Volume miso_build_b(const MisoState& state, const SolverConfig& cfg,
                    const VolumeSequence& inputs);

struct MisoResult {
  Volume output;
  std::vector<TraceRecord> trace;
};

/// ADMM denoising of T registered frames into one volume. When a reference
/// is given, every trace record carries the PSNR of the running iterate.
MisoResult miso_solve(const VolumeSequence& inputs, const SolverConfig& cfg,
                      const Volume* reference = nullptr);

/// Objective value: Huber data term over all frames + lambda * quantile
/// sparsity + mu * spatial TV, using the threshold the current iterate
/// would receive.
double energy_miso(const Volume& f, const VolumeSequence& inputs,
                   const SolverConfig& cfg);

/// Iteration state of the sequence-output solver. As with MisoState, only
/// branches backed by a nonzero weight are engaged: no maps without lambda,
/// axis-free v without mu, empty d without omega.
struct MimoState {
  VolumeSequence f_seq;
  VolumeSequence u, b_u;
  std::vector<GradientField> v, b_v;  // per-frame spatial auxiliaries
  VolumeSequence d, b_d;              // temporal auxiliary + Bregman
  std::vector<QuantileMap> maps;      // per-frame linearizations
  WeightField weights;
  std::vector<TraceRecord> trace;
};

VolumeSequence mimo_apply_A(const MimoState& state, const SolverConfig& cfg,
                            const VolumeSequence& x);
VolumeSequence mimo_build_b(const MimoState& state, const SolverConfig& cfg,
                            const VolumeSequence& inputs);

struct MimoResult {
  VolumeSequence output;
  std::vector<TraceRecord> trace;
};

/// ADMM denoising of T registered frames into a sequence of T volumes with
/// an additional temporal TV term.
MimoResult mimo_solve(const VolumeSequence& inputs, const SolverConfig& cfg,
                      const VolumeSequence* reference = nullptr);

double energy_mimo(const VolumeSequence& f_seq, const VolumeSequence& inputs,
                   const SolverConfig& cfg);

}  // namespace quasi
