#include "quasi/solver.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "quasi/cg.hpp"
#include "quasi/errors.hpp"
#include "quasi/metrics.hpp"

namespace quasi {

namespace {

double huber_data_term(const Volume& f, const VolumeSequence& inputs,
                       std::span<const double> epsilons) {
  double acc = 0.0;
  for (int t = 0; t < inputs.frame_count(); ++t) {
    const Volume& g = inputs.frame(t);
    const double eps = epsilons[static_cast<std::size_t>(t)];
    for (std::size_t i = 0; i < f.size(); ++i) {
      acc += huber_phi(f[i] - g[i], eps);
    }
  }
  return acc;
}

void shrink_update(const Volume& target, const Volume& bregman, double thr,
                   Volume& aux) {
  for (std::size_t i = 0; i < aux.size(); ++i) {
    aux[i] = shrink(target[i] + bregman[i], thr);
  }
}

void bregman_update(const Volume& target, const Volume& aux, Volume& bregman) {
  for (std::size_t i = 0; i < bregman.size(); ++i) {
    bregman[i] += target[i] - aux[i];
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw ConfigError("solver: alpha and beta must be positive");
  }
  if (mode == SolveMode::volumetric_temporal && !(gamma > 0.0)) {
    throw ConfigError("solver: gamma must be positive in temporal mode");
  }
  if (lambda < 0.0 || mu < 0.0 || omega < 0.0) {
    throw ConfigError("solver: regularization weights must be non-negative");
  }
  if (k_outer < 1 || k_inner < 1 || k_cg < 1) {
    throw ConfigError("solver: iteration counts must be positive");
  }
  if (!(cg_tol >= 0.0)) {
    throw ConfigError("solver: cg tolerance must be non-negative");
  }
  try {
    kernel.validate();
    huber.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

double shrink(double z, double threshold) {
  const double m = std::abs(z) - threshold;
  if (m <= 0.0) return 0.0;
  return z > 0.0 ? m : -m;
}

Volume miso_apply_A(const MisoState& state, const SolverConfig& cfg,
                    const Volume& x) {
  Volume out(x.dims(), 0.0);
  for (const Volume& w : state.weights.frames) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[i] * x[i];
  }
  if (!state.v.axes.empty()) {
    const GradientField gx = grad_spatial(x, state.v.axes);
    axpy_in_place(cfg.beta, grad_spatial_transpose(gx), out);
  }
  if (state.map) {
    const Volume mx = map_residual(*state.map, x);
    axpy_in_place(cfg.alpha, map_residual_transpose(*state.map, mx), out);
  }
  return out;
}

Volume miso_build_b(const MisoState& state, const SolverConfig& cfg,
                    const VolumeSequence& inputs) {
  Volume b(state.f.dims(), 0.0);
  for (int t = 0; t < inputs.frame_count(); ++t) {
    const Volume& w = state.weights.frames[static_cast<std::size_t>(t)];
    const Volume& g = inputs.frame(t);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += w[i] * g[i];
  }

  if (!state.v.axes.empty()) {
    GradientField v_minus_bv = state.v;
    for (std::size_t c = 0; c < v_minus_bv.comp.size(); ++c) {
      axpy_in_place(-1.0, state.b_v.comp[c], v_minus_bv.comp[c]);
    }
    axpy_in_place(cfg.beta, grad_spatial_transpose(v_minus_bv), b);
  }

  if (state.map) {
    Volume u_minus_bu = sub(state.u, state.b_u);
    axpy_in_place(cfg.alpha, map_residual_transpose(*state.map, u_minus_bu),
                  b);
  }
  return b;
}

double energy_miso(const Volume& f, const VolumeSequence& inputs,
                   const SolverConfig& cfg) {
  const std::vector<double> eps = huber_thresholds(f, inputs, cfg.huber);
  double e = huber_data_term(f, inputs, eps);
  if (cfg.lambda > 0.0) e += cfg.lambda * quasi_energy(f, cfg.kernel);
  if (cfg.mu > 0.0) {
    const std::vector<Axis> axes = spatial_axes_for(f.dims());
    e += cfg.mu * tv_energy(grad_spatial(f, axes));
  }
  return e;
}

MisoResult miso_solve(const VolumeSequence& inputs, const SolverConfig& cfg,
                      const Volume* reference) {
  cfg.validate();
  if (reference && !(reference->dims() == inputs.dims())) {
    throw ShapeError("solver: reference shape mismatch");
  }
  const Dims dims = inputs.dims();
  const bool with_quantile = cfg.lambda > 0.0;
  const bool with_tv = cfg.mu > 0.0;
  const std::vector<Axis> axes =
      with_tv ? spatial_axes_for(dims) : std::vector<Axis>{};

  MisoState s;
  s.f = mean_of(inputs);
  if (with_quantile) {
    s.u = Volume(dims, 0.0);
    s.b_u = Volume(dims, 0.0);
  }
  s.v = GradientField::zeros(dims, axes);
  s.b_v = GradientField::zeros(dims, axes);

  const double u_thr = cfg.lambda / cfg.alpha;
  const double v_thr = cfg.mu / cfg.beta;

  for (int outer = 1; outer <= cfg.k_outer; ++outer) {
    if (with_quantile) s.map = QuantileMap::build(s.f, cfg.kernel);
    for (int inner = 1; inner <= cfg.k_inner; ++inner) {
      s.weights = build_weights(s.f, inputs, cfg.huber);

      const Volume b = miso_build_b(s, cfg, inputs);
      if (!b.all_finite()) {
        throw NumericError("solver: non-finite right-hand side", outer, inner);
      }
      cg_solve([&](const Volume& x) { return miso_apply_A(s, cfg, x); }, b,
               s.f, cfg.k_cg, cfg.cg_tol);
      if (!s.f.all_finite()) {
        throw NumericError("solver: non-finite iterate", outer, inner);
      }

      if (with_quantile) {
        const Volume mf = map_residual(*s.map, s.f);
        shrink_update(mf, s.b_u, u_thr, s.u);
        bregman_update(mf, s.u, s.b_u);
      }

      if (with_tv) {
        const GradientField gf = grad_spatial(s.f, axes);
        for (std::size_t c = 0; c < gf.comp.size(); ++c) {
          shrink_update(gf.comp[c], s.b_v.comp[c], v_thr, s.v.comp[c]);
          bregman_update(gf.comp[c], s.v.comp[c], s.b_v.comp[c]);
        }
      }

      TraceRecord rec{outer, inner, energy_miso(s.f, inputs, cfg),
                      std::numeric_limits<double>::quiet_NaN()};
      if (reference) rec.psnr = psnr(*reference, s.f);
      s.trace.push_back(rec);
    }
  }
  return MisoResult{std::move(s.f), std::move(s.trace)};
}

VolumeSequence mimo_apply_A(const MimoState& state, const SolverConfig& cfg,
                            const VolumeSequence& x) {
  const int t_count = x.frame_count();
  VolumeSequence out = VolumeSequence::filled(t_count, x.dims(), 0.0);
  for (int t = 0; t < t_count; ++t) {
    const std::size_t ti = static_cast<std::size_t>(t);
    const Volume& xt = x.frame(t);
    Volume& ot = out.frame(t);
    const Volume& w = state.weights.frames[ti];
    for (std::size_t i = 0; i < ot.size(); ++i) ot[i] = w[i] * xt[i];

    if (!state.v[ti].axes.empty()) {
      const GradientField gx = grad_spatial(xt, state.v[ti].axes);
      axpy_in_place(cfg.beta, grad_spatial_transpose(gx), ot);
    }
    if (!state.maps.empty()) {
      const Volume mx = map_residual(state.maps[ti], xt);
      axpy_in_place(cfg.alpha, map_residual_transpose(state.maps[ti], mx),
                    ot);
    }
  }
  if (!state.d.empty()) {
    axpy_in_place(cfg.gamma, grad_temporal_transpose(grad_temporal(x)), out);
  }
  return out;
}

VolumeSequence mimo_build_b(const MimoState& state, const SolverConfig& cfg,
                            const VolumeSequence& inputs) {
  const int t_count = inputs.frame_count();
  const double data_factor = cfg.mimo_data_factor2 ? 2.0 : 1.0;
  VolumeSequence b = VolumeSequence::filled(t_count, inputs.dims(), 0.0);
  for (int t = 0; t < t_count; ++t) {
    const std::size_t ti = static_cast<std::size_t>(t);
    const Volume& w = state.weights.frames[ti];
    const Volume& g = inputs.frame(t);
    Volume& bt = b.frame(t);
    for (std::size_t i = 0; i < bt.size(); ++i) {
      bt[i] = data_factor * w[i] * g[i];
    }

    if (!state.v[ti].axes.empty()) {
      GradientField v_minus_bv = state.v[ti];
      for (std::size_t c = 0; c < v_minus_bv.comp.size(); ++c) {
        axpy_in_place(-1.0, state.b_v[ti].comp[c], v_minus_bv.comp[c]);
      }
      axpy_in_place(cfg.beta, grad_spatial_transpose(v_minus_bv), bt);
    }

    if (!state.maps.empty()) {
      Volume u_minus_bu = sub(state.u.frame(t), state.b_u.frame(t));
      axpy_in_place(cfg.alpha,
                    map_residual_transpose(state.maps[ti], u_minus_bu), bt);
    }
  }

  if (!state.d.empty()) {
    VolumeSequence d_minus_bd = state.d;
    axpy_in_place(-1.0, state.b_d, d_minus_bd);
    axpy_in_place(cfg.gamma, grad_temporal_transpose(d_minus_bd), b);
  }
  return b;
}

double energy_mimo(const VolumeSequence& f_seq, const VolumeSequence& inputs,
                   const SolverConfig& cfg) {
  const std::vector<double> eps = huber_thresholds(f_seq, inputs, cfg.huber);
  double e = 0.0;
  for (int t = 0; t < inputs.frame_count(); ++t) {
    const Volume& f = f_seq.frame(t);
    const Volume& g = inputs.frame(t);
    const double eps_t = eps[static_cast<std::size_t>(t)];
    for (std::size_t i = 0; i < f.size(); ++i) {
      e += huber_phi(f[i] - g[i], eps_t);
    }
  }
  const std::vector<Axis> axes = spatial_axes_for(f_seq.dims());
  for (int t = 0; t < f_seq.frame_count(); ++t) {
    const Volume& f = f_seq.frame(t);
    if (cfg.lambda > 0.0) e += cfg.lambda * quasi_energy(f, cfg.kernel);
    if (cfg.mu > 0.0) e += cfg.mu * tv_energy(grad_spatial(f, axes));
  }
  if (cfg.omega > 0.0) e += cfg.omega * sum_abs(grad_temporal(f_seq));
  return e;
}

MimoResult mimo_solve(const VolumeSequence& inputs, const SolverConfig& cfg,
                      const VolumeSequence* reference) {
  cfg.validate();
  if (!(cfg.gamma > 0.0)) {
    throw ConfigError("solver: gamma must be positive for sequence output");
  }
  if (reference && (reference->frame_count() != inputs.frame_count() ||
                    !(reference->dims() == inputs.dims()))) {
    throw ShapeError("solver: reference shape mismatch");
  }
  const Dims dims = inputs.dims();
  const int t_count = inputs.frame_count();
  const bool with_quantile = cfg.lambda > 0.0;
  const bool with_tv = cfg.mu > 0.0;
  const bool with_temporal = cfg.omega > 0.0;
  const std::vector<Axis> axes =
      with_tv ? spatial_axes_for(dims) : std::vector<Axis>{};

  MimoState s;
  s.f_seq = inputs;
  if (with_quantile) {
    s.u = VolumeSequence::filled(t_count, dims, 0.0);
    s.b_u = VolumeSequence::filled(t_count, dims, 0.0);
  }
  if (with_temporal) {
    s.d = VolumeSequence::filled(t_count, dims, 0.0);
    s.b_d = VolumeSequence::filled(t_count, dims, 0.0);
  }
  s.v.assign(static_cast<std::size_t>(t_count),
             GradientField::zeros(dims, axes));
  s.b_v.assign(static_cast<std::size_t>(t_count),
               GradientField::zeros(dims, axes));

  const double u_thr = cfg.lambda / cfg.alpha;
  const double v_thr = cfg.mu / cfg.beta;
  const double d_thr = cfg.omega / cfg.gamma;

  for (int outer = 1; outer <= cfg.k_outer; ++outer) {
    if (with_quantile) {
      s.maps.resize(static_cast<std::size_t>(t_count));
      for (int t = 0; t < t_count; ++t) {
        s.maps[static_cast<std::size_t>(t)] =
            QuantileMap::build(s.f_seq.frame(t), cfg.kernel);
      }
    }
    for (int inner = 1; inner <= cfg.k_inner; ++inner) {
      s.weights = build_weights(s.f_seq, inputs, cfg.huber);

      const VolumeSequence b = mimo_build_b(s, cfg, inputs);
      for (int t = 0; t < t_count; ++t) {
        if (!b.frame(t).all_finite()) {
          throw NumericError("solver: non-finite right-hand side", outer,
                             inner);
        }
      }
      cg_solve(
          [&](const VolumeSequence& x) { return mimo_apply_A(s, cfg, x); }, b,
          s.f_seq, cfg.k_cg, cfg.cg_tol);
      for (int t = 0; t < t_count; ++t) {
        if (!s.f_seq.frame(t).all_finite()) {
          throw NumericError("solver: non-finite iterate", outer, inner);
        }
      }

      for (int t = 0; t < t_count; ++t) {
        const std::size_t ti = static_cast<std::size_t>(t);
        if (with_quantile) {
          const Volume mf = map_residual(s.maps[ti], s.f_seq.frame(t));
          shrink_update(mf, s.b_u.frame(t), u_thr, s.u.frame(t));
          bregman_update(mf, s.u.frame(t), s.b_u.frame(t));
        }

        if (with_tv) {
          const GradientField gf = grad_spatial(s.f_seq.frame(t), axes);
          for (std::size_t c = 0; c < gf.comp.size(); ++c) {
            shrink_update(gf.comp[c], s.b_v[ti].comp[c], v_thr,
                          s.v[ti].comp[c]);
            bregman_update(gf.comp[c], s.v[ti].comp[c], s.b_v[ti].comp[c]);
          }
        }
      }

      if (with_temporal) {
        const VolumeSequence dt = grad_temporal(s.f_seq);
        for (int t = 0; t < t_count; ++t) {
          shrink_update(dt.frame(t), s.b_d.frame(t), d_thr, s.d.frame(t));
          bregman_update(dt.frame(t), s.d.frame(t), s.b_d.frame(t));
        }
      }

      TraceRecord rec{outer, inner, energy_mimo(s.f_seq, inputs, cfg),
                      std::numeric_limits<double>::quiet_NaN()};
      if (reference) rec.psnr = psnr(*reference, s.f_seq);
      s.trace.push_back(rec);
    }
  }
  return MimoResult{std::move(s.f_seq), std::move(s.trace)};
}

}  // namespace quasi
