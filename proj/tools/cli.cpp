#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "quasi/errors.hpp"
#include "quasi/io.hpp"
#include "quasi/metrics.hpp"
#include "quasi/phantom.hpp"
#include "quasi/solver.hpp"

namespace quasi::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr double kLogOffset = 1e-3;

Dims parse_dims(const std::string& text) {
  std::vector<int> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, 'x')) {
    if (tok.empty()) throw ConfigError("simulate: bad --dims '" + text + "'");
    try {
      std::size_t used = 0;
      parts.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("simulate: bad --dims '" + text + "'");
    }
  }
  if (parts.size() < 2 || parts.size() > 3) {
    throw ConfigError("simulate: --dims needs WxH or WxHxD");
  }
  const Dims d{parts[0], parts[1], parts.size() == 3 ? parts[2] : 1};
  if (d.nx <= 0 || d.ny <= 0 || d.nz <= 0) {
    throw ConfigError("simulate: dims must be positive");
  }
  return d;
}

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> levels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) levels.push_back(std::stod(item));
  }
  return levels;
}

std::string format_value(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

VolumeSequence read_input(const std::string& path) {
  if (fs::is_directory(path)) {
    return VolumeSequence({read_pgm_stack(path)});
  }
  return read_qvol(path);
}

std::string region_spec(const Region& r) {
  std::ostringstream ss;
  ss << r.x << ' ' << r.y << ' ' << r.z << '+' << r.w << ' ' << r.h << ' '
     << r.d;
  return ss.str();
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string phantom = "layered-slab";
  std::string dims = "128x128x1";
  std::string levels;
  std::string noise = "awgn";
  double sigma = 0.1;
  double photon_scale = 1000.0;
  int frames = 1;
  std::uint64_t seed = 0;
  std::string truth_path;
  std::string out_path;
};

int run_simulate(const SimulateArgs& a) {
  PhantomSpec pspec;
  if (a.phantom == "layered-slab") {
    pspec.kind = PhantomKind::layered_slab;
  } else if (a.phantom == "nested-ellipsoids") {
    pspec.kind = PhantomKind::nested_ellipsoids;
  } else if (a.phantom == "blocks") {
    pspec.kind = PhantomKind::blocks;
  } else {
    throw ConfigError("simulate: unknown phantom '" + a.phantom + "'");
  }
  pspec.dims = parse_dims(a.dims);
  if (!a.levels.empty()) pspec.levels = parse_levels(a.levels);
  pspec.seed = a.seed;

  NoiseSpec nspec;
  if (a.noise == "awgn") {
    nspec.kind = NoiseKind::awgn;
  } else if (a.noise == "poisson") {
    nspec.kind = NoiseKind::poisson;
  } else if (a.noise == "speckle") {
    nspec.kind = NoiseKind::speckle;
  } else {
    throw ConfigError("simulate: unknown noise '" + a.noise + "'");
  }
  nspec.sigma = a.sigma;
  nspec.photon_scale = a.photon_scale;
  nspec.seed = a.seed;

  const Volume truth = make_phantom(pspec);
  write_qvol(truth, a.truth_path);
  write_qvol(make_sequence(truth, a.frames, nspec), a.out_path);
  return kExitOk;
}

// --- denoise ----------------------------------------------------------------

struct DenoiseArgs {
  std::string in_path;
  std::string out_path;
  std::string config_path;
  std::string reference_path;
  std::string trace_path;
};

VolumeSequence slab_sequence(const VolumeSequence& seq, int z_start,
                             int z_count) {
  std::vector<Volume> frames;
  frames.reserve(static_cast<std::size_t>(seq.frame_count()));
  for (int t = 0; t < seq.frame_count(); ++t) {
    frames.push_back(seq.frame(t).slab(z_start, z_count));
  }
  return VolumeSequence(std::move(frames));
}

VolumeSequence log_sequence(const VolumeSequence& seq) {
  std::vector<Volume> frames;
  frames.reserve(static_cast<std::size_t>(seq.frame_count()));
  for (int t = 0; t < seq.frame_count(); ++t) {
    frames.push_back(to_log_domain(seq.frame(t), kLogOffset));
  }
  return VolumeSequence(std::move(frames));
}

int run_denoise(const DenoiseArgs& a) {
  const RunConfig rc = load_run_config(a.config_path);
  VolumeSequence inputs = read_input(a.in_path);
  const int t_frames = inputs.frame_count();
  const SolverConfig cfg = make_solver_config(rc, t_frames);

  // Cut the requested slab. The volumetric preset defaults to its standard
  // slice count when the caller does not pick one.
  const int z_start = rc.z_start.value_or(0);
  int z_count = inputs.dims().nz - z_start;
  if (rc.z_count) {
    z_count = *rc.z_count;
  } else if (rc.preset && *rc.preset == "volumetric") {
    z_count = std::min(kVolumetricPresetSlices, z_count);
  }
  if (z_start != 0 || z_count != inputs.dims().nz) {
    inputs = slab_sequence(inputs, z_start, z_count);
  }

  const bool log_domain = rc.log_domain.value_or(false);
  if (log_domain) inputs = log_sequence(inputs);

  std::optional<VolumeSequence> reference;
  if (!a.reference_path.empty()) {
    VolumeSequence ref = read_qvol(a.reference_path);
    if (z_start != 0 || z_count != ref.dims().nz) {
      ref = slab_sequence(ref, z_start, z_count);
    }
    if (log_domain) ref = log_sequence(ref);
    reference = std::move(ref);
  }

  std::vector<TraceRecord> trace;
  VolumeSequence output = VolumeSequence::filled(1, inputs.dims(), 0.0);

  switch (cfg.mode) {
    case SolveMode::image: {
      const Dims dims = inputs.dims();
      if (dims.nz == 1) {
        const Volume* ref =
            reference ? &reference->frame(0) : nullptr;
        MisoResult res = miso_solve(inputs, cfg, ref);
        output.frame(0) = std::move(res.output);
        trace = std::move(res.trace);
      } else {
        // Slice-by-slice denoising; traces concatenate in z order.
        Volume assembled(dims, 0.0);
        for (int z = 0; z < dims.nz; ++z) {
          VolumeSequence slice = slab_sequence(inputs, z, 1);
          std::optional<Volume> ref_slice;
          if (reference) ref_slice = reference->frame(0).slab(z, 1);
          MisoResult res = miso_solve(slice, cfg,
                                      ref_slice ? &*ref_slice : nullptr);
          const std::size_t plane = static_cast<std::size_t>(dims.nx) *
                                    static_cast<std::size_t>(dims.ny);
          for (std::size_t i = 0; i < plane; ++i) {
            assembled[plane * static_cast<std::size_t>(z) + i] =
                res.output[i];
          }
          trace.insert(trace.end(), res.trace.begin(), res.trace.end());
        }
        output.frame(0) = std::move(assembled);
      }
      break;
    }
    case SolveMode::volumetric: {
      const Volume* ref = reference ? &reference->frame(0) : nullptr;
      MisoResult res = miso_solve(inputs, cfg, ref);
      output.frame(0) = std::move(res.output);
      trace = std::move(res.trace);
      break;
    }
    case SolveMode::volumetric_temporal: {
      const VolumeSequence* ref = reference ? &*reference : nullptr;
      MimoResult res = mimo_solve(inputs, cfg, ref);
      output = std::move(res.output);
      trace = std::move(res.trace);
      break;
    }
  }

  if (log_domain) {
    for (int t = 0; t < output.frame_count(); ++t) {
      output.frame(t) = from_log_domain(output.frame(t), kLogOffset);
    }
  }

  if (fs::path(a.out_path).extension() == ".qvol") {
    write_qvol(output, a.out_path);
  } else {
    if (output.frame_count() != 1) {
      throw ConfigError("denoise: sequence output requires a .qvol path");
    }
    write_pgm_stack(output.frame(0), a.out_path);
  }
  if (!a.trace_path.empty()) {
    write_trace_csv(a.trace_path, trace, !a.reference_path.empty());
  }
  return kExitOk;
}

// --- metrics ----------------------------------------------------------------

struct MetricsArgs {
  std::string test_path;
  std::string reference_path;
  std::string regions_path;
  std::string out_path;
};

int run_metrics(const MetricsArgs& a) {
  const VolumeSequence test = read_qvol(a.test_path);
  std::string csv;

  if (!a.reference_path.empty()) {
    const VolumeSequence ref = read_qvol(a.reference_path);
    csv += "psnr," + format_value(psnr(ref, test)) + ",\n";
    double ssim_acc = 0.0;
    for (int t = 0; t < test.frame_count(); ++t) {
      ssim_acc += ssim(ref.frame(t), test.frame(t));
    }
    csv += "ssim," + format_value(ssim_acc / test.frame_count()) + ",\n";
  }

  if (!a.regions_path.empty()) {
    const RegionSelection sel = load_regions(a.regions_path);
    const Volume& vol = test.frame(0);
    if (sel.foreground) {
      csv += "msr," + format_value(msr(vol, *sel.foreground)) + ",fg:" +
             region_spec(*sel.foreground) + "\n";
      if (sel.background) {
        csv += "cnr," +
               format_value(cnr(vol, *sel.foreground, *sel.background)) +
               ",fg:" + region_spec(*sel.foreground) + "|bg:" +
               region_spec(*sel.background) + "\n";
      }
    }
  }

  if (csv.empty()) {
    throw ConfigError("metrics: nothing to compute (need --reference and/or "
                      "--regions)");
  }
  if (a.out_path.empty()) {
    std::cout << csv;
  } else {
    write_file_atomic(a.out_path, csv);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"QuaSI spatio-temporal denoising toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Generate a phantom and noisy frames");
  sim_cmd->add_option("--phantom", sim.phantom,
                      "layered-slab | nested-ellipsoids | blocks");
  sim_cmd->add_option("--dims", sim.dims, "Grid size, e.g. 128x128x1");
  sim_cmd->add_option("--levels", sim.levels,
                      "Comma-separated band/region intensities in [0,1]");
  sim_cmd->add_option("--noise", sim.noise, "awgn | poisson | speckle");
  sim_cmd->add_option("--sigma", sim.sigma, "Noise level (awgn/speckle)");
  sim_cmd->add_option("--photon-scale", sim.photon_scale,
                      "Poisson events per unit intensity");
  sim_cmd->add_option("--frames", sim.frames, "Number of noisy frames")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "RNG seed");
  sim_cmd->add_option("--truth", sim.truth_path, "Output truth .qvol")
      ->required();
  sim_cmd->add_option("--out", sim.out_path, "Output noisy .qvol")->required();

  DenoiseArgs den;
  CLI::App* den_cmd = app.add_subcommand("denoise", "Run the ADMM denoiser");
  den_cmd->add_option("--in", den.in_path, ".qvol file or PGM directory")
      ->required();
  den_cmd->add_option("--out", den.out_path, "Output .qvol (or PGM directory)")
      ->required();
  den_cmd->add_option("--config", den.config_path, "key=value run config")
      ->required();
  den_cmd->add_option("--reference", den.reference_path,
                      "Ground truth .qvol; adds PSNR to the trace");
  den_cmd->add_option("--trace", den.trace_path, "Energy trace CSV path");

  MetricsArgs met;
  CLI::App* met_cmd =
      app.add_subcommand("metrics", "Quality measures for volumes");
  met_cmd->add_option("--test", met.test_path, "Volume under test (.qvol)")
      ->required();
  met_cmd->add_option("--reference", met.reference_path,
                      "Reference .qvol enabling PSNR/SSIM");
  met_cmd->add_option("--regions", met.regions_path,
                      "Region file enabling MSR/CNR");
  met_cmd->add_option("--out", met.out_path, "CSV output (default stdout)");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("quasi");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (den_cmd->parsed()) return run_denoise(den);
    return run_metrics(met);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace quasi::cli
