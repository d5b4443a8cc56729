#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "quasi/solver.hpp"
#include "quasi/volume.hpp"

namespace quasi {

// --- QVOL container -------------------------------------------------------
//
// Little-endian binary layout:
//   magic   "QVOL"        4 bytes
//   version u16 = 1
//   dtype   u16 = 0       (float32)
//   dims    4 x u32       n_x, n_y, n_z, n_t
//   payload n_x*n_y*n_z*n_t float32, frame-major, then z, y, x fastest.

VolumeSequence read_qvol(const std::filesystem::path& path);
void write_qvol(const VolumeSequence& seq, const std::filesystem::path& path);
void write_qvol(const Volume& vol, const std::filesystem::path& path);

// --- PGM slice stacks -----------------------------------------------------

/// Reads all *.pgm slices of a directory in lexicographic order into one
/// volume, normalizing intensities to [0, 1] by the file maxval.
Volume read_pgm_stack(const std::filesystem::path& dir);
/// Writes one binary PGM per z-slice (slice_0000.pgm, ...), denormalized to
/// the given maxval.
void write_pgm_stack(const Volume& vol, const std::filesystem::path& dir,
                     int maxval = 65535);

// --- Run configuration ----------------------------------------------------
//
// Flat UTF-8 key=value text, one pair per line, '#' starts a comment.
// Unknown keys are rejected. A `preset` key expands first; explicit keys
// then override individual fields.

struct RunConfig {
  std::optional<std::string> preset;
  std::optional<std::string> mode;  // image | volumetric | volumetric+temporal
  std::optional<double> lambda, mu, omega;
  std::optional<double> alpha, beta, gamma;
  std::optional<int> k_outer, k_inner, k_cg;
  std::optional<int> kernel_d;
  std::optional<double> quantile_p;
  std::optional<std::string> huber_mode;  // fixed | auto
  std::optional<double> huber_eps;
  std::optional<std::uint64_t> seed;
  std::optional<bool> log_domain;
  std::optional<int> z_start, z_count;
};

RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical text form; parse(serialize(cfg)) reproduces cfg.
std::string serialize_run_config(const RunConfig& cfg);

/// Stock parameter presets. Weights of the OCT presets scale with the
/// number of input frames; the CT preset is absolute.
///   bscan        B-scan denoising, 3x3 median kernel
///   volumetric   slab denoising over 6 adjacent slices, 3x3x3 kernel
///   convergence  bscan weights with deep inner iterations
///   ct           volumetric+temporal preset
SolverConfig preset_config(std::string_view name, int t_frames);

/// Expands the preset (if any) for the given frame count and applies the
/// explicit overrides.
SolverConfig make_solver_config(const RunConfig& cfg, int t_frames);

/// Number of slices the volumetric preset processes by default.
inline constexpr int kVolumetricPresetSlices = 6;

// --- Metric regions -------------------------------------------------------
//
// Flat key=value text holding voxel-coordinate boxes:
//   fg_origin = x y z      fg_extent = w h d
//   bg_origin = x y z      bg_extent = w h d   (optional)

struct RegionSelection {
  std::optional<Region> foreground;
  std::optional<Region> background;
};

RegionSelection parse_regions(std::string_view text);
RegionSelection load_regions(const std::filesystem::path& path);

// --- CSV export -----------------------------------------------------------

/// Rows "outer,inner,energy[,psnr]"; the psnr column appears only when a
/// reference was supplied to the solve.
void write_trace_csv(const std::filesystem::path& path,
                     std::span<const TraceRecord> trace, bool with_psnr);

/// Writes bytes via a temporary file and rename, so interrupted runs never
/// leave half-written files. All file output in this library goes through
/// this path.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view bytes);

}  // namespace quasi
