#include "quasi/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "quasi/errors.hpp"

namespace quasi {

namespace fs = std::filesystem;

namespace {

constexpr std::uint16_t kQvolVersion = 1;
constexpr std::uint16_t kQvolDtypeF32 = 0;

// --- little-endian packing ---

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParseError("config: bad numeric value for '" + key + "': " + v);
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size() || d < std::numeric_limits<int>::min() ||
        d > std::numeric_limits<int>::max()) {
      throw std::invalid_argument(v);
    }
    return static_cast<int>(d);
  } catch (const std::exception&) {
    throw ParseError("config: bad integer value for '" + key + "': " + v);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParseError("config: bad integer value for '" + key + "': " + v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParseError("config: bad boolean value for '" + key + "': " + v);
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open for writing: " + tmp.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("rename failed: " + path.string());
  }
}

// --- QVOL -------------------------------------------------------------------

VolumeSequence read_qvol(const fs::path& path) {
  const std::string bytes = read_file(path);
  constexpr std::size_t header_size = 4 + 2 + 2 + 4 * 4;
  if (bytes.size() < header_size) {
    throw ParseError("qvol: file shorter than header: " + path.string());
  }
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, "QVOL", 4) != 0) {
    throw ParseError("qvol: bad magic: " + path.string());
  }
  const std::uint16_t version = get_u16(p + 4);
  if (version != kQvolVersion) {
    throw ParseError("qvol: unsupported version " + std::to_string(version));
  }
  const std::uint16_t dtype = get_u16(p + 6);
  if (dtype != kQvolDtypeF32) {
    throw ParseError("qvol: unsupported dtype " + std::to_string(dtype));
  }
  const std::uint32_t nx = get_u32(p + 8);
  const std::uint32_t ny = get_u32(p + 12);
  const std::uint32_t nz = get_u32(p + 16);
  const std::uint32_t nt = get_u32(p + 20);
  constexpr std::uint64_t kMaxVoxels = 1ULL << 31;  // 8 GiB of float32
  constexpr std::uint32_t kMaxDim =
      static_cast<std::uint32_t>(std::numeric_limits<int>::max());
  std::uint64_t total_t = 1;
  for (std::uint32_t dim : {nx, ny, nz, nt}) {
    if (dim == 0 || dim > kMaxDim || total_t > kMaxVoxels / dim) {
      throw ParseError("qvol: dim overflow: " + path.string());
    }
    total_t *= dim;
  }
  const std::size_t expected = header_size + total_t * 4;
  if (bytes.size() != expected) {
    throw ParseError("qvol: short payload: expected " +
                     std::to_string(expected) + " bytes, got " +
                     std::to_string(bytes.size()));
  }

  const Dims dims{static_cast<int>(nx), static_cast<int>(ny),
                  static_cast<int>(nz)};
  const std::size_t per_frame = dims.count();
  std::vector<Volume> frames;
  frames.reserve(nt);
  const unsigned char* payload = p + header_size;
  for (std::uint32_t t = 0; t < nt; ++t) {
    std::vector<double> data(per_frame);
    for (std::size_t i = 0; i < per_frame; ++i) {
      const std::uint32_t raw = get_u32(payload + 4 * (t * per_frame + i));
      const float f = std::bit_cast<float>(raw);
      if (!std::isfinite(f)) {
        throw ParseError("qvol: non-finite payload value: " + path.string());
      }
      data[i] = static_cast<double>(f);
    }
    frames.emplace_back(dims, std::move(data));
  }
  return VolumeSequence(std::move(frames));
}

void write_qvol(const VolumeSequence& seq, const fs::path& path) {
  const Dims& d = seq.dims();
  std::string bytes;
  bytes.reserve(24 + seq.dims().count() *
                         static_cast<std::size_t>(seq.frame_count()) * 4);
  bytes.append("QVOL");
  put_u16(bytes, kQvolVersion);
  put_u16(bytes, kQvolDtypeF32);
  put_u32(bytes, static_cast<std::uint32_t>(d.nx));
  put_u32(bytes, static_cast<std::uint32_t>(d.ny));
  put_u32(bytes, static_cast<std::uint32_t>(d.nz));
  put_u32(bytes, static_cast<std::uint32_t>(seq.frame_count()));
  for (int t = 0; t < seq.frame_count(); ++t) {
    const Volume& f = seq.frame(t);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const float v = static_cast<float>(f[i]);
      if (!std::isfinite(v)) {
        throw std::invalid_argument("qvol: refusing to write non-finite data");
      }
      put_u32(bytes, std::bit_cast<std::uint32_t>(v));
    }
  }
  write_file_atomic(path, bytes);
}

void write_qvol(const Volume& vol, const fs::path& path) {
  write_qvol(VolumeSequence({vol}), path);
}

// --- PGM --------------------------------------------------------------------

namespace {

struct PgmImage {
  int nx = 0, ny = 0, maxval = 0;
  std::vector<double> data;  // normalized to [0, 1]
};

PgmImage read_pgm(const fs::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(
                                     static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    }
    if (start == pos) throw ParseError("pgm: truncated header: " + path.string());
    return bytes.substr(start, pos - start);
  };

  if (next_token() != "P5") {
    throw ParseError("pgm: not a binary PGM: " + path.string());
  }
  PgmImage img;
  img.nx = parse_int("pgm width", next_token());
  img.ny = parse_int("pgm height", next_token());
  img.maxval = parse_int("pgm maxval", next_token());
  if (img.nx <= 0 || img.ny <= 0 || img.maxval <= 0 || img.maxval > 65535) {
    throw ParseError("pgm: bad header fields: " + path.string());
  }
  ++pos;  // single whitespace byte separating header and raster
  const std::size_t count =
      static_cast<std::size_t>(img.nx) * static_cast<std::size_t>(img.ny);
  const int bytes_per = img.maxval < 256 ? 1 : 2;
  if (bytes.size() - pos < count * static_cast<std::size_t>(bytes_per)) {
    throw ParseError("pgm: short raster: " + path.string());
  }
  img.data.resize(count);
  const unsigned char* raster =
      reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
  for (std::size_t i = 0; i < count; ++i) {
    const int raw = bytes_per == 1
                        ? raster[i]
                        : (raster[2 * i] << 8) | raster[2 * i + 1];
    img.data[i] = static_cast<double>(raw) / img.maxval;
  }
  return img;
}

}  // namespace

Volume read_pgm_stack(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ParseError("pgm stack: not a directory: " + dir.string());
  }
  std::vector<fs::path> slices;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      slices.push_back(entry.path());
    }
  }
  if (slices.empty()) {
    throw ParseError("pgm stack: no .pgm slices in " + dir.string());
  }
  std::sort(slices.begin(), slices.end());

  std::vector<double> data;
  int nx = 0, ny = 0;
  for (std::size_t z = 0; z < slices.size(); ++z) {
    PgmImage img = read_pgm(slices[z]);
    if (z == 0) {
      nx = img.nx;
      ny = img.ny;
      data.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
                   slices.size());
    } else if (img.nx != nx || img.ny != ny) {
      throw ShapeError("pgm stack: slice size mismatch at " +
                       slices[z].string());
    }
    data.insert(data.end(), img.data.begin(), img.data.end());
  }
  return Volume(Dims{nx, ny, static_cast<int>(slices.size())},
                std::move(data));
}

void write_pgm_stack(const Volume& vol, const fs::path& dir, int maxval) {
  if (maxval <= 0 || maxval > 65535) {
    throw std::invalid_argument("pgm stack: maxval must be in [1, 65535]");
  }
  fs::create_directories(dir);
  const Dims& d = vol.dims();
  const std::size_t plane =
      static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny);
  const int bytes_per = maxval < 256 ? 1 : 2;
  for (int z = 0; z < d.nz; ++z) {
    std::string bytes;
    bytes += "P5\n" + std::to_string(d.nx) + " " + std::to_string(d.ny) +
             "\n" + std::to_string(maxval) + "\n";
    for (std::size_t i = 0; i < plane; ++i) {
      const double v = vol[plane * static_cast<std::size_t>(z) + i];
      const long q = std::lround(std::clamp(v, 0.0, 1.0) * maxval);
      if (bytes_per == 1) {
        bytes.push_back(static_cast<char>(q & 0xff));
      } else {
        bytes.push_back(static_cast<char>((q >> 8) & 0xff));
        bytes.push_back(static_cast<char>(q & 0xff));
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "slice_%04d.pgm", z);
    write_file_atomic(dir / name, bytes);
  }
}

// --- Run configuration ------------------------------------------------------

namespace {

void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
  if (key == "preset") {
    cfg.preset = value;
  } else if (key == "mode") {
    cfg.mode = value;
  } else if (key == "lambda") {
    cfg.lambda = parse_double(key, value);
  } else if (key == "mu") {
    cfg.mu = parse_double(key, value);
  } else if (key == "omega") {
    cfg.omega = parse_double(key, value);
  } else if (key == "alpha") {
    cfg.alpha = parse_double(key, value);
  } else if (key == "beta") {
    cfg.beta = parse_double(key, value);
  } else if (key == "gamma") {
    cfg.gamma = parse_double(key, value);
  } else if (key == "k_outer") {
    cfg.k_outer = parse_int(key, value);
  } else if (key == "k_inner") {
    cfg.k_inner = parse_int(key, value);
  } else if (key == "k_cg") {
    cfg.k_cg = parse_int(key, value);
  } else if (key == "kernel_d") {
    cfg.kernel_d = parse_int(key, value);
  } else if (key == "quantile_p") {
    cfg.quantile_p = parse_double(key, value);
  } else if (key == "huber_mode") {
    cfg.huber_mode = value;
  } else if (key == "huber_eps") {
    cfg.huber_eps = parse_double(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "log_domain") {
    cfg.log_domain = parse_bool(key, value);
  } else if (key == "z_start") {
    cfg.z_start = parse_int(key, value);
  } else if (key == "z_count") {
    cfg.z_count = parse_int(key, value);
  } else {
    throw ParseError("config: unknown key '" + key + "'");
  }
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;

    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config: missing '=' on line " +
                       std::to_string(line_no));
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value =
        trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError("config: empty key or value on line " +
                       std::to_string(line_no));
    }
    apply_config_key(cfg, key, value);
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(read_file(path));
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::string out;
  auto emit = [&out](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  };
  if (cfg.preset) emit("preset", *cfg.preset);
  if (cfg.mode) emit("mode", *cfg.mode);
  if (cfg.lambda) emit("lambda", format_double(*cfg.lambda));
  if (cfg.mu) emit("mu", format_double(*cfg.mu));
  if (cfg.omega) emit("omega", format_double(*cfg.omega));
  if (cfg.alpha) emit("alpha", format_double(*cfg.alpha));
  if (cfg.beta) emit("beta", format_double(*cfg.beta));
  if (cfg.gamma) emit("gamma", format_double(*cfg.gamma));
  if (cfg.k_outer) emit("k_outer", std::to_string(*cfg.k_outer));
  if (cfg.k_inner) emit("k_inner", std::to_string(*cfg.k_inner));
  if (cfg.k_cg) emit("k_cg", std::to_string(*cfg.k_cg));
  if (cfg.kernel_d) emit("kernel_d", std::to_string(*cfg.kernel_d));
  if (cfg.quantile_p) emit("quantile_p", format_double(*cfg.quantile_p));
  if (cfg.huber_mode) emit("huber_mode", *cfg.huber_mode);
  if (cfg.huber_eps) emit("huber_eps", format_double(*cfg.huber_eps));
  if (cfg.seed) emit("seed", std::to_string(*cfg.seed));
  if (cfg.log_domain) emit("log_domain", *cfg.log_domain ? "true" : "false");
  if (cfg.z_start) emit("z_start", std::to_string(*cfg.z_start));
  if (cfg.z_count) emit("z_count", std::to_string(*cfg.z_count));
  return out;
}

SolverConfig preset_config(std::string_view name, int t_frames) {
  if (t_frames < 1) {
    throw ConfigError("preset: frame count must be >= 1");
  }
  const double t = static_cast<double>(t_frames);
  SolverConfig cfg;
  cfg.kernel = KernelSpec{3, 0.5};
  cfg.huber = HuberSpec{HuberMode::auto_mad, 1e-2, true};
  cfg.k_cg = 3;
  if (name == "bscan") {
    cfg.mode = SolveMode::image;
    cfg.mu = 0.075 * t;
    cfg.lambda = 5.0 * t;
    cfg.alpha = 100.0 * t;
    cfg.beta = 1.5 * t;
    cfg.k_outer = 20;
    cfg.k_inner = 2;
  } else if (name == "volumetric") {
    cfg.mode = SolveMode::volumetric;
    cfg.mu = 0.0007 * t;
    cfg.lambda = 1.0 * t;
    cfg.alpha = 120.0 * t;
    cfg.beta = 0.05 * t;
    cfg.k_outer = 20;
    cfg.k_inner = 2;
  } else if (name == "convergence") {
    cfg.mode = SolveMode::image;
    cfg.mu = 0.075 * t;
    cfg.lambda = 5.0 * t;
    cfg.alpha = 100.0 * t;
    cfg.beta = 1.5 * t;
    cfg.k_outer = 30;
    cfg.k_inner = 10;
  } else if (name == "ct") {
    cfg.mode = SolveMode::volumetric_temporal;
    cfg.alpha = 0.1;
    cfg.lambda = 0.0005;
    cfg.beta = 0.1;
    cfg.mu = 0.005;
    cfg.gamma = 90.0;
    cfg.omega = 0.8;
    cfg.k_outer = 20;
    cfg.k_inner = 2;
  } else {
    throw ConfigError("preset: unknown preset '" + std::string(name) + "'");
  }
  return cfg;
}

SolverConfig make_solver_config(const RunConfig& cfg, int t_frames) {
  SolverConfig out;
  if (cfg.preset) out = preset_config(*cfg.preset, t_frames);

  if (cfg.mode) {
    if (*cfg.mode == "image") {
      out.mode = SolveMode::image;
    } else if (*cfg.mode == "volumetric") {
      out.mode = SolveMode::volumetric;
    } else if (*cfg.mode == "volumetric+temporal") {
      out.mode = SolveMode::volumetric_temporal;
    } else {
      throw ConfigError("config: unknown mode '" + *cfg.mode + "'");
    }
  }
  if (cfg.lambda) out.lambda = *cfg.lambda;
  if (cfg.mu) out.mu = *cfg.mu;
  if (cfg.omega) out.omega = *cfg.omega;
  if (cfg.alpha) out.alpha = *cfg.alpha;
  if (cfg.beta) out.beta = *cfg.beta;
  if (cfg.gamma) out.gamma = *cfg.gamma;
  if (cfg.k_outer) out.k_outer = *cfg.k_outer;
  if (cfg.k_inner) out.k_inner = *cfg.k_inner;
  if (cfg.k_cg) out.k_cg = *cfg.k_cg;
  if (cfg.kernel_d) out.kernel.width = *cfg.kernel_d;
  if (cfg.quantile_p) out.kernel.p = *cfg.quantile_p;
  if (cfg.huber_mode) {
    if (*cfg.huber_mode == "fixed") {
      out.huber.mode = HuberMode::fixed;
    } else if (*cfg.huber_mode == "auto") {
      out.huber.mode = HuberMode::auto_mad;
    } else {
      throw ConfigError("config: unknown huber_mode '" + *cfg.huber_mode +
                        "'");
    }
  }
  if (cfg.huber_eps) out.huber.epsilon = *cfg.huber_eps;
  out.validate();
  return out;
}

// --- Regions ----------------------------------------------------------------

namespace {

std::array<int, 3> parse_triplet(const std::string& key,
                                 const std::string& value) {
  std::istringstream ss(value);
  std::array<int, 3> out{};
  for (int& v : out) {
    if (!(ss >> v)) {
      throw ParseError("regions: '" + key + "' needs three integers");
    }
  }
  std::string rest;
  if (ss >> rest) {
    throw ParseError("regions: trailing tokens after '" + key + "'");
  }
  return out;
}

}  // namespace

RegionSelection parse_regions(std::string_view text) {
  std::optional<std::array<int, 3>> fg_origin, fg_extent, bg_origin, bg_extent;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("regions: missing '=' on line " +
                       std::to_string(line_no));
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key == "fg_origin") {
      fg_origin = parse_triplet(key, value);
    } else if (key == "fg_extent") {
      fg_extent = parse_triplet(key, value);
    } else if (key == "bg_origin") {
      bg_origin = parse_triplet(key, value);
    } else if (key == "bg_extent") {
      bg_extent = parse_triplet(key, value);
    } else {
      throw ParseError("regions: unknown key '" + key + "'");
    }
  }

  auto build = [](const char* which,
                  const std::optional<std::array<int, 3>>& origin,
                  const std::optional<std::array<int, 3>>& extent)
      -> std::optional<Region> {
    if (!origin && !extent) return std::nullopt;
    if (!origin || !extent) {
      throw ParseError(std::string("regions: ") + which +
                       " needs both origin and extent");
    }
    return Region{(*origin)[0], (*origin)[1], (*origin)[2],
                  (*extent)[0], (*extent)[1], (*extent)[2]};
  };

  RegionSelection sel;
  sel.foreground = build("foreground", fg_origin, fg_extent);
  sel.background = build("background", bg_origin, bg_extent);
  return sel;
}

RegionSelection load_regions(const fs::path& path) {
  return parse_regions(read_file(path));
}

// --- CSV --------------------------------------------------------------------

void write_trace_csv(const fs::path& path, std::span<const TraceRecord> trace,
                     bool with_psnr) {
  std::string out;
  for (const TraceRecord& r : trace) {
    out += std::to_string(r.outer);
    out += ',';
    out += std::to_string(r.inner);
    out += ',';
    out += format_double(r.energy);
    if (with_psnr) {
      out += ',';
      out += format_double(r.psnr);
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace quasi
