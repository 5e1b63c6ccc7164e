#pragma once

// Training data: random scenes from three families (regular polygons, digit
// images plus a circle, mixed circles), turned into stacks of phaseless (or
// phased) index maps with a ground-truth refractive-index image.
//
// Layout of a dataset directory:
//   manifest.json                   "dsm-dataset-v1"
//   records/record_NNNNN.{bin,json} arrays "inputs" [N_i, res, res], "target" [res, res]
// Inputs are stored as raw * 2 / W, W the largest raw index value over the
// training split.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsmps/error.hpp"
#include "dsmps/forward.hpp"
#include "dsmps/grid_io.hpp"
#include "dsmps/noise.hpp"
#include "dsmps/parallel.hpp"
#include "dsmps/probe.hpp"
#include "dsmps/scene.hpp"

namespace dsmps {

inline constexpr const char* kDatasetFormat = "dsm-dataset-v1";

enum class Family { Polygon, Digits, Mixed };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::Polygon: return "polygon";
    case Family::Digits: return "digits";
    case Family::Mixed: return "mixed";
  }
  return "";
}

inline Family family_from_string(const std::string& s) {
  if (s == "polygon") return Family::Polygon;
  if (s == "digits") return Family::Digits;
  if (s == "mixed") return Family::Mixed;
  throw DomainError("unknown dataset family '" + s + "' (expected polygon, digits or mixed)");
}

struct FamilyGeometry {
  int incidences;
  int receivers;
  double radius;
};

inline FamilyGeometry family_defaults(Family f) {
  switch (f) {
    case Family::Polygon: return {4, 100, 4.0};
    case Family::Digits: return {4, 100, 4.0};
    case Family::Mixed: return {10, 180, 8.0};
  }
  return {};
}

/// mt19937_64 with portable mappings to uniform reals and integers.
class DrawRng {
 public:
  explicit DrawRng(std::uint64_t seed) : g_(seed) {}
  double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int index(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }
  bool coin() { return (g_() >> 63) != 0; }

 private:
  std::mt19937_64 g_;
};

inline std::uint64_t record_seed(std::uint64_t seed, std::uint64_t index) {
  return detail::splitmix64(detail::splitmix64(seed) ^ index);
}

// ---------------------------------------------------------------- scenes

inline Scene gen_polygon_scene(DrawRng& rng) {
  const int sides = 3 + rng.index(4);
  const double R = rng.uniform(0.3, 0.5);
  const Vec2 c{rng.uniform(-1.0 + R, 1.0 - R), rng.uniform(-1.0 + R, 1.0 - R)};
  const double rotation = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const Boundary b = Boundary::polygon(regular_polygon(c, R, sides, rotation));
  Scene s;
  s.scatterers = {rng.coin() ? Scatterer::medium(b, 3.0) : Scatterer::obstacle(ScattererKind::SoundSoft, b)};
  return s;
}

inline Scene gen_mixed_circle_scene(DrawRng& rng, int max_attempts = 1000) {
  const int count = 1 + rng.index(3);
  std::vector<Boundary> circles;
  int attempts = 0;
  while (static_cast<int>(circles.size()) < count) {
    if (++attempts > max_attempts) throw DomainError("gen_mixed_circle_scene: no disjoint placement after " + std::to_string(max_attempts) + " attempts");
    const double r = rng.uniform(0.2, 0.3);
    const Vec2 c{rng.uniform(-1.0 + r, 1.0 - r), rng.uniform(-1.0 + r, 1.0 - r)};
    const bool clear = std::all_of(circles.begin(), circles.end(), [&](const Boundary& o) { return distance(c, o.center) > r + o.radius; });
    if (clear) circles.push_back(Boundary::circle(c, r));
  }
  Scene s;
  for (const Boundary& b : circles) {
    if (rng.coin()) s.scatterers.push_back(Scatterer::medium(b, rng.uniform(1.5, 3.0)));
    else s.scatterers.push_back(Scatterer::obstacle(ScattererKind::SoundSoft, b));
  }
  return s;
}

/// Bilinear resampling of a square src x src image onto res x res pixels with
/// pixel centers aligned, rotated by `angle` about the image center. Samples
/// outside the source are zero.
inline std::vector<double> resample_digit(const std::vector<double>& img, int src, int res, double angle = 0.0) {
  if (img.size() != static_cast<std::size_t>(src) * src) throw DomainError("resample_digit: image is not src x src");
  auto at = [&](int r, int c) { return (r < 0 || c < 0 || r >= src || c >= src) ? 0.0 : img[r * src + c]; };
  const double mid = 0.5 * src - 0.5, scale = static_cast<double>(src) / res;
  const double cs = std::cos(angle), sn = std::sin(angle);
  std::vector<double> out(static_cast<std::size_t>(res) * res);
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < res; ++j) {
      // image coordinates: x to the right, y up; inverse rotation into the source
      const double x = (j + 0.5) * scale - 0.5 - mid, y = mid - ((i + 0.5) * scale - 0.5);
      const double sx = cs * x + sn * y, sy = -sn * x + cs * y;
      const double u = sx + mid, v = mid - sy;
      const int c0 = static_cast<int>(std::floor(u)), r0 = static_cast<int>(std::floor(v));
      const double fu = u - c0, fv = v - r0;
      out[i * res + j] = (1 - fv) * ((1 - fu) * at(r0, c0) + fu * at(r0, c0 + 1)) + fv * ((1 - fu) * at(r0 + 1, c0) + fu * at(r0 + 1, c0 + 1));
    }
  return out;
}

inline std::vector<bool> digit_mask(const std::vector<double>& img, int src, int res, double angle = 0.0) {
  const auto up = resample_digit(img, src, res, angle);
  std::vector<bool> m(up.size());
  for (std::size_t i = 0; i < up.size(); ++i) m[i] = up[i] > 0.3;
  return m;
}

struct DigitScene {
  Scene scene;
  double rotation = 0.0;
  double digit_index = 1.0;
  double circle_index = 1.0;
  Vec2 circle_center;
  double circle_radius = 0.0;
  bool overlaps = false;
};

/// Digit as a medium over the whole sampling domain plus one circular
/// medium placed away from the digit when possible.
inline DigitScene gen_digit_scene(const std::vector<double>& image, DrawRng& rng, int res = 64, int max_attempts = 1000) {
  const int src = static_cast<int>(std::lround(std::sqrt(static_cast<double>(image.size()))));
  for (double v : image)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("gen_digit_scene: pixel values must lie in [0, 1]");
  DigitScene d;
  d.rotation = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const auto mask = digit_mask(image, src, res, d.rotation);
  d.digit_index = rng.uniform(1.2, 1.7);
  d.circle_index = rng.uniform(1.2, 1.7);
  d.circle_radius = rng.uniform(0.2, 0.4);
  Scene& s = d.scene;
  s.grid = {-1.0, 1.0, res};
  const double r = d.circle_radius;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    d.circle_center = {rng.uniform(-1.0 + r, 1.0 - r), rng.uniform(-1.0 + r, 1.0 - r)};
    d.overlaps = false;
    for (std::size_t p = 0; p < mask.size() && !d.overlaps; ++p)
      d.overlaps = mask[p] && distance(s.grid.pixel(p / res, p % res), d.circle_center) < r;
    if (!d.overlaps) break;
  }
  MediumImage im{res, std::vector<double>(mask.size(), 1.0)};
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (mask[p]) im.values[p] = d.digit_index;
    if (distance(s.grid.pixel(p / res, p % res), d.circle_center) < r) im.values[p] = d.circle_index;
  }
  s.medium_image = std::move(im);
  return d;
}

// ---------------------------------------------------------------- digit sources

/// IDX image file (magic 0x00000803, big-endian dimensions, uint8 pixels).
inline std::vector<std::vector<double>> load_idx_images(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  auto be32 = [&] {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError("truncated IDX header in " + path.string());
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
  };
  if (be32() != 0x00000803u) throw FormatError(path.string() + " is not an IDX image file");
  const std::uint32_t n = be32(), rows = be32(), cols = be32();
  if (rows != 28 || cols != 28) throw FormatError("IDX images must be 28x28, got " + std::to_string(rows) + "x" + std::to_string(cols));
  std::vector<std::vector<double>> out(n, std::vector<double>(rows * cols));
  std::vector<unsigned char> buf(rows * cols);
  for (auto& img : out) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw FormatError("truncated IDX data in " + path.string());
    for (std::size_t i = 0; i < buf.size(); ++i) img[i] = buf[i] / 255.0;
  }
  return out;
}

/// Every *.png in a directory, in file-name order; each must be 28x28.
inline std::vector<std::vector<double>> load_png_directory(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<std::vector<double>> out;
  for (const auto& f : files) {
    auto img = read_png_gray(f);
    if (img.width != 28 || img.height != 28) throw FormatError(f.string() + ": digit images must be 28x28");
    out.push_back(std::move(img.values));
  }
  return out;
}

inline std::vector<std::vector<double>> load_digit_images(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("digit source " + path.string() + " does not exist");
  auto out = fs::is_directory(path) ? load_png_directory(path) : load_idx_images(path);
  if (out.empty()) throw FormatError("no digit images in " + path.string());
  return out;
}

// ---------------------------------------------------------------- records

struct DatasetConfig {
  Family family = Family::Polygon;
  int count = 0;
  int incidences = 0;  // 0: family default
  int receivers = 0;   // 0: family default
  double radius = 0.0; // 0: family default
  double noise = 0.0;
  std::uint64_t seed = 1;
  bool phased_inputs = false;
  std::optional<double> scale;  // W of the training split; makes this a test split
  std::vector<std::vector<double>> digits;
  int resolution = 64;
  nlohmann::json run_config = nlohmann::json::object();

  FamilyGeometry geometry() const {
    FamilyGeometry g = family_defaults(family);
    if (incidences > 0) g.incidences = incidences;
    if (receivers > 0) g.receivers = receivers;
    if (radius > 0.0) g.radius = radius;
    return g;
  }
};

struct RecordData {
  std::vector<double> inputs;  // raw (unscaled), [N_i, res, res]
  std::vector<double> target;  // [res, res]
  nlohmann::json meta;
};

inline std::string record_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "record_%05zu", index);
  return buf;
}

/// Forward solve, measurement, noise and index maps for one scene.
inline RecordData compute_inputs(const Scene& scene, double noise, std::uint64_t noise_seed, bool phased) {
  ForwardOptions opt;
  if (scene.medium_image) opt.ls_resolution = scene.medium_image->resolution;
  const ForwardResult f = simulate(scene, opt);
  const ProbeKernel kernel(scene.grid, scene.receivers, scene.wavenumber);
  const NoiseSpec spec{noise, noise_seed};
  std::vector<IndexMap> maps;
  if (phased) {
    for (const auto& u : add_noise_phased(f.u_scat, spec)) maps.push_back(index_phased(kernel, u));
  } else {
    const auto m = add_noise(phaseless(f), spec);
    for (std::size_t i = 0; i < m.magnitude.size(); ++i) maps.push_back(index_phaseless(kernel, m.magnitude[i], m.u_inc[i]));
  }
  RecordData r;
  for (const auto& m : maps) r.inputs.insert(r.inputs.end(), m.values.begin(), m.values.end());
  r.meta = {{"solver", f.solver}, {"noise", {{"delta", noise}, {"seed", noise_seed}}}, {"phased_inputs", phased}};
  if (!f.warnings.empty()) r.meta["warnings"] = f.warnings;
  return r;
}

/// Scene and ground truth for record `index`, drawn from its own stream.
inline RecordData generate_record(const DatasetConfig& cfg, std::size_t index) {
  const std::uint64_t rs = record_seed(cfg.seed, index);
  DrawRng rng(rs);
  nlohmann::json extra = nlohmann::json::object();
  Scene scene;
  switch (cfg.family) {
    case Family::Polygon: scene = gen_polygon_scene(rng); break;
    case Family::Mixed: scene = gen_mixed_circle_scene(rng); break;
    case Family::Digits: {
      if (cfg.digits.empty()) throw DomainError("the digits family needs source images");
      const int pick = rng.index(static_cast<int>(cfg.digits.size()));
      DigitScene d = gen_digit_scene(cfg.digits[pick], rng, cfg.resolution);
      extra = {{"digit_source_index", pick},
               {"rotation", d.rotation},
               {"digit_refractive_index", d.digit_index},
               {"circle", {{"center", {d.circle_center.x, d.circle_center.y}}, {"radius", d.circle_radius}, {"refractive_index", d.circle_index}}},
               {"circle_overlaps_digit", d.overlaps}};
      scene = std::move(d.scene);
      break;
    }
  }
  const FamilyGeometry g = cfg.geometry();
  scene.grid = {-1.0, 1.0, cfg.resolution};
  scene.receivers = {g.radius, g.receivers};
  scene.incidences = plane_wave_fan(g.incidences);
  RecordData r = compute_inputs(scene, cfg.noise, detail::splitmix64(rs ^ 0x6e6f697365ULL), cfg.phased_inputs);
  r.target = scene.medium_image ? scene.medium_image->values : rasterize(scene);
  r.meta["kind"] = "record";
  r.meta["family"] = to_string(cfg.family);
  r.meta["index"] = index;
  r.meta["record_seed"] = rs;
  r.meta["scene"] = to_json(scene);
  if (!extra.empty()) r.meta["generator"] = extra;
  return r;
}

inline std::vector<double> scale_inputs(std::vector<double> v, double W) {
  for (double& x : v) x = x * 2.0 / W;
  return v;
}

inline void write_record(const fs::path& stem, const std::vector<double>& inputs, const std::vector<double>& target,
                         const nlohmann::json& meta, int incidences, int res) {
  GridFile g;
  const std::size_t n = static_cast<std::size_t>(res);
  g.add_real("inputs", {static_cast<std::size_t>(incidences), n, n}, inputs);
  g.add_real("target", {n, n}, target);
  g.metadata = meta;
  g.write(stem);
}

struct DatasetManifest {
  nlohmann::json json;

  std::size_t count() const { return json.at("count").get<std::size_t>(); }
  std::optional<double> scale() const {
    if (json.at("scale_W").is_null()) return std::nullopt;
    return json.at("scale_W").get<double>();
  }
};

inline DatasetManifest read_manifest(const fs::path& dir) {
  const fs::path p = fs::is_directory(dir) ? dir / "manifest.json" : dir;
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  DatasetManifest m;
  try {
    in >> m.json;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed manifest " + p.string() + ": " + e.what());
  }
  if (m.json.value("format", "") != kDatasetFormat) throw FormatError(p.string() + " is not a " + kDatasetFormat + " manifest");
  return m;
}

/// Generates `count` records into `out`. Raw maps are written in a first
/// pass; a second pass rescales them once W is known. Test splits use the
/// training W from cfg.scale and need a single pass.
inline DatasetManifest build_dataset(const DatasetConfig& cfg, const fs::path& out) {
  if (cfg.count < 0) throw DomainError("dataset count must be non-negative");
  if (cfg.resolution < 8) throw DomainError("dataset resolution must be at least 8");
  if (cfg.scale && !(*cfg.scale > 0.0)) throw DomainError("scale W must be positive");
  check({cfg.noise, 0});
  const FamilyGeometry g = cfg.geometry();
  if (g.incidences < 1 || g.receivers < 1 || !(g.radius > 0.0)) throw DomainError("invalid dataset geometry");
  if (cfg.family == Family::Digits && cfg.digits.empty()) throw DomainError("the digits family needs source images");
  fs::create_directories(out);

  const std::size_t n = static_cast<std::size_t>(cfg.count);
  std::vector<double> peaks(n, 0.0);
  std::vector<std::string> solvers(n);
  const fs::path rec_dir = out / "records";
  if (n > 0) fs::create_directories(rec_dir);
  parallel_for(n, [&](std::size_t i) {
    RecordData r;
    try {
      r = generate_record(cfg, i);
    } catch (const std::exception& e) {
      throw SolverError("record " + std::to_string(i) + ": " + e.what());
    }
    peaks[i] = *std::max_element(r.inputs.begin(), r.inputs.end());
    solvers[i] = r.meta["solver"].get<std::string>();
    const double W = cfg.scale.value_or(1.0);
    r.meta["scale_W"] = cfg.scale ? nlohmann::json(W) : nlohmann::json(nullptr);
    write_record(rec_dir / record_name(i), cfg.scale ? scale_inputs(std::move(r.inputs), W) : r.inputs, r.target, r.meta,
                 g.incidences, cfg.resolution);
  });

  std::optional<double> W = cfg.scale;
  if (!cfg.scale && n > 0) {
    W = *std::max_element(peaks.begin(), peaks.end());
    if (!(*W > 0.0)) throw SolverError("all index maps vanish; cannot scale the dataset");
    parallel_for(n, [&](std::size_t i) {
      const fs::path stem = rec_dir / record_name(i);
      GridFile f = GridFile::read(stem);
      nlohmann::json meta = f.metadata;
      meta["scale_W"] = *W;
      write_record(stem, scale_inputs(f.get("inputs").data, *W), f.get("target").data, meta, g.incidences, cfg.resolution);
    });
  }

  nlohmann::json records = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) records.push_back({{"stem", "records/" + record_name(i)}, {"solver", solvers[i]}});
  DatasetManifest m;
  m.json = {{"format", kDatasetFormat},
            {"family", to_string(cfg.family)},
            {"split", cfg.scale ? "test" : "train"},
            {"count", n},
            {"wavenumber", Scene{}.wavenumber},
            {"receivers", {{"radius", g.radius}, {"count", g.receivers}}},
            {"incidences", g.incidences},
            {"incidence_angles", "2 pi j / N_i + pi / 4, j = 0..N_i-1"},
            {"seed", cfg.seed},
            {"noise", cfg.noise},
            {"phased_inputs", cfg.phased_inputs},
            {"resolution", cfg.resolution},
            {"domain", {-1.0, 1.0}},
            {"scale_W", W ? nlohmann::json(*W) : nlohmann::json(nullptr)},
            {"input_scaling", "inputs = raw * 2 / W"},
            {"digit_sources", cfg.digits.size()},
            {"records", records},
            {"config", cfg.run_config}};
  std::ofstream mf(out / "manifest.json");
  if (!mf) throw IoError("cannot write " + (out / "manifest.json").string());
  mf << m.json.dump(2) << "\n";
  return m;
}

/// Recomputes record `index` of a dataset from its stored metadata alone;
/// returns the scaled inputs.
inline std::vector<double> regenerate_record(const fs::path& dir, std::size_t index) {
  const DatasetManifest m = read_manifest(dir);
  if (index >= m.count()) throw DomainError("record index out of range");
  const GridFile f = GridFile::read(dir / "records" / record_name(index));
  const auto& meta = f.metadata;
  const Scene scene = scene_from_json(meta.at("scene"));
  const RecordData r = compute_inputs(scene, meta.at("noise").at("delta").get<double>(), meta.at("noise").at("seed").get<std::uint64_t>(),
                                      meta.at("phased_inputs").get<bool>());
  const auto W = m.scale();
  if (!W) throw FormatError("manifest has no scale W");
  return scale_inputs(r.inputs, *W);
}

}  // namespace dsmps
