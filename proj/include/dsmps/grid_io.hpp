#pragma once

// Binary grid files ("dsm-grid-v1"): a raw data file of little-endian float64
// values and a JSON sidecar naming each array with its dtype, shape and byte
// offset. Complex arrays are stored as interleaved (re, im) float64 pairs,
// row-major. PNG previews (8-bit grayscale) and CSV receiver traces are
// provided alongside.

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include <nlohmann/json.hpp>

#include "dsmps/error.hpp"

namespace dsmps {

namespace fs = std::filesystem;

inline constexpr const char* kGridFormat = "dsm-grid-v1";

struct GridArray {
  std::string name;
  std::vector<std::size_t> shape;
  bool complex = false;
  std::vector<double> data;  // interleaved re/im when complex

  std::size_t elements() const {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
  }
  std::vector<std::complex<double>> as_complex() const {
    if (!complex) throw IoError("array '" + name + "' is not complex");
    std::vector<std::complex<double>> out(data.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {data[2 * i], data[2 * i + 1]};
    return out;
  }
};

namespace detail {

inline std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xff) << (8 * (7 - i));
  return r;
}

[[noreturn]] inline void png_fail(png_structp png, png_const_charp) { png_longjmp(png, 1); }
inline void png_quiet(png_structp, png_const_charp) {}

}  // namespace detail

/// Path of the data file and the sidecar for a stem ("out/fields" ->
/// "out/fields.bin", "out/fields.json").
inline fs::path data_path(const fs::path& stem) { return fs::path(stem.string() + ".bin"); }
inline fs::path sidecar_path(const fs::path& stem) { return fs::path(stem.string() + ".json"); }

class GridFile {
 public:
  nlohmann::json metadata = nlohmann::json::object();

  void add_real(std::string name, std::vector<std::size_t> shape, std::vector<double> values) {
    GridArray a{std::move(name), std::move(shape), false, std::move(values)};
    if (a.elements() != a.data.size()) throw IoError("array '" + a.name + "': shape does not match data length");
    arrays_.push_back(std::move(a));
  }

  void add_complex(std::string name, std::vector<std::size_t> shape, const std::vector<std::complex<double>>& values) {
    GridArray a{std::move(name), std::move(shape), true, {}};
    if (a.elements() != values.size()) throw IoError("array '" + a.name + "': shape does not match data length");
    a.data.reserve(2 * values.size());
    for (auto v : values) {
      a.data.push_back(v.real());
      a.data.push_back(v.imag());
    }
    arrays_.push_back(std::move(a));
  }

  bool has(const std::string& name) const {
    for (const auto& a : arrays_)
      if (a.name == name) return true;
    return false;
  }

  const GridArray& get(const std::string& name) const {
    for (const auto& a : arrays_)
      if (a.name == name) return a;
    throw IoError("grid file has no array named '" + name + "'");
  }

  const std::vector<GridArray>& arrays() const { return arrays_; }

  nlohmann::json sidecar(const std::string& data_file) const {
    nlohmann::json arr = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& a : arrays_) {
      arr.push_back({{"name", a.name}, {"dtype", a.complex ? "complex128" : "float64"}, {"shape", a.shape}, {"offset", offset}});
      offset += a.data.size() * sizeof(double);
    }
    return {{"format", kGridFormat}, {"byte_order", "little"}, {"data_file", data_file}, {"arrays", arr}, {"metadata", metadata}};
  }

  void write(const fs::path& stem) const {
    if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
    const fs::path bin = data_path(stem);
    {
      std::ofstream out(bin, std::ios::binary);
      if (!out) throw IoError("cannot open " + bin.string() + " for writing");
      for (const auto& a : arrays_) {
        std::vector<std::uint64_t> raw(a.data.size());
        for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = detail::to_little(std::bit_cast<std::uint64_t>(a.data[i]));
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
      }
      if (!out) throw IoError("write failed: " + bin.string());
    }
    std::ofstream side(sidecar_path(stem));
    if (!side) throw IoError("cannot open " + sidecar_path(stem).string() + " for writing");
    side << sidecar(bin.filename().string()).dump(2) << "\n";
    if (!side) throw IoError("write failed: " + sidecar_path(stem).string());
  }

  static GridFile read(const fs::path& stem) {
    std::ifstream side(sidecar_path(stem));
    if (!side) throw IoError("cannot open " + sidecar_path(stem).string());
    nlohmann::json j;
    try {
      side >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("malformed sidecar " + sidecar_path(stem).string() + ": " + e.what());
    }
    if (j.value("format", "") != kGridFormat) throw FormatError("unsupported grid format in " + sidecar_path(stem).string());
    const fs::path bin = stem.parent_path() / j.at("data_file").get<std::string>();
    std::ifstream in(bin, std::ios::binary);
    if (!in) throw IoError("cannot open " + bin.string());
    GridFile g;
    g.metadata = j.value("metadata", nlohmann::json::object());
    for (const auto& e : j.at("arrays")) {
      GridArray a;
      a.name = e.at("name").get<std::string>();
      a.shape = e.at("shape").get<std::vector<std::size_t>>();
      const std::string dtype = e.at("dtype").get<std::string>();
      if (dtype != "float64" && dtype != "complex128") throw FormatError("unsupported dtype '" + dtype + "'");
      a.complex = dtype == "complex128";
      const std::size_t count = a.elements() * (a.complex ? 2 : 1);
      std::vector<std::uint64_t> raw(count);
      in.seekg(static_cast<std::streamoff>(e.at("offset").get<std::size_t>()));
      in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * sizeof(std::uint64_t)));
      if (!in) throw FormatError("truncated data file " + bin.string() + " reading '" + a.name + "'");
      a.data.resize(count);
      for (std::size_t i = 0; i < count; ++i) a.data[i] = std::bit_cast<double>(detail::to_little(raw[i]));
      g.arrays_.push_back(std::move(a));
    }
    return g;
  }

 private:
  std::vector<GridArray> arrays_;
};

// ---------------------------------------------------------------- PNG

/// 8-bit grayscale PNG of a row-major image; values are mapped linearly from
/// [lo, hi] to [0, 255] and clamped.
inline void write_png_gray(const fs::path& path, int width, int height, const std::vector<double>& values, double lo = 0.0,
                           double hi = 1.0) {
  if (values.size() != static_cast<std::size_t>(width) * height) throw IoError("write_png_gray: size mismatch");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw IoError("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, detail::png_fail, detail::png_quiet);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  std::vector<png_byte> row(width);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng error writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const double span = hi > lo ? hi - lo : 1.0;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double t = (values[static_cast<std::size_t>(r) * width + c] - lo) / span;
      row[c] = static_cast<png_byte>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // in [0, 1], row-major
};

/// Reads any PNG as grayscale in [0, 1] (color is converted, alpha dropped).
inline GrayImage read_png_gray(const fs::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "rb"), &std::fclose);
  if (!fp) throw IoError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, detail::png_fail, detail::png_quiet);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialisation failed");
  }
  GrayImage img;
  std::vector<png_byte> buf;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng error reading " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buf.resize(stride * img.height);
  for (int r = 0; r < img.height; ++r) rows.push_back(buf.data() + r * stride);
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  img.values.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) img.values[static_cast<std::size_t>(r) * img.width + c] = buf[r * stride + c] / 255.0;
  return img;
}

// ---------------------------------------------------------------- CSV

/// Writes rows produced by `row(i)` under a header line.
inline void write_csv(const fs::path& path, const std::string& header, std::size_t rows,
                      const std::function<std::string(std::size_t)>& row) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << header << "\n";
  for (std::size_t i = 0; i < rows; ++i) out << row(i) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dsmps
