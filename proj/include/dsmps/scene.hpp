#pragma once

// Ground truth and experiment geometry: scatterers, receivers, incidences and
// the sampling grid, with JSON (de)serialization and rasterization.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsmps/error.hpp"
#include "dsmps/geometry.hpp"

namespace dsmps {

enum class ScattererKind { SoundSoft, SoundHard, Impedance, Medium };

inline bool is_obstacle(ScattererKind k) { return k != ScattererKind::Medium; }

inline const char* to_string(ScattererKind k) {
  switch (k) {
    case ScattererKind::SoundSoft: return "sound_soft";
    case ScattererKind::SoundHard: return "sound_hard";
    case ScattererKind::Impedance: return "impedance";
    case ScattererKind::Medium: return "medium";
  }
  return "?";
}

inline ScattererKind kind_from_string(const std::string& s) {
  if (s == "sound_soft") return ScattererKind::SoundSoft;
  if (s == "sound_hard") return ScattererKind::SoundHard;
  if (s == "impedance") return ScattererKind::Impedance;
  if (s == "medium") return ScattererKind::Medium;
  throw InvalidScene("unknown scatterer kind '" + s + "'");
}

/// Closed boundary: a circle, a polygon (smoothed for the boundary integral
/// solver) or an annulus (media only).
struct Boundary {
  enum class Type { Circle, Polygon, Annulus };
  Type type = Type::Circle;
  Vec2 center;
  double radius = 0.0;        // circle radius, annulus outer radius
  double inner_radius = 0.0;  // annulus only
  std::vector<Vec2> vertices; // polygon only

  static Boundary circle(Vec2 c, double r) {
    Boundary b;
    b.type = Type::Circle;
    b.center = c;
    b.radius = r;
    return b;
  }
  static Boundary polygon(std::vector<Vec2> v) {
    Boundary b;
    b.type = Type::Polygon;
    b.vertices = std::move(v);
    return b;
  }
  static Boundary annulus(Vec2 c, double inner, double outer) {
    Boundary b;
    b.type = Type::Annulus;
    b.center = c;
    b.inner_radius = inner;
    b.radius = outer;
    return b;
  }

  bool contains(Vec2 p) const {
    switch (type) {
      case Type::Circle: return distance(p, center) < radius;
      case Type::Annulus: {
        const double d = distance(p, center);
        return d < radius && d > inner_radius;
      }
      case Type::Polygon: return point_in_polygon(vertices, p);
    }
    return false;
  }

  /// Largest distance from `origin` to a boundary point.
  double reach(Vec2 origin = {}) const {
    if (type == Type::Polygon) {
      double r = 0.0;
      for (const Vec2& v : vertices) r = std::max(r, distance(v, origin));
      return r;
    }
    return distance(center, origin) + radius;
  }

  Vec2 centroid() const {
    if (type != Type::Polygon) return center;
    Vec2 c;
    for (const Vec2& v : vertices) c += v;
    return c / static_cast<double>(vertices.size());
  }

  /// [xmin, xmax, ymin, ymax]
  std::array<double, 4> bounding_box() const {
    if (type == Type::Polygon) {
      std::array<double, 4> b{1e300, -1e300, 1e300, -1e300};
      for (const Vec2& v : vertices) {
        b[0] = std::min(b[0], v.x);
        b[1] = std::max(b[1], v.x);
        b[2] = std::min(b[2], v.y);
        b[3] = std::max(b[3], v.y);
      }
      return b;
    }
    return {center.x - radius, center.x + radius, center.y - radius, center.y + radius};
  }

  /// Closed polyline(s) sampling the boundary, used for intersection tests.
  std::vector<std::vector<Vec2>> outlines(int samples = 256) const {
    auto ring = [&](double r) {
      std::vector<Vec2> pts;
      for (int i = 0; i < samples; ++i) pts.push_back(center + r * unit_from_angle(2.0 * std::numbers::pi * i / samples));
      return pts;
    };
    switch (type) {
      case Type::Circle: return {ring(radius)};
      case Type::Annulus: return {ring(radius), ring(inner_radius)};
      case Type::Polygon: return {vertices};
    }
    return {};
  }
};

struct Scatterer {
  ScattererKind kind = ScattererKind::SoundSoft;
  Boundary boundary;
  double impedance = 1.0;         // lambda in du/dnu + i k lambda u = 0
  double refractive_index = 1.0;  // media only

  static Scatterer obstacle(ScattererKind kind, Boundary b, double impedance = 1.0) {
    return {kind, std::move(b), impedance, 1.0};
  }
  static Scatterer medium(Boundary b, double n) { return {ScattererKind::Medium, std::move(b), 1.0, n}; }
};

/// Refractive-index image over the sampling domain (row 0 = top), used for
/// media that are given as pixel maps rather than curves.
struct MediumImage {
  int resolution = 0;
  std::vector<double> values;
};

struct Incidence {
  enum class Type { PlaneWave, PointSource };
  Type type = Type::PlaneWave;
  Vec2 direction{1.0, 0.0};
  Vec2 source;

  static Incidence plane_wave(double angle) { return {Type::PlaneWave, unit_from_angle(angle), {}}; }
  static Incidence plane_wave(Vec2 d) { return {Type::PlaneWave, d, {}}; }
  static Incidence point_source(Vec2 x) { return {Type::PointSource, {}, x}; }
};

/// theta_j = 2 pi (j - 1) / n + pi / 4, j = 1..n.
inline std::vector<Incidence> plane_wave_fan(int n) {
  std::vector<Incidence> v;
  for (int j = 0; j < n; ++j) v.push_back(Incidence::plane_wave(2.0 * std::numbers::pi * j / n + std::numbers::pi / 4.0));
  return v;
}

struct ReceiverArray {
  double radius = 4.0;
  int count = 100;

  Vec2 point(int r) const { return radius * unit_from_angle(2.0 * std::numbers::pi * r / count); }
  std::vector<Vec2> points() const {
    std::vector<Vec2> p;
    for (int r = 0; r < count; ++r) p.push_back(point(r));
    return p;
  }
  double weight() const { return 2.0 * std::numbers::pi * radius / count; }
};

struct SamplingGrid {
  double lo = -1.0;
  double hi = 1.0;
  int resolution = 64;

  double spacing() const { return (hi - lo) / resolution; }
  /// Pixel center; row 0 is the top (largest y).
  Vec2 pixel(int row, int col) const {
    const double h = spacing();
    return {lo + (col + 0.5) * h, hi - (row + 0.5) * h};
  }
  std::size_t size() const { return static_cast<std::size_t>(resolution) * resolution; }
  std::vector<Vec2> pixels() const {
    std::vector<Vec2> p;
    p.reserve(size());
    for (int i = 0; i < resolution; ++i)
      for (int j = 0; j < resolution; ++j) p.push_back(pixel(i, j));
    return p;
  }
  friend bool operator==(const SamplingGrid&, const SamplingGrid&) = default;
};

struct Scene {
  double wavenumber = 2.0 * std::numbers::pi / 0.75;
  std::vector<Scatterer> scatterers;
  std::optional<MediumImage> medium_image;
  ReceiverArray receivers;
  std::vector<Incidence> incidences;
  SamplingGrid grid;

  bool has_media() const {
    if (medium_image) return true;
    return std::any_of(scatterers.begin(), scatterers.end(), [](const Scatterer& s) { return s.kind == ScattererKind::Medium; });
  }
  bool has_obstacles() const {
    return std::any_of(scatterers.begin(), scatterers.end(), [](const Scatterer& s) { return is_obstacle(s.kind); });
  }

  /// n(x): 0 inside obstacles, the inclusion index inside media, 1 elsewhere.
  double refractive_index_at(Vec2 p) const {
    for (const Scatterer& s : scatterers) {
      if (s.boundary.contains(p)) return s.kind == ScattererKind::Medium ? s.refractive_index : 0.0;
    }
    if (medium_image) {
      const double h = grid.spacing();
      const int col = static_cast<int>(std::floor((p.x - grid.lo) / h));
      const int row = static_cast<int>(std::floor((grid.hi - p.y) / h));
      const int res = medium_image->resolution;
      if (row >= 0 && row < res && col >= 0 && col < res) return medium_image->values[row * res + col];
    }
    return 1.0;
  }
};

namespace detail {

inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

inline bool polylines_intersect(const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j)
      if (segments_intersect(p[i], p[(i + 1) % p.size()], q[j], q[(j + 1) % q.size()])) return true;
  return false;
}

inline bool polygon_is_simple(const std::vector<Vec2>& v) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
    }
  }
  return std::abs(polygon_signed_area(v)) > 0.0;
}

}  // namespace detail

/// True when the two scatterers neither cross nor nest.
inline bool scatterers_disjoint(const Scatterer& a, const Scatterer& b) {
  const Boundary& p = a.boundary;
  const Boundary& q = b.boundary;
  if (p.type != Boundary::Type::Polygon && q.type != Boundary::Type::Polygon) {
    const double d = distance(p.center, q.center);
    if (d >= p.radius + q.radius) return true;
    // A circle may sit inside the hole of an annulus.
    if (p.type == Boundary::Type::Annulus && d + q.radius <= p.inner_radius) return true;
    if (q.type == Boundary::Type::Annulus && d + p.radius <= q.inner_radius) return true;
    return false;
  }
  for (const auto& lp : p.outlines())
    for (const auto& lq : q.outlines())
      if (detail::polylines_intersect(lp, lq)) return false;
  if (q.contains(p.outlines().front().front()) || p.contains(q.outlines().front().front())) return false;
  return true;
}

/// Throws InvalidScene describing the first violated invariant.
inline void validate(const Scene& s) {
  if (!(s.wavenumber > 0.0) || !std::isfinite(s.wavenumber)) throw InvalidScene("wavenumber must be positive");
  if (s.grid.resolution < 8) throw InvalidScene("grid resolution must be at least 8");
  if (!(s.grid.hi > s.grid.lo)) throw InvalidScene("grid domain must have positive extent");
  if (s.receivers.count < 16) throw InvalidScene("receiver count must be at least 16");

  double reach = 0.0;
  for (std::size_t i = 0; i < s.scatterers.size(); ++i) {
    const Scatterer& sc = s.scatterers[i];
    const Boundary& b = sc.boundary;
    const std::string tag = "scatterer " + std::to_string(i) + ": ";
    if (b.type == Boundary::Type::Polygon) {
      if (b.vertices.size() < 3) throw InvalidScene(tag + "polygon needs at least 3 vertices");
      if (!detail::polygon_is_simple(b.vertices)) throw InvalidScene(tag + "polygon is not simple");
    } else if (!(b.radius > 0.0)) {
      throw InvalidScene(tag + "radius must be positive");
    }
    if (b.type == Boundary::Type::Annulus) {
      if (!(b.inner_radius > 0.0 && b.inner_radius < b.radius)) throw InvalidScene(tag + "annulus needs 0 < inner < outer");
      if (sc.kind != ScattererKind::Medium) throw InvalidScene(tag + "annulus boundaries are supported for media only");
    }
    if (sc.kind == ScattererKind::Medium) {
      if (!(sc.refractive_index > 0.0)) throw InvalidScene(tag + "refractive index must be positive");
      if (sc.refractive_index == 1.0) throw InvalidScene(tag + "refractive index must differ from 1");
    }
    if (sc.kind == ScattererKind::Impedance && !(sc.impedance >= 0.0)) throw InvalidScene(tag + "impedance must be >= 0");
    const auto bb = b.bounding_box();
    if (bb[0] < s.grid.lo || bb[1] > s.grid.hi || bb[2] < s.grid.lo || bb[3] > s.grid.hi) {
      throw InvalidScene(tag + "extends outside the sampling domain");
    }
    reach = std::max(reach, b.reach());
    for (std::size_t j = 0; j < i; ++j) {
      if (!scatterers_disjoint(s.scatterers[j], sc)) {
        throw InvalidScene("scatterers " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
      }
    }
  }
  if (s.medium_image) {
    const auto& im = *s.medium_image;
    if (im.resolution < 1 || im.values.size() != static_cast<std::size_t>(im.resolution) * im.resolution) {
      throw InvalidScene("medium image size does not match its resolution");
    }
    for (double v : im.values)
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidScene("medium image values must be positive");
    reach = std::max(reach, std::sqrt(2.0) * std::max(std::abs(s.grid.lo), std::abs(s.grid.hi)));
  }
  if (!s.scatterers.empty() || s.medium_image) {
    if (!(s.receivers.radius > reach)) throw InvalidScene("receiver radius must exceed the scatterer circumradius");
  }
  const double half = std::max(std::abs(s.grid.lo), std::abs(s.grid.hi));
  for (std::size_t i = 0; i < s.incidences.size(); ++i) {
    const Incidence& inc = s.incidences[i];
    if (inc.type == Incidence::Type::PlaneWave) {
      if (std::abs(norm(inc.direction) - 1.0) > 1e-12) throw InvalidScene("incidence " + std::to_string(i) + ": direction must be a unit vector");
    } else if (std::max(std::abs(inc.source.x), std::abs(inc.source.y)) <= half) {
      throw InvalidScene("incidence " + std::to_string(i) + ": point source must lie outside the sampling domain");
    }
  }
}

/// Ground-truth image on the sampling grid, decided at pixel centers.
inline std::vector<double> rasterize(const Scene& s) {
  for (const Scatterer& sc : s.scatterers) {
    const auto bb = sc.boundary.bounding_box();
    if (bb[0] < s.grid.lo || bb[1] > s.grid.hi || bb[2] < s.grid.lo || bb[3] > s.grid.hi) {
      throw InvalidScene("rasterize: scatterer extends outside the sampling domain");
    }
  }
  std::vector<double> img(s.grid.size());
  for (int i = 0; i < s.grid.resolution; ++i)
    for (int j = 0; j < s.grid.resolution; ++j) img[i * s.grid.resolution + j] = s.refractive_index_at(s.grid.pixel(i, j));
  return img;
}

// ---------------------------------------------------------------- JSON

using nlohmann::json;

namespace detail {

inline Vec2 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidScene("expected a 2-element coordinate array");
  return {j[0].get<double>(), j[1].get<double>()};
}
inline json vec_to_json(Vec2 v) { return json::array({v.x, v.y}); }

}  // namespace detail

inline json to_json(const Boundary& b) {
  switch (b.type) {
    case Boundary::Type::Circle:
      return {{"type", "circle"}, {"center", detail::vec_to_json(b.center)}, {"radius", b.radius}};
    case Boundary::Type::Annulus:
      return {{"type", "annulus"}, {"center", detail::vec_to_json(b.center)}, {"inner_radius", b.inner_radius}, {"outer_radius", b.radius}};
    case Boundary::Type::Polygon: {
      json v = json::array();
      for (const Vec2& p : b.vertices) v.push_back(detail::vec_to_json(p));
      return {{"type", "polygon"}, {"vertices", v}};
    }
  }
  return {};
}

inline Boundary boundary_from_json(const json& j) {
  const std::string t = j.at("type").get<std::string>();
  if (t == "circle") return Boundary::circle(detail::vec_from_json(j.at("center")), j.at("radius").get<double>());
  if (t == "annulus") {
    return Boundary::annulus(detail::vec_from_json(j.at("center")), j.at("inner_radius").get<double>(), j.at("outer_radius").get<double>());
  }
  if (t == "polygon") {
    std::vector<Vec2> v;
    for (const auto& p : j.at("vertices")) v.push_back(detail::vec_from_json(p));
    return Boundary::polygon(std::move(v));
  }
  throw InvalidScene("unknown boundary type '" + t + "'");
}

inline json to_json(const Incidence& inc) {
  if (inc.type == Incidence::Type::PlaneWave) return {{"type", "plane_wave"}, {"direction", detail::vec_to_json(inc.direction)}};
  return {{"type", "point_source"}, {"location", detail::vec_to_json(inc.source)}};
}

inline Incidence incidence_from_json(const json& j) {
  const std::string t = j.at("type").get<std::string>();
  if (t == "plane_wave") {
    if (j.contains("angle")) return Incidence::plane_wave(j.at("angle").get<double>());
    return Incidence::plane_wave(detail::vec_from_json(j.at("direction")));
  }
  if (t == "point_source") return Incidence::point_source(detail::vec_from_json(j.at("location")));
  throw InvalidScene("unknown incidence type '" + t + "'");
}

inline json to_json(const Scene& s) {
  json sc = json::array();
  for (const Scatterer& x : s.scatterers) {
    json e = {{"kind", to_string(x.kind)}, {"boundary", to_json(x.boundary)}};
    if (x.kind == ScattererKind::Impedance) e["impedance"] = x.impedance;
    if (x.kind == ScattererKind::Medium) e["refractive_index"] = x.refractive_index;
    sc.push_back(e);
  }
  json inc = json::array();
  for (const Incidence& i : s.incidences) inc.push_back(to_json(i));
  json j = {{"wavenumber", s.wavenumber},
            {"scatterers", sc},
            {"receivers", {{"radius", s.receivers.radius}, {"count", s.receivers.count}}},
            {"incidences", inc},
            {"grid", {{"domain", {s.grid.lo, s.grid.hi}}, {"resolution", s.grid.resolution}}}};
  if (s.medium_image) j["medium_image"] = {{"resolution", s.medium_image->resolution}, {"values", s.medium_image->values}};
  return j;
}

/// Parses and validates a scene document.
inline Scene scene_from_json(const json& j) {
  Scene s;
  try {
    s.wavenumber = j.at("wavenumber").get<double>();
    if (j.contains("scatterers")) {
      for (const auto& e : j.at("scatterers")) {
        Scatterer x;
        x.kind = kind_from_string(e.at("kind").get<std::string>());
        x.boundary = boundary_from_json(e.at("boundary"));
        x.impedance = e.value("impedance", x.kind == ScattererKind::Impedance ? 1.0 : 0.0);
        if (x.kind == ScattererKind::Medium) x.refractive_index = e.at("refractive_index").get<double>();
        s.scatterers.push_back(std::move(x));
      }
    }
    if (j.contains("medium_image")) {
      MediumImage im;
      im.resolution = j["medium_image"].at("resolution").get<int>();
      im.values = j["medium_image"].at("values").get<std::vector<double>>();
      s.medium_image = std::move(im);
    }
    if (j.contains("receivers")) {
      s.receivers.radius = j["receivers"].value("radius", s.receivers.radius);
      s.receivers.count = j["receivers"].value("count", s.receivers.count);
    }
    if (j.contains("incidences"))
      for (const auto& e : j.at("incidences")) s.incidences.push_back(incidence_from_json(e));
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      if (g.contains("domain")) {
        const auto d = g["domain"].get<std::vector<double>>();
        if (d.size() != 2) throw InvalidScene("grid.domain must be [lo, hi]");
        s.grid.lo = d[0];
        s.grid.hi = d[1];
      }
      s.grid.resolution = g.value("resolution", s.grid.resolution);
    }
  } catch (const json::exception& e) {
    throw InvalidScene(std::string("scene JSON: ") + e.what());
  }
  validate(s);
  return s;
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidScene("scene file " + path + " is not valid JSON: " + e.what());
  }
  return scene_from_json(j);
}

}  // namespace dsmps
