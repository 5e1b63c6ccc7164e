#pragma once

// Grid-file layouts for forward fields, phaseless measurements and index
// maps. Sidecar metadata carries a "kind" tag ("field", "phaseless",
// "index") plus everything needed to interpret the arrays.

#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsmps/error.hpp"
#include "dsmps/forward.hpp"
#include "dsmps/grid_io.hpp"
#include "dsmps/probe.hpp"
#include "dsmps/scene.hpp"

namespace dsmps {

namespace detail {

template <class T>
std::vector<T> flatten(const std::vector<std::vector<T>>& rows) {
  std::vector<T> out;
  for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

template <class T>
std::vector<std::vector<T>> unflatten(const std::vector<T>& flat, std::size_t rows, std::size_t cols) {
  std::vector<std::vector<T>> out(rows);
  for (std::size_t i = 0; i < rows; ++i) out[i].assign(flat.begin() + i * cols, flat.begin() + (i + 1) * cols);
  return out;
}

inline nlohmann::json incidences_json(const std::vector<Incidence>& incs) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& i : incs) a.push_back(to_json(i));
  return a;
}

inline std::vector<Incidence> incidences_from(const nlohmann::json& a) {
  std::vector<Incidence> out;
  for (const auto& e : a) out.push_back(incidence_from_json(e));
  return out;
}

}  // namespace detail

inline void write_forward(const fs::path& stem, const ForwardResult& f, const nlohmann::json& config = {}) {
  const std::size_t ni = f.incidences.size(), nr = f.receivers.count, nf = f.farfield_count;
  GridFile g;
  g.add_complex("u_inc", {ni, nr}, detail::flatten(f.u_inc));
  g.add_complex("u_scat", {ni, nr}, detail::flatten(f.u_scat));
  g.add_complex("u_total", {ni, nr}, detail::flatten(f.u_total));
  g.add_complex("u_inf", {ni, nf}, detail::flatten(f.u_inf));
  g.metadata = {{"kind", "field"},
                {"solver", f.solver},
                {"wavenumber", f.wavenumber},
                {"receivers", {{"radius", f.receivers.radius}, {"count", f.receivers.count}}},
                {"incidences", detail::incidences_json(f.incidences)},
                {"farfield_count", f.farfield_count},
                {"warnings", f.warnings},
                {"config", config}};
  g.write(stem);
}

inline void write_phaseless(const fs::path& stem, const PhaselessMeasurement& m, const nlohmann::json& config = {}) {
  const std::size_t ni = m.incidences.size(), nr = m.receivers.count;
  GridFile g;
  g.add_real("magnitude", {ni, nr}, detail::flatten(m.magnitude));
  g.add_complex("u_inc", {ni, nr}, detail::flatten(m.u_inc));
  g.metadata = {{"kind", "phaseless"},
                {"wavenumber", m.wavenumber},
                {"receivers", {{"radius", m.receivers.radius}, {"count", m.receivers.count}}},
                {"incidences", detail::incidences_json(m.incidences)},
                {"config", config}};
  g.write(stem);
}

/// A measurement file read back: field files provide u_scat, u_inc and u_inf,
/// phaseless files provide magnitude and (when present) u_inc.
struct Measurement {
  std::string kind;
  double wavenumber = 0.0;
  ReceiverArray receivers;
  std::vector<Incidence> incidences;
  std::vector<std::vector<Complex>> u_scat;
  std::vector<std::vector<double>> magnitude;
  std::vector<std::vector<Complex>> u_inc;
  std::vector<std::vector<Complex>> u_inf;  // field files: far field on farfield_count directions
  nlohmann::json metadata;

  PhaselessMeasurement phaseless() const {
    if (u_inc.empty()) throw DomainError("phaseless measurement lacks the incident field u_inc");
    return {wavenumber, receivers, incidences, magnitude, u_inc};
  }
};

inline Measurement read_measurement(const fs::path& stem) {
  const GridFile g = GridFile::read(stem);
  Measurement m;
  m.metadata = g.metadata;
  try {
    m.kind = g.metadata.at("kind").get<std::string>();
    m.wavenumber = g.metadata.at("wavenumber").get<double>();
    m.receivers.radius = g.metadata.at("receivers").at("radius").get<double>();
    m.receivers.count = g.metadata.at("receivers").at("count").get<int>();
    m.incidences = detail::incidences_from(g.metadata.at("incidences"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("measurement metadata incomplete: ") + e.what());
  }
  const std::size_t ni = m.incidences.size(), nr = m.receivers.count;
  auto complex_rows = [&](const char* name) { return detail::unflatten(g.get(name).as_complex(), ni, nr); };
  if (m.kind == "field") {
    m.u_scat = complex_rows("u_scat");
    m.u_inc = complex_rows("u_inc");
    if (g.has("u_inf")) {
      const std::size_t nf = g.metadata.value("farfield_count", std::size_t{0});
      m.u_inf = detail::unflatten(g.get("u_inf").as_complex(), ni, nf);
    }
  } else if (m.kind == "phaseless") {
    m.magnitude = detail::unflatten(g.get("magnitude").data, ni, nr);
    if (g.has("u_inc")) m.u_inc = complex_rows("u_inc");
  } else {
    throw FormatError("not a measurement file (kind '" + m.kind + "')");
  }
  return m;
}

inline nlohmann::json grid_json(const SamplingGrid& g) { return {{"domain", {g.lo, g.hi}}, {"resolution", g.resolution}}; }

/// Writes maps as an [n, res, res] array "index"; an optional averaged map
/// goes to "average".
inline void write_index_maps(const fs::path& stem, const std::vector<IndexMap>& maps, const std::optional<IndexMap>& average,
                             const nlohmann::json& metadata = {}) {
  if (maps.empty()) throw DomainError("write_index_maps: no maps");
  const auto& grid = maps[0].grid;
  const std::size_t res = grid.resolution;
  std::vector<double> flat;
  for (const auto& m : maps) flat.insert(flat.end(), m.values.begin(), m.values.end());
  GridFile g;
  g.add_real("index", {maps.size(), res, res}, flat);
  if (average) g.add_real("average", {res, res}, average->values);
  g.metadata = metadata;
  g.metadata["kind"] = "index";
  g.metadata["grid"] = grid_json(grid);
  g.metadata["normalized"] = maps[0].normalized;
  g.write(stem);
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_receiver_csv(const fs::path& path, const ForwardResult& f) {
  const std::size_t nr = f.receivers.count;
  write_csv(path, "incidence,receiver,x,y,u_inc_re,u_inc_im,u_scat_re,u_scat_im,u_total_re,u_total_im",
            f.incidences.size() * nr, [&](std::size_t k) {
              const std::size_t i = k / nr, r = k % nr;
              const Vec2 x = f.receivers.point(static_cast<int>(r));
              std::string s = std::to_string(i) + "," + std::to_string(r) + "," + format_double(x.x) + "," + format_double(x.y);
              for (Complex v : {f.u_inc[i][r], f.u_scat[i][r], f.u_total[i][r]})
                s += "," + format_double(v.real()) + "," + format_double(v.imag());
              return s;
            });
}

}  // namespace dsmps
