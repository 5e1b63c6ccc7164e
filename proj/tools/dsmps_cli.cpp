// dsmps: simulate | probe | verify | dataset
//
// Exit codes: 0 ok, 1 computational failure, 2 usage or invalid
// configuration, 3 verification failure. DSMPS_THREADS caps worker threads.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dsmps/artifacts.hpp"
#include "dsmps/datagen.hpp"
#include "dsmps/forward.hpp"
#include "dsmps/noise.hpp"
#include "dsmps/probe.hpp"
#include "dsmps/scene.hpp"
#include "dsmps/verify.hpp"

using namespace dsmps;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kComputeFailure = 1, kUsage = 2, kVerifyFailure = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimulateArgs {
  std::string scene, out, csv, solver = "auto";
  bool phaseless = false;
  std::optional<double> k, radius;
  std::optional<int> receivers, incidences;
  int farfield = 0;
  double noise = 0.0;
  std::uint64_t seed = 1;
};

struct ProbeArgs {
  std::string input, out, png;
  bool average = false, normalize = true, farfield = false;
  int resolution = 64;
  std::vector<double> domain{-1.0, 1.0};
};

struct VerifyArgs {
  bool all = false;
  std::vector<std::string> names;
  std::string json_out = "verify_report.json";
  std::uint64_t seed = 1;
  std::vector<double> deltas{0.05, 0.10};
};

struct DatasetArgs {
  std::string family, out, scale_from, digits;
  int count = -1, ni = 0, receivers = 0, resolution = 64;
  double radius = 0.0, noise = 0.0;
  std::uint64_t seed = 1;
  bool phased = false;
};

json base_config(const std::string& command) {
  json c = {{"command", command}, {"version", "0.1.0"}};
  if (const char* t = std::getenv("DSMPS_THREADS")) c["DSMPS_THREADS"] = t;
  return c;
}

Scene load_simulation_scene(const SimulateArgs& a) {
  Scene s;
  try {
    s = load_scene(a.scene);
    if (a.k) s.wavenumber = *a.k;
    if (a.radius) s.receivers.radius = *a.radius;
    if (a.receivers) s.receivers.count = *a.receivers;
    if (a.incidences) s.incidences = plane_wave_fan(*a.incidences);
    validate(s);
  } catch (const InvalidScene& e) {
    throw UsageError(e.what());
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
  if (a.noise > 0.0 && !a.phaseless) throw UsageError("--noise applies to phaseless output; add --phaseless");
  if (!(a.noise >= 0.0 && a.noise <= 1.0)) throw UsageError("--noise must lie in [0, 1]");
  return s;
}

int cmd_simulate(const SimulateArgs& a) {
  const Scene scene = load_simulation_scene(a);
  json config = base_config("simulate");
  config.update({{"scene_file", a.scene},
                 {"scene", to_json(scene)},
                 {"solver", a.solver},
                 {"phaseless", a.phaseless},
                 {"farfield_count", a.farfield},
                 {"noise", a.noise},
                 {"seed", a.seed},
                 {"out", a.out}});
  if (!a.csv.empty()) config["csv"] = a.csv;
  ForwardOptions opt;
  opt.solver = a.solver;
  opt.farfield_count = a.farfield;
  const ForwardResult f = simulate(scene, opt);
  for (const auto& w : f.warnings) std::cerr << "warning: " << w << "\n";
  if (a.phaseless) {
    write_phaseless(a.out, add_noise(phaseless(f), {a.noise, a.seed}), config);
  } else {
    write_forward(a.out, f, config);
  }
  if (!a.csv.empty()) write_receiver_csv(a.csv, f);
  std::cout << "solver " << f.solver << ", " << f.incidences.size() << " incidences x " << f.receivers.count
            << " receivers -> " << data_path(a.out).string() << "\n";
  return kOk;
}

int cmd_probe(const ProbeArgs& a) {
  if (a.domain.size() != 2 || !(a.domain[0] < a.domain[1])) throw UsageError("--domain needs lo < hi");
  if (a.resolution < 2) throw UsageError("--resolution must be at least 2");
  const SamplingGrid grid{a.domain[0], a.domain[1], a.resolution};
  Measurement m;
  try {
    m = read_measurement(a.input);
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
  std::vector<IndexMap> maps;
  std::string index;
  if (m.kind == "field" && a.farfield) {
    if (m.u_inf.empty()) throw FormatError("field file has no far-field data");
    for (const auto& row : m.u_inf) maps.push_back(index_farfield(row, grid, m.wavenumber));
    index = "farfield";
  } else if (m.kind == "field") {
    const ProbeKernel kernel(grid, m.receivers, m.wavenumber);
    for (const auto& row : m.u_scat) maps.push_back(index_phased(kernel, row));
    index = "phased";
  } else {
    if (a.farfield) throw UsageError("--farfield needs a field file");
    maps = index_phaseless(m.phaseless(), grid);
    index = "phaseless";
  }
  if (a.normalize)
    for (auto& mp : maps) mp = normalize(mp);
  std::optional<IndexMap> avg;
  if (a.average) avg = index_average(maps, a.normalize);

  json config = base_config("probe");
  config.update({{"input", a.input},
                 {"out", a.out},
                 {"grid", grid_json(grid)},
                 {"average", a.average},
                 {"normalize", a.normalize},
                 {"farfield", a.farfield},
                 {"index", index}});
  if (!a.png.empty()) config["png"] = a.png;
  json meta = {{"index_function", index}, {"source", m.metadata}, {"config", config}};
  write_index_maps(a.out, maps, avg, meta);
  if (!a.png.empty()) {
    auto preview = [&](const IndexMap& mp, const std::string& name) {
      write_png_gray(fs::path(a.png) / name, grid.resolution, grid.resolution, mp.values, 0.0, std::max(mp.max(), 1e-300));
    };
    for (std::size_t i = 0; i < maps.size(); ++i) preview(maps[i], "index_" + std::to_string(i) + ".png");
    if (avg) preview(*avg, "average.png");
  }
  std::cout << index << " index, " << maps.size() << " map(s) at " << grid.resolution << "x" << grid.resolution << " -> "
            << data_path(a.out).string() << "\n";
  return kOk;
}

int cmd_verify(const VerifyArgs& a) {
  std::vector<std::string> names = a.all ? experiment_names() : a.names;
  if (names.empty()) throw UsageError("verify needs --all or --name");
  const auto known = experiment_names();
  for (const auto& n : names)
    if (std::find(known.begin(), known.end(), n) == known.end()) throw UsageError("unknown experiment '" + n + "'");
  json reports = json::array();
  bool ok = true;
  for (const auto& n : names) {
    for (const auto& rep : run_experiment(n, a.seed, a.deltas)) {
      std::cout << rep.to_text() << "\n";
      reports.push_back(rep.to_json());
      ok = ok && rep.passed();
    }
  }
  json config = base_config("verify");
  config.update({{"experiments", names}, {"seed", a.seed}, {"deltas", a.deltas}, {"json", a.json_out}});
  const json doc = {{"reports", reports}, {"passed", ok}, {"config", config}};
  const fs::path p(a.json_out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + a.json_out);
  out << doc.dump(2) << "\n";
  std::cout << (ok ? "all experiments passed" : "some experiments failed") << "\n";
  return ok ? kOk : kVerifyFailure;
}

int cmd_dataset(const DatasetArgs& a) {
  DatasetConfig cfg;
  try {
    cfg.family = family_from_string(a.family);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (a.count < 0) throw UsageError("--count must be non-negative");
  if (!(a.noise >= 0.0 && a.noise <= 1.0)) throw UsageError("--noise must lie in [0, 1]");
  cfg.count = a.count;
  cfg.incidences = a.ni;
  cfg.receivers = a.receivers;
  cfg.radius = a.radius;
  cfg.noise = a.noise;
  cfg.seed = a.seed;
  cfg.phased_inputs = a.phased;
  cfg.resolution = a.resolution;
  if (!a.scale_from.empty()) {
    DatasetManifest train;
    try {
      train = read_manifest(a.scale_from);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    if (!train.scale()) throw UsageError("--scale-from manifest has no scale W (empty or test split?)");
    cfg.scale = train.scale();
  }
  if (cfg.family == Family::Digits) {
    if (a.digits.empty()) throw UsageError("--family digits needs --digits <IDX file or PNG directory>");
    try {
      cfg.digits = load_digit_images(a.digits);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
  }
  json config = base_config("dataset");
  config.update({{"family", a.family},
                 {"count", a.count},
                 {"ni", a.ni},
                 {"receivers", a.receivers},
                 {"radius", a.radius},
                 {"noise", a.noise},
                 {"seed", a.seed},
                 {"phased_inputs", a.phased},
                 {"resolution", a.resolution},
                 {"out", a.out}});
  if (!a.scale_from.empty()) config["scale_from"] = a.scale_from;
  if (!a.digits.empty()) config["digits"] = a.digits;
  cfg.run_config = config;
  const auto m = build_dataset(cfg, a.out);
  std::cout << m.count() << " " << a.family << " record(s), split " << m.json["split"].get<std::string>() << ", W = "
            << (m.scale() ? format_double(*m.scale()) : std::string("none")) << " -> " << (fs::path(a.out) / "manifest.json").string()
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct sampling toolkit for phaseless inverse scattering"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Solve the forward problem for a scene file");
  s->add_option("scene", sim.scene, "Scene JSON file")->required();
  s->add_option("-o,--out", sim.out, "Output stem (writes STEM.bin and STEM.json)")->required();
  s->add_flag("--phaseless", sim.phaseless, "Write |u| and u^i instead of complex fields");
  s->add_option("--csv", sim.csv, "Also write a per-receiver CSV trace");
  s->add_option("--solver", sim.solver, "auto | series | bie | ls")->check(CLI::IsMember({"auto", "series", "bie", "ls"}));
  s->add_option("-k,--wavenumber", sim.k, "Override the scene wavenumber");
  s->add_option("--receivers", sim.receivers, "Override the receiver count");
  s->add_option("--radius", sim.radius, "Override the receiver radius");
  s->add_option("--incidences", sim.incidences, "Replace incidences by N plane waves at 2 pi j / N + pi / 4");
  s->add_option("--farfield", sim.farfield, "Far-field directions (default: receiver count)");
  s->add_option("--noise", sim.noise, "Relative noise level for --phaseless output");
  s->add_option("--seed", sim.seed, "Noise seed");

  ProbeArgs probe;
  auto* p = app.add_subcommand("probe", "Compute index maps from a field or phaseless file");
  p->add_option("input", probe.input, "Measurement stem (field or phaseless file)")->required();
  p->add_option("-o,--out", probe.out, "Output stem")->required();
  p->add_flag("--average", probe.average, "Also write the average over incidences");
  p->add_flag("--normalize,!--no-normalize", probe.normalize, "Scale each map to maximum 1 (default on)");
  p->add_flag("--farfield", probe.farfield, "Use the far-field index on u_inf of a field file");
  p->add_option("--resolution", probe.resolution, "Pixels per side");
  p->add_option("--domain", probe.domain, "Sampling square [lo, hi]")->expected(2);
  p->add_option("--png", probe.png, "Directory for PNG previews");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Run verification experiments");
  auto* all = v->add_flag("--all", ver.all, "Run every experiment");
  auto* name = v->add_option("--name", ver.names, "Experiment name (repeatable)");
  all->excludes(name);
  v->add_option("--json", ver.json_out, "JSON report path");
  v->add_option("--seed", ver.seed, "Noise seed");
  v->add_option("--deltas", ver.deltas, "Noise levels for the example experiments");

  DatasetArgs ds;
  auto* d = app.add_subcommand("dataset", "Generate a training or test dataset");
  d->add_option("--family", ds.family, "polygon | digits | mixed")->required();
  d->add_option("--count", ds.count, "Number of records")->required();
  d->add_option("--ni", ds.ni, "Incidences per record (default: family value)");
  d->add_option("--noise", ds.noise, "Relative noise level");
  d->add_option("--seed", ds.seed, "Dataset seed");
  d->add_option("--out", ds.out, "Output directory")->required();
  d->add_flag("--phased-inputs", ds.phased, "Phased index maps from noisy u^s");
  d->add_option("--scale-from", ds.scale_from, "Training dataset whose W scales this test split");
  d->add_option("--digits,--mnist", ds.digits, "IDX image file or directory of 28x28 PNGs");
  d->add_option("--receivers", ds.receivers, "Receiver count (default: family value)");
  d->add_option("--radius", ds.radius, "Receiver radius (default: family value)");
  d->add_option("--resolution", ds.resolution, "Index-map pixels per side");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*p) return cmd_probe(probe);
    if (*v) return cmd_verify(ver);
    if (*d) return cmd_dataset(ds);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kComputeFailure;
  }
  return kUsage;
}
