// One PASS/FAIL line per primary acceptance criterion. Exits nonzero only
// when a criterion cannot be evaluated (an exception escapes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dsmps/forward.hpp"
#include "dsmps/verify.hpp"

using namespace dsmps;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string summarize(const ExperimentReport& r) {
  std::string s;
  for (const auto& q : r.quantities) {
    const bool fit = q.name.ends_with("_fit_residual");
    if (q.op.empty() && !fit) continue;
    if (!s.empty()) s += ", ";
    s += q.name + "=" + fmt(q.value) + (q.pass() ? "" : " (needs " + q.op + " " + fmt(q.threshold) + ")");
  }
  if (r.inconclusive) s += ", inconclusive fit";
  return s;
}

double relative_l2(const std::vector<std::vector<Complex>>& a, const std::vector<std::vector<Complex>>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t r = 0; r < a[i].size(); ++r) {
      num += std::norm(a[i][r] - b[i][r]);
      den += std::norm(b[i][r]);
    }
  return std::sqrt(num / den);
}

Outcome oracle_triangle() {
  std::string detail;
  bool ok = true;
  auto compare = [&](const std::string& label, Scatterer sc, const std::string& solver, double tol) {
    const auto t0 = std::chrono::steady_clock::now();
    Scene s;
    s.scatterers = {std::move(sc)};
    s.receivers = {4.0, 100};
    s.incidences = plane_wave_fan(4);
    ForwardOptions ref, num;
    ref.solver = "series";
    num.solver = solver;
    const double err = relative_l2(simulate(s, num).u_scat, simulate(s, ref).u_scat);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = err <= tol && secs <= 60.0;
    ok = ok && pass;
    if (!detail.empty()) detail += ", ";
    detail += label + " " + fmt(err) + (pass ? "" : " (needs <= " + fmt(tol) + " in 60 s)") + " [" + fmt(secs) + " s]";
  };
  const Boundary c = Boundary::circle({0, 0}, 0.15);
  compare("soft", Scatterer::obstacle(ScattererKind::SoundSoft, c), "bie", 1e-3);
  compare("hard", Scatterer::obstacle(ScattererKind::SoundHard, c), "bie", 1e-3);
  compare("impedance", Scatterer::obstacle(ScattererKind::Impedance, c, 1.0), "bie", 1e-3);
  compare("medium n=1.1", Scatterer::medium(Boundary::circle({0, 0}, 0.3), 1.1), "ls", 5e-3);
  return {ok, detail};
}

Outcome timed(const std::function<ExperimentReport()>& run, double limit_s) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentReport r = run();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool fast = secs <= limit_s;
  return {r.passed() && fast, summarize(r) + " [" + fmt(secs) + " s" + (fast ? "" : ", over " + fmt(limit_s) + " s") + "]"};
}

Outcome examples() {
  bool ok = true;
  std::string detail;
  for (int n = 1; n <= 4; ++n)
    for (double delta : {0.05, 0.10}) {
      const auto r = verify_example(n, {delta, 1});
      ok = ok && r.passed();
      if (!detail.empty()) detail += "; ";
      detail += "Ex" + std::to_string(n) + " d=" + fmt(delta) + " " + r.verdict() + " (" + summarize(r) + ")";
    }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"solver oracle triangle (BIE vs series <= 1e-3, LS vs series <= 5e-3)", oracle_triangle},
      {"plane-wave phaseless rate (slope <= -0.35, fit residual <= 0.15)", [] { return timed([] { return verify_theorem_planewave(); }, 300); }},
      {"point-source rate (slope <= -0.8, tau = 2)", [] { return timed([] { return verify_theorem_pointsource(); }, 300); }},
      {"term bounds (T2, T3 slopes <= -0.35)", [] { return timed([] { return verify_term_bounds(); }, 300); }},
      {"mixed reciprocity (best-constant residual <= 1e-3)", [] { return timed([] { return verify_reciprocity(); }, 300); }},
      {"examples 1-4 at noise 5% and 10%", examples},
      {"noise statistics (mean, std within 2%, deterministic)", [] { return timed([] { return verify_noise(); }, 300); }},
      {"Huygens residual decreasing in R_r", [] { return timed([] { return verify_huygens(); }, 300); }},
  };
  int passed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      std::printf("ERROR %s: %s\n", name.c_str(), e.what());
      return 1;
    }
    passed += o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu primary criteria pass\n", passed, criteria.size());
  return 0;
}
