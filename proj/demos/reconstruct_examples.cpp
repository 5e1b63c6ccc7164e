// Phaseless reconstructions of the four example scenes; writes PNG maps and
// prints the strongest peaks.
//
//   reconstruct_examples [out_dir] [noise]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "dsmps/grid_io.hpp"
#include "dsmps/verify.hpp"

using namespace dsmps;

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? argv[1] : "examples_out";
  const double delta = argc > 2 ? std::atof(argv[2]) : 0.05;
  for (int n = 1; n <= 4; ++n) {
    Scene scene = example_scene(n);
    if (n == 4) scene.incidences = plane_wave_fan(5);
    const IndexMap map = phaseless_reconstruction(scene, {delta, 1});
    const auto png = out / ("example" + std::to_string(n) + ".png");
    write_png_gray(png, map.grid.resolution, map.grid.resolution, map.values);
    std::printf("example %d (%zu incidence(s)) -> %s\n", n, scene.incidences.size(), png.string().c_str());
    for (std::size_t p : find_peaks(map, 0.5, kWavelength / 4)) {
      const Vec2 z = map.grid.pixel(static_cast<int>(p) / map.grid.resolution, static_cast<int>(p) % map.grid.resolution);
      std::printf("  peak %.3f at (%+.3f, %+.3f)\n", map.values[p], z.x, z.y);
    }
  }
}
