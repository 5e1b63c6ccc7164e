#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dsmps/artifacts.hpp"
#include "dsmps/noise.hpp"
#include "dsmps/verify.hpp"

using namespace dsmps;

namespace {

const fs::path kFixtures = DSMPS_FIXTURE_DIR;
const fs::path kScenes = DSMPS_SCENE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Golden, SceneFilesMatchExampleScenes) {
  for (int n = 1; n <= 4; ++n) {
    const Scene s = load_scene((kScenes / ("example" + std::to_string(n) + ".json")).string());
    EXPECT_EQ(to_json(s).dump(), to_json(example_scene(n)).dump()) << n;
  }
}

TEST(Golden, Example1FieldBytes) {
  const auto f = simulate(load_scene((kScenes / "example1.json").string()));
  const fs::path stem = fs::temp_directory_path() / "dsmps_golden" / "example1_fields";
  write_forward(stem, f);
  EXPECT_EQ(slurp(data_path(stem)), slurp(kFixtures / "example1_fields.bin"));
  const auto ref = read_measurement(kFixtures / "example1_fields");
  EXPECT_EQ(ref.metadata["solver"], "series");
  EXPECT_EQ(ref.metadata["config"]["scene"], to_json(example_scene(1)));
}

TEST(Golden, Example2PhaselessMap) {
  const auto f = simulate(load_scene((kScenes / "example2.json").string()));
  const auto m = add_noise(phaseless(f), {0.05, 1});
  const auto maps = index_phaseless(m, SamplingGrid{});
  const auto ref = GridFile::read(kFixtures / "example2_index").get("index");
  ASSERT_EQ(ref.shape, (std::vector<std::size_t>{1, 64, 64}));
  const auto got = normalize(maps[0]).values;
  double worst = 0;
  for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - ref.data[i]));
  EXPECT_LE(worst, 1e-12);
}

TEST(Golden, FixturesCarryRunConfig) {
  const auto g = GridFile::read(kFixtures / "example2_index");
  const auto& cfg = g.metadata["config"];
  EXPECT_EQ(cfg["command"], "probe");
  EXPECT_TRUE(cfg["normalize"].get<bool>());
  const auto& src = g.metadata["source"]["config"];
  EXPECT_EQ(src["command"], "simulate");
  EXPECT_EQ(src["noise"], 0.05);
  EXPECT_EQ(src["seed"], 1);
  // the embedded scene regenerates the measurement
  const auto f = simulate(scene_from_json(src["scene"]));
  const auto m = add_noise(phaseless(f), {src["noise"].get<double>(), src["seed"].get<std::uint64_t>()});
  EXPECT_EQ(m.magnitude, read_measurement(kFixtures / "example2_phaseless").magnitude);
}
