#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "radarfm/scenario.hpp"
#include "test_support.hpp"

using namespace radarfm;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("an empty config yields the all-zero scene") {
  ScenarioConfig cfg;
  cfg.min_vehicles = cfg.max_vehicles = 0;
  cfg.min_walkers = cfg.max_walkers = 0;
  cfg.sign_probability = {0.0, 0.0, 0.0, 0.0};
  const LabeledScene scene = generate_scene(cfg, 0);
  CHECK(scene.descriptor == SceneDescriptor{});
  CHECK(scene.hash == encode_hash(SceneDescriptor{}));
}

TEST_CASE("scene generation is deterministic in (seed, scene_id)") {
  ScenarioConfig cfg;
  cfg.seed = 99;
  const LabeledScene a = generate_scene(cfg, 17);
  const LabeledScene b = generate_scene(cfg, 17);
  CHECK(a.actors.size() == b.actors.size());
  for (std::size_t i = 0; i < a.actors.size(); ++i) {
    CHECK(a.actors[i].position == b.actors[i].position);
    CHECK(a.actors[i].heading == b.actors[i].heading);
    CHECK(a.actors[i].kind == b.actors[i].kind);
  }
  CHECK(a.descriptor == b.descriptor);
  CHECK(a.hash == b.hash);
  const LabeledScene c = generate_scene(cfg, 18);
  CHECK(a.descriptor != c.descriptor);  // overwhelmingly likely
}

TEST_CASE("stored descriptors always match a rebuild from the actors") {
  ScenarioConfig cfg;
  cfg.seed = 5;
  for (std::int64_t id = 0; id < 300; ++id) {
    const LabeledScene scene = generate_scene(cfg, id);
    CHECK(scene.descriptor ==
          build_scene_descriptor(scene.actors, scene.ego, kDefaultMaxRange));
    CHECK(scene.hash == encode_hash(scene.descriptor));
    CHECK(scene.descriptor.totals_consistent());
  }
}

TEST_CASE("highway scenes are dominated by in-lane and opposing traffic") {
  ScenarioConfig cfg;
  cfg.seed = 7;
  cfg.fixed_kind = ScenarioKind::highway;
  std::uint64_t lane_axis = 0;
  std::uint64_t cross = 0;
  for (std::int64_t id = 0; id < 10000; ++id) {
    const LabeledScene scene = generate_scene(cfg, id);
    for (int b = 0; b < kBinCount; ++b) {
      for (int s = 0; s < kSectorCount; ++s) {
        const auto label = static_cast<SectorLabel>(s);
        const std::uint64_t count = scene.descriptor.cells[b][s];
        if (label == SectorLabel::in_lane_front_side ||
            label == SectorLabel::in_lane_back_side ||
            label == SectorLabel::opposing_lane_front ||
            label == SectorLabel::opposing_lane_back) {
          lane_axis += count;
        } else if (label == SectorLabel::other_lane_front ||
                   label == SectorLabel::other_lane_back ||
                   label == SectorLabel::left_side || label == SectorLabel::right_side) {
          cross += count;
        }
      }
    }
  }
  CHECK(lane_axis > 2 * cross);
}

TEST_CASE("intersection scenes produce perpendicular traffic") {
  ScenarioConfig cfg;
  cfg.seed = 11;
  cfg.fixed_kind = ScenarioKind::intersection;
  std::uint64_t other = 0;
  for (std::int64_t id = 0; id < 1000; ++id) {
    const LabeledScene scene = generate_scene(cfg, id);
    for (int b = 0; b < kBinCount; ++b) {
      other += scene.descriptor.cells[b][static_cast<int>(SectorLabel::other_lane_front)];
      other += scene.descriptor.cells[b][static_cast<int>(SectorLabel::other_lane_back)];
    }
  }
  CHECK(other > 500);
}

TEST_CASE("default config covers all 48 cells within 5000 scenes") {
  ScenarioConfig cfg;
  cfg.seed = 13;
  std::array<std::array<bool, kSectorCount>, kBinCount> occupied{};
  for (std::int64_t id = 0; id < 5000; ++id) {
    const LabeledScene scene = generate_scene(cfg, id);
    for (int b = 0; b < kBinCount; ++b) {
      for (int s = 0; s < kSectorCount; ++s) {
        if (scene.descriptor.cells[b][s] > 0) occupied[b][s] = true;
      }
    }
  }
  for (int b = 0; b < kBinCount; ++b) {
    for (int s = 0; s < kSectorCount; ++s) {
      INFO("bin ", b + 1, " sector ", to_string(static_cast<SectorLabel>(s)));
      CHECK(occupied[b][s]);
    }
  }
}

TEST_CASE("config validation") {
  ScenarioConfig cfg;
  cfg.min_vehicles = 5;
  cfg.max_vehicles = 2;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ScenarioConfig{};
  cfg.sign_probability[1] = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ScenarioConfig{};
  cfg.mix_highway = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("dataset files are deterministic and self-consistent") {
  const auto dir = std::filesystem::temp_directory_path() / "rfm_dataset_test";
  std::filesystem::create_directories(dir);
  ScenarioConfig cfg;
  cfg.seed = 21;
  cfg.captions_per_scene = 2;

  const DatasetStats stats =
      generate_dataset(cfg, 50, dir / "scenes.jsonl", dir / "stats.json");
  const std::string first = slurp(dir / "scenes.jsonl");
  const std::string first_stats = slurp(dir / "stats.json");
  generate_dataset(cfg, 50, dir / "scenes.jsonl", dir / "stats.json");
  CHECK(slurp(dir / "scenes.jsonl") == first);
  CHECK(slurp(dir / "stats.json") == first_stats);

  // Recount oracle over the emitted file.
  const auto records = read_dataset(dir / "scenes.jsonl");
  CHECK(records.size() == 50);
  std::uint64_t vehicles = 0;
  for (const DatasetRecord& r : records) {
    for (int b = 0; b < kBinCount; ++b) vehicles += r.descriptor.bin_totals[b];
    CHECK(r.captions.size() == 2);
    CHECK(SceneHash::deserialize(r.hash_hex) == encode_hash(r.descriptor));
    for (const std::string& caption : r.captions) {
      CHECK(parse_caption(caption).descriptor == r.descriptor);
    }
  }
  CHECK(stats.total_vehicles == vehicles);
  CHECK(stats.scenes == 50);
  const DatasetStats recount = collect_stats(records);
  CHECK(recount.total_vehicles == stats.total_vehicles);
  CHECK(recount.cell_vehicle_totals == stats.cell_vehicle_totals);

  std::filesystem::remove_all(dir);
}

TEST_CASE("single-record dataset round trips") {
  const auto dir = std::filesystem::temp_directory_path() / "rfm_dataset_one";
  std::filesystem::create_directories(dir);
  ScenarioConfig cfg;
  cfg.seed = 2;
  generate_dataset(cfg, 1, dir / "scenes.jsonl", dir / "stats.json");
  const auto records = read_dataset(dir / "scenes.jsonl");
  REQUIRE(records.size() == 1);
  CHECK(parse_caption(records[0].captions.at(0)).descriptor == records[0].descriptor);
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed dataset lines name their line number") {
  const auto path = std::filesystem::temp_directory_path() / "rfm_bad.jsonl";
  {
    std::ofstream out(path);
    out << R"({"scene_id": 0, "descriptor": {}, "hash_hex": "x"})" << "\n";
    out << "this is not json\n";
  }
  try {
    read_dataset(path);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("dataset size zero is rejected") {
  const auto dir = std::filesystem::temp_directory_path();
  CHECK_THROWS_AS(generate_dataset(ScenarioConfig{}, 0, dir / "x.jsonl", dir / "y.json"),
                  std::invalid_argument);
}
