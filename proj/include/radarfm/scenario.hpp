#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "radarfm/captions.hpp"
#include "radarfm/dataset.hpp"
#include "radarfm/scene.hpp"
#include "radarfm/scene_hash.hpp"

namespace radarfm {

enum class ScenarioKind { highway, urban, intersection };

std::string_view to_string(ScenarioKind kind);
std::optional<ScenarioKind> scenario_kind_from_string(std::string_view name);

// Synthetic traffic configuration. Every scene's randomness is derived from
// (seed, scene_id) alone, so scenes are independent and reproducible.
struct ScenarioConfig {
  std::uint64_t seed = 0;
  int min_vehicles = 1;
  int max_vehicles = 12;
  int min_walkers = 0;
  int max_walkers = 3;
  // Per-kind presence probability, SignKind order.
  std::array<double, kSignKindCount> sign_probability = {0.15, 0.10, 0.05, 0.10};
  // When set, every scene uses this kind; otherwise kinds are mixed by ratio.
  std::optional<ScenarioKind> fixed_kind;
  double mix_highway = 0.5;
  double mix_urban = 0.3;
  double mix_intersection = 0.2;
  int captions_per_scene = 3;

  void validate() const;  // throws std::invalid_argument
};

struct LabeledScene {
  std::int64_t scene_id = 0;
  ScenarioKind kind = ScenarioKind::highway;
  std::vector<ActorState> actors;
  EgoFrame ego;
  SceneDescriptor descriptor;  // always build_scene_descriptor(actors, ego, 40)
  SceneHash hash;
};

// Deterministic scene synthesis. Vehicles are placed in lane-center bands at
// multiples of the lane width; headings follow the scenario kind (highways
// carry same/opposing traffic, intersections add perpendicular flow). The
// descriptor and hash always come from the scene-model pipeline, never from
// the sampler's bookkeeping.
LabeledScene generate_scene(const ScenarioConfig& cfg, std::int64_t scene_id);

struct DatasetStats {
  std::size_t scenes = 0;
  std::array<std::array<std::uint64_t, kSectorCount>, kBinCount> cell_vehicle_totals{};
  std::array<std::array<std::uint64_t, kSectorCount>, kBinCount> cell_occupied_scenes{};
  std::array<std::uint64_t, kBinCount> bin_vehicle_totals{};
  std::uint64_t total_vehicles = 0;
  std::uint64_t total_walkers = 0;
  std::array<std::uint64_t, kSignKindCount> sign_scene_counts{};
};

DatasetStats collect_stats(const std::vector<DatasetRecord>& records);
std::string stats_to_json(const DatasetStats& s, int indent = 2);

// Generates n scenes, captions each one (captions_per_scene variants with
// per-record seeds), writes JSONL records to scenes_path and occupancy stats
// to stats_path. Returns the stats.
DatasetStats generate_dataset(const ScenarioConfig& cfg, std::size_t n,
                              const std::filesystem::path& scenes_path,
                              const std::filesystem::path& stats_path,
                              const CaptionTemplateSet& templates =
                                  CaptionTemplateSet::builtin());

}  // namespace radarfm
