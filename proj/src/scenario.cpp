#include "radarfm/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

namespace radarfm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t scene_rng_seed(std::uint64_t seed, std::int64_t scene_id) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(scene_id));
}

struct DirectionMix {
  double same;
  double opposing;  // remainder is perpendicular
};

DirectionMix direction_mix(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::highway:
      return {0.55, 0.43};
    case ScenarioKind::urban:
      return {0.40, 0.30};
    case ScenarioKind::intersection:
      return {0.30, 0.20};
  }
  return {0.5, 0.5};
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::highway:
      return "highway";
    case ScenarioKind::urban:
      return "urban";
    case ScenarioKind::intersection:
      return "intersection";
  }
  return "?";
}

std::optional<ScenarioKind> scenario_kind_from_string(std::string_view name) {
  if (name == "highway") return ScenarioKind::highway;
  if (name == "urban") return ScenarioKind::urban;
  if (name == "intersection") return ScenarioKind::intersection;
  return std::nullopt;
}

void ScenarioConfig::validate() const {
  if (min_vehicles < 0 || max_vehicles < min_vehicles) {
    throw std::invalid_argument("vehicle count range is invalid");
  }
  if (min_walkers < 0 || max_walkers < min_walkers) {
    throw std::invalid_argument("walker count range is invalid");
  }
  for (double p : sign_probability) {
    if (p < 0.0 || p > 1.0) {
      throw std::invalid_argument("sign probability must be in [0, 1]");
    }
  }
  if (mix_highway < 0.0 || mix_urban < 0.0 || mix_intersection < 0.0 ||
      mix_highway + mix_urban + mix_intersection <= 0.0) {
    throw std::invalid_argument("scenario mix ratios are invalid");
  }
  if (captions_per_scene < 0) {
    throw std::invalid_argument("captions per scene must be non-negative");
  }
}

LabeledScene generate_scene(const ScenarioConfig& cfg, std::int64_t scene_id) {
  cfg.validate();
  std::mt19937_64 rng(scene_rng_seed(cfg.seed, scene_id));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  LabeledScene scene;
  scene.scene_id = scene_id;

  if (cfg.fixed_kind) {
    scene.kind = *cfg.fixed_kind;
  } else {
    const double total = cfg.mix_highway + cfg.mix_urban + cfg.mix_intersection;
    const double draw = unit(rng) * total;
    scene.kind = draw < cfg.mix_highway ? ScenarioKind::highway
                 : draw < cfg.mix_highway + cfg.mix_urban ? ScenarioKind::urban
                                                          : ScenarioKind::intersection;
  }

  const double ego_angle = unit(rng) * 2.0 * std::numbers::pi;
  const Vec2 ego_pos = {std::uniform_real_distribution<double>(-200.0, 200.0)(rng),
                        std::uniform_real_distribution<double>(-200.0, 200.0)(rng)};
  scene.ego = EgoFrame::from_forward(ego_pos, {std::cos(ego_angle), std::sin(ego_angle)});

  std::int64_t next_id = 1;
  const DirectionMix mix = direction_mix(scene.kind);

  const int vehicles =
      std::uniform_int_distribution<int>(cfg.min_vehicles, cfg.max_vehicles)(rng);
  for (int v = 0; v < vehicles; ++v) {
    // Lane-center bands at multiples of the lane width, with in-band jitter.
    // Most traffic sits in the adjacent lanes; a smaller share comes from
    // parallel roads further out, which is what populates the side sectors
    // beyond the first distance bin.
    const int lane = unit(rng) < 0.8
                         ? std::uniform_int_distribution<int>(-2, 2)(rng)
                         : std::uniform_int_distribution<int>(-13, 13)(rng);
    const double lateral = lane * kDefaultLaneWidth +
                           std::uniform_real_distribution<double>(-0.75, 0.75)(rng);
    // Mostly [2, 40) ahead or behind; a small band lands beside the ego so
    // the side sectors stay reachable.
    const double magnitude =
        unit(rng) < 0.1 ? std::uniform_real_distribution<double>(0.0, 2.0)(rng)
                        : std::uniform_real_distribution<double>(2.0, 40.0)(rng);
    const double longitudinal = unit(rng) < 0.5 ? magnitude : -magnitude;

    const double dir_draw = unit(rng);
    Vec2 base;
    if (dir_draw < mix.same) {
      base = scene.ego.forward;
    } else if (dir_draw < mix.same + mix.opposing) {
      base = {-scene.ego.forward.x, -scene.ego.forward.y};
    } else {
      base = unit(rng) < 0.5 ? scene.ego.left
                             : Vec2{-scene.ego.left.x, -scene.ego.left.y};
    }
    const double noise = std::uniform_real_distribution<double>(-0.3, 0.3)(rng);

    ActorState actor;
    actor.id = next_id++;
    actor.kind = ActorKind::vehicle;
    actor.position = scene.ego.position + longitudinal * scene.ego.forward +
                     lateral * scene.ego.left;
    actor.heading = rotated(base, noise);
    scene.actors.push_back(actor);
  }

  const int walkers =
      std::uniform_int_distribution<int>(cfg.min_walkers, cfg.max_walkers)(rng);
  for (int w = 0; w < walkers; ++w) {
    const double angle = unit(rng) * 2.0 * std::numbers::pi;
    const double distance = std::uniform_real_distribution<double>(1.0, 39.0)(rng);
    ActorState actor;
    actor.id = next_id++;
    actor.kind = ActorKind::walker;
    actor.position = scene.ego.position + distance * Vec2{std::cos(angle), std::sin(angle)};
    actor.heading = {1.0, 0.0};
    scene.actors.push_back(actor);
  }

  for (int k = 0; k < kSignKindCount; ++k) {
    if (unit(rng) >= cfg.sign_probability[k]) continue;
    const double angle = unit(rng) * 2.0 * std::numbers::pi;
    const double distance = std::uniform_real_distribution<double>(3.0, 35.0)(rng);
    ActorState actor;
    actor.id = next_id++;
    actor.kind = ActorKind::traffic_sign;
    actor.sign_kind = static_cast<SignKind>(k);
    actor.position = scene.ego.position + distance * Vec2{std::cos(angle), std::sin(angle)};
    actor.heading = {1.0, 0.0};
    scene.actors.push_back(actor);
  }

  scene.descriptor = build_scene_descriptor(scene.actors, scene.ego, kDefaultMaxRange);
  scene.hash = encode_hash(scene.descriptor);
  return scene;
}

DatasetStats collect_stats(const std::vector<DatasetRecord>& records) {
  DatasetStats stats;
  stats.scenes = records.size();
  for (const DatasetRecord& r : records) {
    for (int b = 0; b < kBinCount; ++b) {
      stats.bin_vehicle_totals[b] += r.descriptor.bin_totals[b];
      stats.total_vehicles += r.descriptor.bin_totals[b];
      for (int s = 0; s < kSectorCount; ++s) {
        stats.cell_vehicle_totals[b][s] += r.descriptor.cells[b][s];
        if (r.descriptor.cells[b][s] > 0) ++stats.cell_occupied_scenes[b][s];
      }
    }
    stats.total_walkers += r.descriptor.walkers;
    for (int k = 0; k < kSignKindCount; ++k) {
      if (r.descriptor.signs.contains(static_cast<SignKind>(k))) {
        ++stats.sign_scene_counts[k];
      }
    }
  }
  return stats;
}

std::string stats_to_json(const DatasetStats& s, int indent) {
  nlohmann::ordered_json j;
  j["scenes"] = s.scenes;
  j["total_vehicles"] = s.total_vehicles;
  j["total_walkers"] = s.total_walkers;
  nlohmann::ordered_json bins;
  for (int b = 0; b < kBinCount; ++b) bins[bin_name(b + 1)] = s.bin_vehicle_totals[b];
  j["bin_vehicle_totals"] = std::move(bins);
  auto cell_table = [](const auto& grid) {
    nlohmann::ordered_json t;
    for (int b = 0; b < kBinCount; ++b) {
      nlohmann::ordered_json row;
      for (int sct = 0; sct < kSectorCount; ++sct) {
        row[std::string(to_string(static_cast<SectorLabel>(sct)))] = grid[b][sct];
      }
      t[bin_name(b + 1)] = std::move(row);
    }
    return t;
  };
  j["cell_vehicle_totals"] = cell_table(s.cell_vehicle_totals);
  j["cell_occupied_scenes"] = cell_table(s.cell_occupied_scenes);
  nlohmann::ordered_json signs;
  for (int k = 0; k < kSignKindCount; ++k) {
    signs[std::string(to_string(static_cast<SignKind>(k)))] = s.sign_scene_counts[k];
  }
  j["sign_scene_counts"] = std::move(signs);
  return j.dump(indent);
}

DatasetStats generate_dataset(const ScenarioConfig& cfg, std::size_t n,
                              const std::filesystem::path& scenes_path,
                              const std::filesystem::path& stats_path,
                              const CaptionTemplateSet& templates) {
  cfg.validate();
  if (n == 0) {
    throw std::invalid_argument("dataset size must be at least 1");
  }
  std::vector<DatasetRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = static_cast<std::int64_t>(i);
    const LabeledScene scene = generate_scene(cfg, id);
    DatasetRecord record;
    record.scene_id = id;
    record.descriptor = scene.descriptor;
    record.hash_hex = scene.hash.serialize();
    const std::uint64_t caption_base =
        splitmix64(scene_rng_seed(cfg.seed, id) ^ 0x636170ULL);
    for (int c = 0; c < cfg.captions_per_scene; ++c) {
      record.captions.push_back(
          generate_caption(scene.descriptor, caption_base + static_cast<std::uint64_t>(c),
                           templates)
              .text);
    }
    records.push_back(std::move(record));
  }
  write_dataset(records, scenes_path);
  const DatasetStats stats = collect_stats(records);
  std::ofstream out(stats_path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + stats_path.string() + " for writing");
  }
  out << stats_to_json(stats) << '\n';
  if (!out) {
    throw std::runtime_error("failed writing stats to " + stats_path.string());
  }
  return stats;
}

}  // namespace radarfm
