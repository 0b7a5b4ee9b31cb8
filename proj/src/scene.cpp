#include "radarfm/scene.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace radarfm {

namespace {

constexpr double kUnitTolerance = 1e-9;

constexpr std::array<std::string_view, kSectorCount> kSectorNames = {
    "left_lane_front_side", "left_side",           "left_lane_back_side",
    "in_lane_front_side",   "in_lane_back_side",   "right_lane_front_side",
    "right_side",           "right_lane_back_side", "opposing_lane_front",
    "opposing_lane_back",   "other_lane_front",    "other_lane_back",
};

constexpr std::array<std::string_view, kSignKindCount> kSignNames = {
    "traffic_light",
    "stop_sign",
    "yield_sign",
    "speed_limit",
};

void require_unit(Vec2 v, const char* what) {
  if (std::abs(norm(v) - 1.0) > kUnitTolerance) {
    throw std::invalid_argument(std::string(what) + " must be a unit vector");
  }
}

}  // namespace

std::string_view to_string(SectorLabel label) {
  return kSectorNames[static_cast<int>(label)];
}

std::string_view to_string(SignKind kind) {
  return kSignNames[static_cast<int>(kind)];
}

std::optional<SectorLabel> sector_from_string(std::string_view name) {
  for (int i = 0; i < kSectorCount; ++i) {
    if (kSectorNames[i] == name) return static_cast<SectorLabel>(i);
  }
  return std::nullopt;
}

std::optional<SignKind> sign_from_string(std::string_view name) {
  for (int i = 0; i < kSignKindCount; ++i) {
    if (kSignNames[i] == name) return static_cast<SignKind>(i);
  }
  return std::nullopt;
}

std::string bin_name(int bin_index) {
  if (bin_index < 1 || bin_index > kBinCount) {
    throw std::invalid_argument("bin index must be in [1, 4], got " +
                                std::to_string(bin_index));
  }
  const int lo = (bin_index - 1) * 10;
  return std::to_string(lo) + "-" + std::to_string(lo + 10) + "m";
}

std::optional<int> bin_for_distance(double distance) {
  if (distance < 0.0 || distance >= kBinCount * kBinWidthMeters) return std::nullopt;
  return static_cast<int>(distance / kBinWidthMeters) + 1;
}

EgoFrame EgoFrame::from_forward(Vec2 position, Vec2 forward) {
  require_unit(forward, "ego forward");
  return EgoFrame{position, forward, perp_left(forward)};
}

void EgoFrame::validate() const {
  require_unit(forward, "ego forward");
  require_unit(left, "ego left");
  if (std::abs(dot(forward, left)) > kUnitTolerance) {
    throw std::invalid_argument("ego frame axes are not perpendicular");
  }
}

SignSet SignSet::from_raw(std::uint8_t bits) {
  if (bits >= (1u << kSignKindCount)) {
    throw std::invalid_argument("sign mask out of range");
  }
  SignSet s;
  s.bits_ = bits;
  return s;
}

std::uint32_t SceneDescriptor::sector_sum(int bin_index) const {
  std::uint32_t sum = 0;
  for (std::uint32_t c : cells[bin_index - 1]) sum += c;
  return sum;
}

bool SceneDescriptor::totals_consistent() const {
  for (int b = 1; b <= kBinCount; ++b) {
    if (bin_totals[b - 1] != sector_sum(b)) return false;
  }
  return true;
}

void SceneDescriptor::refresh_totals() {
  for (int b = 1; b <= kBinCount; ++b) bin_totals[b - 1] = sector_sum(b);
}

Direction classify_direction(const ActorState& actor, const EgoFrame& ego) {
  if (actor.kind != ActorKind::vehicle) {
    throw std::invalid_argument("classify_direction expects a vehicle");
  }
  require_unit(actor.heading, "vehicle heading");
  const double d = dot(ego.forward, actor.heading);
  if (d > 0.5) return Direction::same;
  if (d < -0.5) return Direction::opposing;
  return Direction::other;
}

SectorLabel classify_sector(const ActorState& actor, const EgoFrame& ego,
                            double lane_width) {
  if (actor.kind != ActorKind::vehicle) {
    throw std::invalid_argument("classify_sector expects a vehicle");
  }
  if (lane_width <= 0.0) {
    throw std::invalid_argument("lane width must be positive");
  }
  const Direction dir = classify_direction(actor, ego);
  const Vec2 rel = actor.position - ego.position;
  const double fwd = dot(rel, ego.forward);
  const double lat = dot(rel, ego.left);
  const bool front = fwd >= 0.0;

  if (dir == Direction::opposing) {
    return front ? SectorLabel::opposing_lane_front : SectorLabel::opposing_lane_back;
  }
  if (dir == Direction::other) {
    return front ? SectorLabel::other_lane_front : SectorLabel::other_lane_back;
  }

  const double half_lane = lane_width / 2.0;
  if (lat > half_lane) {
    if (std::abs(fwd) < kSideThresholdMeters) return SectorLabel::left_side;
    return front ? SectorLabel::left_lane_front_side : SectorLabel::left_lane_back_side;
  }
  if (lat < -half_lane) {
    if (std::abs(fwd) < kSideThresholdMeters) return SectorLabel::right_side;
    return front ? SectorLabel::right_lane_front_side : SectorLabel::right_lane_back_side;
  }
  return front ? SectorLabel::in_lane_front_side : SectorLabel::in_lane_back_side;
}

SceneDescriptor build_scene_descriptor(const std::vector<ActorState>& actors,
                                       const EgoFrame& ego, double max_range) {
  if (max_range <= 0.0) {
    throw std::invalid_argument("max range must be positive");
  }
  ego.validate();
  SceneDescriptor d;
  std::uint32_t walkers = 0;
  for (const ActorState& a : actors) {
    const double distance = norm(a.position - ego.position);
    if (distance >= max_range) continue;
    switch (a.kind) {
      case ActorKind::vehicle: {
        const auto bin = bin_for_distance(distance);
        if (!bin) break;  // outside the binned range even if inside max_range
        const SectorLabel sector = classify_sector(a, ego);
        ++d.cell(*bin, sector);
        ++d.bin_totals[*bin - 1];
        break;
      }
      case ActorKind::walker:
        ++walkers;
        break;
      case ActorKind::traffic_sign:
        if (a.sign_kind) d.signs.insert(*a.sign_kind);
        break;
    }
  }
  d.walkers = std::min(walkers, kMaxWalkers);
  return d;
}

std::string descriptor_to_json(const SceneDescriptor& d, int indent) {
  nlohmann::ordered_json j;
  for (int b = 1; b <= kBinCount; ++b) {
    nlohmann::ordered_json bin;
    bin["total_vehicles"] = d.bin_totals[b - 1];
    for (int s = 0; s < kSectorCount; ++s) {
      const std::uint32_t count = d.cells[b - 1][s];
      if (count > 0) bin[std::string(kSectorNames[s])] = count;
    }
    j[bin_name(b)] = std::move(bin);
  }
  auto signs = nlohmann::ordered_json::array();
  for (int k = 0; k < kSignKindCount; ++k) {
    const auto kind = static_cast<SignKind>(k);
    if (d.signs.contains(kind)) signs.push_back(std::string(kSignNames[k]));
  }
  j["applicable_traffic_signs"] = std::move(signs);
  j["walkers"] = d.walkers;
  return j.dump(indent);
}

SceneDescriptor descriptor_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("invalid descriptor JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("descriptor JSON must be an object");

  SceneDescriptor d;
  for (const auto& [key, value] : j.items()) {
    if (key == "applicable_traffic_signs") {
      if (!value.is_array()) {
        throw std::invalid_argument("applicable_traffic_signs must be an array");
      }
      for (const auto& name : value) {
        const auto kind = sign_from_string(name.get<std::string>());
        if (!kind) {
          throw std::invalid_argument("unknown traffic sign kind: " +
                                      name.get<std::string>());
        }
        d.signs.insert(*kind);
      }
      continue;
    }
    if (key == "walkers") {
      d.walkers = value.get<std::uint32_t>();
      continue;
    }
    int bin_index = 0;
    for (int b = 1; b <= kBinCount; ++b) {
      if (key == bin_name(b)) {
        bin_index = b;
        break;
      }
    }
    if (bin_index == 0) {
      throw std::invalid_argument("unknown descriptor key: " + key);
    }
    if (!value.is_object()) {
      throw std::invalid_argument("bin " + key + " must be an object");
    }
    bool total_seen = false;
    for (const auto& [cell_key, cell_value] : value.items()) {
      if (cell_key == "total_vehicles") {
        d.bin_totals[bin_index - 1] = cell_value.get<std::uint32_t>();
        total_seen = true;
        continue;
      }
      const auto sector = sector_from_string(cell_key);
      if (!sector) {
        throw std::invalid_argument("unknown sector key in " + key + ": " + cell_key);
      }
      d.cell(bin_index, *sector) = cell_value.get<std::uint32_t>();
    }
    if (!total_seen) d.bin_totals[bin_index - 1] = d.sector_sum(bin_index);
  }
  return d;
}

}  // namespace radarfm
