#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "radarfm/geometry.hpp"

namespace radarfm {

inline constexpr int kBinCount = 4;
inline constexpr int kSectorCount = 12;
inline constexpr int kSignKindCount = 4;
inline constexpr double kBinWidthMeters = 10.0;
inline constexpr double kDefaultMaxRange = 40.0;
inline constexpr double kDefaultLaneWidth = 3.0;
// Longitudinal band inside which an adjacent-lane vehicle counts as "beside"
// rather than ahead/behind.
inline constexpr double kSideThresholdMeters = 2.0;
inline constexpr std::uint32_t kMaxWalkers = 7;

enum class ActorKind { vehicle, walker, traffic_sign };

enum class SignKind { traffic_light, stop_sign, yield_sign, speed_limit };

// Canonical sector order. The first 8 entries are the same-direction sectors,
// the last 4 the opposing/perpendicular ones; the hash layout and all
// serialized tables follow this order.
enum class SectorLabel {
  left_lane_front_side,
  left_side,
  left_lane_back_side,
  in_lane_front_side,
  in_lane_back_side,
  right_lane_front_side,
  right_side,
  right_lane_back_side,
  opposing_lane_front,
  opposing_lane_back,
  other_lane_front,
  other_lane_back,
};

enum class Direction { same, opposing, other };

std::string_view to_string(SectorLabel label);
std::string_view to_string(SignKind kind);
std::optional<SectorLabel> sector_from_string(std::string_view name);
std::optional<SignKind> sign_from_string(std::string_view name);

// Label of distance bin `b` (1-based), e.g. "0-10m".
std::string bin_name(int bin_index);

// 1-based bin index for a range, or nullopt when the distance falls outside
// [0, 40). Bins are half-open: exactly 10.0 m lands in bin 2.
std::optional<int> bin_for_distance(double distance);

struct ActorState {
  std::int64_t id = 0;
  Vec2 position;
  Vec2 heading;  // unit forward vector; required for vehicles
  ActorKind kind = ActorKind::vehicle;
  std::optional<SignKind> sign_kind;
};

struct EgoFrame {
  Vec2 position;
  Vec2 forward;  // unit
  Vec2 left;     // unit, perpendicular to forward

  // Builds a frame from a forward vector; left is derived.
  static EgoFrame from_forward(Vec2 position, Vec2 forward);
  void validate() const;  // throws std::invalid_argument on a degenerate frame
};

// Presence set over the four sign kinds, stored as a 4-bit mask in SignKind
// order.
class SignSet {
 public:
  SignSet() = default;
  void insert(SignKind k) { bits_ |= mask(k); }
  void erase(SignKind k) { bits_ &= ~mask(k); }
  bool contains(SignKind k) const { return bits_ & mask(k); }
  bool empty() const { return bits_ == 0; }
  std::uint8_t raw() const { return bits_; }
  static SignSet from_raw(std::uint8_t bits);

  friend bool operator==(SignSet a, SignSet b) { return a.bits_ == b.bits_; }

 private:
  static std::uint8_t mask(SignKind k) {
    return static_cast<std::uint8_t>(1u << static_cast<int>(k));
  }
  std::uint8_t bits_ = 0;
};

// Per-scene vehicle counts over the 4x12 (distance bin, sector) grid plus the
// applicable traffic signs and the walker count. Bin totals are stored
// explicitly: descriptors built from actors always satisfy
// total == sum(sector counts), but descriptors recovered from free text may
// state a total that disagrees (the caption parser reports this instead of
// silently repairing it).
struct SceneDescriptor {
  std::array<std::array<std::uint32_t, kSectorCount>, kBinCount> cells{};
  std::array<std::uint32_t, kBinCount> bin_totals{};
  SignSet signs;
  std::uint32_t walkers = 0;

  std::uint32_t& cell(int bin_index, SectorLabel s) {
    return cells[bin_index - 1][static_cast<int>(s)];
  }
  std::uint32_t cell(int bin_index, SectorLabel s) const {
    return cells[bin_index - 1][static_cast<int>(s)];
  }
  std::uint32_t sector_sum(int bin_index) const;
  // True when every bin total equals the sum of its sector counts.
  bool totals_consistent() const;
  // Recomputes bin totals from the sector counts.
  void refresh_totals();

  friend bool operator==(const SceneDescriptor&, const SceneDescriptor&) = default;
};

// Motion direction of a vehicle relative to the ego frame. The dot product of
// the forward vectors partitions [-1, 1] at exactly +/-0.5; both boundary
// values classify as `other`.
Direction classify_direction(const ActorState& actor, const EgoFrame& ego);

// Lane-relative sector of a vehicle. Lateral offsets beyond lane_width/2
// select the adjacent lanes; adjacent-lane vehicles within
// kSideThresholdMeters longitudinally are "beside" the ego. Opposing and
// perpendicular traffic splits front/back only. Ties on the longitudinal
// offset go to front.
SectorLabel classify_sector(const ActorState& actor, const EgoFrame& ego,
                            double lane_width = kDefaultLaneWidth);

// Builds the descriptor for a scene: filters actors to distance < max_range,
// bins vehicles by (distance, sector), collects sign kinds, and counts
// walkers clamped to kMaxWalkers.
SceneDescriptor build_scene_descriptor(const std::vector<ActorState>& actors,
                                       const EgoFrame& ego,
                                       double max_range = kDefaultMaxRange);

// JSON form matching the structured-scene schema: top-level keys "0-10m",
// "10-20m", "20-30m", "30-40m", "applicable_traffic_signs", "walkers"; each
// bin object carries "total_vehicles" plus only its nonzero sector keys.
std::string descriptor_to_json(const SceneDescriptor& d, int indent = -1);
SceneDescriptor descriptor_from_json(std::string_view json_text);

}  // namespace radarfm
