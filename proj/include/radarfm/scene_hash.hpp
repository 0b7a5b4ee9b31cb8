#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "radarfm/scene.hpp"

namespace radarfm {

// How sector/walker count fields are coded into their bit widths.
//  binary:      base-2 value, MSB first; a 3-bit field caps at 7, 5-bit at 31.
//  thermometer: min(count, width) leading ones; capacity equals the width,
//               and in-field Hamming distance becomes |a - b|.
enum class CountCoding { binary, thermometer };

inline constexpr std::string_view kHashVersionBinary = "rfm-hash-v1";
inline constexpr std::string_view kHashVersionThermometer = "rfm-hash-v1t";

struct FieldSpec {
  std::string name;
  std::size_t offset = 0;
  std::size_t width = 0;
  std::uint32_t capacity = 0;
};

// Fixed bit layout of a scene hash:
//   [0..3]   sign presence flags (traffic_light, stop_sign, yield_sign,
//            speed_limit)
//   [4..6]   walker count
//   [7..]    four 44-bit bin sub-vectors, each holding the 12 sector fields
//            in canonical order (3 bits for the 8 same-direction sectors,
//            5 bits for the 4 opposing/other sectors)
// Total: 4 + 3 + 4 * (8*3 + 4*5) = 183 bits.
struct HashLayout {
  CountCoding coding = CountCoding::binary;

  static constexpr std::size_t kSignBits = 4;
  static constexpr std::size_t kWalkerBits = 3;

  static constexpr std::size_t sector_width(SectorLabel s) {
    return static_cast<int>(s) < 8 ? 3 : 5;
  }
  static constexpr std::size_t bin_width() {
    return 8 * 3 + 4 * 5;  // 44
  }
  static constexpr std::size_t total_bits() {
    return kSignBits + kWalkerBits + kBinCount * bin_width();  // 183
  }
  static constexpr std::size_t sign_offset(SignKind k) {
    return static_cast<std::size_t>(static_cast<int>(k));
  }
  static constexpr std::size_t walker_offset() { return kSignBits; }
  static constexpr std::size_t bin_offset(int bin_index) {
    return kSignBits + kWalkerBits + static_cast<std::size_t>(bin_index - 1) * bin_width();
  }
  static std::size_t sector_offset(int bin_index, SectorLabel s);

  std::uint32_t field_capacity(std::size_t width) const {
    return coding == CountCoding::binary ? (1u << width) - 1
                                         : static_cast<std::uint32_t>(width);
  }
  std::uint32_t sector_capacity(SectorLabel s) const {
    return field_capacity(sector_width(s));
  }
  std::uint32_t walker_capacity() const { return field_capacity(kWalkerBits); }

  std::string_view version_tag() const {
    return coding == CountCoding::binary ? kHashVersionBinary : kHashVersionThermometer;
  }
  static HashLayout from_version_tag(std::string_view tag);

  // Full field table (name, offset, width, capacity) in bit order; the audit
  // output of the `layout` CLI subcommand.
  std::vector<FieldSpec> field_table() const;

  friend bool operator==(const HashLayout&, const HashLayout&) = default;
};

// Fixed-width bit vector of HashLayout::total_bits() bits. Bit 0 is the first
// bit of the vector and the most significant digit of the hex serialization.
class SceneHash {
 public:
  SceneHash() = default;
  explicit SceneHash(HashLayout layout) : layout_(layout) {}

  const HashLayout& layout() const { return layout_; }

  bool bit(std::size_t i) const {
    return (words_[i / 64] >> (i % 64)) & 1u;
  }
  void set_bit(std::size_t i, bool value) {
    if (value) {
      words_[i / 64] |= (std::uint64_t{1} << (i % 64));
    } else {
      words_[i / 64] &= ~(std::uint64_t{1} << (i % 64));
    }
  }

  void set_field(std::size_t offset, std::size_t width, std::uint32_t count);
  std::uint32_t field(std::size_t offset, std::size_t width) const;

  // Number of set bits in [offset, offset + length).
  std::size_t popcount_range(std::size_t offset, std::size_t length) const;
  // Bits differing from `other` in [offset, offset + length).
  std::size_t hamming_range(const SceneHash& other, std::size_t offset,
                            std::size_t length) const;

  // "<version-tag>:<46 lowercase hex digits>", most significant bit first.
  std::string serialize() const;
  static SceneHash deserialize(std::string_view text);

  friend bool operator==(const SceneHash&, const SceneHash&) = default;

 private:
  HashLayout layout_;
  std::array<std::uint64_t, 3> words_{};
};

// Packs a descriptor into its hash; every count saturates at its field
// capacity.
SceneHash encode_hash(const SceneDescriptor& d, HashLayout layout = {});

// Inverse of encode_hash up to capacity clamping; bin totals are recomputed
// from the decoded sector counts.
SceneDescriptor decode_hash(const SceneHash& h);

// Hamming distance restricted to one distance bin's sub-vector. Layouts must
// match.
std::size_t hamming_bin(const SceneHash& a, const SceneHash& b, int bin_index);

// Hamming distance over the concatenation of all four bin sub-vectors (the
// sign and walker fields are outside every bin slice and never counted).
std::size_t hamming_all_bins(const SceneHash& a, const SceneHash& b);

}  // namespace radarfm
