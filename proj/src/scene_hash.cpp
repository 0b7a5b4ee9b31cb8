#include "radarfm/scene_hash.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace radarfm {

namespace {

constexpr std::size_t kTotalBits = HashLayout::total_bits();
constexpr std::size_t kHexDigits = (kTotalBits + 3) / 4;  // 46

static_assert(kTotalBits == 183, "hash layout must total 183 bits");

}  // namespace

std::size_t HashLayout::sector_offset(int bin_index, SectorLabel s) {
  std::size_t offset = bin_offset(bin_index);
  for (int i = 0; i < static_cast<int>(s); ++i) {
    offset += sector_width(static_cast<SectorLabel>(i));
  }
  return offset;
}

HashLayout HashLayout::from_version_tag(std::string_view tag) {
  if (tag == kHashVersionBinary) return HashLayout{CountCoding::binary};
  if (tag == kHashVersionThermometer) return HashLayout{CountCoding::thermometer};
  throw std::invalid_argument("unknown hash layout version: " + std::string(tag));
}

std::vector<FieldSpec> HashLayout::field_table() const {
  std::vector<FieldSpec> table;
  for (int k = 0; k < kSignKindCount; ++k) {
    const auto kind = static_cast<SignKind>(k);
    table.push_back({"sign." + std::string(to_string(kind)), sign_offset(kind), 1, 1});
  }
  table.push_back({"walkers", walker_offset(), kWalkerBits, field_capacity(kWalkerBits)});
  for (int b = 1; b <= kBinCount; ++b) {
    for (int s = 0; s < kSectorCount; ++s) {
      const auto sector = static_cast<SectorLabel>(s);
      table.push_back({bin_name(b) + "." + std::string(to_string(sector)),
                       sector_offset(b, sector), sector_width(sector),
                       sector_capacity(sector)});
    }
  }
  return table;
}

void SceneHash::set_field(std::size_t offset, std::size_t width, std::uint32_t count) {
  const std::uint32_t clamped = std::min(count, layout_.field_capacity(width));
  if (layout_.coding == CountCoding::binary) {
    // MSB first: bit `offset` holds the field's highest-order bit.
    for (std::size_t k = 0; k < width; ++k) {
      set_bit(offset + k, (clamped >> (width - 1 - k)) & 1u);
    }
  } else {
    for (std::size_t k = 0; k < width; ++k) {
      set_bit(offset + k, k < clamped);
    }
  }
}

std::uint32_t SceneHash::field(std::size_t offset, std::size_t width) const {
  if (layout_.coding == CountCoding::binary) {
    std::uint32_t value = 0;
    for (std::size_t k = 0; k < width; ++k) {
      value = (value << 1) | static_cast<std::uint32_t>(bit(offset + k));
    }
    return value;
  }
  return static_cast<std::uint32_t>(popcount_range(offset, width));
}

std::size_t SceneHash::popcount_range(std::size_t offset, std::size_t length) const {
  std::size_t count = 0;
  std::size_t i = offset;
  const std::size_t end = offset + length;
  while (i < end) {
    const std::size_t word = i / 64;
    const std::size_t lo = i % 64;
    const std::size_t take = std::min<std::size_t>(64 - lo, end - i);
    std::uint64_t chunk = words_[word] >> lo;
    if (take < 64) chunk &= (std::uint64_t{1} << take) - 1;
    count += static_cast<std::size_t>(std::popcount(chunk));
    i += take;
  }
  return count;
}

std::size_t SceneHash::hamming_range(const SceneHash& other, std::size_t offset,
                                     std::size_t length) const {
  std::size_t count = 0;
  std::size_t i = offset;
  const std::size_t end = offset + length;
  while (i < end) {
    const std::size_t word = i / 64;
    const std::size_t lo = i % 64;
    const std::size_t take = std::min<std::size_t>(64 - lo, end - i);
    std::uint64_t chunk = (words_[word] ^ other.words_[word]) >> lo;
    if (take < 64) chunk &= (std::uint64_t{1} << take) - 1;
    count += static_cast<std::size_t>(std::popcount(chunk));
    i += take;
  }
  return count;
}

std::string SceneHash::serialize() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(layout_.version_tag());
  out += ':';
  for (std::size_t digit = 0; digit < kHexDigits; ++digit) {
    std::uint32_t nibble = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t i = digit * 4 + k;
      const bool value = i < kTotalBits ? bit(i) : false;
      nibble = (nibble << 1) | static_cast<std::uint32_t>(value);
    }
    out += kHex[nibble];
  }
  return out;
}

SceneHash SceneHash::deserialize(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("hash string must be '<version>:<hex>'");
  }
  SceneHash h(HashLayout::from_version_tag(text.substr(0, colon)));
  const std::string_view hex = text.substr(colon + 1);
  if (hex.size() != kHexDigits) {
    throw std::invalid_argument("hash hex must be " + std::to_string(kHexDigits) +
                                " digits, got " + std::to_string(hex.size()));
  }
  for (std::size_t digit = 0; digit < kHexDigits; ++digit) {
    const char c = hex[digit];
    std::uint32_t nibble;
    if (c >= '0' && c <= '9') {
      nibble = static_cast<std::uint32_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      nibble = static_cast<std::uint32_t>(c - 'a' + 10);
    } else {
      throw std::invalid_argument("hash hex contains invalid digit");
    }
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t i = digit * 4 + k;
      const bool value = (nibble >> (3 - k)) & 1u;
      if (i >= kTotalBits) {
        if (value) throw std::invalid_argument("hash hex has nonzero padding bits");
        continue;
      }
      h.set_bit(i, value);
    }
  }
  return h;
}

SceneHash encode_hash(const SceneDescriptor& d, HashLayout layout) {
  SceneHash h(layout);
  for (int k = 0; k < kSignKindCount; ++k) {
    const auto kind = static_cast<SignKind>(k);
    h.set_bit(HashLayout::sign_offset(kind), d.signs.contains(kind));
  }
  h.set_field(HashLayout::walker_offset(), HashLayout::kWalkerBits, d.walkers);
  for (int b = 1; b <= kBinCount; ++b) {
    for (int s = 0; s < kSectorCount; ++s) {
      const auto sector = static_cast<SectorLabel>(s);
      h.set_field(HashLayout::sector_offset(b, sector),
                  HashLayout::sector_width(sector), d.cells[b - 1][s]);
    }
  }
  return h;
}

SceneDescriptor decode_hash(const SceneHash& h) {
  SceneDescriptor d;
  for (int k = 0; k < kSignKindCount; ++k) {
    const auto kind = static_cast<SignKind>(k);
    if (h.bit(HashLayout::sign_offset(kind))) d.signs.insert(kind);
  }
  d.walkers = h.field(HashLayout::walker_offset(), HashLayout::kWalkerBits);
  for (int b = 1; b <= kBinCount; ++b) {
    for (int s = 0; s < kSectorCount; ++s) {
      const auto sector = static_cast<SectorLabel>(s);
      d.cells[b - 1][s] = h.field(HashLayout::sector_offset(b, sector),
                                  HashLayout::sector_width(sector));
    }
  }
  d.refresh_totals();
  return d;
}

std::size_t hamming_bin(const SceneHash& a, const SceneHash& b, int bin_index) {
  if (a.layout() != b.layout()) {
    throw std::invalid_argument("hash layouts do not match");
  }
  if (bin_index < 1 || bin_index > kBinCount) {
    throw std::invalid_argument("bin index must be in [1, 4]");
  }
  return a.hamming_range(b, HashLayout::bin_offset(bin_index), HashLayout::bin_width());
}

std::size_t hamming_all_bins(const SceneHash& a, const SceneHash& b) {
  if (a.layout() != b.layout()) {
    throw std::invalid_argument("hash layouts do not match");
  }
  return a.hamming_range(b, HashLayout::bin_offset(1),
                         kBinCount * HashLayout::bin_width());
}

}  // namespace radarfm
