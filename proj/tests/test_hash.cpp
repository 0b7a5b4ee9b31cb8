#include <doctest.h>

#include <random>

#include "radarfm/scene_hash.hpp"
#include "test_support.hpp"

using namespace radarfm;

TEST_CASE("layout totals and offsets") {
  CHECK(HashLayout::total_bits() == 183);
  CHECK(HashLayout::bin_width() == 44);
  CHECK(HashLayout::sign_offset(SignKind::traffic_light) == 0);
  CHECK(HashLayout::sign_offset(SignKind::speed_limit) == 3);
  CHECK(HashLayout::walker_offset() == 4);
  CHECK(HashLayout::bin_offset(1) == 7);
  CHECK(HashLayout::bin_offset(4) == 7 + 3 * 44);

  // Field table covers every bit exactly once, in order.
  const auto table = HashLayout{}.field_table();
  std::size_t expected_offset = 0;
  for (const FieldSpec& f : table) {
    CHECK(f.offset == expected_offset);
    expected_offset += f.width;
  }
  CHECK(expected_offset == HashLayout::total_bits());
}

TEST_CASE("all-zero descriptor encodes to the all-zero hash") {
  const SceneHash h = encode_hash(SceneDescriptor{});
  CHECK(h.popcount_range(0, HashLayout::total_bits()) == 0);
  CHECK(h.serialize() == "rfm-hash-v1:0000000000000000000000000000000000000000000000");
  CHECK(decode_hash(h) == SceneDescriptor{});
}

TEST_CASE("count fields saturate at their capacity") {
  SceneDescriptor d;
  d.cell(1, SectorLabel::left_side) = 9;  // 3-bit field
  d.refresh_totals();
  const SceneDescriptor back = decode_hash(encode_hash(d));
  CHECK(back.cell(1, SectorLabel::left_side) == 7);

  SceneDescriptor wide;
  wide.cell(2, SectorLabel::opposing_lane_front) = 64;  // 5-bit field
  wide.refresh_totals();
  CHECK(decode_hash(encode_hash(wide)).cell(2, SectorLabel::opposing_lane_front) == 31);
}

TEST_CASE("the worked example packs bin-1 fields as 001 and 010") {
  SceneDescriptor d;
  d.cell(1, SectorLabel::in_lane_front_side) = 1;
  d.cell(1, SectorLabel::right_lane_back_side) = 2;
  d.refresh_totals();
  const SceneHash h = encode_hash(d);

  // in_lane_front_side is the 4th sector: offset 7 + 3*3 = 16, bits 001.
  CHECK(HashLayout::sector_offset(1, SectorLabel::in_lane_front_side) == 16);
  CHECK_FALSE(h.bit(16));
  CHECK_FALSE(h.bit(17));
  CHECK(h.bit(18));
  // right_lane_back_side is the 8th sector: offset 7 + 7*3 = 28, bits 010.
  CHECK(HashLayout::sector_offset(1, SectorLabel::right_lane_back_side) == 28);
  CHECK_FALSE(h.bit(28));
  CHECK(h.bit(29));
  CHECK_FALSE(h.bit(30));
  // Nothing else in bin 1: just the 001 and 010 patterns.
  CHECK(h.popcount_range(HashLayout::bin_offset(1), HashLayout::bin_width()) == 2);
}

TEST_CASE("hamming distances of single occupied fields") {
  auto with_count = [](std::uint32_t c) {
    SceneDescriptor d;
    d.cell(1, SectorLabel::left_side) = c;
    d.refresh_totals();
    return encode_hash(d);
  };
  // 101 vs 011 -> XOR 110.
  CHECK(hamming_bin(with_count(5), with_count(3), 1) == 2);
  // 011 vs 100 -> XOR 111: binary coding is non-monotonic in count space.
  CHECK(hamming_bin(with_count(3), with_count(4), 1) == 3);
  CHECK(hamming_bin(with_count(3), with_count(3), 1) == 0);
  for (int b = 1; b <= kBinCount; ++b) {
    CHECK(hamming_bin(with_count(5), with_count(5), b) == 0);
  }
}

TEST_CASE("sign and walker bits never land in a bin slice") {
  SceneDescriptor d;
  d.signs.insert(SignKind::traffic_light);
  d.signs.insert(SignKind::speed_limit);
  d.walkers = 7;
  const SceneHash h = encode_hash(d);
  const SceneHash zero = encode_hash(SceneDescriptor{});
  for (int b = 1; b <= kBinCount; ++b) {
    CHECK(hamming_bin(h, zero, b) == 0);
  }
  CHECK(h.popcount_range(0, 7) == 5);  // 2 sign flags + walker bits 111
}

TEST_CASE("hamming is a metric on bin sub-vectors") {
  std::mt19937_64 rng(11);
  std::vector<SceneHash> hashes;
  for (int i = 0; i < 24; ++i) hashes.push_back(encode_hash(rfmtest::random_descriptor(rng)));
  for (std::size_t i = 0; i < hashes.size(); ++i) {
    for (std::size_t j = 0; j < hashes.size(); ++j) {
      std::size_t sum = 0;
      for (int b = 1; b <= kBinCount; ++b) {
        const std::size_t dij = hamming_bin(hashes[i], hashes[j], b);
        CHECK(dij == hamming_bin(hashes[j], hashes[i], b));
        for (std::size_t k = 0; k < hashes.size(); ++k) {
          CHECK(dij <= hamming_bin(hashes[i], hashes[k], b) +
                           hamming_bin(hashes[k], hashes[j], b));
        }
        sum += dij;
      }
      // Slices tile the bin region exactly.
      CHECK(sum == hamming_all_bins(hashes[i], hashes[j]));
    }
  }
}

TEST_CASE("decode(encode(d)) equals the field-wise clamp of d") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::uint32_t> wild(0, 40);
  const HashLayout layout{};
  for (int trial = 0; trial < 300; ++trial) {
    SceneDescriptor d = rfmtest::random_descriptor(rng);
    // Push some counts past capacity.
    for (int b = 0; b < kBinCount; ++b) {
      for (int s = 0; s < kSectorCount; ++s) {
        if (rng() % 4 == 0) d.cells[b][s] = wild(rng);
      }
    }
    d.walkers = wild(rng);
    d.refresh_totals();

    SceneDescriptor clamped = d;
    for (int b = 0; b < kBinCount; ++b) {
      for (int s = 0; s < kSectorCount; ++s) {
        clamped.cells[b][s] = std::min(
            clamped.cells[b][s], layout.sector_capacity(static_cast<SectorLabel>(s)));
      }
    }
    clamped.walkers = std::min(clamped.walkers, layout.walker_capacity());
    clamped.refresh_totals();

    CHECK(decode_hash(encode_hash(d)) == clamped);
  }
}

TEST_CASE("encode is deterministic and serialization round-trips") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const SceneDescriptor d = rfmtest::random_descriptor(rng);
    const SceneHash a = encode_hash(d);
    const SceneHash b = encode_hash(d);
    CHECK(a == b);
    const std::string text = a.serialize();
    CHECK(text.starts_with("rfm-hash-v1:"));
    CHECK(SceneHash::deserialize(text) == a);
  }
}

TEST_CASE("deserialize rejects malformed input") {
  CHECK_THROWS_AS(SceneHash::deserialize("rfm-hash-v1:abc"), std::invalid_argument);
  CHECK_THROWS_AS(SceneHash::deserialize("nonsense"), std::invalid_argument);
  CHECK_THROWS_AS(
      SceneHash::deserialize("rfm-hash-v2:0000000000000000000000000000000000000000000000"),
      std::invalid_argument);
  // Padding bits beyond bit 182 must stay zero.
  CHECK_THROWS_AS(
      SceneHash::deserialize("rfm-hash-v1:0000000000000000000000000000000000000000000001"),
      std::invalid_argument);
}

TEST_CASE("layout mismatch is rejected") {
  const SceneHash binary = encode_hash(SceneDescriptor{}, HashLayout{CountCoding::binary});
  const SceneHash therm =
      encode_hash(SceneDescriptor{}, HashLayout{CountCoding::thermometer});
  CHECK_THROWS_AS(hamming_bin(binary, therm, 1), std::invalid_argument);
}

TEST_CASE("thermometer coding caps at the field width and is monotone") {
  const HashLayout layout{CountCoding::thermometer};
  auto with_count = [&](std::uint32_t c) {
    SceneDescriptor d;
    d.cell(1, SectorLabel::left_side) = c;
    d.refresh_totals();
    return encode_hash(d, layout);
  };
  CHECK(decode_hash(with_count(2)).cell(1, SectorLabel::left_side) == 2);
  CHECK(decode_hash(with_count(9)).cell(1, SectorLabel::left_side) == 3);
  // In-field Hamming distance equals |a - b| under the capacity.
  CHECK(hamming_bin(with_count(0), with_count(3), 1) == 3);
  CHECK(hamming_bin(with_count(1), with_count(3), 1) == 2);
  CHECK(hamming_bin(with_count(2), with_count(3), 1) == 1);
  const std::string text = with_count(2).serialize();
  CHECK(text.starts_with("rfm-hash-v1t:"));
  CHECK(SceneHash::deserialize(text) == with_count(2));
}
