#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "radarfm/scene.hpp"

namespace radarfm {

// Largest count the word table can express ("thirty-one", the 5-bit field
// maximum).
inline constexpr std::uint32_t kMaxNumberWord = 31;

// English word form of n, hyphenated for 21..31; throws beyond
// kMaxNumberWord.
std::string number_word(std::uint32_t n);

// Phrase tables and sentence frames for deterministic caption generation and
// grammar-based parsing. All phrases are lowercase, digit-free and
// apostrophe-free; per category the tables are injective so the parser can
// invert them.
struct CaptionTemplateSet {
  // Parseable synonyms per sector; generation samples among them.
  std::array<std::vector<std::string>, kSectorCount> sector_phrases;
  // Rendered distance phrases per bin; each must parse back to its own bin.
  std::array<std::vector<std::string>, kBinCount> bin_prefixes;
  // Qualitative scope markers ("very close" -> bin 1, ...); numeric
  // "<w> to <w> meters" ranges are recognized independently of this table.
  std::vector<std::pair<std::string, int>> qualitative_markers;
  // Generation noun phrase per sign kind ("a stop sign").
  std::array<std::string, kSignKindCount> sign_phrases;
  // Parse markers per sign kind ("stop sign", "stop signs").
  std::array<std::vector<std::string>, kSignKindCount> sign_markers;

  std::vector<std::string> frames_multi;       // {dist} {total} {veh} {is_are} {items}
  std::vector<std::string> frames_single_all;  // ... all of which are {sector}
  std::vector<std::string> frames_empty;       // {dist}
  std::vector<std::string> frames_signs_none;
  std::vector<std::string> frames_signs_some;  // {signs}
  std::vector<std::string> frames_walkers_none;
  std::vector<std::string> frames_walkers_some;  // {count} {walker_word} {is_are}
  std::vector<std::string> openers;      // prefix of the first sentence
  std::vector<std::string> transitions;  // prefix of later bin sentences

  // Throws std::invalid_argument when a table is empty, a phrase carries a
  // digit or apostrophe, a bin prefix fails to parse to its own bin, or two
  // sectors own overlapping phrases.
  void validate() const;

  static const CaptionTemplateSet& builtin();
};

inline constexpr std::string_view kTemplateVersion = "rfm-templates-v1";

std::string templates_to_json(const CaptionTemplateSet& t, int indent = 2);
CaptionTemplateSet templates_from_json(std::string_view json_text);
CaptionTemplateSet load_templates(const std::filesystem::path& path);
void save_templates(const CaptionTemplateSet& t, const std::filesystem::path& path);

struct Caption {
  std::string text;
  std::uint64_t seed = 0;
  std::uint32_t variant_id = 0;
};

// Renders one flowing description of the scene: every bin in order (empty
// bins stated explicitly), then traffic signs and walkers. Counts appear in
// word form, sector order within a bin is shuffled by the seed, and the
// output is deterministic given (descriptor, seed, templates). Throws
// std::invalid_argument when any count exceeds the word table.
Caption generate_caption(const SceneDescriptor& d, std::uint64_t seed,
                         const CaptionTemplateSet& templates = CaptionTemplateSet::builtin());

struct ParseDiagnostic {
  std::string message;
  std::string clause;
};

struct ParseResult {
  SceneDescriptor descriptor;
  std::vector<ParseDiagnostic> diagnostics;

  bool clean() const { return diagnostics.empty(); }
};

// Recovers a descriptor from free text. Never throws on content: clauses
// that cannot be interpreted are reported in the diagnostics, vehicle counts
// without a resolvable sector are folded into the bin total only, and counts
// with no distance context leave the descriptor untouched.
ParseResult parse_caption(std::string_view text,
                          const CaptionTemplateSet& templates = CaptionTemplateSet::builtin());

}  // namespace radarfm
