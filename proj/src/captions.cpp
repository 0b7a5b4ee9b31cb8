#include "radarfm/captions.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace radarfm {

namespace {

constexpr std::array<std::string_view, 20> kSmallNumbers = {
    "zero",    "one",     "two",    "three",    "four",    "five",    "six",
    "seven",   "eight",   "nine",   "ten",      "eleven",  "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};

std::optional<std::uint32_t> single_number_word(std::string_view token) {
  for (std::size_t i = 0; i < kSmallNumbers.size(); ++i) {
    if (token == kSmallNumbers[i]) return static_cast<std::uint32_t>(i);
  }
  if (token == "twenty") return 20;
  if (token == "thirty") return 30;
  return std::nullopt;
}

std::optional<std::uint32_t> distance_word(std::string_view token) {
  if (token == "zero") return 0;
  if (token == "ten") return 10;
  if (token == "twenty") return 20;
  if (token == "thirty") return 30;
  if (token == "forty") return 40;
  return std::nullopt;
}

using Tokens = std::vector<std::string>;

Tokens tokenize_phrase(std::string_view text) {
  Tokens tokens;
  std::string current;
  for (char c : text) {
    const unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc) || std::isdigit(uc)) {
      current += static_cast<char>(std::tolower(uc));
    } else if (c != '\'') {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// Position of `needle` as a contiguous run inside `haystack`, or npos.
std::size_t find_subsequence(const Tokens& haystack, const Tokens& needle,
                             std::size_t from = 0) {
  if (needle.empty() || haystack.size() < needle.size()) return std::string::npos;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size(); ++k) {
      if (haystack[i + k] != needle[k]) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string::npos;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (const std::string& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

void check_phrase_charset(std::string_view phrase, const char* where) {
  for (char c : phrase) {
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
      throw std::invalid_argument(std::string(where) +
                                  " phrase contains a digit or apostrophe: " +
                                  std::string(phrase));
    }
  }
}

template <typename Rng>
std::size_t pick_index(Rng& rng, std::size_t size) {
  return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng);
}

void replace_all(std::string& text, std::string_view slot, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(slot, pos)) != std::string::npos) {
    text.replace(pos, slot.size(), value);
    pos += value.size();
  }
}

std::string capitalized(std::string text) {
  for (char& c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      break;
    }
  }
  return text;
}

CaptionTemplateSet make_builtin() {
  CaptionTemplateSet t;
  auto sector = [&](SectorLabel s) -> std::vector<std::string>& {
    return t.sector_phrases[static_cast<int>(s)];
  };
  sector(SectorLabel::left_lane_front_side) = {"in the left adjacent lane ahead of us",
                                               "in the left lane ahead of us"};
  sector(SectorLabel::left_side) = {"directly to our left side",
                                    "directly beside us on the left"};
  sector(SectorLabel::left_lane_back_side) = {"in the left adjacent lane behind us",
                                              "in the left lane behind us"};
  sector(SectorLabel::in_lane_front_side) = {"directly ahead of us in the same lane",
                                             "directly ahead of us in our lane"};
  sector(SectorLabel::in_lane_back_side) = {"directly behind us in the same lane",
                                            "directly behind us in our lane"};
  sector(SectorLabel::right_lane_front_side) = {"in the right adjacent lane ahead of us",
                                                "in the right lane ahead of us"};
  sector(SectorLabel::right_side) = {"directly to our right side",
                                     "directly beside us on the right"};
  sector(SectorLabel::right_lane_back_side) = {"in the right adjacent lane behind us",
                                               "in the right lane behind us"};
  sector(SectorLabel::opposing_lane_front) = {"in the opposing lane ahead of us",
                                              "in oncoming traffic ahead of us"};
  sector(SectorLabel::opposing_lane_back) = {"in the opposing lane behind us",
                                             "in oncoming traffic behind us"};
  sector(SectorLabel::other_lane_front) = {
      "in a perpendicular or intersecting lane ahead of us",
      "in a crossing lane ahead of us"};
  sector(SectorLabel::other_lane_back) = {
      "in a perpendicular or intersecting lane behind us",
      "in a crossing lane behind us"};

  t.bin_prefixes[0] = {"within the very close range of zero to ten meters from our vehicle",
                       "within zero to ten meters of us", "in the very close range around us"};
  t.bin_prefixes[1] = {"from ten to twenty meters", "in the close range of ten to twenty meters",
                       "at close range"};
  t.bin_prefixes[2] = {"at a moderate distance of twenty to thirty meters",
                       "from twenty to thirty meters", "at a moderate distance"};
  t.bin_prefixes[3] = {"further away, from thirty to forty meters",
                       "from thirty to forty meters", "further away from us"};

  t.qualitative_markers = {{"very close", 1},       {"close", 2},
                           {"moderate distance", 3}, {"further away", 4},
                           {"safe distance", 4}};

  t.sign_phrases = {"a traffic light", "a stop sign", "a yield sign",
                    "a speed limit sign"};
  t.sign_markers[0] = {"traffic light", "traffic lights"};
  t.sign_markers[1] = {"stop sign", "stop signs"};
  t.sign_markers[2] = {"yield sign", "yield signs"};
  t.sign_markers[3] = {"speed limit"};

  t.frames_multi = {
      "I notice that {dist}, there {is_are} {total} {veh} in total, with {items}.",
      "Glancing {dist}, I see a total of {total} {veh}, with {items}.",
      "I can see {total} {veh} in total {dist}, with {items}.",
  };
  t.frames_single_all = {
      "I notice that {dist}, there are {total} {veh} in total, all of which are {sector}.",
      "I observe {total} {veh} in total {dist}, all of which are {sector}.",
  };
  t.frames_empty = {
      "I notice that {dist}, there are no vehicles.",
      "I see no vehicles {dist}.",
      "There are no vehicles {dist}.",
  };
  t.frames_signs_none = {
      "I also notice that there are no applicable traffic signs around us",
      "There are no applicable traffic signs for us",
  };
  t.frames_signs_some = {
      "I also notice {signs} that {applies} to us",
      "I can see {signs} that {applies} to us",
  };
  t.frames_walkers_none = {
      "fortunately, there are no walkers on the road",
      "there are no walkers around",
  };
  t.frames_walkers_some = {
      "there {is_are} {count} {walker_word} on the road",
      "I can spot {count} {walker_word} nearby",
  };
  t.openers = {"As we are driving, ", "", "Driving along, "};
  t.transitions = {"", "Meanwhile, ", "At the same time, "};
  t.validate();
  return t;
}

}  // namespace

std::string number_word(std::uint32_t n) {
  if (n > kMaxNumberWord) {
    throw std::invalid_argument("count " + std::to_string(n) +
                                " exceeds the word table (max " +
                                std::to_string(kMaxNumberWord) + ")");
  }
  if (n < 20) return std::string(kSmallNumbers[n]);
  const std::uint32_t tens = n / 10;
  const std::uint32_t unit = n % 10;
  std::string out = tens == 2 ? "twenty" : "thirty";
  if (unit != 0) {
    out += '-';
    out += kSmallNumbers[unit];
  }
  return out;
}

const CaptionTemplateSet& CaptionTemplateSet::builtin() {
  static const CaptionTemplateSet instance = make_builtin();
  return instance;
}

void CaptionTemplateSet::validate() const {
  for (int s = 0; s < kSectorCount; ++s) {
    if (sector_phrases[s].empty()) {
      throw std::invalid_argument("no phrases for sector " +
                                  std::string(to_string(static_cast<SectorLabel>(s))));
    }
    for (const auto& p : sector_phrases[s]) check_phrase_charset(p, "sector");
  }
  for (int b = 0; b < kBinCount; ++b) {
    if (bin_prefixes[b].empty()) {
      throw std::invalid_argument("no distance phrases for bin " + bin_name(b + 1));
    }
    for (const auto& p : bin_prefixes[b]) check_phrase_charset(p, "bin");
  }
  for (const auto& [phrase, bin] : qualitative_markers) {
    check_phrase_charset(phrase, "qualitative marker");
    if (bin < 1 || bin > kBinCount) {
      throw std::invalid_argument("qualitative marker maps outside bins: " + phrase);
    }
  }
  for (const auto& frames :
       {frames_multi, frames_single_all, frames_empty, frames_signs_none,
        frames_signs_some, frames_walkers_none, frames_walkers_some}) {
    if (frames.empty()) throw std::invalid_argument("a frame list is empty");
    for (const auto& f : frames) check_phrase_charset(f, "frame");
  }
  if (openers.empty() || transitions.empty()) {
    throw std::invalid_argument("openers/transitions must not be empty");
  }

  // Cross-sector injectivity: no phrase of one sector may appear inside a
  // phrase of another, otherwise parsing is ambiguous.
  for (int a = 0; a < kSectorCount; ++a) {
    for (int b = 0; b < kSectorCount; ++b) {
      if (a == b) continue;
      for (const auto& pa : sector_phrases[a]) {
        const Tokens ta = tokenize_phrase(pa);
        for (const auto& pb : sector_phrases[b]) {
          const Tokens tb = tokenize_phrase(pb);
          if (find_subsequence(tb, ta) != std::string::npos) {
            throw std::invalid_argument("sector phrase '" + pa +
                                        "' is contained in '" + pb + "'");
          }
        }
      }
    }
  }

  // Every distance phrase must resolve to its own bin through the markers.
  const std::string& probe_phrase =
      sector_phrases[static_cast<int>(SectorLabel::in_lane_front_side)].front();
  for (int b = 0; b < kBinCount; ++b) {
    for (const auto& prefix : bin_prefixes[b]) {
      const ParseResult r = parse_caption(
          "I notice that " + prefix + ", there is one vehicle " + probe_phrase + ".",
          *this);
      if (r.descriptor.cell(b + 1, SectorLabel::in_lane_front_side) != 1) {
        throw std::invalid_argument("distance phrase does not parse to " +
                                    bin_name(b + 1) + ": " + prefix);
      }
    }
  }
}

namespace {

nlohmann::ordered_json string_list(const std::vector<std::string>& v) {
  return nlohmann::ordered_json(v);
}

std::vector<std::string> read_string_list(const nlohmann::ordered_json& j,
                                          const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw std::invalid_argument("template file is missing list: " + key);
  }
  return j.at(key).get<std::vector<std::string>>();
}

}  // namespace

std::string templates_to_json(const CaptionTemplateSet& t, int indent) {
  nlohmann::ordered_json j;
  j["version"] = kTemplateVersion;
  nlohmann::ordered_json sectors;
  for (int s = 0; s < kSectorCount; ++s) {
    sectors[std::string(to_string(static_cast<SectorLabel>(s)))] =
        string_list(t.sector_phrases[s]);
  }
  j["sector_phrases"] = std::move(sectors);
  nlohmann::ordered_json bins;
  for (int b = 1; b <= kBinCount; ++b) {
    bins[bin_name(b)] = string_list(t.bin_prefixes[b - 1]);
  }
  j["bin_prefixes"] = std::move(bins);
  nlohmann::ordered_json quals;
  for (const auto& [phrase, bin] : t.qualitative_markers) quals[phrase] = bin;
  j["qualitative_markers"] = std::move(quals);
  nlohmann::ordered_json signs;
  nlohmann::ordered_json sign_marks;
  for (int k = 0; k < kSignKindCount; ++k) {
    const std::string name(to_string(static_cast<SignKind>(k)));
    signs[name] = t.sign_phrases[k];
    sign_marks[name] = string_list(t.sign_markers[k]);
  }
  j["sign_phrases"] = std::move(signs);
  j["sign_markers"] = std::move(sign_marks);
  nlohmann::ordered_json frames;
  frames["multi"] = string_list(t.frames_multi);
  frames["single_all"] = string_list(t.frames_single_all);
  frames["empty"] = string_list(t.frames_empty);
  frames["signs_none"] = string_list(t.frames_signs_none);
  frames["signs_some"] = string_list(t.frames_signs_some);
  frames["walkers_none"] = string_list(t.frames_walkers_none);
  frames["walkers_some"] = string_list(t.frames_walkers_some);
  j["frames"] = std::move(frames);
  j["openers"] = string_list(t.openers);
  j["transitions"] = string_list(t.transitions);
  return j.dump(indent);
}

CaptionTemplateSet templates_from_json(std::string_view json_text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("invalid template JSON: ") + e.what());
  }
  if (!j.contains("version") || j.at("version").get<std::string>() != kTemplateVersion) {
    throw std::invalid_argument("unsupported template version");
  }
  CaptionTemplateSet t;
  for (int s = 0; s < kSectorCount; ++s) {
    t.sector_phrases[s] = read_string_list(
        j.at("sector_phrases"), std::string(to_string(static_cast<SectorLabel>(s))));
  }
  for (int b = 1; b <= kBinCount; ++b) {
    t.bin_prefixes[b - 1] = read_string_list(j.at("bin_prefixes"), bin_name(b));
  }
  for (const auto& [phrase, bin] : j.at("qualitative_markers").items()) {
    t.qualitative_markers.emplace_back(phrase, bin.get<int>());
  }
  for (int k = 0; k < kSignKindCount; ++k) {
    const std::string name(to_string(static_cast<SignKind>(k)));
    t.sign_phrases[k] = j.at("sign_phrases").at(name).get<std::string>();
    t.sign_markers[k] = read_string_list(j.at("sign_markers"), name);
  }
  const auto& frames = j.at("frames");
  t.frames_multi = read_string_list(frames, "multi");
  t.frames_single_all = read_string_list(frames, "single_all");
  t.frames_empty = read_string_list(frames, "empty");
  t.frames_signs_none = read_string_list(frames, "signs_none");
  t.frames_signs_some = read_string_list(frames, "signs_some");
  t.frames_walkers_none = read_string_list(frames, "walkers_none");
  t.frames_walkers_some = read_string_list(frames, "walkers_some");
  t.openers = read_string_list(j, "openers");
  t.transitions = read_string_list(j, "transitions");
  t.validate();
  return t;
}

CaptionTemplateSet load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open template file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return templates_from_json(buffer.str());
}

void save_templates(const CaptionTemplateSet& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << templates_to_json(t) << '\n';
}

Caption generate_caption(const SceneDescriptor& d, std::uint64_t seed,
                         const CaptionTemplateSet& templates) {
  for (int b = 1; b <= kBinCount; ++b) {
    if (d.bin_totals[b - 1] > kMaxNumberWord) {
      throw std::invalid_argument("bin total " + std::to_string(d.bin_totals[b - 1]) +
                                  " exceeds the word table");
    }
    for (int s = 0; s < kSectorCount; ++s) {
      if (d.cells[b - 1][s] > kMaxNumberWord) {
        throw std::invalid_argument("sector count exceeds the word table");
      }
    }
  }
  if (d.walkers > kMaxNumberWord) {
    throw std::invalid_argument("walker count exceeds the word table");
  }

  std::mt19937_64 rng(seed);
  std::uint32_t variant = 1;
  auto pick = [&](const std::vector<std::string>& options) -> const std::string& {
    const std::size_t i = pick_index(rng, options.size());
    variant = variant * 31u + static_cast<std::uint32_t>(i);
    return options[i];
  };

  std::vector<std::string> sentences;
  for (int b = 1; b <= kBinCount; ++b) {
    const std::string& dist = pick(templates.bin_prefixes[b - 1]);
    const std::uint32_t total = d.bin_totals[b - 1];

    std::vector<int> nonzero;
    for (int s = 0; s < kSectorCount; ++s) {
      if (d.cells[b - 1][s] > 0) nonzero.push_back(s);
    }

    std::string sentence;
    if (total == 0 && nonzero.empty()) {
      sentence = pick(templates.frames_empty);
    } else {
      const bool all_eligible = nonzero.size() == 1 && total >= 2 &&
                                d.cells[b - 1][nonzero[0]] == total;
      const bool use_all = all_eligible && pick_index(rng, 2) == 1;
      if (use_all) {
        sentence = pick(templates.frames_single_all);
        replace_all(sentence, "{sector}",
                    pick(templates.sector_phrases[nonzero[0]]));
      } else {
        sentence = pick(templates.frames_multi);
        std::shuffle(nonzero.begin(), nonzero.end(), rng);
        std::string items;
        for (std::size_t i = 0; i < nonzero.size(); ++i) {
          const std::uint32_t count = d.cells[b - 1][nonzero[i]];
          if (i > 0) {
            if (i + 1 == nonzero.size()) {
              items += nonzero.size() > 2 ? ", and " : " and ";
            } else {
              items += ", ";
            }
          }
          items += number_word(count);
          items += count == 1 ? " vehicle " : " vehicles ";
          items += pick(templates.sector_phrases[nonzero[i]]);
        }
        // A bin can state a total yet attribute nothing (parser-recovered
        // descriptors); fall back to the empty wording for the item list.
        replace_all(sentence, "{items}",
                    items.empty() ? std::string("none attributed to a specific lane")
                                  : items);
      }
      replace_all(sentence, "{total}", number_word(total));
      replace_all(sentence, "{veh}", total == 1 ? "vehicle" : "vehicles");
      replace_all(sentence, "{is_are}", total == 1 ? "is" : "are");
    }
    replace_all(sentence, "{dist}", dist);
    const std::string& lead =
        b == 1 ? pick(templates.openers) : pick(templates.transitions);
    // After a lead the frame continues mid-sentence; keep "I" capitalized.
    if (!lead.empty() && !sentence.starts_with("I ")) {
      sentence[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sentence[0])));
    }
    sentences.push_back(capitalized(lead + sentence));
  }

  std::string signs_part;
  if (d.signs.empty()) {
    signs_part = pick(templates.frames_signs_none);
  } else {
    std::vector<std::string> names;
    for (int k = 0; k < kSignKindCount; ++k) {
      if (d.signs.contains(static_cast<SignKind>(k))) {
        names.push_back(templates.sign_phrases[k]);
      }
    }
    std::string list;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i > 0) list += i + 1 == names.size() ? " and " : ", ";
      list += names[i];
    }
    signs_part = pick(templates.frames_signs_some);
    replace_all(signs_part, "{signs}", list);
    replace_all(signs_part, "{applies}", names.size() == 1 ? "applies" : "apply");
  }

  std::string walkers_part;
  if (d.walkers == 0) {
    walkers_part = pick(templates.frames_walkers_none);
  } else {
    walkers_part = pick(templates.frames_walkers_some);
    replace_all(walkers_part, "{count}", number_word(d.walkers));
    replace_all(walkers_part, "{walker_word}", d.walkers == 1 ? "walker" : "walkers");
    replace_all(walkers_part, "{is_are}", d.walkers == 1 ? "is" : "are");
  }

  if (pick_index(rng, 2) == 0) {
    sentences.push_back(capitalized(signs_part + ", and " + walkers_part + "."));
  } else {
    sentences.push_back(capitalized(signs_part + "."));
    sentences.push_back(capitalized(walkers_part + "."));
  }

  Caption caption;
  caption.seed = seed;
  caption.variant_id = variant;
  for (const std::string& s : sentences) {
    if (!caption.text.empty()) caption.text += ' ';
    caption.text += s;
  }
  for (char c : caption.text) {
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
      throw std::logic_error("generated caption violates its character set");
    }
  }
  return caption;
}

namespace {

// Compiled token tables for one template set.
struct Matcher {
  std::array<std::vector<Tokens>, kSectorCount> sectors;
  std::vector<std::pair<Tokens, int>> qualitative;
  std::array<std::vector<Tokens>, kSignKindCount> signs;

  explicit Matcher(const CaptionTemplateSet& t) {
    for (int s = 0; s < kSectorCount; ++s) {
      for (const auto& p : t.sector_phrases[s]) sectors[s].push_back(tokenize_phrase(p));
    }
    for (const auto& [phrase, bin] : t.qualitative_markers) {
      qualitative.emplace_back(tokenize_phrase(phrase), bin);
    }
    for (int k = 0; k < kSignKindCount; ++k) {
      for (const auto& p : t.sign_markers[k]) signs[k].push_back(tokenize_phrase(p));
    }
  }
};

std::vector<Tokens> split_clauses(std::string_view text) {
  std::vector<Tokens> clauses;
  Tokens current;
  std::string word;
  auto flush_word = [&] {
    if (word.empty()) return;
    if (word == "and") {
      if (!current.empty()) clauses.push_back(std::move(current));
      current = {};
    } else {
      current.push_back(word);
    }
    word.clear();
  };
  for (char c : text) {
    const unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc) || std::isdigit(uc)) {
      word += static_cast<char>(std::tolower(uc));
    } else if (c == '-' || std::isspace(uc)) {
      flush_word();
    } else if (c == '\'') {
      continue;  // drop apostrophes inside words
    } else {
      flush_word();
      if (!current.empty()) clauses.push_back(std::move(current));
      current = {};
    }
  }
  flush_word();
  if (!current.empty()) clauses.push_back(std::move(current));
  return clauses;
}

// Number starting at tokens[i]; returns value and how many tokens it spans.
std::optional<std::pair<std::uint32_t, std::size_t>> number_at(const Tokens& tokens,
                                                               std::size_t i) {
  const std::string& tok = tokens[i];
  if (!tok.empty() && std::isdigit(static_cast<unsigned char>(tok[0]))) {
    std::uint32_t value = 0;
    for (char c : tok) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      value = value * 10 + static_cast<std::uint32_t>(c - '0');
      if (value > 1000) return std::nullopt;
    }
    return std::make_pair(value, std::size_t{1});
  }
  const auto single = single_number_word(tok);
  if (!single) return std::nullopt;
  if ((*single == 20 || *single == 30) && i + 1 < tokens.size()) {
    const auto unit = single_number_word(tokens[i + 1]);
    if (unit && *unit >= 1 && *unit <= 9) {
      return std::make_pair(*single + *unit, std::size_t{2});
    }
  }
  return std::make_pair(*single, std::size_t{1});
}

bool is_vehicle_noun(const std::string& t) { return t == "vehicle" || t == "vehicles"; }
bool is_walker_noun(const std::string& t) {
  return t == "walker" || t == "walkers" || t == "pedestrian" || t == "pedestrians";
}

struct CountMention {
  std::uint32_t value = 0;
  bool walker = false;
};

}  // namespace

ParseResult parse_caption(std::string_view text, const CaptionTemplateSet& templates) {
  const Matcher matcher(templates);
  ParseResult result;
  auto& d = result.descriptor;

  std::array<std::optional<std::uint32_t>, kBinCount> stated_total;
  std::array<std::uint32_t, kBinCount> unattributed{};
  std::optional<std::uint32_t> walkers;
  int current_bin = 0;

  auto diagnose = [&](std::string message, const Tokens& clause) {
    result.diagnostics.push_back({std::move(message), join_tokens(clause)});
  };

  for (const Tokens& clause : split_clauses(text)) {
    // --- distance scope ---------------------------------------------------
    std::optional<int> numeric_bin;
    for (std::size_t i = 0; i + 3 < clause.size(); ++i) {
      if (clause[i + 1] != "to" || clause[i + 3] != "meters") continue;
      const auto lo = distance_word(clause[i]);
      const auto hi = distance_word(clause[i + 2]);
      if (!lo || !hi) continue;
      if (*hi == *lo + 10 && *lo % 10 == 0 && *lo <= 30) {
        numeric_bin = static_cast<int>(*lo / 10) + 1;
      } else {
        diagnose("unrecognized distance range", clause);
      }
      break;
    }
    // Qualitative markers; a match nested inside a longer one is dropped so
    // "very close" shadows "close".
    std::vector<std::pair<std::size_t, std::size_t>> spans;  // (pos, len)
    std::vector<int> qual_bins;
    for (const auto& [marker, bin] : matcher.qualitative) {
      const std::size_t pos = find_subsequence(clause, marker);
      if (pos == std::string::npos) continue;
      spans.emplace_back(pos, marker.size());
      qual_bins.push_back(bin);
    }
    std::optional<int> qualitative_bin;
    for (std::size_t a = 0; a < spans.size(); ++a) {
      bool shadowed = false;
      for (std::size_t b = 0; b < spans.size(); ++b) {
        if (a == b) continue;
        if (spans[b].first <= spans[a].first &&
            spans[b].first + spans[b].second >= spans[a].first + spans[a].second &&
            spans[b].second > spans[a].second) {
          shadowed = true;
          break;
        }
      }
      if (shadowed) continue;
      if (qualitative_bin && *qualitative_bin != qual_bins[a]) {
        diagnose("conflicting distance markers", clause);
      }
      qualitative_bin = qual_bins[a];
    }
    if (numeric_bin) {
      if (qualitative_bin && *qualitative_bin != *numeric_bin) {
        diagnose("qualitative marker disagrees with the numeric range", clause);
      }
      current_bin = *numeric_bin;
    } else if (qualitative_bin) {
      current_bin = *qualitative_bin;
    }

    // --- traffic signs ----------------------------------------------------
    for (int k = 0; k < kSignKindCount; ++k) {
      for (const Tokens& marker : matcher.signs[k]) {
        const std::size_t pos = find_subsequence(clause, marker);
        if (pos == std::string::npos) continue;
        const bool negated =
            std::find(clause.begin(), clause.begin() + static_cast<long>(pos), "no") !=
            clause.begin() + static_cast<long>(pos);
        if (!negated) d.signs.insert(static_cast<SignKind>(k));
        break;
      }
    }

    // --- sector phrases ---------------------------------------------------
    std::vector<int> matched_sectors;
    for (int s = 0; s < kSectorCount; ++s) {
      for (const Tokens& phrase : matcher.sectors[s]) {
        if (find_subsequence(clause, phrase) != std::string::npos) {
          matched_sectors.push_back(s);
          break;
        }
      }
    }

    // --- counts -----------------------------------------------------------
    std::vector<CountMention> vehicle_counts;
    std::vector<CountMention> walker_counts;
    bool has_vehicle_noun = false;
    for (std::size_t i = 0; i < clause.size(); ++i) {
      if (is_vehicle_noun(clause[i])) has_vehicle_noun = true;
      if (clause[i] == "no" && i + 1 < clause.size()) {
        if (is_vehicle_noun(clause[i + 1])) vehicle_counts.push_back({0, false});
        if (is_walker_noun(clause[i + 1])) walker_counts.push_back({0, true});
        continue;
      }
      const auto number = number_at(clause, i);
      if (!number) continue;
      const std::size_t next = i + number->second;
      if (next < clause.size()) {
        if (is_vehicle_noun(clause[next])) {
          if (number->first > kMaxNumberWord) {
            diagnose("count exceeds the supported range", clause);
          }
          vehicle_counts.push_back({number->first, false});
          i = next;
          continue;
        }
        if (is_walker_noun(clause[next])) {
          walker_counts.push_back({number->first, true});
          i = next;
          continue;
        }
      }
      i += number->second - 1;
    }
    const bool all_of_which =
        find_subsequence(clause, Tokens{"all", "of", "which"}) != std::string::npos;
    const bool has_total_keyword =
        std::find(clause.begin(), clause.end(), "total") != clause.end();

    // --- apply vehicle counts ----------------------------------------------
    if (all_of_which) {
      if (current_bin == 0 || !stated_total[current_bin - 1]) {
        diagnose("'all of which' without a stated bin total", clause);
      } else if (matched_sectors.size() != 1) {
        diagnose("'all of which' without a unique sector phrase", clause);
      } else {
        d.cells[current_bin - 1][matched_sectors[0]] +=
            *stated_total[current_bin - 1];
      }
    } else if (vehicle_counts.size() > 1) {
      diagnose("multiple vehicle counts in one clause", clause);
    } else if (vehicle_counts.size() == 1) {
      const std::uint32_t value = vehicle_counts[0].value;
      if (current_bin == 0) {
        diagnose("vehicle count without any distance context", clause);
      } else if (has_total_keyword) {
        if (stated_total[current_bin - 1] &&
            *stated_total[current_bin - 1] != value) {
          diagnose("conflicting totals for " + bin_name(current_bin), clause);
        }
        stated_total[current_bin - 1] = value;
      } else if (matched_sectors.size() == 1) {
        d.cells[current_bin - 1][matched_sectors[0]] += value;
      } else if (matched_sectors.size() > 1) {
        diagnose("ambiguous sector phrases for one count", clause);
        unattributed[current_bin - 1] += value;
      } else if (value == 0) {
        // "there are no vehicles" states an explicitly empty bin
        stated_total[current_bin - 1] = 0;
      } else {
        diagnose("vehicle count not attributed to a sector", clause);
        unattributed[current_bin - 1] += value;
      }
    } else if (has_vehicle_noun && !numeric_bin && !qualitative_bin &&
               matched_sectors.empty()) {
      diagnose("vehicle mention without a count", clause);
    }

    // --- apply walker counts ------------------------------------------------
    for (const CountMention& m : walker_counts) {
      if (walkers && *walkers != m.value) {
        diagnose("conflicting walker counts", clause);
      }
      walkers = m.value;
    }
  }

  for (int b = 1; b <= kBinCount; ++b) {
    const std::uint32_t sum = d.sector_sum(b) + unattributed[b - 1];
    if (stated_total[b - 1]) {
      d.bin_totals[b - 1] = *stated_total[b - 1];
      if (*stated_total[b - 1] != sum) {
        result.diagnostics.push_back(
            {"stated total for " + bin_name(b) + " (" +
                 std::to_string(*stated_total[b - 1]) +
                 ") does not match attributed counts (" + std::to_string(sum) + ")",
             ""});
      }
    } else {
      d.bin_totals[b - 1] = sum;
    }
  }
  d.walkers = walkers.value_or(0);
  return result;
}

}  // namespace radarfm
