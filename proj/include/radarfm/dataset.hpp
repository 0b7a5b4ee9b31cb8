#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "radarfm/scene.hpp"

namespace radarfm {

// One line of a scenes JSONL file.
struct DatasetRecord {
  std::int64_t scene_id = 0;
  SceneDescriptor descriptor;
  std::string hash_hex;  // "<layout-version>:<hex>"
  std::vector<std::string> captions;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

std::string record_to_json_line(const DatasetRecord& r);
DatasetRecord record_from_json_line(std::string_view line);

void write_dataset(const std::vector<DatasetRecord>& records,
                   const std::filesystem::path& path);

// Throws std::runtime_error naming the offending line number on malformed
// input.
std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);

}  // namespace radarfm
