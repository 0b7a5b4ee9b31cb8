#include "radarfm/dataset.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace radarfm {

std::string record_to_json_line(const DatasetRecord& r) {
  nlohmann::ordered_json j;
  j["scene_id"] = r.scene_id;
  j["descriptor"] = nlohmann::ordered_json::parse(descriptor_to_json(r.descriptor));
  j["hash_hex"] = r.hash_hex;
  j["captions"] = r.captions;
  return j.dump();
}

DatasetRecord record_from_json_line(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line);
  DatasetRecord r;
  r.scene_id = j.at("scene_id").get<std::int64_t>();
  r.descriptor = descriptor_from_json(j.at("descriptor").dump());
  r.hash_hex = j.at("hash_hex").get<std::string>();
  if (j.contains("captions")) {
    r.captions = j.at("captions").get<std::vector<std::string>>();
  }
  return r;
}

void write_dataset(const std::vector<DatasetRecord>& records,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  for (const DatasetRecord& r : records) {
    out << record_to_json_line(r) << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed writing dataset to " + path.string());
  }
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset file " + path.string());
  }
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                               ": bad dataset record: " + e.what());
    }
  }
  return records;
}

}  // namespace radarfm
