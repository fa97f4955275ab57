#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tapestry/grid/box.hpp"

namespace tapestry::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotFound : IoError {
  using IoError::IoError;
};

struct DatasetHeader {
  std::string name;
  std::int64_t iteration = 0;
  double time = 0.0;
  int level = 0;
  IndexBox box;
  int ghost_width = 0;
  int rank = 0;
  int timelevel = 0;
  std::map<std::string, std::string> attributes;
  std::uint64_t offset = 0;  // from the start of the payload area
  std::uint64_t length = 0;  // bytes

  /// Header fields without the storage location, for comparing datasets
  /// across files.
  nlohmann::json identity() const;
  nlohmann::json to_json() const;
  static DatasetHeader from_json(const nlohmann::json& j);
};

struct Dataset {
  DatasetHeader header;
  std::vector<double> values;  // owned points, x fastest
};

/// Write "TPST", version byte 1, u64 little-endian header length, JSON
/// header, then the binary64 payloads. Offsets and lengths in the headers
/// are filled in here. The file appears atomically (written beside, then
/// renamed); on failure nothing is left behind.
void write_container(const std::filesystem::path& path, std::vector<Dataset> datasets);

struct ContainerIndex {
  std::vector<DatasetHeader> datasets;
  std::uint64_t payload_start = 0;  // absolute file offset of the payload area
  std::uint64_t file_size = 0;
};

ContainerIndex read_index(const std::filesystem::path& path);
std::vector<Dataset> read_container(const std::filesystem::path& path);
/// First dataset named `name` at `iteration`; NotFound otherwise.
Dataset read_dataset(const std::filesystem::path& path, const std::string& name, std::int64_t iteration);

}  // namespace tapestry::io
