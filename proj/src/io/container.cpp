#include "tapestry/io/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace tapestry::io {

static_assert(std::endian::native == std::endian::little, "container payloads are written in native byte order");

namespace {

constexpr char magic[4] = {'T', 'P', 'S', 'T'};
constexpr std::uint8_t version = 1;

nlohmann::json box_json(const IndexBox& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }
IndexBox box_from(const nlohmann::json& j) { return {j.at("lo").get<Index3>(), j.at("hi").get<Index3>()}; }

}  // namespace

nlohmann::json DatasetHeader::identity() const {
  return {{"name", name},       {"iteration", iteration},     {"time", time},
          {"level", level},     {"box", box_json(box)},       {"ghost_width", ghost_width},
          {"rank", rank},       {"timelevel", timelevel},     {"attributes", attributes}};
}

nlohmann::json DatasetHeader::to_json() const {
  auto j = identity();
  j["offset"] = offset;
  j["length"] = length;
  return j;
}

DatasetHeader DatasetHeader::from_json(const nlohmann::json& j) {
  DatasetHeader h;
  h.name = j.at("name").get<std::string>();
  h.iteration = j.at("iteration").get<std::int64_t>();
  h.time = j.at("time").get<double>();
  h.level = j.at("level").get<int>();
  h.box = box_from(j.at("box"));
  h.ghost_width = j.at("ghost_width").get<int>();
  h.rank = j.at("rank").get<int>();
  h.timelevel = j.value("timelevel", 0);
  h.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
  h.offset = j.at("offset").get<std::uint64_t>();
  h.length = j.at("length").get<std::uint64_t>();
  return h;
}

void write_container(const std::filesystem::path& path, std::vector<Dataset> datasets) {
  nlohmann::json header;
  header["datasets"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (auto& d : datasets) {
    if (d.values.size() != static_cast<std::size_t>(d.header.box.volume()))
      throw IoError("dataset " + d.header.name + ": payload size does not match its box");
    d.header.offset = offset;
    d.header.length = d.values.size() * sizeof(double);
    offset += d.header.length;
    header["datasets"].push_back(d.header.to_json());
  }
  const std::string text = header.dump();
  const std::uint64_t hlen = text.size();

  auto tmp = path;
  tmp += ".partial";
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(magic, 4);
    out.put(static_cast<char>(version));
    out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& d : datasets)
      out.write(reinterpret_cast<const char*>(d.values.data()), static_cast<std::streamsize>(d.header.length));
    out.close();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
    std::filesystem::rename(tmp, path);
  } catch (const std::filesystem::filesystem_error& e) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot write " + path.string() + ": " + e.what());
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

ContainerIndex read_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  ContainerIndex idx;
  idx.file_size = std::filesystem::file_size(path);
  char m[4];
  in.read(m, 4);
  const int v = in.get();
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
  if (!in || std::memcmp(m, magic, 4) != 0) throw IoError(path.string() + " is not a TPST container");
  if (v != version) throw IoError(path.string() + ": unsupported container version " + std::to_string(v));
  if (hlen > idx.file_size) throw IoError(path.string() + ": header length exceeds file size");
  std::string text(hlen, '\0');
  in.read(text.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw IoError(path.string() + ": truncated header");
  idx.payload_start = 4 + 1 + sizeof hlen + hlen;
  try {
    const auto header = nlohmann::json::parse(text);
    for (const auto& j : header.at("datasets")) idx.datasets.push_back(DatasetHeader::from_json(j));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": malformed header: " + e.what());
  }
  for (const auto& d : idx.datasets)
    if (d.length != static_cast<std::uint64_t>(d.box.volume()) * sizeof(double) ||
        idx.payload_start + d.offset + d.length > idx.file_size)
      throw IoError(path.string() + ": dataset " + d.name + " has an inconsistent offset or length");
  return idx;
}

namespace {

std::vector<double> read_payload(std::ifstream& in, const ContainerIndex& idx, const DatasetHeader& h) {
  std::vector<double> v(h.length / sizeof(double));
  in.seekg(static_cast<std::streamoff>(idx.payload_start + h.offset));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(h.length));
  if (!in) throw IoError("short read of dataset " + h.name);
  return v;
}

}  // namespace

std::vector<Dataset> read_container(const std::filesystem::path& path) {
  const auto idx = read_index(path);
  std::ifstream in(path, std::ios::binary);
  std::vector<Dataset> out;
  for (const auto& h : idx.datasets) out.push_back({h, read_payload(in, idx, h)});
  return out;
}

Dataset read_dataset(const std::filesystem::path& path, const std::string& name, std::int64_t iteration) {
  const auto idx = read_index(path);
  for (const auto& h : idx.datasets)
    if (h.name == name && h.iteration == iteration) {
      std::ifstream in(path, std::ios::binary);
      return {h, read_payload(in, idx, h)};
    }
  throw NotFound("no dataset " + name + " at iteration " + std::to_string(iteration) + " in " + path.string());
}

}  // namespace tapestry::io
