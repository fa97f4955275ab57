#include "tapestry/io/output.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <tuple>

#include "tapestry/comm/transport.hpp"

namespace tapestry::io {

namespace fs = std::filesystem;

int OutputStrategy::collector(int rank, int nranks) const {
  switch (kind) {
    case Kind::single_collector: return 0;
    case Kind::per_rank: return rank;
    case Kind::every_nth: return rank / n * n;
  }
  (void)nranks;
  return rank;
}

int OutputStrategy::output_ranks(int nranks) const {
  switch (kind) {
    case Kind::single_collector: return 1;
    case Kind::per_rank: return nranks;
    case Kind::every_nth: return (nranks + n - 1) / n;
  }
  return nranks;
}

void OutputStrategy::validate() const {
  if (kind == Kind::every_nth && n < 1) throw std::invalid_argument("every-nth output needs n >= 1");
}

OutputStrategy parse_strategy(const std::string& s, int n) {
  OutputStrategy st;
  if (s == "single-collector") {
    st.kind = OutputStrategy::Kind::single_collector;
  } else if (s == "per-rank") {
    st.kind = OutputStrategy::Kind::per_rank;
  } else if (s == "every-nth") {
    st.kind = OutputStrategy::Kind::every_nth;
    st.n = n;
  } else if (s.rfind("every-nth:", 0) == 0) {
    st.kind = OutputStrategy::Kind::every_nth;
    try {
      st.n = std::stoi(s.substr(10));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad output strategy '" + s + "'");
    }
  } else {
    throw std::invalid_argument("unknown output strategy '" + s + "'");
  }
  st.validate();
  return st;
}

std::string dataset_name(const std::string& group, const std::string& var) {
  const auto sep = group.find("::");
  return (sep == std::string::npos ? group : group.substr(0, sep)) + "::" + var;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> extract(const GroupData& g, int v, int tl, const IndexBox& box) {
  const Array3 a = g.var(v, tl);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(box.volume()));
  for (auto k = box.lo[2]; k <= box.hi[2]; ++k)
    for (auto j = box.lo[1]; j <= box.hi[1]; ++j)
      for (auto i = box.lo[0]; i <= box.hi[0]; ++i) out.push_back(a(i, j, k));
  return out;
}

/// Copy the part of `src` (laid out over `src_box`) that falls inside `cut`.
void insert(GroupData& g, int v, int tl, const IndexBox& cut, const IndexBox& src_box, const std::vector<double>& src) {
  const Array3 dst = g.var(v, tl);
  const Array3 in(const_cast<double*>(src.data()), src_box);
  for (auto k = cut.lo[2]; k <= cut.hi[2]; ++k)
    for (auto j = cut.lo[1]; j <= cut.hi[1]; ++j)
      for (auto i = cut.lo[0]; i <= cut.hi[0]; ++i) dst(i, j, k) = in(i, j, k);
}

DatasetHeader header_for(const flesh::Simulation& sim, const Level& lev, const Patch& p, const GroupData& g, int v,
                         int tl) {
  DatasetHeader h;
  h.name = dataset_name(g.desc().name, g.desc().variables[static_cast<std::size_t>(v)]);
  h.iteration = sim.iteration();
  h.time = static_cast<std::size_t>(tl) < lev.tl_times.size() ? lev.tl_times[static_cast<std::size_t>(tl)] : lev.time;
  h.level = lev.index;
  h.box = p.owned;
  h.ghost_width = g.desc().ghost_width;
  h.rank = p.rank;
  h.timelevel = tl;
  h.attributes = {{"coordinates", "cartesian"},
                  {"tensor_type", "scalar"},
                  {"refinement_level", std::to_string(lev.index)},
                  {"group", g.desc().name},
                  {"delta", fmt(lev.geom.h)},
                  {"origin", fmt(lev.geom.origin[0]) + "," + fmt(lev.geom.origin[1]) + "," + fmt(lev.geom.origin[2])}};
  return h;
}

void remove_all(const std::vector<fs::path>& files) {
  for (const auto& f : files) {
    std::error_code ec;
    fs::remove(f, ec);
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

constexpr int manifest_version = 1;

}  // namespace

std::vector<fs::path> write_vars(const flesh::Simulation& sim, const std::vector<std::string>& groups,
                                 const OutputStrategy& strategy, const fs::path& dir) {
  strategy.validate();
  const auto& driver = sim.driver();
  const int nranks = driver.nranks();
  std::vector<std::string> names = groups;
  if (names.empty())
    for (const auto& g : sim.registry().groups()) names.push_back(g.name);

  // Every rank sends each of its datasets to its collector. A message
  // carries one variable of one patch; region numbers the rank's datasets so
  // the delivery order is (level, source rank, patch, group, variable).
  comm::Transport transport;
  std::map<std::pair<int, int>, std::vector<DatasetHeader>> sent;  // (level, rank) -> headers
  for (int l = 0; l < driver.num_levels(); ++l) {
    const Level& lev = driver.level(l);
    for (const auto& p : lev.patches) {
      auto& list = sent[{l, p.rank}];
      for (const auto& gname : names) {
        const GroupData& g = p.group(gname);
        for (int v = 0; v < g.num_vars(); ++v) {
          comm::Message m;
          m.source = p.rank;
          m.dest = strategy.collector(p.rank, nranks);
          m.phase = l;
          m.region = static_cast<int>(list.size());
          m.box = p.owned;
          m.payload = extract(g, v, 0, p.owned);
          list.push_back(header_for(sim, lev, p, g, v, 0));
          transport.send(std::move(m));
        }
      }
    }
  }

  ensure_dir(dir);
  std::vector<fs::path> written;
  try {
    for (int r = 0; r < nranks; ++r) {
      if (strategy.collector(r, nranks) != r) continue;
      std::vector<Dataset> out;
      for (auto& m : transport.receive(r))
        out.push_back({sent.at({m.phase, m.source}).at(static_cast<std::size_t>(m.region)), std::move(m.payload)});
      char name[64];
      std::snprintf(name, sizeof name, "vars_it%06lld_r%05d.tpst", static_cast<long long>(sim.iteration()), r);
      const fs::path path = dir / name;
      write_container(path, std::move(out));
      written.push_back(path);
    }
  } catch (...) {
    remove_all(written);
    throw;
  }
  return written;
}

nlohmann::json to_json(const flesh::ParamValue& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

flesh::ParamValue param_from_json(const flesh::ParameterSpec& spec, const nlohmann::json& j) {
  switch (spec.kind) {
    case flesh::ParamKind::integer: return j.get<std::int64_t>();
    case flesh::ParamKind::real: return j.get<double>();
    case flesh::ParamKind::boolean: return j.get<bool>();
    case flesh::ParamKind::keyword:
    case flesh::ParamKind::string: return j.get<std::string>();
  }
  throw flesh::ParameterError("bad parameter kind for " + spec.name);
}

fs::path checkpoint_write(const flesh::Simulation& sim, const fs::path& dir) {
  const auto& driver = sim.driver();
  const int nranks = driver.nranks();
  ensure_dir(dir);

  std::vector<std::vector<Dataset>> per_rank(static_cast<std::size_t>(nranks));
  for (int l = 0; l < driver.num_levels(); ++l) {
    const Level& lev = driver.level(l);
    for (const auto& p : lev.patches)
      for (const auto& g : sim.registry().groups()) {
        const GroupData& data = p.group(g.name);
        for (int tl = 0; tl < data.time_levels(); ++tl)
          for (int v = 0; v < data.num_vars(); ++v)
            per_rank[static_cast<std::size_t>(p.rank)].push_back(
                {header_for(sim, lev, p, data, v, tl), extract(data, v, tl, p.owned)});
      }
  }

  nlohmann::json chunks = nlohmann::json::array();
  std::vector<fs::path> written;
  try {
    for (int r = 0; r < nranks; ++r) {
      const std::string file = "chunk_" + std::to_string(r) + ".tpst";
      write_container(dir / file, std::move(per_rank[static_cast<std::size_t>(r)]));
      written.push_back(dir / file);
      const auto idx = read_index(dir / file);
      nlohmann::json entries = nlohmann::json::array();
      for (const auto& h : idx.datasets)
        entries.push_back({{"name", h.name},
                           {"group", h.attributes.at("group")},
                           {"level", h.level},
                           {"timelevel", h.timelevel},
                           {"box", {{"lo", h.box.lo}, {"hi", h.box.hi}}},
                           {"offset", idx.payload_start + h.offset},
                           {"length", h.length}});
      chunks.push_back({{"file", file}, {"rank", r}, {"datasets", entries}});
    }

    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, value] : sim.params().values()) params[name] = to_json(value);
    nlohmann::json manifest = {{"format_version", manifest_version},
                               {"iteration", sim.iteration()},
                               {"time", sim.time()},
                               {"parameters", params},
                               {"driver", driver.describe()},
                               {"chunks", chunks},
                               {"timestamp", iso_now()}};
    const fs::path path = dir / "checkpoint.json";
    auto tmp = path;
    tmp += ".partial";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << manifest.dump(1) << '\n';
      if (!out) throw IoError("cannot write " + path.string());
    }
    fs::rename(tmp, path);
    return path;
  } catch (...) {
    remove_all(written);
    throw;
  }
}

std::unique_ptr<flesh::Simulation> checkpoint_restore(const fs::path& dir, const flesh::Registry& reg,
                                                      const SimulationFactory& make, std::optional<int> nranks,
                                                      RestoreStats* stats) {
  const fs::path mpath = dir / "checkpoint.json";
  std::ifstream min(mpath);
  if (!min) throw NotFound("no checkpoint manifest at " + mpath.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(min);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest " + mpath.string() + ": " + e.what());
  }
  const int version = manifest.value("format_version", -1);
  if (version != manifest_version)
    throw IoError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                  std::to_string(manifest_version) + ")");

  flesh::ParameterTable params = reg.default_parameters();
  for (const auto& [name, value] : manifest.at("parameters").items()) {
    if (!params.has(name)) throw IoError("checkpoint parameter " + name + " is not declared by any thorn");
    params.set(name, param_from_json(params.spec(name), value));
  }
  if (nranks) params.set("driver::nranks", flesh::ParamValue{std::int64_t{*nranks}});

  auto sim = make(params);
  sim->setup();
  auto& driver = sim->driver();
  driver.load_layout(*sim, manifest.at("driver"));

  struct Entry {
    std::string group;
    int var = 0;
    int level = 0;
    int timelevel = 0;
    IndexBox box;
    std::uint64_t offset = 0, length = 0;
  };
  struct Chunk {
    std::string file;
    std::vector<Entry> entries;
  };
  std::vector<Chunk> chunks;
  for (const auto& c : manifest.at("chunks")) {
    Chunk ch{c.at("file").get<std::string>(), {}};
    for (const auto& e : c.at("datasets")) {
      Entry en;
      en.group = e.at("group").get<std::string>();
      const auto* desc = reg.find_group(en.group);
      if (!desc) throw IoError("corrupt chunk " + ch.file + ": unknown group " + en.group);
      const auto name = e.at("name").get<std::string>();
      en.var = desc->index_of(name.substr(name.rfind("::") + 2));
      if (en.var < 0) throw IoError("corrupt chunk " + ch.file + ": unknown variable " + name);
      en.level = e.at("level").get<int>();
      en.timelevel = e.at("timelevel").get<int>();
      en.box = {e.at("box").at("lo").get<Index3>(), e.at("box").at("hi").get<Index3>()};
      en.offset = e.at("offset").get<std::uint64_t>();
      en.length = e.at("length").get<std::uint64_t>();
      ch.entries.push_back(std::move(en));
    }
    chunks.push_back(std::move(ch));
  }

  // filled[level][patch][group] counts restored points per (timelevel, var)
  std::map<std::tuple<int, int, std::string, int, int>, std::int64_t> filled;
  for (int r = 0; r < driver.nranks(); ++r) {
    std::vector<std::pair<int, Patch*>> mine;
    for (int l = 0; l < driver.num_levels(); ++l)
      for (auto& p : driver.level(l).patches)
        if (p.rank == r) mine.emplace_back(l, &p);
    if (mine.empty()) continue;

    for (const auto& ch : chunks) {
      std::vector<const Entry*> wanted;
      for (const auto& e : ch.entries)
        for (const auto& [l, p] : mine)
          if (e.level == l && !intersect(e.box, p->owned).empty()) {
            wanted.push_back(&e);
            break;
          }
      if (wanted.empty()) continue;

      const fs::path path = dir / ch.file;
      if (stats) stats->opened[r].insert(ch.file);
      ContainerIndex idx;
      try {
        idx = read_index(path);
      } catch (const IoError& e) {
        throw IoError("corrupt chunk " + ch.file + ": " + e.what());
      }
      std::ifstream in(path, std::ios::binary);
      for (const Entry* e : wanted) {
        const bool listed = std::any_of(idx.datasets.begin(), idx.datasets.end(), [&](const DatasetHeader& h) {
          return idx.payload_start + h.offset == e->offset && h.length == e->length && h.box == e->box;
        });
        if (!listed || e->length != static_cast<std::uint64_t>(e->box.volume()) * sizeof(double) ||
            e->offset + e->length > idx.file_size)
          throw IoError("corrupt chunk " + ch.file + ": index entry does not match the file (offset " +
                        std::to_string(e->offset) + ", length " + std::to_string(e->length) + ")");
        std::vector<double> values(e->length / sizeof(double));
        in.seekg(static_cast<std::streamoff>(e->offset));
        in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(e->length));
        if (!in) throw IoError("corrupt chunk " + ch.file + ": short read");
        for (const auto& [l, p] : mine) {
          if (l != e->level) continue;
          const IndexBox cut = intersect(e->box, p->owned);
          if (cut.empty()) continue;
          GroupData& g = p->group(e->group);
          if (e->timelevel >= g.time_levels()) throw IoError("corrupt chunk " + ch.file + ": bad time level");
          insert(g, e->var, e->timelevel, cut, e->box, values);
          filled[{l, p->id, e->group, e->timelevel, e->var}] += cut.volume();
        }
      }
    }
  }

  for (int l = 0; l < driver.num_levels(); ++l)
    for (const auto& p : driver.level(l).patches)
      for (const auto& g : reg.groups())
        for (int tl = 0; tl < g.time_levels; ++tl)
          for (int v = 0; v < g.num_vars(); ++v)
            if (filled[{l, p.id, g.name, tl, v}] != p.owned.volume())
              throw IoError("checkpoint in " + dir.string() + " does not cover " +
                            dataset_name(g.name, g.variables[static_cast<std::size_t>(v)]) + " on level " +
                            std::to_string(l));

  for (int l = 0; l < driver.num_levels(); ++l)
    for (const auto& g : reg.groups()) driver.sync(l, g.name);
  sim->resume({manifest.at("iteration").get<std::int64_t>(), manifest.at("time").get<double>()});
  return sim;
}

flesh::ThornManifest io_thorn() {
  using namespace flesh;
  ThornManifest m;
  m.name = "io";
  m.parameters = {
      int_param("io::out_every", 0, std::pair{0.0, 1e9}, true, "output every this many iterations (0: never)"),
      string_param("io::out_dir", "", true, "directory for variable output (empty: record only)"),
      keyword_param("io::strategy", "per-rank", {"single-collector", "every-nth", "per-rank"}, false,
                    "output aggregation"),
      int_param("io::nth", 4, std::pair{1.0, 65536.0}, false, "collection group size for every-nth"),
      int_param("io::checkpoint_every", 0, std::pair{0.0, 1e9}, true, "checkpoint every this many iterations"),
      string_param("io::checkpoint_dir", "checkpoints", true, "directory receiving checkpoints"),
  };
  ScheduleItem out;
  out.name = "io::output";
  out.bin = Bin::output;
  out.global = [](Simulation& sim) {
    const auto& p = sim.params();
    const auto it = sim.iteration();
    const auto every = p.get_int("io::out_every");
    if (every > 0 && it % every == 0) {
      sim.record_output(it);
      if (const auto& dir = p.get_string("io::out_dir"); !dir.empty())
        write_vars(sim, {}, parse_strategy(p.get_string("io::strategy"), static_cast<int>(p.get_int("io::nth"))), dir);
    }
    const auto ck = p.get_int("io::checkpoint_every");
    if (ck > 0 && it > 0 && it % ck == 0)
      checkpoint_write(sim, fs::path(p.get_string("io::checkpoint_dir")) / ("it_" + std::to_string(it)));
  };
  m.items = {out};
  return m;
}

}  // namespace tapestry::io
