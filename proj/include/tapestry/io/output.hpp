#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tapestry/flesh/simulation.hpp"
#include "tapestry/io/container.hpp"

namespace tapestry::io {

/// Which ranks write files. every-nth(n): ranks 0, n, 2n, ... each collect
/// their own data and that of the n-1 ranks that follow.
struct OutputStrategy {
  enum class Kind { single_collector, every_nth, per_rank };
  Kind kind = Kind::per_rank;
  int n = 1;

  /// The rank that writes the data of `rank`.
  int collector(int rank, int nranks) const;
  int output_ranks(int nranks) const;
  void validate() const;
};

/// "single-collector", "per-rank", "every-nth" (with n) or "every-nth:<n>".
OutputStrategy parse_strategy(const std::string& s, int n = 1);

/// Dataset name of a variable: thorn prefix of the group plus the variable.
std::string dataset_name(const std::string& group, const std::string& var);

/// Current time level of `groups` (all groups when empty) on every level,
/// one container per output rank, gathered through the message transport.
std::vector<std::filesystem::path> write_vars(const flesh::Simulation& sim, const std::vector<std::string>& groups,
                                              const OutputStrategy& strategy, const std::filesystem::path& dir);

/// Every stored time level of every group: checkpoint.json plus one
/// chunk_<rank>.tpst per rank. Returns the manifest path.
std::filesystem::path checkpoint_write(const flesh::Simulation& sim, const std::filesystem::path& dir);

using SimulationFactory = std::function<std::unique_ptr<flesh::Simulation>(const flesh::ParameterTable&)>;

struct RestoreStats {
  /// Chunk files opened on behalf of each (new) rank.
  std::map<int, std::set<std::string>> opened;
};

/// Rebuild a simulation from a checkpoint, optionally on a different number
/// of ranks. The result sits at the checkpointed iteration, ready to step.
std::unique_ptr<flesh::Simulation> checkpoint_restore(const std::filesystem::path& dir, const flesh::Registry& reg,
                                                      const SimulationFactory& make,
                                                      std::optional<int> nranks = std::nullopt,
                                                      RestoreStats* stats = nullptr);

nlohmann::json to_json(const flesh::ParamValue& v);
flesh::ParamValue param_from_json(const flesh::ParameterSpec& spec, const nlohmann::json& j);

/// io::out_every, io::out_dir, io::strategy, io::nth, io::checkpoint_every,
/// io::checkpoint_dir and the OUTPUT routine using them.
flesh::ThornManifest io_thorn();

}  // namespace tapestry::io
