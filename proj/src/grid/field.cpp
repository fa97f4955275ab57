#include "tapestry/grid/field.hpp"

#include <algorithm>

namespace tapestry {

int VariableGroup::index_of(std::string_view var) const {
  auto it = std::find(variables.begin(), variables.end(), var);
  if (it == variables.end()) return -1;
  return static_cast<int>(it - variables.begin());
}

void VariableGroup::validate() const {
  if (name.empty()) throw std::invalid_argument("variable group without a name");
  if (variables.empty()) throw std::invalid_argument("variable group '" + name + "' has no variables");
  if (ghost_width < 0) throw std::invalid_argument("variable group '" + name + "': negative ghost width");
  if (time_levels < 1) throw std::invalid_argument("variable group '" + name + "': time_levels must be >= 1");
  for (std::size_t i = 0; i < variables.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (variables[i] == variables[j])
        throw std::invalid_argument("variable group '" + name + "': duplicate variable " + variables[i]);
}

GroupData::GroupData(const VariableGroup& desc, const IndexBox& ext)
    : desc_(std::make_shared<const VariableGroup>(desc)), ext_(ext) {
  const auto n = static_cast<std::size_t>(ext.volume());
  storage_.assign(static_cast<std::size_t>(desc.time_levels * desc.num_vars()), std::vector<double>(n, 0.0));
}

void GroupData::rotate() {
  const int nv = num_vars();
  for (int tl = time_levels() - 1; tl > 0; --tl)
    for (int v = 0; v < nv; ++v) std::swap(storage_[tl * nv + v], storage_[(tl - 1) * nv + v]);
  if (time_levels() > 1)
    for (int v = 0; v < nv; ++v) storage_[v] = storage_[nv + v];
}

void GroupData::fill_past_levels() {
  const int nv = num_vars();
  for (int tl = 1; tl < time_levels(); ++tl)
    for (int v = 0; v < nv; ++v) storage_[tl * nv + v] = storage_[v];
}

void GroupData::reverse_levels(int n) {
  const int nv = num_vars();
  n = std::min(n, time_levels());
  for (int a = 0, b = n - 1; a < b; ++a, --b)
    for (int v = 0; v < nv; ++v) std::swap(storage_[a * nv + v], storage_[b * nv + v]);
}

GroupData& Patch::group(std::string_view name) {
  auto it = groups.find(name);
  if (it == groups.end()) throw std::out_of_range("patch " + std::to_string(id) + " has no group '" + std::string(name) + "'");
  return it->second;
}

const GroupData& Patch::group(std::string_view name) const {
  auto it = groups.find(name);
  if (it == groups.end()) throw std::out_of_range("patch " + std::to_string(id) + " has no group '" + std::string(name) + "'");
  return it->second;
}

}  // namespace tapestry
