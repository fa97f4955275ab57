#include "tapestry/flesh/registry.hpp"

#include <algorithm>
#include <queue>

namespace tapestry::flesh {

const char* to_string(Bin b) {
  switch (b) {
    case Bin::startup: return "STARTUP";
    case Bin::initial: return "INITIAL";
    case Bin::prestep: return "PRESTEP";
    case Bin::evol: return "EVOL";
    case Bin::poststep: return "POSTSTEP";
    case Bin::analysis: return "ANALYSIS";
    case Bin::output: return "OUTPUT";
    case Bin::shutdown: return "SHUTDOWN";
  }
  return "?";
}

Bin parse_bin(std::string_view s) {
  for (Bin b : all_bins)
    if (s == to_string(b)) return b;
  throw std::invalid_argument("unknown schedule bin '" + std::string(s) + "'");
}

ThornHandle Registry::register_thorn(const ThornManifest& m) {
  if (m.empty() && m.name.empty()) return {};
  if (m.name.empty()) throw RegistrationError("thorn manifest without a name");
  if (std::find(thorns_.begin(), thorns_.end(), m.name) != thorns_.end())
    throw RegistrationError("duplicate thorn name '" + m.name + "'");

  // Validate everything before mutating so a failed registration leaves the registry untouched.
  std::set<std::string> seen;
  for (const auto& g : m.groups) {
    try {
      g.validate();
    } catch (const std::invalid_argument& e) {
      throw RegistrationError("thorn '" + m.name + "': " + e.what());
    }
    if (find_group(g.name) || !seen.insert("group:" + g.name).second)
      throw RegistrationError("thorn '" + m.name + "': duplicate group name '" + g.name + "'");
  }
  for (const auto& p : m.parameters) {
    try {
      p.validate();
    } catch (const ParameterError& e) {
      throw RegistrationError("thorn '" + m.name + "': " + e.what());
    }
    if (find_parameter(p.name) || !seen.insert("param:" + p.name).second)
      throw RegistrationError("thorn '" + m.name + "': duplicate parameter name '" + p.name + "'");
  }
  for (const auto& it : m.items) {
    if (it.name.empty()) throw RegistrationError("thorn '" + m.name + "': schedule item without a name");
    if (static_cast<bool>(it.local) == static_cast<bool>(it.global))
      throw RegistrationError("schedule item '" + it.name + "' must have exactly one of a block-local or a global routine");
    if (find_item(it.name) || !seen.insert("item:" + it.name).second)
      throw RegistrationError("thorn '" + m.name + "': duplicate schedule item name '" + it.name + "'");
  }
  for (const auto& e : m.evolved) {
    const bool declared_here =
        std::any_of(m.groups.begin(), m.groups.end(), [&](const VariableGroup& g) { return g.name == e.group; });
    if (!declared_here && !find_group(e.group))
      throw RegistrationError("thorn '" + m.name + "': evolved group '" + e.group + "' is not declared");
    if (!e.rhs) throw RegistrationError("thorn '" + m.name + "': evolved group '" + e.group + "' has no right-hand side");
    for (const auto& other : evolved_)
      if (other.group == e.group) throw RegistrationError("group '" + e.group + "' is already evolved");
  }

  thorns_.push_back(m.name);
  groups_.insert(groups_.end(), m.groups.begin(), m.groups.end());
  parameters_.insert(parameters_.end(), m.parameters.begin(), m.parameters.end());
  items_.insert(items_.end(), m.items.begin(), m.items.end());
  evolved_.insert(evolved_.end(), m.evolved.begin(), m.evolved.end());
  return {static_cast<int>(thorns_.size()) - 1, m.name};
}

const VariableGroup* Registry::find_group(std::string_view name) const {
  for (const auto& g : groups_)
    if (g.name == name) return &g;
  return nullptr;
}

const ParameterSpec* Registry::find_parameter(std::string_view name) const {
  for (const auto& p : parameters_)
    if (p.name == name) return &p;
  return nullptr;
}

const ScheduleItem* Registry::find_item(std::string_view name) const {
  for (const auto& i : items_)
    if (i.name == name) return &i;
  return nullptr;
}

std::vector<ScheduleItem> Registry::items_in(Bin b) const {
  std::vector<ScheduleItem> out;
  for (const auto& i : items_)
    if (i.bin == b) out.push_back(i);
  return out;
}

ParameterTable Registry::default_parameters() const {
  ParameterTable t;
  for (const auto& p : parameters_) t.declare(p);
  return t;
}

std::vector<ScheduleItem> resolve_schedule(const std::vector<ScheduleItem>& items, Bin bin,
                                           std::vector<std::string>* warnings) {
  std::map<std::string, const ScheduleItem*> by_name;
  for (const auto& it : items)
    if (it.bin == bin) by_name.emplace(it.name, &it);

  // edges: first -> second means first runs before second
  std::map<std::string, std::set<std::string>> succ;
  std::map<std::string, int> indegree;
  for (const auto& [name, _] : by_name) indegree[name] = 0;
  auto add_edge = [&](const std::string& first, const std::string& second, const std::string& owner) {
    if (!by_name.count(first) || !by_name.count(second)) {
      if (warnings)
        warnings->push_back("schedule item '" + owner + "' references '" + (by_name.count(first) ? second : first) +
                            "', which is not in bin " + to_string(bin) + "; constraint ignored");
      return;
    }
    if (succ[first].insert(second).second) ++indegree[second];
  };
  for (const auto& [name, it] : by_name) {
    for (const auto& a : it->after) add_edge(a, name, name);
    for (const auto& b : it->before) add_edge(name, b, name);
  }

  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [name, d] : indegree)
    if (d == 0) ready.push(name);
  std::vector<ScheduleItem> order;
  while (!ready.empty()) {
    const std::string n = ready.top();
    ready.pop();
    order.push_back(*by_name.at(n));
    for (const auto& s : succ[n])
      if (--indegree[s] == 0) ready.push(s);
  }
  if (order.size() == by_name.size()) return order;

  // Every node left over has a left-over predecessor; walking predecessors must revisit a node.
  std::map<std::string, std::string> pred;
  for (const auto& [from, tos] : succ)
    if (indegree[from] > 0)
      for (const auto& to : tos)
        if (indegree[to] > 0 && !pred.count(to)) pred[to] = from;
  std::string cur;
  for (const auto& [name, d] : indegree)
    if (d > 0) {
      cur = name;
      break;
    }
  std::vector<std::string> path;
  std::set<std::string> on_path;
  while (!on_path.count(cur)) {
    on_path.insert(cur);
    path.push_back(cur);
    cur = pred.at(cur);
  }
  std::vector<std::string> cycle(std::find(path.begin(), path.end(), cur), path.end());
  std::reverse(cycle.begin(), cycle.end());
  std::string msg = "schedule constraint cycle in bin " + std::string(to_string(bin)) + ":";
  for (const auto& c : cycle) msg += " " + c + " ->";
  msg += " " + cycle.front();
  ScheduleError err(msg);
  err.cycle = cycle;
  throw err;
}

}  // namespace tapestry::flesh
