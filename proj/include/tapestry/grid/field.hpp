#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tapestry/grid/box.hpp"

namespace tapestry {

/// Named set of vertex-centred grid functions that share extents, ghost
/// width and number of stored time levels.
struct VariableGroup {
  std::string name;
  std::vector<std::string> variables;
  int ghost_width = 0;
  int time_levels = 1;

  int num_vars() const { return static_cast<int>(variables.size()); }
  int index_of(std::string_view var) const;
  void validate() const;
};

/// Mutable view of one grid function on a box, x-fastest.
class Array3 {
 public:
  Array3() = default;
  Array3(double* data, const IndexBox& box)
      : data_(data), box_(box), sy_(box.extent(0)), sz_(box.extent(0) * box.extent(1)) {}

  double& operator()(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return data_[offset(i, j, k)];
  }
  double& operator()(const Index3& p) const { return (*this)(p[0], p[1], p[2]); }

  std::int64_t offset(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return (i - box_.lo[0]) + (j - box_.lo[1]) * sy_ + (k - box_.lo[2]) * sz_;
  }
  std::int64_t stride_y() const { return sy_; }
  std::int64_t stride_z() const { return sz_; }
  const IndexBox& box() const { return box_; }
  double* data() const { return data_; }
  std::span<double> span() const { return {data_, static_cast<std::size_t>(box_.volume())}; }

 private:
  double* data_ = nullptr;
  IndexBox box_;
  std::int64_t sy_ = 0, sz_ = 0;
};

/// Storage for one group on one patch: time_levels x num_vars arrays over
/// the ghost-extended box. Level 0 is the current time.
class GroupData {
 public:
  GroupData() = default;
  GroupData(const VariableGroup& desc, const IndexBox& ext);

  const VariableGroup& desc() const { return *desc_; }
  const IndexBox& box() const { return ext_; }
  int num_vars() const { return desc_->num_vars(); }
  int time_levels() const { return desc_->time_levels; }

  Array3 var(int v, int tl = 0) {
    return {storage_.at(static_cast<std::size_t>(tl * num_vars() + v)).data(), ext_};
  }
  Array3 var(int v, int tl = 0) const {
    // const overload hands out a mutable view type; callers treat it as read-only
    return {const_cast<double*>(storage_.at(static_cast<std::size_t>(tl * num_vars() + v)).data()), ext_};
  }
  Array3 var(std::string_view name, int tl = 0) { return var(desc_->index_of(name), tl); }

  std::vector<double>& raw(int v, int tl = 0) { return storage_.at(static_cast<std::size_t>(tl * num_vars() + v)); }
  const std::vector<double>& raw(int v, int tl = 0) const {
    return storage_.at(static_cast<std::size_t>(tl * num_vars() + v));
  }

  /// Shift time levels back by one and initialize the new current level as a
  /// copy of the previous one.
  void rotate();
  /// Copy the current level into every past level.
  void fill_past_levels();
  /// Reverse the order of the first n time levels.
  void reverse_levels(int n);

 private:
  std::shared_ptr<const VariableGroup> desc_;
  IndexBox ext_;
  std::vector<std::vector<double>> storage_;
};

/// One block of one refinement level, owned by exactly one rank.
struct Patch {
  int id = 0;
  int rank = 0;
  IndexBox owned;
  IndexBox ext;  // owned grown by the ghost width
  std::map<std::string, GroupData, std::less<>> groups;

  GroupData& group(std::string_view name);
  const GroupData& group(std::string_view name) const;
  bool has_group(std::string_view name) const { return groups.find(name) != groups.end(); }
};

}  // namespace tapestry
