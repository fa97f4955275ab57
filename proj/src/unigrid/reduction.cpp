#include "tapestry/unigrid/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tapestry/grid/lagrange.hpp"

namespace tapestry::unigrid {

ReduceOp parse_reduce_op(std::string_view s) {
  if (s == "sum") return ReduceOp::sum;
  if (s == "min") return ReduceOp::min;
  if (s == "max") return ReduceOp::max;
  if (s == "L1" || s == "l1") return ReduceOp::l1;
  if (s == "L2" || s == "l2") return ReduceOp::l2;
  if (s == "Linf" || s == "linf") return ReduceOp::linf;
  if (s == "count") return ReduceOp::count;
  throw std::invalid_argument("unknown reduction '" + std::string(s) + "'");
}

const char* to_string(ReduceOp op) {
  switch (op) {
    case ReduceOp::sum: return "sum";
    case ReduceOp::min: return "min";
    case ReduceOp::max: return "max";
    case ReduceOp::l1: return "L1";
    case ReduceOp::l2: return "L2";
    case ReduceOp::linf: return "Linf";
    case ReduceOp::count: return "count";
  }
  return "?";
}

double reduce(ReduceOp op, std::span<const Patch> patches, std::string_view group, std::string_view var, int tl) {
  std::vector<const Patch*> order;
  IndexBox span_box;
  for (const auto& p : patches) {
    if (!p.has_group(group)) throw UnknownVariable("unknown group '" + std::string(group) + "'");
    if (p.group(group).desc().index_of(var) < 0)
      throw UnknownVariable("unknown variable '" + std::string(var) + "' in group '" + std::string(group) + "'");
    if (p.owned.empty()) continue;
    order.push_back(&p);
    span_box = bounding(span_box, p.owned);
  }
  std::sort(order.begin(), order.end(), [](const Patch* a, const Patch* b) { return a->owned.lo[0] < b->owned.lo[0]; });

  double acc = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::int64_t n = 0;
  std::vector<const Patch*> row;
  for (auto k = span_box.lo[2]; k <= span_box.hi[2]; ++k)
    for (auto j = span_box.lo[1]; j <= span_box.hi[1]; ++j) {
      row.clear();
      for (const Patch* p : order)
        if (p->owned.lo[1] <= j && j <= p->owned.hi[1] && p->owned.lo[2] <= k && k <= p->owned.hi[2]) row.push_back(p);
      for (const Patch* p : row) {
        const GroupData& g = p->group(group);
        const Array3 a = g.var(g.desc().index_of(var), tl);
        const double* x = a.data() + a.offset(p->owned.lo[0], j, k);
        const auto len = p->owned.extent(0);
        for (std::int64_t i = 0; i < len; ++i) {
          const double v = x[i];
          switch (op) {
            case ReduceOp::sum: acc += v; break;
            case ReduceOp::l1: acc += std::abs(v); break;
            case ReduceOp::l2: acc += v * v; break;
            case ReduceOp::linf: hi = std::max(hi, std::abs(v)); break;
            case ReduceOp::min: lo = std::min(lo, v); break;
            case ReduceOp::max: hi = std::max(hi, v); break;
            case ReduceOp::count: break;
          }
        }
        n += len;
      }
    }
  switch (op) {
    case ReduceOp::sum: return acc;
    case ReduceOp::l1: return n ? acc / static_cast<double>(n) : 0.0;
    case ReduceOp::l2: return n ? std::sqrt(acc / static_cast<double>(n)) : 0.0;
    case ReduceOp::linf: return n ? hi : 0.0;
    case ReduceOp::min: return lo;
    case ReduceOp::max: return hi;
    case ReduceOp::count: return static_cast<double>(n);
  }
  return 0.0;
}

double reduce(ReduceOp op, std::span<const Patch> patches, std::string_view variable) {
  if (patches.empty()) throw UnknownVariable("no patches");
  std::string_view prefix, var = variable;
  if (const auto sep = variable.rfind("::"); sep != std::string_view::npos) {
    prefix = variable.substr(0, sep);
    var = variable.substr(sep + 2);
  }
  for (const auto& [name, data] : patches.front().groups) {
    if (data.desc().index_of(var) < 0) continue;
    const std::string_view gname = name;
    // "thorn::var" matches a group named "thorn::<anything>" or exactly "thorn"
    if (prefix.empty() || gname == prefix ||
        (gname.size() > prefix.size() + 2 && gname.substr(0, prefix.size()) == prefix &&
         gname.substr(prefix.size(), 2) == "::"))
      return reduce(op, patches, name, var);
  }
  throw UnknownVariable("unknown variable '" + std::string(variable) + "'");
}

std::vector<std::optional<double>> interpolate_points(const DomainSpec& domain, std::span<const Patch> patches,
                                                      std::string_view group, std::string_view var,
                                                      std::span<const std::array<double, 3>> points, int order) {
  if (order != 1 && order != 3 && order != 5) throw std::invalid_argument("interpolation order must be 1, 3 or 5");
  std::vector<std::optional<double>> out;
  out.reserve(points.size());
  const bool periodic = domain.boundary == Boundary::periodic;
  constexpr double snap = 1e-12;
  for (const auto& x : points) {
    Index3 base{};
    std::array<double, 3> frac{};
    bool inside = true;
    for (int d = 0; d < 3; ++d) {
      double s = (x[d] - domain.origin[d]) / domain.h;
      const double n = static_cast<double>(domain.points[d]);
      const double upper = periodic ? n : n - 1;
      if (s < -snap || s > upper + (periodic ? -snap : snap)) inside = false;
      s = std::clamp(s, 0.0, upper);
      double fl = std::floor(s);
      double t = s - fl;
      if (t < snap) t = 0.0;
      if (t > 1.0 - snap) {
        fl += 1.0;
        t = 0.0;
      }
      base[d] = static_cast<std::int64_t>(fl);
      if (periodic) base[d] %= domain.points[d];
      else if (base[d] == domain.points[d] - 1 && t > 0.0) inside = false;
      frac[d] = t;
    }
    if (!inside) {
      out.emplace_back(std::nullopt);
      continue;
    }
    // lowest-id patch whose owned box contains the base vertex
    const Patch* owner = nullptr;
    for (const auto& p : patches)
      if (p.owned.contains(base) && (!owner || p.rank < owner->rank)) owner = &p;
    if (!owner) {
      out.emplace_back(std::nullopt);
      continue;
    }
    std::array<std::int64_t, 3> first{};
    std::array<std::vector<double>, 3> w;
    for (int d = 0; d < 3; ++d) {
      if (frac[d] == 0.0) {
        first[d] = base[d];
        w[d] = {1.0};
        continue;
      }
      std::int64_t f = base[d] - (order - 1) / 2;
      if (!periodic) f = std::clamp<std::int64_t>(f, 0, domain.points[d] - 1 - order);
      first[d] = f;
      w[d] = lagrange_weights_uniform(static_cast<int>(f - base[d]), order, frac[d]);
    }
    const IndexBox need{first,
                        {first[0] + static_cast<std::int64_t>(w[0].size()) - 1,
                         first[1] + static_cast<std::int64_t>(w[1].size()) - 1,
                         first[2] + static_cast<std::int64_t>(w[2].size()) - 1}};
    if (!owner->ext.contains(need)) {
      out.emplace_back(std::nullopt);
      continue;
    }
    const GroupData& g = owner->group(group);
    const int vi = g.desc().index_of(var);
    if (vi < 0) throw UnknownVariable("unknown variable '" + std::string(var) + "'");
    const Array3 a = g.var(vi, 0);
    double sum = 0.0;
    for (std::size_t c = 0; c < w[2].size(); ++c) {
      double sy = 0.0;
      for (std::size_t b = 0; b < w[1].size(); ++b) {
        double sx = 0.0;
        for (std::size_t i = 0; i < w[0].size(); ++i)
          sx += w[0][i] * a(first[0] + static_cast<std::int64_t>(i), first[1] + static_cast<std::int64_t>(b),
                            first[2] + static_cast<std::int64_t>(c));
        sy += w[1][b] * sx;
      }
      sum += w[2][c] * sy;
    }
    out.emplace_back(sum);
  }
  return out;
}

}  // namespace tapestry::unigrid
