#include "tapestry/amr/transfer.hpp"

#include <cmath>
#include <sstream>

#include "tapestry/grid/lagrange.hpp"

namespace tapestry::amr {

std::vector<double> time_weights(std::span<const double> times, double t, int order) {
  if (order < 0) throw std::invalid_argument("negative time interpolation order");
  if (times.size() < static_cast<std::size_t>(order) + 1)
    throw std::invalid_argument("time interpolation of order " + std::to_string(order) + " needs " +
                                std::to_string(order + 1) + " stored time levels, have " + std::to_string(times.size()));
  const auto n = static_cast<std::size_t>(order) + 1;
  for (std::size_t k = 0; k < n; ++k)
    if (times[k] == t) {
      std::vector<double> w(n, 0.0);
      w[k] = 1.0;
      return w;
    }
  return lagrange_weights(times.subspan(0, n), t);
}

void time_interpolate(std::span<const double> times, std::span<const std::span<const double>> values, double t,
                      int order, std::span<double> out) {
  const auto w = time_weights(times, t, order);
  if (values.size() < w.size()) throw std::invalid_argument("fewer value arrays than interpolation points");
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    bool first = true;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (w[k] == 0.0) continue;
      const double term = w[k] * values[k][i];
      s = first ? term : s + term;
      first = false;
    }
    out[i] = s;
  }
}

Stencil1D prolongation_stencil(std::int64_t i, int order) {
  if (i % 2 == 0) return {i / 2, {1.0}};
  const int halo = (order - 1) / 2;
  const std::int64_t left = floor_div(i, 2);
  return {left - halo, lagrange_weights_uniform(-halo, order, 0.5)};
}

std::vector<std::vector<IndexBox>> boundary_targets(const Level& fine, int gw) {
  std::vector<std::vector<IndexBox>> out;
  out.reserve(fine.patches.size());
  for (const auto& p : fine.patches) out.push_back(subtract(std::vector<IndexBox>{p.owned.grown(gw)}, fine.refined));
  return out;
}

namespace {

std::vector<Stencil1D> stencils_for(std::int64_t lo, std::int64_t hi, int order) {
  std::vector<Stencil1D> s;
  for (auto i = lo; i <= hi; ++i) s.push_back(prolongation_stencil(i, order));
  return s;
}

void prolong_patch(const Level& coarse, Patch& fp, double t, std::string_view group, const InterpSpec& interp,
                   const std::vector<IndexBox>& targets) {
  if (targets.empty()) return;
  const int halo = interp.stencil_halo();
  IndexBox cover;
  for (const auto& b : targets) cover = bounding(cover, coarsen(b).grown(halo));

  GroupData& fd = fp.group(group);
  const int nv = fd.num_vars();
  int avail = std::min<int>(coarse.valid_levels, static_cast<int>(coarse.tl_times.size()));
  avail = std::min(avail, fd.time_levels());
  const int order = std::min(interp.time_order, avail - 1);
  const auto w = time_weights(coarse.tl_times, t, order);

  const auto csize = static_cast<std::size_t>(cover.volume());
  std::vector<std::vector<double>> tmp(static_cast<std::size_t>(nv), std::vector<double>(csize, 0.0));
  std::vector<char> have(csize, 0);
  const Array3 index(nullptr, cover);
  for (const auto& cp : coarse.patches) {
    const IndexBox cut = intersect(cover, cp.owned);
    if (cut.empty()) continue;
    const GroupData& cd = cp.group(group);
    for (int v = 0; v < nv; ++v) {
      auto& out = tmp[static_cast<std::size_t>(v)];
      std::vector<Array3> levels;
      for (std::size_t tl = 0; tl < w.size(); ++tl) levels.push_back(cd.var(v, static_cast<int>(tl)));
      for (auto k = cut.lo[2]; k <= cut.hi[2]; ++k)
        for (auto j = cut.lo[1]; j <= cut.hi[1]; ++j)
          for (auto i = cut.lo[0]; i <= cut.hi[0]; ++i) {
            double s = 0.0;
            bool first = true;
            for (std::size_t tl = 0; tl < w.size(); ++tl) {
              if (w[tl] == 0.0) continue;
              const double term = w[tl] * levels[tl](i, j, k);
              s = first ? term : s + term;
              first = false;
            }
            const auto at = static_cast<std::size_t>(index.offset(i, j, k));
            out[at] = s;
            have[at] = 1;
          }
    }
  }

  for (const auto& box : targets) {
    const auto sx = stencils_for(box.lo[0], box.hi[0], interp.spatial_order);
    const auto sy = stencils_for(box.lo[1], box.hi[1], interp.spatial_order);
    const auto sz = stencils_for(box.lo[2], box.hi[2], interp.spatial_order);
    for (auto k = box.lo[2]; k <= box.hi[2]; ++k)
      for (auto j = box.lo[1]; j <= box.hi[1]; ++j)
        for (auto i = box.lo[0]; i <= box.hi[0]; ++i) {
          const auto& Sx = sx[static_cast<std::size_t>(i - box.lo[0])];
          const auto& Sy = sy[static_cast<std::size_t>(j - box.lo[1])];
          const auto& Sz = sz[static_cast<std::size_t>(k - box.lo[2])];
          const std::int64_t nx = static_cast<std::int64_t>(Sx.weights.size());
          const std::int64_t ny = static_cast<std::int64_t>(Sy.weights.size());
          const std::int64_t nz = static_cast<std::int64_t>(Sz.weights.size());
          const IndexBox need{{Sx.first, Sy.first, Sz.first}, {Sx.first + nx - 1, Sy.first + ny - 1, Sz.first + nz - 1}};
          bool ok = cover.contains(need);
          for (auto c = need.lo[2]; ok && c <= need.hi[2]; ++c)
            for (auto b = need.lo[1]; ok && b <= need.hi[1]; ++b)
              for (auto a = need.lo[0]; ok && a <= need.hi[0]; ++a)
                ok = have[static_cast<std::size_t>(index.offset(a, b, c))] != 0;
          if (!ok) {
            std::ostringstream os;
            os << "coarse level " << coarse.index << " does not cover interpolation stencil " << need
               << " for fine point (" << i << "," << j << "," << k << ")";
            throw CoverError(os.str());
          }
          for (int v = 0; v < nv; ++v) {
            const auto& src = tmp[static_cast<std::size_t>(v)];
            double vz = 0.0;
            for (std::int64_t c = 0; c < nz; ++c) {
              double vy = 0.0;
              for (std::int64_t b = 0; b < ny; ++b) {
                const double* row = src.data() + index.offset(Sx.first, Sy.first + b, Sz.first + c);
                double vx = 0.0;
                for (std::int64_t a = 0; a < nx; ++a) vx += Sx.weights[static_cast<std::size_t>(a)] * row[a];
                vy += Sy.weights[static_cast<std::size_t>(b)] * vx;
              }
              vz += Sz.weights[static_cast<std::size_t>(c)] * vy;
            }
            fd.var(v, 0)(i, j, k) = vz;
          }
        }
  }
}

}  // namespace

void prolong(const Level& coarse, Level& fine, std::string_view group, const InterpSpec& interp,
             const std::vector<std::vector<IndexBox>>& targets, const comm::Executor& exec) {
  interp.validate();
  if (targets.size() != fine.patches.size()) throw std::invalid_argument("one target list per fine patch expected");
  exec.parallel_for(static_cast<int>(fine.patches.size()), [&](int p) {
    const auto pi = static_cast<std::size_t>(p);
    prolong_patch(coarse, fine.patches[pi], fine.time, group, interp, targets[pi]);
  });
}

void restrict_to(const Level& fine, Level& coarse, std::string_view group, const comm::Executor& exec) {
  if (std::abs(fine.time - coarse.time) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "restriction from level " << fine.index << " at t=" << fine.time << " into level " << coarse.index
       << " at t=" << coarse.time << ": times differ";
    throw std::runtime_error(os.str());
  }
  exec.parallel_for(static_cast<int>(coarse.patches.size()), [&](int q) {
    Patch& cp = coarse.patches[static_cast<std::size_t>(q)];
    GroupData& cd = cp.group(group);
    const IndexBox under = refine(cp.owned);
    for (const auto& fp : fine.patches) {
      const GroupData& fd = fp.group(group);
      for (const auto& r : fine.refined) {
        const IndexBox cut = intersect(intersect(fp.owned, r), under);
        if (cut.empty()) continue;
        IndexBox cc;
        for (int d = 0; d < 3; ++d) {
          cc.lo[d] = -floor_div(-cut.lo[d], 2);
          cc.hi[d] = floor_div(cut.hi[d], 2);
        }
        if (cc.empty()) continue;
        for (int v = 0; v < cd.num_vars(); ++v) {
          const Array3 src = fd.var(v, 0);
          const Array3 dst = cd.var(v, 0);
          for (auto k = cc.lo[2]; k <= cc.hi[2]; ++k)
            for (auto j = cc.lo[1]; j <= cc.hi[1]; ++j)
              for (auto i = cc.lo[0]; i <= cc.hi[0]; ++i) dst(i, j, k) = src(2 * i, 2 * j, 2 * k);
        }
      }
    }
  });
}

}  // namespace tapestry::amr
