#include "tapestry/unigrid/exchange.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace tapestry::unigrid {

ExchangeStrategy parse_strategy(const std::string& s) {
  if (s == "directional") return ExchangeStrategy::directional;
  if (s == "neighbors") return ExchangeStrategy::neighbors;
  throw std::invalid_argument("unknown exchange strategy '" + s + "' (expected directional|neighbors)");
}

const char* to_string(ExchangeStrategy s) {
  return s == ExchangeStrategy::directional ? "directional" : "neighbors";
}

std::int64_t HaloPlan::message_volume() const {
  std::int64_t v = 0;
  for (const auto& t : transfers) v += t.dst_box.volume();
  return v;
}

HaloPlan build_directional_plan(const DomainSpec& domain, const Decomposition& dec) {
  HaloPlan plan;
  plan.phases = 3;
  plan.clamp_box = domain.box();
  const int g = domain.ghost_width;
  if (g == 0) return plan;
  for (int d = 0; d < 3; ++d) {
    for (const Block& b : dec.blocks) {
      const auto c = dec.topology.coords_of(b.rank);
      for (int s : {-1, +1}) {
        IndexBox slab;
        for (int e = 0; e < 3; ++e) {
          if (e < d) {
            slab.lo[e] = b.owned.lo[e] - g;
            slab.hi[e] = b.owned.hi[e] + g;
          } else if (e > d) {
            slab.lo[e] = b.owned.lo[e];
            slab.hi[e] = b.owned.hi[e];
          }
        }
        if (s < 0) {
          slab.lo[d] = b.owned.lo[d] - g;
          slab.hi[d] = b.owned.lo[d] - 1;
        } else {
          slab.lo[d] = b.owned.hi[d] + 1;
          slab.hi[d] = b.owned.hi[d] + g;
        }
        std::array<int, 3> off{0, 0, 0};
        off[d] = s;
        const int nb = b.neighbors[static_cast<std::size_t>(direction_index(off[0], off[1], off[2]))];
        PointMap map;
        if (nb < 0) {
          map.clamp[d] = true;
          plan.fills.push_back({d, b.rank, slab, map});
          continue;
        }
        const int nc = c[d] + s;
        if (nc < 0) map.shift[d] = domain.points[d];
        if (nc >= dec.topology.dims[d]) map.shift[d] = -domain.points[d];
        Transfer t;
        t.phase = d;
        t.src_patch = nb;
        t.dst_patch = b.rank;
        t.dst_box = slab;
        t.map = map;
        t.region = static_cast<int>(plan.transfers.size());
        plan.transfers.push_back(t);
      }
    }
  }
  return plan;
}

HaloPlan build_neighbor_plan(const DomainSpec& domain, const Decomposition& dec) {
  HaloPlan plan;
  plan.phases = 1;
  plan.clamp_box = domain.box();
  const int g = domain.ghost_width;
  if (g == 0) return plan;
  for (const Block& b : dec.blocks) {
    const auto c = dec.topology.coords_of(b.rank);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const std::array<int, 3> off{dx, dy, dz};
          IndexBox region;
          PointMap map;
          std::array<int, 3> src = c;
          bool any_remote = false;
          for (int d = 0; d < 3; ++d) {
            if (off[d] < 0) {
              region.lo[d] = b.owned.lo[d] - g;
              region.hi[d] = b.owned.lo[d] - 1;
            } else if (off[d] > 0) {
              region.lo[d] = b.owned.hi[d] + 1;
              region.hi[d] = b.owned.hi[d] + g;
            } else {
              region.lo[d] = b.owned.lo[d];
              region.hi[d] = b.owned.hi[d];
              continue;
            }
            const int nc = c[d] + off[d];
            if (nc >= 0 && nc < dec.topology.dims[d]) {
              src[d] = nc;
              any_remote = true;
            } else if (domain.boundary == Boundary::periodic) {
              src[d] = (nc + dec.topology.dims[d]) % dec.topology.dims[d];
              map.shift[d] = nc < 0 ? domain.points[d] : -domain.points[d];
              any_remote = true;
            } else {
              map.clamp[d] = true;
            }
          }
          if (!any_remote) {
            plan.fills.push_back({0, b.rank, region, map});
            continue;
          }
          Transfer t;
          t.phase = 0;
          t.src_patch = dec.topology.rank_of(src);
          t.dst_patch = b.rank;
          t.dst_box = region;
          t.map = map;
          t.region = static_cast<int>(plan.transfers.size());
          plan.transfers.push_back(t);
        }
  }
  return plan;
}

HaloPlan build_plan(ExchangeStrategy s, const DomainSpec& domain, const Decomposition& dec) {
  return s == ExchangeStrategy::directional ? build_directional_plan(domain, dec)
                                            : build_neighbor_plan(domain, dec);
}

HaloPlan build_sibling_plan(std::span<const Patch> patches) {
  HaloPlan plan;
  plan.phases = 1;
  for (std::size_t a = 0; a < patches.size(); ++a)
    for (std::size_t b = 0; b < patches.size(); ++b) {
      if (a == b) continue;
      const IndexBox cut = intersect(patches[a].ext, patches[b].owned);
      if (cut.empty()) continue;
      Transfer t;
      t.src_patch = static_cast<int>(b);
      t.dst_patch = static_cast<int>(a);
      t.dst_box = cut;
      t.region = static_cast<int>(plan.transfers.size());
      plan.transfers.push_back(t);
    }
  return plan;
}

namespace {

std::vector<std::int64_t> source_indices(const IndexBox& dst, int d, const PointMap& map, const IndexBox& clamp_box) {
  std::vector<std::int64_t> q;
  q.reserve(static_cast<std::size_t>(dst.extent(d)));
  for (std::int64_t p = dst.lo[d]; p <= dst.hi[d]; ++p) {
    std::int64_t v = p + map.shift[d];
    if (map.clamp[d]) v = std::clamp(v, clamp_box.lo[d], clamp_box.hi[d]);
    q.push_back(v);
  }
  return q;
}

// Gather src values at mapped points of `dst` into out, var-major x-fastest.
void gather(const GroupData& src, int tl, const IndexBox& dst, const PointMap& map, const IndexBox& clamp_box,
            std::vector<double>& out) {
  const auto qx = source_indices(dst, 0, map, clamp_box);
  const auto qy = source_indices(dst, 1, map, clamp_box);
  const auto qz = source_indices(dst, 2, map, clamp_box);
  out.clear();
  out.reserve(static_cast<std::size_t>(dst.volume() * src.num_vars()));
  for (int v = 0; v < src.num_vars(); ++v) {
    const Array3 a = src.var(v, tl);
    for (auto k : qz)
      for (auto j : qy) {
        const double* row = a.data() + a.offset(a.box().lo[0], j, k);
        for (auto i : qx) out.push_back(row[i - a.box().lo[0]]);
      }
  }
}

void scatter(GroupData& dst_data, int tl, const IndexBox& dst, const double* values) {
  std::size_t n = 0;
  for (int v = 0; v < dst_data.num_vars(); ++v) {
    const Array3 a = dst_data.var(v, tl);
    for (auto k = dst.lo[2]; k <= dst.hi[2]; ++k)
      for (auto j = dst.lo[1]; j <= dst.hi[1]; ++j) {
        double* row = a.data() + a.offset(dst.lo[0], j, k);
        for (auto i = 0; i < dst.extent(0); ++i) row[i] = values[n++];
      }
  }
}

}  // namespace

void execute(const HaloPlan& plan, std::span<Patch> patches, std::string_view group, int tl,
             comm::Transport& transport, const comm::Executor& exec) {
  std::set<int> rank_set;
  for (const auto& p : patches) rank_set.insert(p.rank);
  const std::vector<int> ranks(rank_set.begin(), rank_set.end());

  for (int phase = 0; phase < plan.phases; ++phase) {
    exec.parallel_for(static_cast<int>(ranks.size()), [&](int ri) {
      const int rank = ranks[static_cast<std::size_t>(ri)];
      for (const Transfer& t : plan.transfers) {
        if (t.phase != phase) continue;
        const Patch& src = patches[static_cast<std::size_t>(t.src_patch)];
        if (src.rank != rank) continue;
        comm::Message m;
        m.source = rank;
        m.dest = patches[static_cast<std::size_t>(t.dst_patch)].rank;
        m.phase = phase;
        m.region = t.region;
        m.box = t.dst_box;
        const GroupData& data = src.group(group);
        m.num_vars = data.num_vars();
        gather(data, tl, t.dst_box, t.map, plan.clamp_box, m.payload);
        transport.send(std::move(m));
      }
    });
    exec.parallel_for(static_cast<int>(ranks.size()), [&](int ri) {
      const int rank = ranks[static_cast<std::size_t>(ri)];
      for (const comm::Message& m : transport.receive(rank)) {
        const Transfer& t = plan.transfers.at(static_cast<std::size_t>(m.region));
        scatter(patches[static_cast<std::size_t>(t.dst_patch)].group(group), tl, m.box, m.payload.data());
      }
      std::vector<double> buf;
      for (const LocalFill& f : plan.fills) {
        if (f.phase != phase) continue;
        Patch& p = patches[static_cast<std::size_t>(f.patch)];
        if (p.rank != rank) continue;
        GroupData& data = p.group(group);
        gather(data, tl, f.dst_box, f.map, plan.clamp_box, buf);
        scatter(data, tl, f.dst_box, buf.data());
      }
    });
  }
}

void exchange_directional(const DomainSpec& domain, const Decomposition& dec, std::span<Patch> patches,
                          std::string_view group, comm::Transport& transport, const comm::Executor& exec) {
  execute(build_directional_plan(domain, dec), patches, group, 0, transport, exec);
}

void exchange_neighbors(const DomainSpec& domain, const Decomposition& dec, std::span<Patch> patches,
                        std::string_view group, comm::Transport& transport, const comm::Executor& exec) {
  execute(build_neighbor_plan(domain, dec), patches, group, 0, transport, exec);
}

}  // namespace tapestry::unigrid
