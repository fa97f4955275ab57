#include "tapestry/hydro/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace tapestry::hydro {

double Eos::sound_speed(const Prim& w) const { return std::sqrt(gamma * w.p / w.rho); }

FloorLog& floor_log() {
  static FloorLog log;
  return log;
}

Cons prim2con(const Prim& w, const Eos& eos) {
  Cons u;
  u.D = w.rho;
  double v2 = 0.0;
  for (int d = 0; d < 3; ++d) {
    u.S[d] = w.rho * w.v[d];
    v2 += w.v[d] * w.v[d];
  }
  u.E = w.p / (eos.gamma - 1.0) + 0.5 * w.rho * v2;
  return u;
}

Prim con2prim(const Cons& u, const Eos& eos, const Floors& floors) {
  if (!std::isfinite(u.D) || !std::isfinite(u.E) || !std::isfinite(u.S[0]) || !std::isfinite(u.S[1]) ||
      !std::isfinite(u.S[2]))
    throw std::domain_error("non-finite conserved state");
  Prim w;
  if (u.D < floors.rho) {
    w.rho = floors.rho;
    w.v = {0.0, 0.0, 0.0};
    floor_log().density.fetch_add(1, std::memory_order_relaxed);
  } else {
    w.rho = u.D;
    for (int d = 0; d < 3; ++d) w.v[d] = u.S[d] / u.D;
  }
  double s2 = 0.0;
  for (int d = 0; d < 3; ++d) s2 += u.S[d] * u.S[d];
  w.p = (eos.gamma - 1.0) * (u.E - s2 / (2.0 * std::max(u.D, floors.rho)));
  if (!(w.p >= floors.p)) {
    w.p = floors.p;
    floor_log().pressure.fetch_add(1, std::memory_order_relaxed);
  }
  return w;
}

Cons flux(const Prim& w, int d, const Eos& eos) {
  const Cons u = prim2con(w, eos);
  const double vd = w.v[d];
  Cons f;
  f.D = u.D * vd;
  for (int e = 0; e < 3; ++e) f.S[e] = u.S[e] * vd;
  f.S[d] += w.p;
  f.E = (u.E + w.p) * vd;
  return f;
}

Cons hlle_flux(const Prim& l, const Prim& r, int d, const Eos& eos) {
  const double cl = eos.sound_speed(l), cr = eos.sound_speed(r);
  const double sm = std::min({l.v[d] - cl, r.v[d] - cr, 0.0});
  const double sp = std::max({l.v[d] + cl, r.v[d] + cr, 0.0});
  const Cons fl = flux(l, d, eos), fr = flux(r, d, eos);
  if (sm >= 0.0) return fl;
  if (sp <= 0.0) return fr;
  const Cons ul = prim2con(l, eos), ur = prim2con(r, eos);
  const double inv = 1.0 / (sp - sm);
  auto mix = [&](double a, double b, double qa, double qb) { return (sp * a - sm * b + sp * sm * (qb - qa)) * inv; };
  Cons f;
  f.D = mix(fl.D, fr.D, ul.D, ur.D);
  for (int e = 0; e < 3; ++e) f.S[e] = mix(fl.S[e], fr.S[e], ul.S[e], ur.S[e]);
  f.E = mix(fl.E, fr.E, ul.E, ur.E);
  return f;
}

Reconstruction parse_reconstruction(const std::string& s) {
  if (s == "plm-minmod") return Reconstruction::plm_minmod;
  if (s == "ppm") return Reconstruction::ppm;
  throw std::invalid_argument("unknown reconstruction '" + s + "' (expected plm-minmod|ppm)");
}

namespace {

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

// monotonized central slope used for the PPM interface values
double mc_slope(double qm, double q, double qp) {
  const double dl = q - qm, dr = qp - q;
  if (dl * dr <= 0.0) return 0.0;
  const double m = std::min({std::abs(0.5 * (qp - qm)), 2.0 * std::abs(dl), 2.0 * std::abs(dr)});
  return std::copysign(m, dr);
}

}  // namespace

void reconstruct(std::span<const double> q, Reconstruction method, std::span<double> lo, std::span<double> hi) {
  const auto n = q.size();
  for (std::size_t i = 0; i < n; ++i) lo[i] = hi[i] = q[i];
  if (method == Reconstruction::plm_minmod) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double s = minmod(q[i] - q[i - 1], q[i + 1] - q[i]);
      lo[i] = q[i] - 0.5 * s;
      hi[i] = q[i] + 0.5 * s;
    }
    return;
  }
  if (n < 5) return;
  std::vector<double> dq(n, 0.0), face(n, 0.0);  // face[i] sits at i+1/2
  for (std::size_t i = 1; i + 1 < n; ++i) dq[i] = mc_slope(q[i - 1], q[i], q[i + 1]);
  for (std::size_t i = 1; i + 2 < n; ++i) face[i] = 0.5 * (q[i] + q[i + 1]) - (dq[i + 1] - dq[i]) / 6.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    double al = face[i - 1], ar = face[i];
    const double c = q[i];
    if ((ar - c) * (c - al) <= 0.0) {
      al = ar = c;
    } else {
      const double d = ar - al, m = c - 0.5 * (al + ar), d2 = d * d / 6.0;
      if (d * m > d2) al = 3.0 * c - 2.0 * ar;
      else if (-d2 > d * m) ar = 3.0 * c - 2.0 * al;
    }
    lo[i] = al;
    hi[i] = ar;
  }
}

HydroParams HydroParams::from(const flesh::ParameterTable& params) {
  HydroParams p;
  p.eos.gamma = params.get_real("hydro::gamma");
  p.floors.rho = params.get_real("hydro::rho_floor");
  p.floors.p = params.get_real("hydro::p_floor");
  p.method = parse_reconstruction(params.get_string("hydro::reconstruction"));
  return p;
}

namespace {

enum { RHO, VX, VY, VZ, P, NPRIM };

Cons load(const GroupData& s, std::int64_t off) {
  Cons u;
  u.D = s.raw(0)[static_cast<std::size_t>(off)];
  for (int d = 0; d < 3; ++d) u.S[d] = s.raw(1 + d)[static_cast<std::size_t>(off)];
  u.E = s.raw(4)[static_cast<std::size_t>(off)];
  return u;
}

Prim floored(Prim w, const Floors& f) {
  w.rho = std::max(w.rho, f.rho);
  w.p = std::max(w.p, f.p);
  return w;
}

}  // namespace

void rhs(const HydroParams& hp, double h, const IndexBox& owned, const GroupData& state, std::span<const Array3> out) {
  const IndexBox& ext = state.box();
  const auto vol = static_cast<std::size_t>(ext.volume());
  std::array<std::vector<double>, NPRIM> prim;
  for (auto& a : prim) a.resize(vol);
  for (std::size_t i = 0; i < vol; ++i) {
    const Prim w = con2prim(load(state, static_cast<std::int64_t>(i)), hp.eos, hp.floors);
    prim[RHO][i] = w.rho;
    prim[VX][i] = w.v[0];
    prim[VY][i] = w.v[1];
    prim[VZ][i] = w.v[2];
    prim[P][i] = w.p;
  }
  for (const auto& o : out)
    for (auto k = owned.lo[2]; k <= owned.hi[2]; ++k)
      for (auto j = owned.lo[1]; j <= owned.hi[1]; ++j)
        for (auto i = owned.lo[0]; i <= owned.hi[0]; ++i) o(i, j, k) = 0.0;

  const Array3 index(nullptr, ext);
  const std::array<std::int64_t, 3> stride{1, index.stride_y(), index.stride_z()};
  const double inv_h = 1.0 / h;
  for (int d = 0; d < 3; ++d) {
    const int e1 = (d + 1) % 3, e2 = (d + 2) % 3;
    const std::int64_t first = ext.lo[d], n = ext.extent(d);
    std::array<std::vector<double>, NPRIM> line, lo, hi;
    for (int c = 0; c < NPRIM; ++c) {
      line[c].resize(static_cast<std::size_t>(n));
      lo[c].resize(static_cast<std::size_t>(n));
      hi[c].resize(static_cast<std::size_t>(n));
    }
    std::vector<Cons> f(static_cast<std::size_t>(n));
    for (auto b = owned.lo[e2]; b <= owned.hi[e2]; ++b)
      for (auto a = owned.lo[e1]; a <= owned.hi[e1]; ++a) {
        Index3 p0{};
        p0[d] = first;
        p0[e1] = a;
        p0[e2] = b;
        const std::int64_t base = index.offset(p0[0], p0[1], p0[2]);
        for (int c = 0; c < NPRIM; ++c) {
          for (std::int64_t m = 0; m < n; ++m)
            line[c][static_cast<std::size_t>(m)] = prim[c][static_cast<std::size_t>(base + m * stride[d])];
          reconstruct(line[c], hp.method, lo[c], hi[c]);
        }
        // flux at the face between line cells m and m+1, for the faces around owned cells
        const std::int64_t m0 = owned.lo[d] - first - 1, m1 = owned.hi[d] - first;
        for (std::int64_t m = m0; m <= m1; ++m) {
          const auto L = static_cast<std::size_t>(m), R = static_cast<std::size_t>(m + 1);
          const Prim wl = floored({hi[RHO][L], {hi[VX][L], hi[VY][L], hi[VZ][L]}, hi[P][L]}, hp.floors);
          const Prim wr = floored({lo[RHO][R], {lo[VX][R], lo[VY][R], lo[VZ][R]}, lo[P][R]}, hp.floors);
          f[L] = hlle_flux(wl, wr, d, hp.eos);
        }
        for (std::int64_t m = m0 + 1; m <= m1; ++m) {
          const auto off = base + m * stride[d];
          const Cons& fp = f[static_cast<std::size_t>(m)];
          const Cons& fm = f[static_cast<std::size_t>(m - 1)];
          out[0].data()[off] -= (fp.D - fm.D) * inv_h;
          for (int c = 0; c < 3; ++c) out[1 + c].data()[off] -= (fp.S[c] - fm.S[c]) * inv_h;
          out[4].data()[off] -= (fp.E - fm.E) * inv_h;
        }
      }
  }
}

double max_speed(const HydroParams& hp, const IndexBox& owned, const GroupData& state) {
  const Array3 index(nullptr, state.box());
  double s = 0.0;
  for (auto k = owned.lo[2]; k <= owned.hi[2]; ++k)
    for (auto j = owned.lo[1]; j <= owned.hi[1]; ++j)
      for (auto i = owned.lo[0]; i <= owned.hi[0]; ++i) {
        const Prim w = con2prim(load(state, index.offset(i, j, k)), hp.eos, hp.floors);
        const double c = hp.eos.sound_speed(w);
        for (int d = 0; d < 3; ++d) s = std::max(s, std::abs(w.v[d]) + c);
      }
  return s;
}

namespace {

void store(GroupData& s, const Index3& p, const Cons& u) {
  s.var(0)(p) = u.D;
  for (int d = 0; d < 3; ++d) s.var(1 + d)(p) = u.S[d];
  s.var(4)(p) = u.E;
}

double midpoint(const flesh::ParameterTable& params, int axis) {
  static const char* n[] = {"grid::nx", "grid::ny", "grid::nz"};
  static const char* lo[] = {"grid::xmin", "grid::ymin", "grid::zmin"};
  const double h = params.get_real("grid::h");
  return params.get_real(lo[axis]) + 0.5 * static_cast<double>(params.get_int(n[axis]) - 1) * h;
}

}  // namespace

void shocktube_init(const HydroParams& p, const flesh::BlockContext& ctx, GroupData& state, int axis) {
  const double mid = midpoint(ctx.params, axis);
  const Cons left = prim2con({1.0, {0.0, 0.0, 0.0}, 1.0}, p.eos);
  const Cons right = prim2con({0.125, {0.0, 0.0, 0.0}, 0.1}, p.eos);
  const IndexBox& b = state.box();
  for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
    for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
      for (auto i = b.lo[0]; i <= b.hi[0]; ++i) {
        const Index3 q{i, j, k};
        store(state, q, ctx.x(axis, q[axis]) < mid ? left : right);
      }
}

namespace {

void smooth_init(const HydroParams& p, const flesh::BlockContext& ctx, GroupData& state) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const auto& prm = ctx.params;
  const double h = prm.get_real("grid::h");
  const std::array<double, 3> L{static_cast<double>(prm.get_int("grid::nx")) * h,
                                static_cast<double>(prm.get_int("grid::ny")) * h,
                                static_cast<double>(prm.get_int("grid::nz")) * h};
  const IndexBox& b = state.box();
  for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
    for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
      for (auto i = b.lo[0]; i <= b.hi[0]; ++i) {
        const double x = two_pi * ctx.x(0, i) / L[0], y = two_pi * ctx.x(1, j) / L[1], z = two_pi * ctx.x(2, k) / L[2];
        Prim w;
        w.rho = 1.0 + 0.2 * std::sin(x) * std::cos(y) + 0.1 * std::sin(z);
        w.v = {0.3 + 0.1 * std::cos(y), -0.2 + 0.1 * std::sin(z), 0.1 * std::cos(x)};
        w.p = 1.0 + 0.1 * std::cos(x + y);
        store(state, {i, j, k}, prim2con(w, p.eos));
      }
}

}  // namespace

flesh::ThornManifest hydro_thorn() {
  using namespace flesh;
  ThornManifest m;
  m.name = "hydro";
  m.groups = {VariableGroup{group_name, {"D", "Sx", "Sy", "Sz", "E"}, 3, 3}};
  m.parameters = {
      real_param("hydro::gamma", 1.4, std::pair{1.0 + 1e-12, 1e300}, false, "adiabatic index"),
      keyword_param("hydro::reconstruction", "ppm", {"plm-minmod", "ppm"}),
      real_param("hydro::rho_floor", 1e-10, std::pair{0.0, 1e300}, false, "atmosphere density"),
      real_param("hydro::p_floor", 1e-12, std::pair{0.0, 1e300}, false, "minimum pressure"),
      keyword_param("hydro::initial_data", "sod", {"sod", "uniform", "smooth"}),
      keyword_param("hydro::orientation", "x", {"x", "y", "z"}),
  };

  ScheduleItem init;
  init.name = "hydro::initial_data";
  init.bin = Bin::initial;
  init.writes = {group_name};
  init.sync_groups = {group_name};
  init.local = [](BlockContext& ctx) {
    const auto hp = HydroParams::from(ctx.params);
    auto& state = ctx.patch.group(group_name);
    const auto& kind = ctx.params.get_string("hydro::initial_data");
    if (kind == "sod") {
      const auto& o = ctx.params.get_string("hydro::orientation");
      shocktube_init(hp, ctx, state, o == "x" ? 0 : o == "y" ? 1 : 2);
    } else if (kind == "smooth") {
      smooth_init(hp, ctx, state);
    } else {
      const Cons u = prim2con({}, hp.eos);
      const IndexBox& b = state.box();
      for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
        for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
          for (auto i = b.lo[0]; i <= b.hi[0]; ++i) store(state, {i, j, k}, u);
    }
  };
  m.items.push_back(init);

  EvolvedGroup eg;
  eg.group = group_name;
  eg.stencil_radius = 3;
  eg.rhs = [](const BlockContext& ctx, const GroupData& state, std::span<const Array3> out) {
    rhs(HydroParams::from(ctx.params), ctx.geom.h, ctx.patch.owned, state, out);
  };
  eg.max_speed = [](const BlockContext& ctx, const GroupData& state) {
    return max_speed(HydroParams::from(ctx.params), ctx.patch.owned, state);
  };
  m.evolved.push_back(eg);
  return m;
}

}  // namespace tapestry::hydro
