#include "tapestry/wave/wave.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tapestry/simd/kernels.hpp"

namespace tapestry::wave {

InitialData parse_initial_data(const std::string& s) {
  if (s == "minkowski-constant") return InitialData::minkowski_constant;
  if (s == "gaussian") return InitialData::gaussian;
  if (s == "plane") return InitialData::plane;
  throw std::invalid_argument("unknown wave initial data '" + s + "'");
}

WaveParams WaveParams::from(const flesh::ParameterTable& params) {
  WaveParams p;
  p.c = params.get_real("wave::c");
  p.epsilon = params.get_real("wave::epsilon");
  p.initial = parse_initial_data(params.get_string("wave::initial_data"));
  p.amplitude = params.get_real("wave::amplitude");
  p.sigma = params.get_real("wave::sigma");
  p.centre = {params.get_real("wave::x0"), params.get_real("wave::y0"), params.get_real("wave::z0")};
  p.k = {params.get_int("wave::kx"), params.get_int("wave::ky"), params.get_int("wave::kz")};
  if (params.has("grid::h")) {
    const double h = params.get_real("grid::h");
    p.period = {static_cast<double>(params.get_int("grid::nx")) * h, static_cast<double>(params.get_int("grid::ny")) * h,
                static_cast<double>(params.get_int("grid::nz")) * h};
    p.origin = {params.get_real("grid::xmin"), params.get_real("grid::ymin"), params.get_real("grid::zmin")};
  }
  return p;
}

void WaveParams::validate() const {
  if (!(c > 0.0)) throw std::invalid_argument("wave speed must be positive");
  if (initial == InitialData::gaussian && !(sigma > 0.0)) throw std::invalid_argument("gaussian width must be positive");
  for (double L : period)
    if (!(L > 0.0)) throw std::invalid_argument("plane wave needs a positive period");
}

std::array<double, 2> plane_wave(const WaveParams& p, const std::array<double, 3>& x, double t) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double phase = 0.0, knorm2 = 0.0;
  for (int d = 0; d < 3; ++d) {
    const double kd = static_cast<double>(p.k[d]) / p.period[d];
    phase += kd * (x[d] - p.origin[d]);
    knorm2 += kd * kd;
  }
  const double omega = two_pi * p.c * std::sqrt(knorm2);
  const double arg = two_pi * phase - omega * t;
  return {p.amplitude * std::sin(arg), -omega * p.amplitude * std::cos(arg)};
}

void initial_data(const WaveParams& p, const flesh::BlockContext& ctx, GroupData& fields) {
  p.validate();
  Array3 phi = fields.var(0), pi = fields.var(1);
  const IndexBox& b = fields.box();
  for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
    for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
      for (auto i = b.lo[0]; i <= b.hi[0]; ++i) {
        const std::array<double, 3> x{ctx.x(0, i), ctx.x(1, j), ctx.x(2, k)};
        switch (p.initial) {
          case InitialData::minkowski_constant:
            phi(i, j, k) = 0.0;
            pi(i, j, k) = 0.0;
            break;
          case InitialData::gaussian: {
            double r2 = 0.0;
            for (int d = 0; d < 3; ++d) r2 += (x[d] - p.centre[d]) * (x[d] - p.centre[d]);
            phi(i, j, k) = p.amplitude * std::exp(-r2 / (2.0 * p.sigma * p.sigma));
            pi(i, j, k) = 0.0;
            break;
          }
          case InitialData::plane: {
            const auto v = plane_wave(p, x, ctx.time);
            phi(i, j, k) = v[0];
            pi(i, j, k) = v[1];
            break;
          }
        }
      }
}

void rhs(const WaveParams& p, double h, const IndexBox& owned, const GroupData& fields, std::span<const Array3> out) {
  const Array3 phi = fields.var(0), pi = fields.var(1);
  const auto& kern = simd::kernels();
  simd::WaveRow row{};
  row.n = owned.extent(0);
  row.sy = phi.stride_y();
  row.sz = phi.stride_z();
  row.lap_scale = p.c * p.c / (12.0 * h * h);
  row.diss_scale = p.epsilon / (64.0 * h);
  for (auto k = owned.lo[2]; k <= owned.hi[2]; ++k)
    for (auto j = owned.lo[1]; j <= owned.hi[1]; ++j) {
      const auto off = phi.offset(owned.lo[0], j, k);
      row.phi = phi.data() + off;
      row.pi = pi.data() + off;
      row.dphi = out[0].data() + off;
      row.dpi = out[1].data() + off;
      kern.wave_rhs_row(row);
    }
}

double energy(std::span<const Patch> patches, double h, double c) {
  double total = 0.0;
  const double inv12h = 1.0 / (12.0 * h);
  for (const auto& patch : patches) {
    const auto& f = patch.group(group_name);
    const Array3 phi = f.var(0), pi = f.var(1);
    const std::array<std::int64_t, 3> stride{1, phi.stride_y(), phi.stride_z()};
    const IndexBox& o = patch.owned;
    double sum = 0.0;
    for (auto k = o.lo[2]; k <= o.hi[2]; ++k)
      for (auto j = o.lo[1]; j <= o.hi[1]; ++j)
        for (auto i = o.lo[0]; i <= o.hi[0]; ++i) {
          const double* q = phi.data() + phi.offset(i, j, k);
          double grad2 = 0.0;
          for (int d = 0; d < 3; ++d) {
            const auto s = stride[d];
            const double g = (8.0 * (q[s] - q[-s]) - (q[2 * s] - q[-2 * s])) * inv12h;
            grad2 += g * g;
          }
          const double pv = pi(i, j, k);
          sum += 0.5 * pv * pv + 0.5 * c * c * grad2;
        }
    total += sum;
  }
  return total * h * h * h;
}

flesh::ThornManifest wave_thorn() {
  using namespace flesh;
  ThornManifest m;
  m.name = "wave";
  m.groups = {VariableGroup{group_name, {"phi", "pi"}, 3, 5}};
  m.parameters = {
      real_param("wave::c", 1.0, std::pair{1e-300, 1e300}, false, "wave speed"),
      real_param("wave::epsilon", 0.1, std::pair{0.0, 1e300}, false, "Kreiss-Oliger dissipation strength"),
      keyword_param("wave::initial_data", "gaussian", {"minkowski-constant", "gaussian", "plane"}),
      real_param("wave::amplitude", 1.0, {}, false, "initial amplitude"),
      real_param("wave::sigma", 0.1, std::pair{1e-300, 1e300}, false, "gaussian width"),
      real_param("wave::x0", 0.5),
      real_param("wave::y0", 0.5),
      real_param("wave::z0", 0.5),
      int_param("wave::kx", 1),
      int_param("wave::ky", 0),
      int_param("wave::kz", 0),
  };

  ScheduleItem init;
  init.name = "wave::initial_data";
  init.bin = Bin::initial;
  init.writes = {group_name};
  init.sync_groups = {group_name};
  init.local = [](BlockContext& ctx) {
    initial_data(WaveParams::from(ctx.params), ctx, ctx.patch.group(group_name));
  };
  m.items.push_back(init);

  EvolvedGroup eg;
  eg.group = group_name;
  eg.stencil_radius = 3;
  eg.rhs = [](const BlockContext& ctx, const GroupData& state, std::span<const Array3> out) {
    rhs(WaveParams::from(ctx.params), ctx.geom.h, ctx.patch.owned, state, out);
  };
  eg.max_speed = [](const BlockContext& ctx, const GroupData&) { return ctx.params.get_real("wave::c"); };
  m.evolved.push_back(eg);
  return m;
}

}  // namespace tapestry::wave
