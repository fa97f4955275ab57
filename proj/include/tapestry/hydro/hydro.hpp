#pragma once

#include <array>
#include <atomic>
#include <span>
#include <string>

#include "tapestry/flesh/registry.hpp"

namespace tapestry::hydro {

inline constexpr const char* group_name = "hydro::conserved";

struct Prim {
  double rho = 1.0;
  std::array<double, 3> v{0.0, 0.0, 0.0};
  double p = 1.0;
};

struct Cons {
  double D = 0.0;
  std::array<double, 3> S{0.0, 0.0, 0.0};
  double E = 0.0;
};

struct Eos {
  double gamma = 1.4;
  double sound_speed(const Prim& w) const;
};

struct Floors {
  double rho = 1e-10;
  double p = 1e-12;
};

/// Counts of floor applications since the last reset.
struct FloorLog {
  std::atomic<std::int64_t> density{0};
  std::atomic<std::int64_t> pressure{0};
  void reset() {
    density = 0;
    pressure = 0;
  }
};
FloorLog& floor_log();

Cons prim2con(const Prim& w, const Eos& eos);
/// Throws std::domain_error on non-finite input. Density and pressure below
/// the floors are raised to them and counted in floor_log().
Prim con2prim(const Cons& u, const Eos& eos, const Floors& floors = {});

/// Physical Euler flux along dimension d.
Cons flux(const Prim& w, int d, const Eos& eos);
Cons hlle_flux(const Prim& left, const Prim& right, int d, const Eos& eos);

enum class Reconstruction { plm_minmod, ppm };
Reconstruction parse_reconstruction(const std::string& s);

/// Face values of every cell of a line: lo[i] at i-1/2 and hi[i] at i+1/2.
/// Cells lacking a full stencil (two cells at each end for PPM, one for PLM)
/// fall back to constant states.
void reconstruct(std::span<const double> q, Reconstruction method, std::span<double> lo, std::span<double> hi);

struct HydroParams {
  Eos eos;
  Floors floors;
  Reconstruction method = Reconstruction::ppm;
  static HydroParams from(const flesh::ParameterTable& params);
};

/// -(sum over d of flux differences)/h at the owned points, from conserved
/// variables with valid ghosts (3 wide for PPM).
void rhs(const HydroParams& p, double h, const IndexBox& owned, const GroupData& state, std::span<const Array3> out);

/// Largest |v_d| + c_s over the owned points.
double max_speed(const HydroParams& p, const IndexBox& owned, const GroupData& state);

enum class InitialData { sod, uniform, smooth };

/// Sod states along `axis`: left of the domain midpoint rho=1, p=1; right
/// rho=0.125, p=0.1; at rest.
void shocktube_init(const HydroParams& p, const flesh::BlockContext& ctx, GroupData& state, int axis);

flesh::ThornManifest hydro_thorn();

}  // namespace tapestry::hydro
