#pragma once

#include <array>
#include <span>
#include <string>

#include "tapestry/flesh/registry.hpp"

namespace tapestry::wave {

inline constexpr const char* group_name = "wave::evolved";

enum class InitialData { minkowski_constant, gaussian, plane };

InitialData parse_initial_data(const std::string& s);

struct WaveParams {
  double c = 1.0;
  double epsilon = 0.1;
  InitialData initial = InitialData::gaussian;
  double amplitude = 1.0;
  double sigma = 0.1;
  std::array<double, 3> centre{0.5, 0.5, 0.5};
  std::array<std::int64_t, 3> k{1, 0, 0};
  /// Periodic box size along each dimension, used by the plane wave.
  std::array<double, 3> period{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  static WaveParams from(const flesh::ParameterTable& params);
  void validate() const;
};

/// Value of the exact plane-wave solution (phi, pi) at point x, time t.
std::array<double, 2> plane_wave(const WaveParams& p, const std::array<double, 3>& x, double t);

/// Fill phi and pi on the whole ghost-extended box of the block.
void initial_data(const WaveParams& p, const flesh::BlockContext& ctx, GroupData& fields);

/// dphi, dpi at the owned points of the block (ghosts must be valid).
void rhs(const WaveParams& p, double h, const IndexBox& owned, const GroupData& fields, std::span<const Array3> out);

/// Sum over owned points of h^3 (pi^2/2 + c^2 |grad phi|^2 / 2) with fourth
/// order centred gradients; ghosts must be valid.
double energy(std::span<const Patch> patches, double h, double c);

flesh::ThornManifest wave_thorn();

}  // namespace tapestry::wave
