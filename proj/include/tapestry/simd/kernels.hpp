#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

// Data-parallel inner loops used by the integrator and the wave thorn.
// Every kernel has a scalar reference implementation; vector variants are
// selected at runtime and must produce bit-identical results, so they
// evaluate exactly the same sequence of IEEE operations per element (no
// FMA contraction, no reassociation).

namespace tapestry::simd {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa);
Isa parse_isa(const std::string& s);

/// out[i] = y0[i] + dt * (c[0]*k[0][i] + c[1]*k[1][i] + ...), summed left to
/// right. With no terms, out is a copy of y0.
using LincombFn = void (*)(double* out, const double* y0, double dt, const double* coeffs,
                           const double* const* ks, int nterms, std::size_t n);

/// One x-row of the wave right-hand side. All pointers address the first
/// point of the row; neighbours are reached through the strides.
struct WaveRow {
  const double* phi;
  const double* pi;
  double* dphi;
  double* dpi;
  std::int64_t n;
  std::int64_t sy;
  std::int64_t sz;
  double lap_scale;   // c^2 / (12 h^2)
  double diss_scale;  // epsilon / (64 h)
};

/// dphi = pi + D(phi); dpi = lap_scale * L(phi) + D(pi), where L is the sum of
/// the fourth-order second-difference stencils (-1,16,-30,16,-1) and D is
/// diss_scale times the sum of the sixth-difference stencils
/// (1,-6,15,-20,15,-6,1).
using WaveRowFn = void (*)(const WaveRow& row);

struct KernelTable {
  Isa isa;
  LincombFn lincomb;
  WaveRowFn wave_rhs_row;
};

bool supported(Isa isa);
/// Best ISA on this CPU, unless TAPESTRY_SIMD=scalar|avx2 overrides it.
Isa detect();
const KernelTable& table(Isa isa);
/// Currently selected table.
const KernelTable& kernels();
void select(Isa isa);

namespace scalar {
void lincomb(double* out, const double* y0, double dt, const double* coeffs, const double* const* ks, int nterms,
             std::size_t n);
void wave_rhs_row(const WaveRow& row);
}  // namespace scalar

#if defined(__x86_64__) || defined(__i386__)
namespace avx2 {
void lincomb(double* out, const double* y0, double dt, const double* coeffs, const double* const* ks, int nterms,
             std::size_t n);
void wave_rhs_row(const WaveRow& row);
}  // namespace avx2
#endif

}  // namespace tapestry::simd
