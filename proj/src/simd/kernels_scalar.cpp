#include <cstring>

#include "tapestry/simd/kernels.hpp"

namespace tapestry::simd::scalar {

void lincomb(double* out, const double* y0, double dt, const double* coeffs, const double* const* ks, int nterms,
             std::size_t n) {
  if (nterms == 0) {
    if (out != y0) std::memcpy(out, y0, n * sizeof(double));
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double acc = coeffs[0] * ks[0][i];
    for (int t = 1; t < nterms; ++t) acc = acc + coeffs[t] * ks[t][i];
    out[i] = y0[i] + dt * acc;
  }
}

namespace {

inline double second_diff(const double* f, std::int64_t s) {
  const double near = f[-s] + f[s];
  const double far = f[-2 * s] + f[2 * s];
  return (16.0 * near - far) - 30.0 * f[0];
}

inline double sixth_diff(const double* f, std::int64_t s) {
  const double a = f[-3 * s] + f[3 * s];
  const double b = f[-2 * s] + f[2 * s];
  const double c = f[-s] + f[s];
  return ((a - 6.0 * b) + 15.0 * c) - 20.0 * f[0];
}

}  // namespace

void wave_rhs_row(const WaveRow& r) {
  for (std::int64_t i = 0; i < r.n; ++i) {
    const double* phi = r.phi + i;
    const double* pi = r.pi + i;
    const double lap = (second_diff(phi, 1) + second_diff(phi, r.sy)) + second_diff(phi, r.sz);
    const double dphi_diss = (sixth_diff(phi, 1) + sixth_diff(phi, r.sy)) + sixth_diff(phi, r.sz);
    const double dpi_diss = (sixth_diff(pi, 1) + sixth_diff(pi, r.sy)) + sixth_diff(pi, r.sz);
    r.dphi[i] = pi[0] + r.diss_scale * dphi_diss;
    r.dpi[i] = r.lap_scale * lap + r.diss_scale * dpi_diss;
  }
}

}  // namespace tapestry::simd::scalar
