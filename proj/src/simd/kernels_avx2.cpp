#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cstring>

#include "tapestry/simd/kernels.hpp"

namespace tapestry::simd::avx2 {

__attribute__((target("avx2"))) void lincomb(double* out, const double* y0, double dt, const double* coeffs,
                                             const double* const* ks, int nterms, std::size_t n) {
  if (nterms == 0) {
    if (out != y0) std::memcpy(out, y0, n * sizeof(double));
    return;
  }
  const __m256d vdt = _mm256_set1_pd(dt);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_mul_pd(_mm256_set1_pd(coeffs[0]), _mm256_loadu_pd(ks[0] + i));
    for (int t = 1; t < nterms; ++t)
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(coeffs[t]), _mm256_loadu_pd(ks[t] + i)));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(y0 + i), _mm256_mul_pd(vdt, acc)));
  }
  for (; i < n; ++i) {
    double acc = coeffs[0] * ks[0][i];
    for (int t = 1; t < nterms; ++t) acc = acc + coeffs[t] * ks[t][i];
    out[i] = y0[i] + dt * acc;
  }
}

namespace {

__attribute__((target("avx2"))) inline __m256d load(const double* p) { return _mm256_loadu_pd(p); }

__attribute__((target("avx2"))) inline __m256d second_diff(const double* f, std::int64_t s) {
  const __m256d near = _mm256_add_pd(load(f - s), load(f + s));
  const __m256d far = _mm256_add_pd(load(f - 2 * s), load(f + 2 * s));
  return _mm256_sub_pd(_mm256_sub_pd(_mm256_mul_pd(_mm256_set1_pd(16.0), near), far),
                       _mm256_mul_pd(_mm256_set1_pd(30.0), load(f)));
}

__attribute__((target("avx2"))) inline __m256d sixth_diff(const double* f, std::int64_t s) {
  const __m256d a = _mm256_add_pd(load(f - 3 * s), load(f + 3 * s));
  const __m256d b = _mm256_add_pd(load(f - 2 * s), load(f + 2 * s));
  const __m256d c = _mm256_add_pd(load(f - s), load(f + s));
  const __m256d t = _mm256_add_pd(_mm256_sub_pd(a, _mm256_mul_pd(_mm256_set1_pd(6.0), b)),
                                  _mm256_mul_pd(_mm256_set1_pd(15.0), c));
  return _mm256_sub_pd(t, _mm256_mul_pd(_mm256_set1_pd(20.0), load(f)));
}

}  // namespace

__attribute__((target("avx2"))) void wave_rhs_row(const WaveRow& r) {
  const __m256d lap_scale = _mm256_set1_pd(r.lap_scale);
  const __m256d diss_scale = _mm256_set1_pd(r.diss_scale);
  std::int64_t i = 0;
  for (; i + 4 <= r.n; i += 4) {
    const double* phi = r.phi + i;
    const double* pi = r.pi + i;
    const __m256d lap = _mm256_add_pd(_mm256_add_pd(second_diff(phi, 1), second_diff(phi, r.sy)), second_diff(phi, r.sz));
    const __m256d dphi_diss =
        _mm256_add_pd(_mm256_add_pd(sixth_diff(phi, 1), sixth_diff(phi, r.sy)), sixth_diff(phi, r.sz));
    const __m256d dpi_diss = _mm256_add_pd(_mm256_add_pd(sixth_diff(pi, 1), sixth_diff(pi, r.sy)), sixth_diff(pi, r.sz));
    _mm256_storeu_pd(r.dphi + i, _mm256_add_pd(load(pi), _mm256_mul_pd(diss_scale, dphi_diss)));
    _mm256_storeu_pd(r.dpi + i, _mm256_add_pd(_mm256_mul_pd(lap_scale, lap), _mm256_mul_pd(diss_scale, dpi_diss)));
  }
  if (i < r.n) {
    WaveRow tail = r;
    tail.phi += i;
    tail.pi += i;
    tail.dphi += i;
    tail.dpi += i;
    tail.n -= i;
    scalar::wave_rhs_row(tail);
  }
}

}  // namespace tapestry::simd::avx2

#endif
