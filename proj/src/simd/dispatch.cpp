#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "tapestry/simd/kernels.hpp"

namespace tapestry::simd {

const char* to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa parse_isa(const std::string& s) {
  if (s == "scalar") return Isa::scalar;
  if (s == "avx2") return Isa::avx2;
  throw std::invalid_argument("unknown SIMD target '" + s + "' (expected scalar|avx2)");
}

bool supported(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("TAPESTRY_SIMD")) {
    const Isa want = parse_isa(env);
    if (supported(want)) return want;
  }
  return supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

const KernelTable& table(Isa isa) {
  static const KernelTable scalar_table{Isa::scalar, &scalar::lincomb, &scalar::wave_rhs_row};
#if defined(__x86_64__) || defined(__i386__)
  static const KernelTable avx2_table{Isa::avx2, &avx2::lincomb, &avx2::wave_rhs_row};
  if (isa == Isa::avx2) {
    if (!supported(Isa::avx2)) throw std::runtime_error("AVX2 kernels requested on a CPU without AVX2");
    return avx2_table;
  }
#else
  if (isa == Isa::avx2) throw std::runtime_error("AVX2 kernels are not built for this architecture");
#endif
  return scalar_table;
}

namespace {
std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> t{&table(detect())};
  return t;
}
}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

void select(Isa isa) { active().store(&table(isa), std::memory_order_release); }

}  // namespace tapestry::simd
