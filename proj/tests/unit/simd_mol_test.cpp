#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "tapestry/mol/integrator.hpp"
#include "tapestry/simd/kernels.hpp"

using namespace tapestry;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("isa names round trip") {
  CHECK(simd::parse_isa("scalar") == simd::Isa::scalar);
  CHECK(simd::parse_isa(simd::to_string(simd::Isa::avx2)) == simd::Isa::avx2);
  CHECK_THROWS(simd::parse_isa("sse9"));
  CHECK(simd::supported(simd::Isa::scalar));
}

TEST_CASE("lincomb kernels are bit-identical across isas") {
  if (!simd::supported(simd::Isa::avx2)) return;
  const auto& s = simd::table(simd::Isa::scalar);
  const auto& v = simd::table(simd::Isa::avx2);
  for (std::size_t n : {0, 1, 3, 4, 7, 64, 1001}) {
    for (int nterms = 0; nterms <= 4; ++nterms) {
      const auto y0 = random_vector(n, n + 1);
      std::vector<std::vector<double>> k;
      std::vector<const double*> kp;
      for (int t = 0; t < nterms; ++t) k.push_back(random_vector(n, 100 * n + t));
      for (const auto& x : k) kp.push_back(x.data());
      const double coeffs[4] = {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6};
      std::vector<double> a(n), b(n);
      s.lincomb(a.data(), y0.data(), 0.137, coeffs, kp.data(), nterms, n);
      v.lincomb(b.data(), y0.data(), 0.137, coeffs, kp.data(), nterms, n);
      INFO("n=", n, " terms=", nterms);
      CHECK(same_bits(a, b));
      if (nterms == 0) CHECK(same_bits(a, y0));
    }
  }
}

TEST_CASE("wave row kernels are bit-identical across isas") {
  if (!simd::supported(simd::Isa::avx2)) return;
  const std::int64_t nx = 23, g = 3, ex = nx + 2 * g, sy = ex, sz = ex * ex;
  const auto phi = random_vector(static_cast<std::size_t>(ex * ex * ex), 1);
  const auto pi = random_vector(static_cast<std::size_t>(ex * ex * ex), 2);
  std::vector<double> d1(phi.size(), 0.0), p1(phi.size(), 0.0), d2 = d1, p2 = p1;
  for (std::int64_t k = g; k < ex - g; ++k)
    for (std::int64_t j = g; j < ex - g; ++j) {
      const auto at = static_cast<std::size_t>(g + j * sy + k * sz);
      simd::WaveRow r{phi.data() + at, pi.data() + at, d1.data() + at, p1.data() + at, nx, sy, sz, 3.7, 0.02};
      simd::table(simd::Isa::scalar).wave_rhs_row(r);
      r.dphi = d2.data() + at;
      r.dpi = p2.data() + at;
      simd::table(simd::Isa::avx2).wave_rhs_row(r);
    }
  CHECK(same_bits(d1, d2));
  CHECK(same_bits(p1, p2));
}

TEST_CASE("scalar wave row matches the stencil definition") {
  const std::int64_t n = 1, ex = 7, sy = ex, sz = ex * ex;
  const auto phi = random_vector(343, 3);
  const auto pi = random_vector(343, 4);
  double dphi = 0, dpi = 0;
  const std::int64_t c = 3 + 3 * sy + 3 * sz;
  simd::scalar::wave_rhs_row({phi.data() + c, pi.data() + c, &dphi, &dpi, n, sy, sz, 2.0, 0.5});
  const std::int64_t stride[3] = {1, sy, sz};
  double lap = 0, dphi_d = 0, dpi_d = 0;
  const double l4[5] = {-1, 16, -30, 16, -1}, d6[7] = {1, -6, 15, -20, 15, -6, 1};
  for (int d = 0; d < 3; ++d) {
    for (int m = -2; m <= 2; ++m) lap += l4[m + 2] * phi[static_cast<std::size_t>(c + m * stride[d])];
    for (int m = -3; m <= 3; ++m) {
      dphi_d += d6[m + 3] * phi[static_cast<std::size_t>(c + m * stride[d])];
      dpi_d += d6[m + 3] * pi[static_cast<std::size_t>(c + m * stride[d])];
    }
  }
  CHECK(dphi == doctest::Approx(pi[static_cast<std::size_t>(c)] + 0.5 * dphi_d).epsilon(1e-13));
  CHECK(dpi == doctest::Approx(2.0 * lap + 0.5 * dpi_d).epsilon(1e-13));
}

TEST_CASE("butcher tableaux are consistent") {
  for (auto s : {mol::Scheme::euler, mol::Scheme::rk2, mol::Scheme::rk3, mol::Scheme::rk4}) {
    const auto& t = mol::tableau(s);
    CHECK(t.stages == mol::substeps_of(s));
    double sum = 0;
    for (double b : t.b) sum += b;
    CHECK(sum == doctest::Approx(1.0));
    for (int i = 0; i < t.stages; ++i) {
      double row = 0;
      for (int j = 0; j < i; ++j) row += t.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      CHECK(row == doctest::Approx(t.c[static_cast<std::size_t>(i)]));
    }
  }
  CHECK(mol::parse_scheme("rk3") == mol::Scheme::rk3);
  CHECK_THROWS(mol::parse_scheme("rk9"));
  CHECK_THROWS((mol::IntegratorSpec{mol::Scheme::rk4, -1.0}.validate()));
}

namespace {

// y'' = -y written as (y, v); exact solution cos(t), -sin(t).
double oscillator_error(mol::Scheme scheme, int steps) {
  std::vector<double> y{1.0, 0.0}, y0(2);
  mol::System sys;
  sys.state = {std::span<double>(y)};
  sys.initial = {std::span<const double>(y0)};
  sys.rhs = [&](std::span<const std::span<double>> rhs) {
    rhs[0][0] = y[1];
    rhs[0][1] = -y[0];
  };
  sys.sync = [] {};
  mol::Workspace ws;
  const double T = 1.0, dt = T / steps;
  for (int n = 0; n < steps; ++n) {
    y0 = y;
    mol::mol_step(mol::tableau(scheme), sys, dt, ws);
  }
  return std::hypot(y[0] - std::cos(T), y[1] + std::sin(T));
}

}  // namespace

TEST_CASE("runge-kutta schemes converge at their design order") {
  const std::pair<mol::Scheme, double> cases[] = {
      {mol::Scheme::euler, 1}, {mol::Scheme::rk2, 2}, {mol::Scheme::rk3, 3}, {mol::Scheme::rk4, 4}};
  for (const auto& [scheme, order] : cases) {
    const double ratio = oscillator_error(scheme, 40) / oscillator_error(scheme, 80);
    INFO(mol::to_string(scheme));
    CHECK(std::log2(ratio) == doctest::Approx(order).epsilon(0.08));
  }
}
