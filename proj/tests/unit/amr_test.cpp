#include <cmath>
#include <cstring>
#include <set>

#include "doctest.h"
#include "support/scenarios.hpp"
#include "tapestry/amr/driver.hpp"
#include "tapestry/amr/transfer.hpp"
#include "tapestry/wave/wave.hpp"

using namespace tapestry;
using namespace tapestry::testing;

namespace {

unigrid::DomainSpec centred_domain() {
  unigrid::DomainSpec d;
  d.points = {33, 33, 33};
  d.origin = {-16.0, -16.0, -16.0};
  d.h = 1.0;
  d.boundary = unigrid::Boundary::outer_copy;
  d.ghost_width = 3;
  return d;
}

amr::HierarchySpec spec_for(int nlevels, std::vector<amr::Centre> centres) {
  amr::HierarchySpec s;
  s.nlevels = nlevels;
  s.centres = std::move(centres);
  s.ghost_width = 3;
  return s;
}

IndexBox relative(const IndexBox& b, std::int64_t c) {
  return {{b.lo[0] - c, b.lo[1] - c, b.lo[2] - c}, {b.hi[0] - c, b.hi[1] - c, b.hi[2] - c}};
}

const VariableGroup scalar{"test::u", {"u"}, 0, 3};

Patch make_patch(const IndexBox& owned) {
  Patch p;
  p.owned = p.ext = owned;
  p.groups.emplace(scalar.name, GroupData(scalar, owned));
  return p;
}

template <class F>
void fill(Level& lev, F f, int tl = 0) {
  for (auto& p : lev.patches) {
    const Array3 a = p.group(scalar.name).var(0, tl);
    const IndexBox b = p.group(scalar.name).box();
    for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
      for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
        for (auto i = b.lo[0]; i <= b.hi[0]; ++i) a(i, j, k) = f(lev.geom.x(0, i), lev.geom.x(1, j), lev.geom.x(2, k));
  }
}

// coarse [0,n]^3 at spacing h, fine patch [lo,hi]^3 at h/2
std::pair<Level, Level> two_levels(std::int64_t n, double h, std::int64_t lo, std::int64_t hi) {
  Level coarse, fine;
  coarse.geom.h = h;
  coarse.patches.push_back(make_patch({{0, 0, 0}, {n, n, n}}));
  coarse.refined = {{{0, 0, 0}, {n, n, n}}};
  fine.index = 1;
  fine.geom.h = h / 2;
  fine.patches.push_back(make_patch({{lo, lo, lo}, {hi, hi, hi}}));
  fine.refined = {{{lo, lo, lo}, {hi, hi, hi}}};
  return {std::move(coarse), std::move(fine)};
}

double max_error(const Level& lev, double (*f)(double, double, double)) {
  double e = 0.0;
  for (const auto& p : lev.patches) {
    const Array3 a = p.group(scalar.name).var(0);
    const IndexBox& b = p.owned;
    for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
      for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
        for (auto i = b.lo[0]; i <= b.hi[0]; ++i)
          e = std::max(e, std::abs(a(i, j, k) - f(lev.geom.x(0, i), lev.geom.x(1, j), lev.geom.x(2, k))));
  }
  return e;
}

double quintic(double x, double y, double z) {
  return 1.5 - x + 0.3 * y * z - 2.0 * x * x * y + std::pow(y, 5) - 0.7 * x * x * z * z * y + 0.1 * std::pow(z, 4) * x;
}

double smooth(double x, double y, double z) { return std::sin(3.0 * x + 0.4) * std::cos(2.0 * y - 0.1) * std::exp(0.5 * z); }

amr::AmrDriver& amr_driver(flesh::Simulation& sim) { return dynamic_cast<amr::AmrDriver&>(sim.driver()); }

}  // namespace

TEST_CASE("one level hierarchy is the unigrid domain") {
  const auto h = amr::build_hierarchy(centred_domain(), spec_for(1, {}));
  REQUIRE(h.levels.size() == 1);
  REQUIRE(h.levels[0].refined.size() == 1);
  CHECK(h.levels[0].refined[0] == centred_domain().box());
  CHECK(h.levels[0].evolved == h.levels[0].refined);
}

TEST_CASE("three nested levels around the origin") {
  const auto h = amr::build_hierarchy(centred_domain(), spec_for(3, {{{0.0, 0.0, 0.0}, {8, 4}}}));
  REQUIRE(h.levels.size() == 3);
  // index of the centre on level l: (0 - origin) / h_l
  CHECK(relative(h.levels[0].refined[0], 16) == IndexBox{{-16, -16, -16}, {16, 16, 16}});
  CHECK(relative(h.levels[1].refined[0], 32) == IndexBox{{-8, -8, -8}, {8, 8, 8}});
  CHECK(relative(h.levels[2].refined[0], 64) == IndexBox{{-4, -4, -4}, {4, 4, 4}});
  CHECK(h.levels[1].h == 0.5);
  CHECK(h.levels[2].h == 0.25);
  for (std::size_t l = 1; l < 3; ++l) {
    const IndexBox need = amr::coarsen(h.levels[l].evolved[0].grown(3)).grown(h.spec.interp.stencil_halo());
    CHECK(h.levels[l - 1].refined[0].contains(need));
    for (int d = 0; d < 3; ++d) {
      CHECK(h.levels[l].refined[0].lo[d] % 2 == 0);
      CHECK(h.levels[l].refined[0].hi[d] % 2 == 0);
    }
  }
  CHECK_NOTHROW(amr::check_nesting(h));
}

TEST_CASE("overlapping centres merge into their union") {
  const auto h = amr::build_hierarchy(centred_domain(), spec_for(2, {{{-2.0, 0.0, 0.0}, {6}}, {{3.0, 1.0, -1.0}, {6}}}));
  // the two boxes in level-1 indices, centres at (x + 16) / 0.5
  const IndexBox box_a{{28 - 6, 32 - 6, 32 - 6}, {28 + 6, 32 + 6, 32 + 6}};
  const IndexBox box_b{{38 - 6, 34 - 6, 30 - 6}, {38 + 6, 34 + 6, 30 + 6}};
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t>> oracle, got;
  for (const auto& b : {box_a, box_b})
    for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
      for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
        for (auto i = b.lo[0]; i <= b.hi[0]; ++i) oracle.insert({i, j, k});
  std::int64_t volume = 0;
  for (const auto& b : h.levels[1].refined) {
    volume += b.volume();
    for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
      for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
        for (auto i = b.lo[0]; i <= b.hi[0]; ++i) got.insert({i, j, k});
  }
  CHECK(volume == static_cast<std::int64_t>(got.size()));  // disjoint pieces
  CHECK(got == oracle);
}

TEST_CASE("nesting violations name the level") {
  SUBCASE("level 1 leaves the domain") {
    try {
      amr::build_hierarchy(centred_domain(), spec_for(2, {{{10.0, 0.0, 0.0}, {8}}}));
      FAIL("expected a nesting error");
    } catch (const amr::NestingError& e) {
      CHECK(e.level == 1);
      CHECK(std::string(e.what()).find("level 1") != std::string::npos);
    }
  }
  SUBCASE("level 2 leaves level 1") {
    try {
      amr::build_hierarchy(centred_domain(), spec_for(3, {{{0.0, 0.0, 0.0}, {6, 6}}}));
      FAIL("expected a nesting error");
    } catch (const amr::NestingError& e) {
      CHECK(e.level == 2);
      CHECK(std::string(e.what()).find("level 2") != std::string::npos);
    }
  }
  SUBCASE("growing half-widths") {
    CHECK_THROWS_AS(amr::build_hierarchy(centred_domain(), spec_for(3, {{{0.0, 0.0, 0.0}, {4, 6}}})),
                    amr::NestingError);
  }
}

TEST_CASE("prolongation stencils") {
  auto s = amr::prolongation_stencil(6, 5);
  CHECK(s.first == 3);
  CHECK(s.weights == std::vector<double>{1.0});
  s = amr::prolongation_stencil(-4, 3);
  CHECK(s.first == -2);
  CHECK(s.weights == std::vector<double>{1.0});
  s = amr::prolongation_stencil(7, 1);
  CHECK(s.first == 3);
  CHECK(s.weights == std::vector<double>{0.5, 0.5});
  s = amr::prolongation_stencil(-3, 3);
  CHECK(s.first == -3);
  REQUIRE(s.weights.size() == 4);
  const double cubic[] = {-1.0 / 16, 9.0 / 16, 9.0 / 16, -1.0 / 16};
  for (int k = 0; k < 4; ++k) CHECK(s.weights[static_cast<std::size_t>(k)] == doctest::Approx(cubic[k]).epsilon(1e-15));
  s = amr::prolongation_stencil(9, 5);
  CHECK(s.first == 2);
  const double quintic_w[] = {3.0 / 256, -25.0 / 256, 150.0 / 256, 150.0 / 256, -25.0 / 256, 3.0 / 256};
  for (int k = 0; k < 6; ++k)
    CHECK(s.weights[static_cast<std::size_t>(k)] == doctest::Approx(quintic_w[k]).epsilon(1e-15));
}

TEST_CASE("time interpolation weights") {
  const std::vector<double> times{2.0, 1.5, 1.0};
  SUBCASE("identical levels") {
    const std::vector<double> a(4, 3.25);
    const std::vector<std::span<const double>> values{a, a, a};
    std::vector<double> out(4);
    for (double t : {0.3, 1.2, 2.0, 2.7}) {
      amr::time_interpolate(times, values, t, 2, out);
      for (double x : out) CHECK(x == doctest::Approx(3.25).epsilon(1e-15));
    }
  }
  SUBCASE("linear midpoint") {
    const std::vector<double> t01{1.0, 0.0};
    const auto w = amr::time_weights(t01, 0.5, 1);
    CHECK(w[0] * 2.0 + w[1] * 0.0 == 1.0);
  }
  SUBCASE("quadratic in time is exact") {
    auto q = [](double t) { return 0.5 - 1.75 * t + 3.0 * t * t; };
    for (double t : {0.9, 1.1, 1.77, 2.3}) {
      const auto w = amr::time_weights(times, t, 2);
      const double got = w[0] * q(2.0) + w[1] * q(1.5) + w[2] * q(1.0);
      CHECK(got == doctest::Approx(q(t)).epsilon(1e-13));
    }
  }
  SUBCASE("stored time hits that level") {
    const auto w = amr::time_weights(times, 1.5, 2);
    CHECK(w == std::vector<double>{0.0, 1.0, 0.0});
  }
  SUBCASE("insufficient levels") {
    CHECK_THROWS(amr::time_weights(times, 1.2, 3));
  }
}

TEST_CASE("prolongation of constants and polynomials") {
  auto [coarse, fine] = two_levels(20, 0.1, 10, 30);
  const std::vector<std::vector<IndexBox>> all{{fine.patches[0].owned}};

  SUBCASE("constant") {
    fill(coarse, [](double, double, double) { return -4.5; });
    amr::prolong(coarse, fine, scalar.name, amr::InterpSpec{5, 0}, all, comm::Executor{});
    CHECK(max_error(fine, [](double, double, double) { return -4.5; }) < 1e-14);
  }
  SUBCASE("quintic is exact and coincident points are copies") {
    fill(coarse, quintic);
    amr::prolong(coarse, fine, scalar.name, amr::InterpSpec{5, 0}, all, comm::Executor{});
    CHECK(max_error(fine, quintic) < 1e-12);
    const Array3 c = coarse.patches[0].group(scalar.name).var(0);
    const Array3 f = fine.patches[0].group(scalar.name).var(0);
    bool same = true;
    for (std::int64_t k = 10; k <= 30; k += 2)
      for (std::int64_t j = 10; j <= 30; j += 2)
        for (std::int64_t i = 10; i <= 30; i += 2) {
          const double a = c(i / 2, j / 2, k / 2), b = f(i, j, k);
          same = same && std::memcmp(&a, &b, sizeof a) == 0;
        }
    CHECK(same);
  }
  SUBCASE("linear in time") {
    coarse.tl_times = {0.2, 0.1, 0.0};
    coarse.valid_levels = 3;
    coarse.time = 0.2;
    for (int tl = 0; tl < 3; ++tl) {
      const double t = coarse.tl_times[static_cast<std::size_t>(tl)];
      fill(coarse, [t](double x, double y, double z) { return quintic(x, y, z) * (1.0 + 2.0 * t); }, tl);
    }
    fine.time = 0.15;
    amr::prolong(coarse, fine, scalar.name, amr::InterpSpec{5, 2}, all, comm::Executor{});
    CHECK(max_error(fine, [](double x, double y, double z) { return quintic(x, y, z) * 1.3; }) < 1e-11);
  }
  SUBCASE("insufficient coarse cover") {
    auto [c2, f2] = two_levels(20, 0.1, 0, 20);  // odd points near 0 need coarse index -2
    CHECK_THROWS_AS(amr::prolong(c2, f2, scalar.name, amr::InterpSpec{5, 0}, {{f2.patches[0].owned}}, comm::Executor{}),
                    amr::CoverError);
  }
}

TEST_CASE("prolongation converges at its order") {
  for (int order : {1, 3, 5}) {
    std::vector<double> err;
    for (int r : {1, 2}) {
      const double h = 0.05 / r;
      const std::int64_t n = 16 * r;
      auto [coarse, fine] = two_levels(n, h, 2 * (n / 2 - 4 * r), 2 * (n / 2 + 4 * r));
      fill(coarse, smooth);
      amr::prolong(coarse, fine, scalar.name, amr::InterpSpec{order, 0}, {{fine.patches[0].owned}}, comm::Executor{});
      err.push_back(max_error(fine, smooth));
    }
    INFO("order " << order << " errors " << err[0] << " " << err[1]);
    CHECK(err[0] / err[1] >= 0.8 * std::pow(2.0, order));
  }
}

TEST_CASE("restriction injects at coincident points") {
  auto [coarse, fine] = two_levels(20, 0.1, 10, 30);
  fill(coarse, [](double, double, double) { return 1e30; });
  fill(fine, quintic);
  amr::restrict_to(fine, coarse, scalar.name, comm::Executor{});
  const Array3 c = coarse.patches[0].group(scalar.name).var(0);
  double err = 0.0;
  bool outside_untouched = true;
  for (std::int64_t k = 0; k <= 20; ++k)
    for (std::int64_t j = 0; j <= 20; ++j)
      for (std::int64_t i = 0; i <= 20; ++i) {
        const bool under = i >= 5 && i <= 15 && j >= 5 && j <= 15 && k >= 5 && k <= 15;
        if (under)
          err = std::max(err, std::abs(c(i, j, k) - quintic(0.1 * i, 0.1 * j, 0.1 * k)));
        else
          outside_untouched = outside_untouched && c(i, j, k) == 1e30;
      }
  CHECK(err < 1e-12);
  CHECK(outside_untouched);

  fine.time = 1e-9;
  CHECK_THROWS(amr::restrict_to(fine, coarse, scalar.name, comm::Executor{}));
}

TEST_CASE("prolong then restrict is the identity at coincident points") {
  auto [coarse, fine] = two_levels(20, 0.1, 10, 30);
  fill(coarse, smooth);
  const auto before = coarse.patches[0].group(scalar.name).raw(0);
  amr::prolong(coarse, fine, scalar.name, amr::InterpSpec{5, 0}, {{fine.patches[0].owned}}, comm::Executor{});
  amr::restrict_to(fine, coarse, scalar.name, comm::Executor{});
  CHECK(bit_identical(before, coarse.patches[0].group(scalar.name).raw(0)));
}

TEST_CASE("one level amr matches unigrid at every iteration") {
  auto uo = wave_cube(16, 2);
  auto ao = wave_cube(16, 2, "amr");
  auto u = build({"wave"}, uo);
  auto a = build({"wave"}, ao);
  CHECK(bit_identical(owned_data(*u, true), owned_data(*a, true)));
  for (int it = 0; it < 12; ++it) {
    u->step();
    a->step();
    INFO("iteration " << it + 1);
    REQUIRE(bit_identical(owned_data(*u, true), owned_data(*a, true)));
  }
}

TEST_CASE("two levels: the fine level steps twice per coarse step") {
  auto o = wave_cube(24, 1, "amr");
  o["amr::nlevels"] = I(2);
  o["amr::centres"] = S("0.5,0.5,0.5:6");
  o["amr::buffer_factor"] = I(0);
  auto sim = build({"wave"}, o);
  sim->step();
  CHECK(sim->driver().level(0).steps == 1);
  CHECK(sim->driver().level(1).steps == 2);
  CHECK(sim->driver().level(1).time == sim->driver().level(0).time);
  sim->step();
  CHECK(sim->driver().level(1).steps == 4);
}

TEST_CASE("time order beyond the stored levels is rejected") {
  auto o = wave_cube(24, 1, "amr");
  o["amr::nlevels"] = I(2);
  o["amr::centres"] = S("0.5,0.5,0.5:6");
  o["amr::time_order"] = I(4);
  o["hydro::initial_data"] = S("smooth");
  o.erase("wave::initial_data");
  o.erase("wave::kx");
  o.erase("wave::ky");
  o.erase("wave::kz");
  CHECK_THROWS_AS(build({"hydro"}, o, false), flesh::ParameterError);
}

TEST_CASE("past time levels are evolved backwards from the initial data") {
  auto o = wave_cube(24, 1, "amr");
  o["amr::nlevels"] = I(2);
  o["amr::centres"] = S("0.5,0.5,0.5:6");
  o["amr::buffer_factor"] = I(0);
  auto sim = build({"wave"}, o);
  const auto wp = wave::WaveParams::from(sim->params());
  const double dt = sim->driver().timestep(*sim);
  const Level& lev = sim->driver().level(0);
  const int ntl = lev.patches[0].group(wave::group_name).time_levels();
  REQUIRE(lev.valid_levels == ntl);
  double err = 0.0;
  for (int tl = 0; tl < ntl; ++tl) {
    CHECK(lev.tl_times[static_cast<std::size_t>(tl)] == doctest::Approx(-tl * dt).epsilon(1e-14));
    for (const auto& p : lev.patches) {
      const Array3 phi = p.group(wave::group_name).var(0, tl);
      const IndexBox& b = p.owned;
      for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
        for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
          for (auto i = b.lo[0]; i <= b.hi[0]; ++i)
            err = std::max(err, std::abs(phi(i, j, k) - wave::plane_wave(wp, {lev.geom.x(0, i), lev.geom.x(1, j),
                                                                               lev.geom.x(2, k)},
                                                                          -tl * dt)[0]));
    }
  }
  CHECK(err < 1e-4);

  o["amr::init_past_levels"] = false;
  auto flat = build({"wave"}, o);
  CHECK(flat->driver().level(0).valid_levels == 1);
}

TEST_CASE("regrid") {
  auto o = wave_cube(24, 1, "amr");
  o["amr::nlevels"] = I(2);
  o["amr::centres"] = S("0.5,0.5,0.5:6");
  o["amr::buffer_factor"] = I(0);

  SUBCASE("unchanged centres keep every value") {
    auto sim = build({"wave"}, o);
    sim->step();
    const auto before = owned_data(*sim, true);
    auto& drv = amr_driver(*sim);
    drv.regrid(*sim, drv.hierarchy().spec.centres);
    CHECK(bit_identical(before, owned_data(*sim, true)));
  }

  auto set_all = [](flesh::Simulation& sim, auto f) {
    for (int l = 0; l < sim.driver().num_levels(); ++l) {
      Level& lev = sim.driver().level(l);
      for (auto& p : lev.patches)
        for (auto& [name, g] : p.groups)
          for (int tl = 0; tl < g.time_levels(); ++tl)
            for (int v = 0; v < g.num_vars(); ++v) {
              const Array3 a = g.var(v, tl);
              const IndexBox b = g.box();
              for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
                for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
                  for (auto i = b.lo[0]; i <= b.hi[0]; ++i)
                    a(i, j, k) = f(lev.geom.x(0, i), lev.geom.x(1, j), lev.geom.x(2, k));
            }
    }
  };
  auto shifted = [](amr::AmrDriver& drv) {
    auto c = drv.hierarchy().spec.centres;
    c[0].position[0] += 2.0 / 24;  // two coarse points
    return c;
  };
  auto level1_error = [](flesh::Simulation& sim, auto f) {
    const Level& lev = sim.driver().level(1);
    double e = 0.0;
    for (const auto& p : lev.patches)
      for (const auto& [name, g] : p.groups) {
        const Array3 a = g.var(0);
        const IndexBox& b = p.owned;
        for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
          for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
            for (auto i = b.lo[0]; i <= b.hi[0]; ++i)
              e = std::max(e, std::abs(a(i, j, k) - f(lev.geom.x(0, i), lev.geom.x(1, j), lev.geom.x(2, k))));
      }
    return e;
  };

  SUBCASE("shifted box over a constant stays constant") {
    auto sim = build({"wave"}, o);
    auto c = [](double, double, double) { return 2.75; };
    set_all(*sim, c);
    auto& drv = amr_driver(*sim);
    const IndexBox old = drv.level(1).refined[0];
    drv.regrid(*sim, shifted(drv));
    CHECK(drv.level(1).refined[0].lo[0] == old.lo[0] + 4);
    CHECK(level1_error(*sim, c) == 0.0);
  }

  SUBCASE("shifted box over a polynomial is exact at new points") {
    auto sim = build({"wave"}, o);
    set_all(*sim, quintic);
    auto& drv = amr_driver(*sim);
    drv.regrid(*sim, shifted(drv));
    CHECK(level1_error(*sim, quintic) < 1e-12);
  }
}

TEST_CASE("two level gaussian converges to the globally fine solution at fourth order") {
  auto run = [](std::int64_t n) {
    auto base = [](std::int64_t m, const char* driver) {
      return Overrides{{"grid::nx", I(m)},
                       {"grid::ny", I(m)},
                       {"grid::nz", I(m)},
                       {"grid::h", R(1.0 / static_cast<double>(m))},
                       {"wave::initial_data", S("gaussian")},
                       {"wave::sigma", R(0.1)},
                       {"wave::x0", R(0.53)},
                       {"wave::y0", R(0.48)},
                       {"wave::z0", R(0.5)},
                       {"driver::name", S(driver)},
                       {"sim::final_time", R(0.15)},
                       {"sim::iterations", I(100000)}};
    };
    auto o = base(n, "amr");
    o["amr::nlevels"] = I(2);
    o["amr::centres"] = S(("0.5,0.5,0.5:" + std::to_string(n / 5)).c_str());
    o["amr::time_order"] = I(4);
    auto a = build({"wave"}, o);
    a->run_until(100000);
    auto f = build({"wave"}, base(2 * n, "unigrid"));
    f->run_until(100000);
    const Level& fine = a->driver().level(1);
    const Level& ref = f->driver().level(0);
    double diff = 0.0;
    for (const auto& p : fine.patches) {
      const Array3 phi = p.group(wave::group_name).var(0);
      for (const auto& r : fine.refined) {
        const IndexBox c = intersect(r, p.owned);
        for (auto k = c.lo[2]; k <= c.hi[2]; ++k)
          for (auto j = c.lo[1]; j <= c.hi[1]; ++j)
            for (auto i = c.lo[0]; i <= c.hi[0]; ++i)
              for (const auto& q : ref.patches)
                if (q.owned.contains(Index3{i, j, k}))
                  diff = std::max(diff, std::abs(phi(i, j, k) - q.group(wave::group_name).var(0)(i, j, k)));
      }
    }
    return diff;
  };
  const double e1 = run(40), e2 = run(80);
  INFO("max differences " << e1 << " " << e2);
  CHECK(std::log2(e1 / e2) >= 4.0);
}
