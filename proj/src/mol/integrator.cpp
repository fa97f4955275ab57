#include "tapestry/mol/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tapestry/simd/kernels.hpp"

namespace tapestry::mol {

Scheme parse_scheme(const std::string& s) {
  if (s == "euler") return Scheme::euler;
  if (s == "rk2") return Scheme::rk2;
  if (s == "rk3") return Scheme::rk3;
  if (s == "rk4") return Scheme::rk4;
  throw std::invalid_argument("unknown integrator '" + s + "' (expected euler|rk2|rk3|rk4)");
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::euler: return "euler";
    case Scheme::rk2: return "rk2";
    case Scheme::rk3: return "rk3";
    case Scheme::rk4: return "rk4";
  }
  return "?";
}

const Tableau& tableau(Scheme s) {
  static const Tableau euler{1, {{}}, {1.0}, {0.0}};
  static const Tableau rk2{2, {{}, {0.5}}, {0.0, 1.0}, {0.0, 0.5}};
  // strong-stability-preserving third order (Shu-Osher) in Butcher form
  static const Tableau rk3{3, {{}, {1.0}, {0.25, 0.25}}, {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, {0.0, 1.0, 0.5}};
  static const Tableau rk4{4,
                           {{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}},
                           {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0},
                           {0.0, 0.5, 0.5, 1.0}};
  switch (s) {
    case Scheme::euler: return euler;
    case Scheme::rk2: return rk2;
    case Scheme::rk3: return rk3;
    case Scheme::rk4: return rk4;
  }
  return rk4;
}

int substeps_of(Scheme s) { return tableau(s).stages; }

void IntegratorSpec::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("CFL factor must lie in (0, 1]");
}

std::vector<std::span<double>> Workspace::stage(int s, const System& sys) {
  if (k_.size() <= static_cast<std::size_t>(s)) k_.resize(static_cast<std::size_t>(s) + 1);
  auto& arrays = k_[static_cast<std::size_t>(s)];
  arrays.resize(sys.state.size());
  std::vector<std::span<double>> out;
  out.reserve(sys.state.size());
  for (std::size_t i = 0; i < sys.state.size(); ++i) {
    auto& a = arrays[i];
    // zeroed only on allocation: right-hand sides never write ghost points
    if (a.size() != sys.state[i].size()) a.assign(sys.state[i].size(), 0.0);
    out.emplace_back(a);
  }
  return out;
}

namespace {

void combine(System& sys, const std::vector<std::vector<std::span<double>>>& k, const std::vector<double>& weights,
             double dt) {
  std::vector<double> coeffs;
  std::vector<int> terms;
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (weights[j] != 0.0) {
      coeffs.push_back(weights[j]);
      terms.push_back(static_cast<int>(j));
    }
  const auto& kern = simd::kernels();
  auto one = [&](int i) {
    const auto ii = static_cast<std::size_t>(i);
    std::vector<const double*> ks;
    ks.reserve(terms.size());
    for (int j : terms) ks.push_back(k[static_cast<std::size_t>(j)][ii].data());
    kern.lincomb(sys.state[ii].data(), sys.initial[ii].data(), dt, coeffs.data(), ks.data(),
                 static_cast<int>(ks.size()), sys.state[ii].size());
  };
  const int n = static_cast<int>(sys.state.size());
  if (sys.exec) sys.exec->parallel_for(n, one);
  else
    for (int i = 0; i < n; ++i) one(i);
}

}  // namespace

void mol_step(const Tableau& tab, System& sys, double dt, Workspace& ws) {
  if (!(dt != 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be finite and nonzero");
  if (sys.state.size() != sys.initial.size()) throw std::logic_error("state/initial size mismatch");
  std::vector<std::vector<std::span<double>>> k;
  k.reserve(static_cast<std::size_t>(tab.stages));
  for (int s = 0; s < tab.stages; ++s) {
    if (s > 0) {
      combine(sys, k, tab.a[static_cast<std::size_t>(s)], dt);
      if (sys.sync) sys.sync();
    }
    k.push_back(ws.stage(s, sys));
    sys.rhs(k.back());
  }
  combine(sys, k, tab.b, dt);
  if (sys.sync) sys.sync();
}

}  // namespace tapestry::mol
