#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tapestry/comm/transport.hpp"

namespace tapestry::mol {

enum class Scheme { euler, rk2, rk3, rk4 };

Scheme parse_scheme(const std::string& s);
const char* to_string(Scheme s);

/// Explicit Butcher tableau; a is strictly lower triangular.
struct Tableau {
  int stages = 1;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  std::vector<double> c;
};

const Tableau& tableau(Scheme s);

/// Number of right-hand-side evaluations per step.
int substeps_of(Scheme s);

struct IntegratorSpec {
  Scheme scheme = Scheme::rk4;
  double cfl = 0.25;

  int substeps() const { return substeps_of(scheme); }
  /// dt = cfl * h / speed.
  double timestep(double h, double speed) const { return cfl * h / speed; }
  void validate() const;
};

/// A set of arrays evolved together. `state` holds y(t) on entry (ghosts
/// included) and y(t+dt) on exit; `initial` must hold a copy of y(t) that
/// stays untouched during the step.
struct System {
  std::vector<std::span<double>> state;
  std::vector<std::span<const double>> initial;
  /// Evaluate f(state) into rhs (same shapes as state). Points the physics
  /// does not update must be left at zero.
  std::function<void(std::span<const std::span<double>> rhs)> rhs;
  /// Called after every substep, including the final update.
  std::function<void()> sync;
  const comm::Executor* exec = nullptr;
};

/// Scratch storage for stage derivatives, reused across steps.
class Workspace {
 public:
  std::vector<std::span<double>> stage(int s, const System& sys);
  /// Drop all scratch arrays; needed whenever the array layout changes.
  void reset() { k_.clear(); }

 private:
  std::vector<std::vector<std::vector<double>>> k_;
};

/// Advance the system by one explicit Runge-Kutta step. Stage values are
/// formed with the SIMD lincomb kernel; no other boundary treatment happens
/// between substeps besides `sync`.
void mol_step(const Tableau& tab, System& sys, double dt, Workspace& ws);

}  // namespace tapestry::mol
