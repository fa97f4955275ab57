#pragma once

#include <cmath>
#include <stdexcept>

// Exact solution of the Riemann problem for the 1D Euler equations of an
// ideal gas: Newton iteration for the star pressure, then sampling of the
// self-similar solution at x/t.

namespace tapestry::testing {

struct RiemannState {
  double rho, u, p;
};

class ExactRiemann {
 public:
  ExactRiemann(RiemannState left, RiemannState right, double gamma) : L_(left), R_(right), g_(gamma) {
    cL_ = std::sqrt(g_ * L_.p / L_.rho);
    cR_ = std::sqrt(g_ * R_.p / R_.rho);
    if (2.0 / (g_ - 1.0) * (cL_ + cR_) <= R_.u - L_.u) throw std::domain_error("vacuum generated");
    solve_star();
  }

  double p_star() const { return ps_; }
  double u_star() const { return us_; }

  /// State at similarity coordinate s = (x - x0) / t.
  RiemannState sample(double s) const {
    const double g = g_;
    if (s <= us_) {
      if (ps_ > L_.p) {
        const double pr = ps_ / L_.p;
        const double sl = L_.u - cL_ * std::sqrt((g + 1) / (2 * g) * pr + (g - 1) / (2 * g));
        if (s <= sl) return L_;
        return {L_.rho * (pr + (g - 1) / (g + 1)) / ((g - 1) / (g + 1) * pr + 1), us_, ps_};
      }
      const double shl = L_.u - cL_;
      if (s <= shl) return L_;
      const double cml = cL_ * std::pow(ps_ / L_.p, (g - 1) / (2 * g));
      const double stl = us_ - cml;
      if (s > stl) return {L_.rho * std::pow(ps_ / L_.p, 1 / g), us_, ps_};
      const double c = 2 / (g + 1) + (g - 1) / ((g + 1) * cL_) * (L_.u - s);
      return {L_.rho * std::pow(c, 2 / (g - 1)), 2 / (g + 1) * (cL_ + (g - 1) / 2 * L_.u + s),
              L_.p * std::pow(c, 2 * g / (g - 1))};
    }
    if (ps_ > R_.p) {
      const double pr = ps_ / R_.p;
      const double sr = R_.u + cR_ * std::sqrt((g + 1) / (2 * g) * pr + (g - 1) / (2 * g));
      if (s >= sr) return R_;
      return {R_.rho * (pr + (g - 1) / (g + 1)) / ((g - 1) / (g + 1) * pr + 1), us_, ps_};
    }
    const double shr = R_.u + cR_;
    if (s >= shr) return R_;
    const double cmr = cR_ * std::pow(ps_ / R_.p, (g - 1) / (2 * g));
    const double str = us_ + cmr;
    if (s <= str) return {R_.rho * std::pow(ps_ / R_.p, 1 / g), us_, ps_};
    const double c = 2 / (g + 1) - (g - 1) / ((g + 1) * cR_) * (R_.u - s);
    return {R_.rho * std::pow(c, 2 / (g - 1)), 2 / (g + 1) * (-cR_ + (g - 1) / 2 * R_.u + s),
            R_.p * std::pow(c, 2 * g / (g - 1))};
  }

 private:
  // Pressure function of one side and its derivative.
  void side(double p, const RiemannState& k, double c, double& f, double& df) const {
    const double g = g_;
    if (p <= k.p) {
      const double pr = p / k.p;
      f = 2 * c / (g - 1) * (std::pow(pr, (g - 1) / (2 * g)) - 1);
      df = 1 / (k.rho * c) * std::pow(pr, -(g + 1) / (2 * g));
    } else {
      const double a = 2 / ((g + 1) * k.rho), b = (g - 1) / (g + 1) * k.p;
      const double q = std::sqrt(a / (p + b));
      f = (p - k.p) * q;
      df = (1 - (p - k.p) / (2 * (b + p))) * q;
    }
  }

  void solve_star() {
    double p = 0.5 * (L_.p + R_.p);
    for (int it = 0; it < 200; ++it) {
      double fl, dfl, fr, dfr;
      side(p, L_, cL_, fl, dfl);
      side(p, R_, cR_, fr, dfr);
      double next = p - (fl + fr + R_.u - L_.u) / (dfl + dfr);
      if (next < 1e-14) next = 1e-14;
      const double change = 2 * std::abs(next - p) / (next + p);
      p = next;
      if (change < 1e-15) break;
    }
    double fl, dfl, fr, dfr;
    side(p, L_, cL_, fl, dfl);
    side(p, R_, cR_, fr, dfr);
    ps_ = p;
    us_ = 0.5 * (L_.u + R_.u) + 0.5 * (fr - fl);
  }

  RiemannState L_, R_;
  double g_, cL_ = 0, cR_ = 0, ps_ = 0, us_ = 0;
};

}  // namespace tapestry::testing
