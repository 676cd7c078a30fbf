#pragma once

#include <string>
#include <vector>

#include "flowq/ising.hpp"
#include "flowq/ode_system.hpp"

namespace flowq {

struct ButcherTableau {
  std::string name;
  RMatrix a;
  RVector b;
  RVector c;

  std::size_t stages() const { return static_cast<std::size_t>(b.size()); }
  bool explicit_method() const;  // A strictly lower triangular
  // Throws InvalidArgument on size mismatch or sum(b) != 1 within 1e-12.
  void validate() const;

  static ButcherTableau forward_euler();
  static ButcherTableau backward_euler();
  static ButcherTableau implicit_midpoint();
  static ButcherTableau rk4();
  static ButcherTableau by_name(const std::string& name);
};

// One step of du/dt = f(u) from `u` with step dt. f is a polynomial driver;
// its degree is the polynomial order (L^(1) constant, L^(2) linear, ...).
struct RKStageProblem {
  ODESystem f;
  ButcherTableau tableau;
  double dt = 0.0;
  RVector u;

  std::size_t n() const { return f.dimension(); }
  unsigned polynomial_order() const { return f.degree(); }
  void validate() const;
};

// Unknowns z = (u_next, K_1, ..., K_s), each block of length N.
// Residuals: u_next - u - dt sum_o b_o K_o, and K_o - f(u + dt sum_e A_oe K_e).
class RKResidual {
 public:
  explicit RKResidual(RKStageProblem p);

  std::size_t n_unknowns() const { return (problem_.tableau.stages() + 1) * problem_.n(); }
  RVector residual(const RVector& z) const;
  double objective(const RVector& z) const { return residual(z).squaredNorm(); }
  RMatrix jacobian(const RVector& z) const;

  // For polynomial order <= 1 the residual is affine: r(z) = R z - q.
  bool is_affine() const { return problem_.polynomial_order() <= 1; }
  void affine_form(RMatrix& r, RVector& q) const;

  const RKStageProblem& problem() const { return problem_; }

 private:
  RKStageProblem problem_;
};

RKResidual build_rk_residual(const RKStageProblem& p);

struct ContinuousRKSolution {
  RVector z;
  RVector u_next;
  double objective = 0.0;
  unsigned iterations = 0;
};

// Gauss-Newton from z = (u, f(u), ..., f(u)); one step when affine.
ContinuousRKSolution minimize_rk_residual(const RKResidual& res, unsigned max_iterations = 50);

// value = 2^-k * (unsigned integer of the bits) + d, stored through the
// centre (code 2^(bits-1)) so the centre decodes exactly.
struct WindowedVariable {
  int k = 0;
  double centre = 0.0;
  unsigned bits = 6;
  double decode(std::uint64_t code) const {
    return centre + std::ldexp(static_cast<double>(code) - std::ldexp(1.0, static_cast<int>(bits) - 1), -k);
  }
  double d() const { return decode(0); }
  double lo() const { return decode(0); }
  double hi() const { return decode((std::uint64_t{1} << bits) - 1); }
};

struct WindowedEpoch {
  std::vector<WindowedVariable> windows;
  RVector z;
  double objective = 0.0;
  std::vector<bool> saturated;  // code at 0 or 2^bits - 1
};

struct WindowedReport {
  RVector u_next;
  RVector z;
  double objective = 0.0;
  bool any_saturated = false;  // some variable sat on a window edge in the final epoch
  bool ever_saturated = false;
  std::vector<WindowedEpoch> epochs;
};

// Windowed binary encoding of all unknowns, solved as an Ising problem each
// epoch. Windows start centred on (u, f(u), ...) with scale exponent k0;
// after each epoch every window re-centres on its decoded value and, once the
// value is interior, k grows by one. Throws InvalidArgument for polynomial
// order above 1.
WindowedReport rk_windowed_solve(const RKStageProblem& p, unsigned bits, unsigned epochs, const IsingSolver& solver,
                                 int k0 = 3);

}  // namespace flowq
