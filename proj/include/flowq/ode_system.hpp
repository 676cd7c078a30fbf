#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "flowq/linalg.hpp"

namespace flowq {

// coef * y[vars[0]] * y[vars[1]] * ... ; empty vars is a constant term.
struct Monomial {
  double coef = 0.0;
  std::vector<unsigned> vars;
};

// dy/dt = f(y) with every component of f a sparse polynomial.
class ODESystem {
 public:
  static constexpr unsigned kDefaultMaxDegree = 3;

  explicit ODESystem(std::size_t dimension, unsigned max_degree = kDefaultMaxDegree);

  // Throws InvalidArgument on an out-of-range index, a non-finite
  // coefficient or a degree above the cap.
  void add_term(std::size_t component, double coef, std::vector<unsigned> vars);

  std::size_t dimension() const { return terms_.size(); }
  unsigned max_degree() const { return max_degree_; }
  unsigned degree() const;
  const std::vector<std::vector<Monomial>>& terms() const { return terms_; }

  RVector eval(const RVector& y) const;

  // Free-form note on where the driver came from ("direct", "heat, central, 8 points").
  std::string provenance = "direct";
  // Hoelder-class metadata (smoothness order and exponent); informational only.
  double holder_r = 0.0;
  double holder_rho = 1.0;

  // dy/dt = A y + b.
  static ODESystem linear(const RMatrix& a, const RVector& b = RVector());

 private:
  std::vector<std::vector<Monomial>> terms_;
  unsigned max_degree_;
};

enum class Scheme { Central, Upwind };

// Throws InvalidArgument for anything other than "central" / "upwind".
Scheme parse_scheme(const std::string& name);

// u_t = nu u_xx - c u_x - beta u u_x on a periodic 1D grid.
struct FluxSpec {
  double diffusion = 0.0;  // nu
  double advection = 0.0;  // c
  double burgers = 0.0;    // beta
};

struct Grid1D {
  std::size_t points = 0;
  double length = 1.0;  // dx = length / points
  double dx() const { return length / static_cast<double>(points); }
};

// Diffusion always uses the three-point central stencil. First derivatives
// use the central difference, or with Scheme::Upwind the one-sided
// difference against the sign of the transport coefficient (beta is assumed
// to multiply a non-negative field).
ODESystem discretize_pde(const FluxSpec& flux, const Grid1D& grid, Scheme scheme);

inline constexpr unsigned kMaxTaylorOrder = 4;

// Taylor coefficients c_0..c_r of the solution through y at t = 0, so that
// y(t) ~ sum_k c_k t^k. Computed by power-series recursion through the
// polynomial driver. Throws InvalidArgument if r is 0 or above kMaxTaylorOrder.
std::vector<RVector> taylor_coefficients(const ODESystem& sys, const RVector& y, unsigned r);

}  // namespace flowq
