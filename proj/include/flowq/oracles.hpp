#pragma once

// Classical references. Nothing here calls the Taylor, QAE or LU paths of
// the modules under test.

#include <functional>
#include <string>
#include <vector>

#include "flowq/linalg.hpp"
#include "flowq/ode_system.hpp"

namespace flowq::oracle {

enum class ReferenceKind { ClosedForm, Rk4Trajectory, DenseSolve };

struct ReferenceSolution {
  ReferenceKind kind = ReferenceKind::ClosedForm;
  std::string name;
  // Closed forms: value(t, x); x is ignored by single-variable entries.
  std::function<double(double, double)> value;
  // Defining equation evaluated at (t, x); zero for an exact solution.
  std::function<double(double, double)> residual;
  std::vector<RVector> trajectory;  // RK4: y_0 .. y_steps
  RVector vector;                   // dense solve
  double tolerance = 0.0;           // residual tolerance the entry was checked to
};

// Classical RK4 with step dt; throws InvalidArgument unless dt > 0.
ReferenceSolution rk4_integrate(const ODESystem& sys, const RVector& y0, double dt, unsigned steps);

// Full-pivot LU. Throws SingularMatrix when the smallest pivot is below
// 1e-12 of the largest, and Error if the relative residual exceeds 1e-10.
ReferenceSolution dense_solve(const RMatrix& m, const RVector& b);
ReferenceSolution dense_solve(const CMatrix& m, const CVector& b, CVector& x);

// Registered: "exp_decay" (e^{-t}), "implicit_midpoint" (step factor at
// dt = t), "qade_quadratic" (x^2 with f'' = 2), "heat_mode"
// (e^{-D k^2 t} sin(k x), D = 1, k = 2 pi). Throws InvalidArgument otherwise.
ReferenceSolution closed_form(const std::string& name);
std::vector<std::string> closed_form_names();

// Same family with explicit diffusivity and wavenumber.
ReferenceSolution heat_mode(double diffusivity, double wavenumber);

// Worst |residual| over 20 evenly spaced probes of [0, 1] x [0, 1].
double max_probe_residual(const ReferenceSolution& ref);

}  // namespace flowq::oracle
