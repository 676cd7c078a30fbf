#include "flowq/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "flowq/errors.hpp"

namespace flowq::oracle {

namespace {

constexpr double kResidualTol = 1e-10;
constexpr double kPivotTol = 1e-12;

// Direct evaluation of the polynomial driver, kept apart from ODESystem::eval.
RVector drive(const ODESystem& sys, const RVector& y) {
  RVector out = RVector::Zero(static_cast<Eigen::Index>(sys.dimension()));
  for (std::size_t i = 0; i < sys.dimension(); ++i) {
    for (const Monomial& term : sys.terms()[i]) {
      double v = term.coef;
      for (unsigned var : term.vars) v *= y[var];
      out[static_cast<Eigen::Index>(i)] += v;
    }
  }
  return out;
}

template <class Matrix>
void check_pivots(const Eigen::FullPivLU<Matrix>& lu) {
  const auto diag = lu.matrixLU().diagonal().cwiseAbs();
  const double hi = diag.maxCoeff();
  if (!(hi > 0.0) || diag.minCoeff() < kPivotTol * hi) throw SingularMatrix("dense_solve: matrix is singular");
}

}  // namespace

ReferenceSolution rk4_integrate(const ODESystem& sys, const RVector& y0, double dt, unsigned steps) {
  if (!(dt > 0.0)) throw InvalidArgument("rk4_integrate: dt must be positive");
  if (static_cast<std::size_t>(y0.size()) != sys.dimension())
    throw InvalidArgument("rk4_integrate: initial state has the wrong dimension");
  ReferenceSolution ref;
  ref.kind = ReferenceKind::Rk4Trajectory;
  ref.name = "rk4";
  ref.trajectory.reserve(steps + 1);
  ref.trajectory.push_back(y0);
  RVector y = y0;
  for (unsigned s = 0; s < steps; ++s) {
    const RVector k1 = drive(sys, y);
    const RVector k2 = drive(sys, y + 0.5 * dt * k1);
    const RVector k3 = drive(sys, y + 0.5 * dt * k2);
    const RVector k4 = drive(sys, y + dt * k3);
    y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    ref.trajectory.push_back(y);
  }
  return ref;
}

ReferenceSolution dense_solve(const RMatrix& m, const RVector& b) {
  if (m.rows() != m.cols() || m.rows() != b.size() || m.rows() == 0)
    throw InvalidArgument("dense_solve: need a square matrix matching the right-hand side");
  const Eigen::FullPivLU<RMatrix> lu(m);
  check_pivots(lu);
  ReferenceSolution ref;
  ref.kind = ReferenceKind::DenseSolve;
  ref.name = "dense_solve";
  ref.vector = lu.solve(b);
  const double scale = std::max(b.norm(), 1e-300);
  if ((m * ref.vector - b).norm() / scale > kResidualTol) throw Error("dense_solve: residual above 1e-10");
  ref.tolerance = kResidualTol;
  return ref;
}

ReferenceSolution dense_solve(const CMatrix& m, const CVector& b, CVector& x) {
  if (m.rows() != m.cols() || m.rows() != b.size() || m.rows() == 0)
    throw InvalidArgument("dense_solve: need a square matrix matching the right-hand side");
  const Eigen::FullPivLU<CMatrix> lu(m);
  check_pivots(lu);
  x = lu.solve(b);
  const double scale = std::max(b.norm(), 1e-300);
  if ((m * x - b).norm() / scale > kResidualTol) throw Error("dense_solve: residual above 1e-10");
  ReferenceSolution ref;
  ref.kind = ReferenceKind::DenseSolve;
  ref.name = "dense_solve";
  ref.tolerance = kResidualTol;
  return ref;
}

ReferenceSolution heat_mode(double diffusivity, double wavenumber) {
  ReferenceSolution ref;
  ref.name = "heat_mode";
  ref.tolerance = kResidualTol;
  const double d = diffusivity, k = wavenumber;
  ref.value = [d, k](double t, double x) { return std::exp(-d * k * k * t) * std::sin(k * x); };
  // u_t - D u_xx with both derivatives written out.
  ref.residual = [d, k](double t, double x) {
    const double decay = std::exp(-d * k * k * t);
    const double u_t = -d * k * k * decay * std::sin(k * x);
    const double u_xx = -k * k * decay * std::sin(k * x);
    return u_t - d * u_xx;
  };
  return ref;
}

ReferenceSolution closed_form(const std::string& name) {
  ReferenceSolution ref;
  ref.name = name;
  ref.tolerance = kResidualTol;
  if (name == "exp_decay") {
    ref.value = [](double t, double) { return std::exp(-t); };
    ref.residual = [](double t, double) { return -std::exp(-t) + std::exp(-t); };
  } else if (name == "implicit_midpoint") {
    ref.value = [](double dt, double) { return (1.0 - dt / 2.0) / (1.0 + dt / 2.0); };
    // u1 = u0 + dt f((u0 + u1)/2) with f(u) = -u and u0 = 1.
    ref.residual = [](double dt, double) {
      const double r = (1.0 - dt / 2.0) / (1.0 + dt / 2.0);
      return r - 1.0 + dt * 0.5 * (1.0 + r);
    };
  } else if (name == "qade_quadratic") {
    ref.value = [](double, double x) { return x * x; };
    ref.residual = [](double, double) { return 2.0 - 2.0; };
  } else if (name == "heat_mode") {
    return heat_mode(1.0, 2.0 * std::numbers::pi);
  } else {
    throw InvalidArgument("closed_form: unknown name '" + name + "'");
  }
  return ref;
}

std::vector<std::string> closed_form_names() {
  return {"exp_decay", "implicit_midpoint", "qade_quadratic", "heat_mode"};
}

double max_probe_residual(const ReferenceSolution& ref) {
  if (!ref.residual) throw InvalidArgument("max_probe_residual: no residual attached");
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double s = i / 19.0;
    worst = std::max(worst, std::abs(ref.residual(s, s)));
  }
  return worst;
}

}  // namespace flowq::oracle
