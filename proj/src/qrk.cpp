#include "flowq/qrk.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>

#include "flowq/errors.hpp"

namespace flowq {

bool ButcherTableau::explicit_method() const {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i; j < a.cols(); ++j)
      if (a(i, j) != 0.0) return false;
  return true;
}

void ButcherTableau::validate() const {
  const auto s = b.size();
  if (s == 0) throw InvalidArgument("ButcherTableau: no stages");
  if (a.rows() != s || a.cols() != s || c.size() != s) throw InvalidArgument("ButcherTableau: A, b, c sizes disagree");
  if (std::abs(b.sum() - 1.0) > 1e-12) throw InvalidArgument("ButcherTableau: weights must sum to 1");
}

ButcherTableau ButcherTableau::forward_euler() {
  return {"forward_euler", RMatrix::Zero(1, 1), RVector::Ones(1), RVector::Zero(1)};
}

ButcherTableau ButcherTableau::backward_euler() {
  return {"backward_euler", RMatrix::Ones(1, 1), RVector::Ones(1), RVector::Ones(1)};
}

ButcherTableau ButcherTableau::implicit_midpoint() {
  return {"implicit_midpoint", RMatrix::Constant(1, 1, 0.5), RVector::Ones(1), RVector::Constant(1, 0.5)};
}

ButcherTableau ButcherTableau::rk4() {
  ButcherTableau t{"rk4", RMatrix::Zero(4, 4), RVector(4), RVector(4)};
  t.a(1, 0) = 0.5;
  t.a(2, 1) = 0.5;
  t.a(3, 2) = 1.0;
  t.b << 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0;
  t.c << 0.0, 0.5, 0.5, 1.0;
  return t;
}

ButcherTableau ButcherTableau::by_name(const std::string& name) {
  if (name == "forward_euler") return forward_euler();
  if (name == "backward_euler") return backward_euler();
  if (name == "implicit_midpoint") return implicit_midpoint();
  if (name == "rk4") return rk4();
  throw InvalidArgument("unknown tableau '" + name + "'");
}

void RKStageProblem::validate() const {
  tableau.validate();
  if (static_cast<std::size_t>(u.size()) != f.dimension()) throw InvalidArgument("RKStageProblem: u has the wrong size");
  if (!std::isfinite(dt) || dt < 0.0) throw InvalidArgument("RKStageProblem: dt must be finite and >= 0");
}

namespace {

// d f_i / d y_v for a polynomial driver.
RMatrix driver_jacobian(const ODESystem& sys, const RVector& y) {
  const auto n = static_cast<Eigen::Index>(sys.dimension());
  RMatrix jac = RMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (const auto& m : sys.terms()[static_cast<std::size_t>(i)])
      for (std::size_t p = 0; p < m.vars.size(); ++p) {
        double d = m.coef;
        for (std::size_t q = 0; q < m.vars.size(); ++q)
          if (q != p) d *= y[m.vars[q]];
        jac(i, m.vars[p]) += d;
      }
  return jac;
}

RVector initial_guess(const RKStageProblem& p) {
  const auto n = static_cast<Eigen::Index>(p.n());
  const auto s = static_cast<Eigen::Index>(p.tableau.stages());
  RVector z(n * (s + 1));
  z.head(n) = p.u;
  const RVector fu = p.f.eval(p.u);
  for (Eigen::Index o = 0; o < s; ++o) z.segment(n * (o + 1), n) = fu;
  return z;
}

}  // namespace

RKResidual::RKResidual(RKStageProblem p) : problem_(std::move(p)) { problem_.validate(); }

RKResidual build_rk_residual(const RKStageProblem& p) { return RKResidual(p); }

RVector RKResidual::residual(const RVector& z) const {
  const auto& p = problem_;
  const auto n = static_cast<Eigen::Index>(p.n());
  const auto s = static_cast<Eigen::Index>(p.tableau.stages());
  if (z.size() != n * (s + 1)) throw InvalidArgument("RKResidual: unknown vector has the wrong size");
  RVector r(n * (s + 1));
  RVector update = z.head(n) - p.u;
  for (Eigen::Index o = 0; o < s; ++o) update -= p.dt * p.tableau.b[o] * z.segment(n * (o + 1), n);
  r.head(n) = update;
  for (Eigen::Index o = 0; o < s; ++o) {
    RVector arg = p.u;
    for (Eigen::Index e = 0; e < s; ++e) arg += p.dt * p.tableau.a(o, e) * z.segment(n * (e + 1), n);
    r.segment(n * (o + 1), n) = z.segment(n * (o + 1), n) - p.f.eval(arg);
  }
  return r;
}

RMatrix RKResidual::jacobian(const RVector& z) const {
  const auto& p = problem_;
  const auto n = static_cast<Eigen::Index>(p.n());
  const auto s = static_cast<Eigen::Index>(p.tableau.stages());
  RMatrix jac = RMatrix::Zero(n * (s + 1), n * (s + 1));
  jac.topLeftCorner(n, n).setIdentity();
  for (Eigen::Index o = 0; o < s; ++o) jac.block(0, n * (o + 1), n, n) -= p.dt * p.tableau.b[o] * RMatrix::Identity(n, n);
  for (Eigen::Index o = 0; o < s; ++o) {
    RVector arg = p.u;
    for (Eigen::Index e = 0; e < s; ++e) arg += p.dt * p.tableau.a(o, e) * z.segment(n * (e + 1), n);
    const RMatrix df = driver_jacobian(p.f, arg);
    jac.block(n * (o + 1), n * (o + 1), n, n) += RMatrix::Identity(n, n);
    for (Eigen::Index e = 0; e < s; ++e) jac.block(n * (o + 1), n * (e + 1), n, n) -= p.dt * p.tableau.a(o, e) * df;
  }
  return jac;
}

void RKResidual::affine_form(RMatrix& r, RVector& q) const {
  if (!is_affine()) throw InvalidArgument("RKResidual: residual is not affine for nonlinear drivers");
  const RVector zero = RVector::Zero(static_cast<Eigen::Index>(n_unknowns()));
  r = jacobian(zero);
  q = -residual(zero);
}

ContinuousRKSolution minimize_rk_residual(const RKResidual& res, unsigned max_iterations) {
  ContinuousRKSolution out;
  RVector z = initial_guess(res.problem());
  for (unsigned it = 0; it < max_iterations; ++it) {
    const RVector r = res.residual(z);
    const RVector step = res.jacobian(z).colPivHouseholderQr().solve(r);
    z -= step;
    out.iterations = it + 1;
    if (res.is_affine() || step.norm() <= 1e-15 * std::max(1.0, z.norm())) break;
  }
  out.z = z;
  out.u_next = z.head(static_cast<Eigen::Index>(res.problem().n()));
  out.objective = res.objective(z);
  return out;
}

WindowedReport rk_windowed_solve(const RKStageProblem& p, unsigned bits, unsigned epochs, const IsingSolver& solver,
                                 int k0) {
  const RKResidual res(p);
  if (!res.is_affine())
    throw InvalidArgument("rk_windowed_solve: polynomial order " + std::to_string(p.polynomial_order()) +
                          " is not supported on the QUBO path (needs order <= 1)");
  if (bits == 0 || bits > 16) throw InvalidArgument("rk_windowed_solve: bits must lie in 1..16");
  if (epochs == 0) throw InvalidArgument("rk_windowed_solve: epochs must be >= 1");

  RMatrix rm;
  RVector q;
  res.affine_form(rm, q);
  const auto nv = static_cast<Eigen::Index>(res.n_unknowns());
  const std::uint64_t top = (std::uint64_t{1} << bits) - 1;

  std::vector<WindowedVariable> win(static_cast<std::size_t>(nv));
  const RVector guess = initial_guess(p);
  for (Eigen::Index v = 0; v < nv; ++v) {
    auto& w = win[static_cast<std::size_t>(v)];
    w.k = k0;
    w.bits = bits;
    w.centre = guess[v];
  }

  WindowedReport rep;
  for (unsigned e = 0; e < epochs; ++e) {
    // z = d + E x with x in {0,1}^(nv*bits); x = (1 + s)/2.
    const auto nb = nv * static_cast<Eigen::Index>(bits);
    RMatrix emat = RMatrix::Zero(nv, nb);
    RVector dvec(nv);
    for (Eigen::Index v = 0; v < nv; ++v) {
      const auto& w = win[static_cast<std::size_t>(v)];
      dvec[v] = w.d();
      for (unsigned b = 0; b < bits; ++b) emat(v, v * bits + b) = std::ldexp(1.0, static_cast<int>(b) - w.k);
    }
    // ||R(d + E x) - q||^2 with x = (1 + s)/2: z = (d + E 1/2) + (E/2) s.
    const RVector z0 = dvec + 0.5 * emat * RVector::Ones(nb);
    const RMatrix g = rm * (0.5 * emat);
    const RVector r0 = rm * z0 - q;
    const IsingProblem ising = IsingProblem::from_quadratic(g.transpose() * g, 2.0 * g.transpose() * r0, r0.squaredNorm());
    const IsingSolution sol = solver.solve(ising);

    WindowedEpoch ep;
    ep.windows = win;
    ep.z = RVector(nv);
    ep.saturated.assign(static_cast<std::size_t>(nv), false);
    for (Eigen::Index v = 0; v < nv; ++v) {
      std::uint64_t code = 0;
      for (unsigned b = 0; b < bits; ++b)
        if (sol.spins[static_cast<std::size_t>(v * bits + b)] > 0) code |= std::uint64_t{1} << b;
      auto& w = win[static_cast<std::size_t>(v)];
      ep.z[v] = w.decode(code);
      const bool sat = code == 0 || code == top;
      ep.saturated[static_cast<std::size_t>(v)] = sat;
      rep.ever_saturated = rep.ever_saturated || sat;
      if (!sat) ++w.k;
      w.centre = ep.z[v];
    }
    ep.objective = res.objective(ep.z);
    rep.epochs.push_back(ep);
  }
  const auto& last = rep.epochs.back();
  rep.z = last.z;
  rep.u_next = last.z.head(static_cast<Eigen::Index>(p.n()));
  rep.objective = last.objective;
  for (bool s : last.saturated) rep.any_saturated = rep.any_saturated || s;
  return rep;
}

}  // namespace flowq
