#include <doctest.h>

#include <cmath>
#include <random>

#include "flowq/errors.hpp"
#include "flowq/qade.hpp"

using namespace flowq;

namespace {

ScalarFn constant(double c) {
  return [c](double) { return c; };
}

ResidualEquation condition(unsigned order, double coef, double rhs, std::vector<double> samples) {
  ResidualEquation e;
  e.terms.push_back({0, order, constant(coef)});
  e.inhomogeneity = constant(-rhs);
  e.samples = std::move(samples);
  return e;
}

// f'' = 2, f(0) = 0, f(1) = 1; exact solution x^2.
FunctionalResidual quadratic_problem() {
  FunctionalResidual p;
  p.equations.push_back(condition(2, 1.0, 2.0, {0.0, 0.25, 0.5, 0.75, 1.0}));
  p.equations.push_back(condition(0, 1.0, 0.0, {0.0}));
  p.equations.push_back(condition(0, 1.0, 1.0, {1.0}));
  return p;
}

double min_eigenvalue(const RMatrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<RMatrix>(m).eigenvalues().minCoeff();
}

double max_eigenvalue(const RMatrix& m) { return Eigen::SelfAdjointEigenSolver<RMatrix>(m).eigenvalues().maxCoeff(); }

Spins spins_of(std::uint64_t bits, std::size_t n) {
  Spins s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = (bits >> i) & 1U ? 1 : -1;
  return s;
}

}  // namespace

TEST_CASE("basis derivatives match finite differences") {
  for (BasisFamily fam : {BasisFamily::Monomial, BasisFamily::Chebyshev}) {
    const BasisSet b(fam, 4);
    const double h = 1e-3;
    for (double x : {0.1, 0.37, 0.8})
      for (std::size_t m = 0; m < b.size(); ++m)
        for (unsigned k = 0; k < 3; ++k) {
          auto f = [&](double t) { return b.eval(m, k, t); };
          const double fd = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
          CHECK(std::abs(fd - b.eval(m, k + 1, x)) < 1e-6);
        }
  }
  const BasisSet cheb(BasisFamily::Chebyshev, 2);
  CHECK(std::abs(cheb.eval(2, 0, 0.75) - (2 * 0.25 - 1)) < 1e-15);
  CHECK_THROWS_AS(cheb.eval(0, 5, 0.5), InvalidArgument);
  CHECK_THROWS_AS(parse_basis_family("legendre"), InvalidArgument);
}

TEST_CASE("single boundary condition") {
  FunctionalResidual p;
  p.equations.push_back(condition(0, 1.0, 1.0, {0.0}));
  const ContinuousQuadraticLoss loss = assemble_loss(p, BasisSet(BasisFamily::Monomial, 1));
  CHECK(loss.j(0, 0) == 1.0);
  CHECK(loss.j(1, 1) == 0.0);
  CHECK(loss.h[0] == -2.0);
  CHECK(loss.constant == 1.0);
  CHECK(std::abs(loss.eval((RVector(2) << 1.0, 0.4).finished())) < 1e-15);
  CHECK(loss.eval((RVector(2) << 0.5, 0.0).finished()) > 0.0);
}

TEST_CASE("no equations") {
  const ContinuousQuadraticLoss loss = assemble_loss(FunctionalResidual{}, BasisSet(BasisFamily::Monomial, 2));
  CHECK(loss.j.norm() == 0.0);
  CHECK(loss.h.norm() == 0.0);
  CHECK(loss.constant == 0.0);
}

TEST_CASE("constant solution") {
  FunctionalResidual p;
  p.equations.push_back(condition(1, 1.0, 0.0, {0.0, 0.5, 1.0}));
  p.equations.push_back(condition(0, 1.0, 3.0, {0.0}));
  const ContinuousQuadraticLoss loss = assemble_loss(p, BasisSet(BasisFamily::Monomial, 1));
  const RVector w = loss.j.ldlt().solve(-0.5 * loss.h);
  CHECK(std::abs(w[0] - 3.0) < 1e-12);
  CHECK(std::abs(w[1]) < 1e-12);
  CHECK(std::abs(loss.eval(w)) < 1e-12);
}

TEST_CASE("loss is a sum of squares") {
  std::mt19937_64 g(31);
  std::uniform_real_distribution<double> u(-1, 1);
  FunctionalResidual p;
  for (int e = 0; e < 3; ++e) {
    ResidualEquation eq;
    const double a = u(g), b = u(g);
    eq.terms.push_back({0, 1, [a](double x) { return a + x; }});
    eq.terms.push_back({0, 0, constant(b)});
    eq.inhomogeneity = [](double x) { return std::sin(x); };
    eq.samples = {0.1, 0.4, 0.9};
    p.equations.push_back(eq);
  }
  const BasisSet basis(BasisFamily::Chebyshev, 3);
  const ContinuousQuadraticLoss loss = assemble_loss(p, basis);
  CHECK((loss.j - loss.j.transpose()).norm() < 1e-14);
  CHECK(min_eigenvalue(loss.j) >= -1e-9);

  // Direct sum of squared residuals at a random weight vector.
  RVector w(4);
  for (auto& v : w) v = u(g);
  double direct = 0.0;
  for (const auto& eq : p.equations)
    for (double x : eq.samples) {
      double r = eq.inhomogeneity(x);
      for (const auto& t : eq.terms)
        for (std::size_t m = 0; m < basis.size(); ++m) r += t.coef(x) * w[static_cast<Eigen::Index>(m)] * basis.eval(m, t.order, x);
      direct += r * r;
    }
  CHECK(std::abs(loss.eval(w) - direct) < 1e-12);

  FunctionalResidual empty;
  empty.equations.push_back(condition(0, 1.0, 1.0, {}));
  CHECK_THROWS_AS(assemble_loss(empty, basis), InvalidArgument);
}

TEST_CASE("spin encoding decodes per the window formula") {
  const SpinEncoding one = SpinEncoding::uniform(1, 1, 2.0);
  CHECK(one.decode({1})[0] == 1.0);
  CHECK(one.decode({-1})[0] == -1.0);

  const SpinEncoding two = SpinEncoding::uniform(1, 2, 1.0);
  CHECK(two.decode({1, 1})[0] == 0.75);
  CHECK(two.decode({-1, -1})[0] == -0.75);
  CHECK(two.decode({1, -1})[0] == 0.25);

  SpinEncoding bad = SpinEncoding::uniform(2, 2, 1.0);
  bad.scale[1] = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("Ising energy equals the loss of the decoded weights") {
  std::mt19937_64 g(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 5; ++t) {
    ContinuousQuadraticLoss loss;
    RMatrix a(3, 3);
    for (auto& v : a.reshaped()) v = u(g);
    loss.j = a * a.transpose();
    loss.h = RVector(3);
    for (auto& v : loss.h) v = u(g);
    loss.constant = u(g);

    SpinEncoding enc = SpinEncoding::uniform(3, 3, 0.7);
    for (auto& c : enc.center) c = u(g);
    const IsingProblem ising = spin_encode(loss, enc);
    CHECK((ising.couplings - ising.couplings.transpose()).norm() == 0.0);
    CHECK(ising.couplings.diagonal().norm() == 0.0);
    for (std::uint64_t b = 0; b < 512; ++b) {
      const Spins s = spins_of(b, 9);
      const RVector w = enc.decode(s);
      CHECK(std::abs(ising.energy(s) - loss.eval(w)) < 1e-10);
      for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(w[i] - enc.center[static_cast<std::size_t>(i)]) <= 0.7 * (1 - 0.125) + 1e-15);
    }
  }
}

TEST_CASE("reconstruction") {
  const FunctionalResidual p = quadratic_problem();
  const BasisSet basis(BasisFamily::Monomial, 2);
  const ContinuousQuadraticLoss loss = assemble_loss(p, basis);
  SpinEncoding enc = SpinEncoding::uniform(3, 3, 1.0);
  const IsingProblem ising = spin_encode(loss, enc);
  const IsingSolution sol = solve_exhaustive(ising);
  const Reconstruction r = decode_and_reconstruct(sol.spins, enc, basis, loss);
  CHECK(std::abs(r.residual - sol.energy) < 1e-10);
  CHECK(std::abs(r.residual - loss.eval(r.weights)) < 1e-12);
  const double x = 0.3;
  CHECK(std::abs(r.field(0, 0, x) - (r.weights[0] + r.weights[1] * x + r.weights[2] * x * x)) < 1e-14);
  CHECK(std::abs(r.field(0, 2, x) - 2 * r.weights[2]) < 1e-14);
}

TEST_CASE("zoom from an exact centre") {
  const FunctionalResidual p = quadratic_problem();
  const BasisSet basis(BasisFamily::Monomial, 2);
  const ContinuousQuadraticLoss loss = assemble_loss(p, basis);
  CHECK(std::abs(loss.eval((RVector(3) << 0, 0, 1).finished())) < 1e-14);

  const double s0 = 0.5;
  const unsigned n = 3;
  SpinEncoding enc = SpinEncoding::uniform(3, n, s0);
  enc.center = {0.0, 0.0, 1.0};
  const ZoomResult z = zoom_iterate(p, basis, enc, 4, 0.5, IsingSolver{});
  // Each decoded weight sits within s 2^-n of the centre at best.
  const double lsb = s0 * std::ldexp(1.0, -static_cast<int>(n));
  const double bound = max_eigenvalue(loss.j) * 3 * lsb * lsb;
  CHECK(z.epochs[0].residual <= bound + 1e-12);
  CHECK(z.residual <= bound + 1e-12);
  for (std::size_t e = 1; e < z.epochs.size(); ++e) CHECK(z.epochs[e].best_residual <= z.epochs[e - 1].best_residual);
  CHECK(z.epochs[1].encoding.scale[0] == s0 / 2);
}

TEST_CASE("zoom bookkeeping") {
  const FunctionalResidual p = quadratic_problem();
  const BasisSet basis(BasisFamily::Monomial, 2);
  SpinEncoding enc = SpinEncoding::uniform(3, 3, 1.0);
  enc.center = {0.3, -0.2, 0.6};
  const ZoomResult z = zoom_iterate(p, basis, enc, 6, 0.5, IsingSolver{});
  REQUIRE(z.epochs.size() == 6);
  double best = z.epochs[0].residual;
  for (std::size_t e = 0; e < z.epochs.size(); ++e) {
    best = std::min(best, z.epochs[e].residual);
    CHECK(z.epochs[e].best_residual == best);
    if (e > 0) {
      CHECK(z.epochs[e].encoding.center[0] == z.epochs[e - 1].weights[0]);
      CHECK(z.epochs[e].encoding.scale[2] == z.epochs[e - 1].encoding.scale[2] * 0.5);
    }
  }
  CHECK(z.residual == best);
  CHECK(z.residual < assemble_loss(p, basis).eval((RVector(3) << 0.3, -0.2, 0.6).finished()));

  CHECK_THROWS_AS(zoom_iterate(p, basis, enc, 0, 0.5, IsingSolver{}), InvalidArgument);
  CHECK_THROWS_AS(zoom_iterate(p, basis, enc, 2, 1.0, IsingSolver{}), InvalidArgument);
}
