#include <doctest.h>

#include <cmath>
#include <random>

#include "flowq/copies.hpp"
#include "flowq/errors.hpp"
#include "flowq/gates.hpp"

using namespace flowq;

namespace {

const Complex kI(0, 1);

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

QuadraticMap identity_map(std::size_t n) {
  QuadraticMap m(n);
  for (std::size_t a = 1; a <= n; ++a) m.set(a, a, 0, 0.5);
  return m;
}

// f_1 = z_1^2 - z_2^2, f_2 = 2 z_1 z_2: norm-preserving for real unit z.
QuadraticMap squaring_map() {
  QuadraticMap m(2);
  m.set(1, 1, 1, 1.0);
  m.set(1, 2, 2, -1.0);
  m.set(2, 1, 2, 1.0);
  return m;
}

CMatrix pair_interaction(double kappa, double mu) {
  const CMatrix id = CMatrix::Identity(2, 2), x = pauli_x_matrix(), y = pauli_y_matrix(), z = pauli_z_matrix();
  return -kI * kappa * (kron(x, x) + kron(z, z)) - kI * mu * (kron(y, id) + kron(id, y));
}

}  // namespace

TEST_CASE("phi encoding") {
  const Statevector s = encode_phi((CVector(3) << 1, 0, 0).finished());
  REQUIRE(s.dimension() == 4);
  const double r = 1 / std::sqrt(2.0);
  CHECK(std::abs(s.amplitude(0) - r) < 1e-15);
  CHECK(std::abs(s.amplitude(1) - r) < 1e-15);
  CHECK(std::abs(s.amplitude(2)) == 0.0);
  CHECK(std::abs(s.amplitude(3)) == 0.0);

  CHECK_THROWS_AS(encode_phi((CVector(2) << 0.9, 0).finished()), InvalidArgument);

  std::mt19937_64 g(8);
  std::normal_distribution<double> n(0, 1);
  for (int t = 0; t < 10; ++t) {
    CVector z(5);
    for (auto& v : z) v = Complex(n(g), n(g));
    z.normalize();
    const CVector back = decode_phi(encode_phi(z).amplitudes(), 5);
    CHECK((back - z).norm() < 1e-12);
  }
}

TEST_CASE("quadratic map evaluation") {
  const QuadraticMap sq = squaring_map();
  const CVector z = (CVector(2) << 0.6, 0.8).finished();
  const CVector f = sq.apply(z);
  CHECK(f[0] == 1.0);
  CHECK(std::abs(f[1] - (0.36 - 0.64)) < 1e-15);
  CHECK(std::abs(f[2] - 2 * 0.6 * 0.8) < 1e-15);
  CHECK(std::abs(f.tail(2).norm() - 1.0) < 1e-10);
  CHECK(sq.coefficient(2, 2, 1) == 1.0);
  CHECK_THROWS_AS(QuadraticMap(2).set(0, 0, 0, 1.0), InvalidArgument);

  // rescaled(r) evaluated at z / r gives the original polynomial at z.
  QuadraticMap m(2);
  m.set(1, 0, 0, 0.3);
  m.set(1, 0, 1, -0.2);
  m.set(2, 1, 2, 0.7);
  const CVector w = (CVector(2) << 1.5, -2.0).finished();
  const double r = w.norm();
  CHECK((m.rescaled(r).apply(w / r) - m.apply(w)).norm() < 1e-14);
}

TEST_CASE("pointer Hamiltonian is Hermitian") {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 10; ++t) {
    QuadraticMap m(2);
    for (std::size_t a = 1; a <= 2; ++a)
      for (std::size_t k = 0; k <= 2; ++k)
        for (std::size_t l = k; l <= 2; ++l) m.set(a, k, l, u(g));
    const CMatrix h = pointer_hamiltonian(m);
    CHECK((h - h.adjoint()).norm() < 1e-12);
  }
}

TEST_CASE("identity-like map") {
  const QuadraticMap id = identity_map(3);
  CVector z(3);
  z << Complex(0.3, 0.1), Complex(-0.5, 0.2), Complex(0.7, 0.0);
  z.normalize();
  CHECK((id.apply(z).tail(3) - z).norm() < 1e-15);
  for (double eps : {0.2, 0.1, 0.05}) {
    const QuadraticMapResult r = apply_quadratic_map(id, z, eps);
    CHECK((r.target.tail(3) - z).norm() < 1e-15);
    CHECK(r.fidelity >= 1 - eps * eps);
  }
}

TEST_CASE("success probability of measure-preserving maps") {
  const CVector z = (CVector(2) << 0.6, 0.8).finished();
  double previous = 1.0;
  for (double eps : {0.2, 0.1, 0.05}) {
    const QuadraticMapResult r = apply_quadratic_map(squaring_map(), z, eps);
    CHECK(r.success_probability < previous);
    previous = r.success_probability;
    CHECK(r.fidelity >= 1 - eps * eps);
    CHECK((r.z_out - r.target.tail(2)).norm() < 5 * eps * eps);
  }
  const QuadraticMapResult r = apply_quadratic_map(squaring_map(), z, 0.05);
  CHECK(r.success_probability >= 0.8 * 0.05 * 0.05 / 2);
  CHECK(r.success_probability <= 1.2 * 0.05 * 0.05 / 2);

  CHECK_THROWS_AS(apply_quadratic_map(squaring_map(), z, 0.0), InvalidArgument);
  CHECK_THROWS_AS(apply_quadratic_map(squaring_map(), z, 0.3), InvalidArgument);
}

TEST_CASE("copy budget") {
  CHECK(copy_budget(0.5, 2) == 4096);
  CHECK(copy_budget(0.5, 1) == 64);
  CHECK(copy_budget(1e-3, 10) == UINT64_MAX);
  CHECK_THROWS_AS(copy_budget(0.0, 1), InvalidArgument);
}

TEST_CASE("Euler iteration") {
  // dz/dt = -z^2 + 0.2 in one variable.
  QuadraticMap m(1);
  m.set(1, 1, 1, -1.0);
  m.set(1, 0, 0, 0.2);
  const CVector z0 = (CVector(1) << 0.8).finished();

  const EulerTrajectory still = euler_iterate(m, z0, 0.0, 3, 0.1);
  for (const auto& z : still.z) CHECK(z == z0);

  const double eps = 0.05, dt = 0.1;
  const unsigned steps = 5;
  const EulerTrajectory tr = euler_iterate(m, z0, dt, steps, eps);
  CHECK(tr.copy_budget == copy_budget(eps, steps));
  REQUIRE(tr.z.size() == steps + 1);
  double zc = 0.8;
  for (unsigned k = 1; k <= steps; ++k) {
    zc = zc + dt * (-zc * zc + 0.2);
    CHECK(std::abs(tr.z[k][0] - zc) <= 5 * eps * eps * k);
  }
  CHECK_THROWS_AS(euler_iterate(m, z0, dt, 0, eps), InvalidArgument);
}

TEST_CASE("mean-field trivial generators") {
  const CVector x0 = (CVector(2) << Complex(0.6, 0.0), Complex(0.0, 0.8)).finished();
  const CMatrix pure = x0 * x0.adjoint();

  MeanFieldSystem zero;
  zero.d = 2;
  zero.copies = 3;
  zero.f_pair = CMatrix::Zero(4, 4);
  const MeanFieldResult rz = meanfield_evolve(zero, x0, 0.1, 3);
  for (const auto& rho : rz.reduced) CHECK((rho - pure).norm() < 1e-14);

  MeanFieldSystem phase = zero;
  phase.f_pair = kI * 0.7 * CMatrix::Identity(4, 4);
  CHECK((phase.generator(x0) - kI * 0.7 * CMatrix::Identity(2, 2)).norm() < 1e-14);
  const MeanFieldResult rp = meanfield_evolve(phase, x0, 0.1, 3);
  for (const auto& rho : rp.reduced) CHECK((rho - pure).norm() < 1e-12);

  MeanFieldSystem bad = zero;
  bad.f_pair = CMatrix::Identity(4, 4);
  CHECK_THROWS_AS(meanfield_evolve(bad, x0, 0.1, 1), InvalidArgument);
}

TEST_CASE("mean-field reduced state tracks the nonlinear Euler map") {
  MeanFieldSystem sys;
  sys.d = 2;
  sys.copies = 4;
  sys.f_pair = pair_interaction(0.5, 0.4);
  CVector x0(2);
  x0 << Complex(0.8, 0.0), Complex(0.0, 0.6);
  const double dt = 0.05 / meanfield_evolve(sys, x0, 1.0, 1).e_norm;
  const MeanFieldResult r = meanfield_evolve(sys, x0, dt, 1);
  const double edt = r.e_norm * dt;
  CHECK(r.trace_distance.back() <= 10 * edt * edt);

  // One classical Euler step from the generator, then renormalized.
  const CVector x1 = (x0 - dt * sys.generator(x0) * x0).normalized();
  CHECK(phase_aligned_distance(r.classical.back(), x1) < 1e-12);
}

TEST_CASE("history system with no driver") {
  HistorySpec s;
  s.d = 2;
  s.dt = 0.1;
  s.b.assign(4, CVector::Zero(2));
  s.b[0] = (CVector(2) << 1, 0).finished();
  const HistoryLinearSystem sys = build_history_system(s);
  CHECK(sys.m.rows() == 8);
  CHECK(nonzero_blocks(sys) == 2 * 3 + 1);
  const HistorySolution sol = solve_history(sys);
  for (const auto& x : sol.extracted) CHECK((x - s.b[0]).norm() < 1e-14);
}

TEST_CASE("history system with a linear driver") {
  HistorySpec s;
  s.d = 3;
  s.dt = 0.05;
  s.linear = CMatrix(3, 3);
  s.linear << 0.4, -0.1, 0.0, 0.2, 0.3, -0.5, 0.0, 0.1, 0.9;
  s.b.assign(7, CVector::Zero(3));
  s.b[0] = (CVector(3) << 1.0, -0.5, 0.25).finished();
  s.b[3] = (CVector(3) << 0.1, 0.0, -0.2).finished();
  const HistoryLinearSystem sys = build_history_system(s);
  CHECK(nonzero_blocks(sys) == 2 * 6 + 1);
  for (Eigen::Index r = 0; r < sys.m.rows(); ++r)
    for (Eigen::Index c = 0; c < sys.m.cols(); ++c)
      if (c / 3 > r / 3 || r / 3 > c / 3 + 1) CHECK(sys.m(r, c) == 0.0);

  const HistorySolution sol = solve_history(sys);
  CVector x = s.b[0];
  for (unsigned k = 0; k <= 6; ++k) {
    if (k > 0) x = x - s.dt * (s.linear * x) + s.dt * s.b[k];
    CHECK((sol.extracted[k] - x).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("history system with two copies") {
  // C = 0.5 bounds max_k |x_k - euler_k| * n / dt for this system at dt <= 0.2.
  const double C = 0.5;
  for (double dt : {0.2, 0.1, 0.05, 0.025}) {
    HistorySpec s;
    s.d = 2;
    s.copies = 2;
    s.dt = dt;
    s.f_pair = pair_interaction(0.8, 0.3);
    s.b.assign(5, CVector::Zero(2));
    s.b[0] = (CVector(2) << 0.6, 0.8).finished();
    const HistoryLinearSystem sys = build_history_system(s);
    CHECK(sys.m.rows() == 5 * 4);
    const HistorySolution sol = solve_history(sys);
    const auto euler = nonlinear_euler(s);
    double dev = 0.0;
    for (unsigned k = 0; k <= 4; ++k) dev = std::max(dev, phase_aligned_distance(sol.extracted[k], euler[k]));
    CHECK(dev <= C * dt / 2);
  }
}

TEST_CASE("history argument checks") {
  HistorySpec s;
  s.d = 2;
  s.b = {CVector::Zero(2)};
  CHECK_THROWS_AS(build_history_system(s), InvalidArgument);
  s.b.assign(3, CVector::Zero(2));
  s.f_pair = pair_interaction(0.8, 0.3);
  CHECK_THROWS_AS(build_history_system(s), InvalidArgument);
}
