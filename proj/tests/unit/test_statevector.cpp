#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include "flowq/errors.hpp"
#include "flowq/gates.hpp"
#include "flowq/statevector.hpp"

using namespace flowq;

namespace {

RegisterLayout one_reg(unsigned n) { return RegisterLayout({{"q", n}}); }

CVector random_state(std::mt19937_64& g, Eigen::Index dim) {
  std::normal_distribution<double> nd;
  CVector v(dim);
  for (auto& x : v) x = Complex(nd(g), nd(g));
  return v.normalized();
}

// QR of a Gaussian matrix with the R-diagonal phases divided out.
CMatrix haar_unitary(std::mt19937_64& g, Eigen::Index dim) {
  std::normal_distribution<double> nd;
  CMatrix z(dim, dim);
  for (auto& x : z.reshaped()) x = Complex(nd(g), nd(g));
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

}  // namespace

TEST_CASE("layout bookkeeping") {
  RegisterLayout l({{"R", 3}, {"S", 2}});
  CHECK(l.total_qubits() == 5);
  CHECK(l.offset("S") == 0);
  CHECK(l.offset("R") == 2);
  CHECK(l.qubits("R") == std::vector<unsigned>{2, 3, 4});
  const std::uint64_t idx = l.insert(l.insert(0, "R", 5), "S", 2);
  CHECK(idx == 5 * 4 + 2);
  CHECK(l.extract(idx, "R") == 5);
  CHECK(l.extract(idx, "S") == 2);
  CHECK_THROWS_AS(RegisterLayout({{"a", 1}, {"a", 2}}), InvalidArgument);
  CHECK_THROWS_AS(RegisterLayout({{"a", 0}}), InvalidArgument);
  CHECK_THROWS_AS(RegisterLayout({{"a", 20}, {"b", 3}}), QubitCapExceeded);
}

TEST_CASE("qubit cap follows FLOWQ_MAX_QUBITS") {
  setenv("FLOWQ_MAX_QUBITS", "4", 1);
  CHECK(max_qubits() == 4);
  CHECK_THROWS_AS(one_reg(5), QubitCapExceeded);
  unsetenv("FLOWQ_MAX_QUBITS");
  CHECK(max_qubits() == kDefaultMaxQubits);
}

TEST_CASE("statevector rejects bad amplitudes") {
  CHECK_THROWS_AS(Statevector(one_reg(1), CVector::Ones(2)), InvalidArgument);
  CHECK_THROWS_AS(Statevector(one_reg(2), CVector::Ones(2).normalized()), InvalidArgument);
  CHECK_NOTHROW(Statevector(one_reg(1), CVector::Ones(2), 1.0, true));
}

TEST_CASE("hadamard and bit flip") {
  const Statevector zero = Statevector::basis(one_reg(1), 0);
  const Statevector plus = apply_unitary(zero, hadamard(0));
  CHECK(std::abs(plus.amplitude(0) - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(plus.amplitude(1) - 1 / std::sqrt(2.0)) < 1e-15);
  const Statevector one = apply_unitary(zero, pauli_x(0));
  CHECK(std::abs(one.amplitude(1) - 1.0) < 1e-15);
  CHECK(std::abs(one.amplitude(0)) < 1e-15);
}

TEST_CASE("random two-qubit unitaries preserve the norm") {
  std::mt19937_64 g(11);
  for (int t = 0; t < 100; ++t) {
    const Statevector s(one_reg(4), random_state(g, 16));
    const unsigned a = t % 4, b = (t + 1 + t / 4 % 3) % 4;
    const Statevector out = apply_unitary(s, UnitaryOp::dense(haar_unitary(g, 4), {a, b}));
    CHECK(std::abs(out.norm() - 1.0) < 1e-10);
  }
}

TEST_CASE("dense op rejects non-unitary input and out-of-range targets") {
  CMatrix m = CMatrix::Identity(2, 2);
  m(0, 0) = 1.1;
  CHECK_THROWS_AS(UnitaryOp::dense(m, {0}), NotUnitary);
  CHECK_THROWS_AS(UnitaryOp::diagonal((CVector(2) << 1.0, 0.5).finished(), {0}), NotUnitary);
  CHECK_THROWS_AS(UnitaryOp::permutation({0, 0}, {0}), NotUnitary);
  CHECK_THROWS_AS(apply_unitary(Statevector::basis(one_reg(1), 0), hadamard(3)), InvalidArgument);
}

TEST_CASE("structured ops agree with their dense matrices") {
  std::mt19937_64 g(5);
  for (unsigned n = 2; n <= 4; ++n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    std::vector<UnitaryOp> ops;
    CVector phases(4);
    for (auto& p : phases) p = std::polar(1.0, std::uniform_real_distribution<double>(0, 6.28)(g));
    ops.push_back(UnitaryOp::diagonal(phases, {0, n - 1}));
    ops.push_back(UnitaryOp::permutation({2, 0, 3, 1}, {n - 1, 0}));
    ops.push_back(UnitaryOp::controlled(UnitaryOp::dense(haar_unitary(g, 2), {1}), {0}));
    ops.push_back(UnitaryOp::multiplexed({haar_unitary(g, 2), haar_unitary(g, 2)}, {n - 1}, {0}));
    if (n >= 3) ops.push_back(mcx({0, 1}, n - 1));
    const CVector psi = random_state(g, dim);
    CVector seq = psi;
    CMatrix composed = CMatrix::Identity(dim, dim);
    for (const auto& op : ops) {
      apply_in_place(seq, n, op);
      composed = op.to_matrix(n) * composed;
      CHECK(is_unitary(op.to_matrix(n)));
    }
    CHECK((composed * psi - seq).norm() < 1e-10);
  }
}

TEST_CASE("controlled op with a zero control value") {
  const UnitaryOp cx0 = UnitaryOp::controlled(pauli_x(0), {1}, 0);
  const Statevector s = apply_unitary(Statevector::basis(one_reg(2), 0b00), cx0);
  CHECK(std::abs(s.amplitude(0b01) - 1.0) < 1e-15);
  const Statevector t = apply_unitary(Statevector::basis(one_reg(2), 0b10), cx0);
  CHECK(std::abs(t.amplitude(0b10) - 1.0) < 1e-15);
}

TEST_CASE("adjoint inverts every op kind") {
  std::mt19937_64 g(3);
  std::vector<UnitaryOp> ops = {UnitaryOp::dense(haar_unitary(g, 4), {0, 2}),
                                UnitaryOp::permutation({1, 2, 3, 0}, {1, 2}),
                                UnitaryOp::controlled(UnitaryOp::dense(haar_unitary(g, 2), {0}), {1, 2}),
                                UnitaryOp::multiplexed({haar_unitary(g, 2), haar_unitary(g, 2)}, {2}, {1})};
  for (const auto& op : ops) {
    const CMatrix m = op.adjoint().to_matrix(3) * op.to_matrix(3);
    CHECK((m - CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("QFT") {
  CHECK((qft(1).to_matrix(1) - hadamard_matrix()).cwiseAbs().maxCoeff() < 1e-15);
  for (unsigned n = 1; n <= 6; ++n) {
    const Statevector s = apply_unitary(Statevector::basis(one_reg(n), 0), qft(n));
    const double u = std::pow(2.0, -0.5 * n);
    for (std::uint64_t i = 0; i < s.dimension(); ++i) CHECK(std::abs(s.amplitude(i) - u) < 1e-12);
    const CMatrix id = iqft(n).to_matrix(n) * qft(n).to_matrix(n);
    CHECK((id - CMatrix::Identity(id.rows(), id.cols())).cwiseAbs().maxCoeff() < 1e-10);
  }
  // Entry (j, k) = exp(2 pi i jk / N) / sqrt(N).
  const CMatrix f = qft_matrix(3);
  CHECK(std::abs(f(3, 5) - std::polar(1 / std::sqrt(8.0), 2 * std::numbers::pi * 15 / 8)) < 1e-14);
  CHECK_THROWS_AS(qft(0), InvalidArgument);
}

TEST_CASE("postselect") {
  const Statevector plus = apply_unitary(Statevector::basis(one_reg(1), 0), hadamard(0));
  const PostSelection p0 = postselect(plus, 0, 0);
  CHECK(p0.probability == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(p0.state.amplitude(0) - 1.0) < 1e-15);
  CHECK(p0.state.norm_ledger() == doctest::Approx(std::sqrt(0.5)));

  CVector bell = CVector::Zero(4);
  bell[0] = bell[3] = 1 / std::sqrt(2.0);
  const Statevector b(one_reg(2), bell);
  const PostSelection pb = postselect(b, 0, 0);
  CHECK(pb.probability == doctest::Approx(0.5));
  CHECK(std::abs(pb.state.amplitude(0) - 1.0) < 1e-15);

  CHECK_THROWS_AS(postselect(Statevector::basis(one_reg(1), 1), 0, 0), ImpossibleOutcome);

  std::mt19937_64 g(8);
  for (int t = 0; t < 20; ++t) {
    const Statevector s(one_reg(3), random_state(g, 8));
    const unsigned q = t % 3;
    CHECK(std::abs(postselect(s, q, 0).probability + postselect(s, q, 1).probability - 1.0) < 1e-12);
  }
  const PostSelection joint = postselect(Statevector(one_reg(2), CVector::Constant(4, 0.5)), {{0, 1}, {1, 0}});
  CHECK(joint.probability == doctest::Approx(0.25));
  CHECK(std::abs(joint.state.amplitude(0b01) - 1.0) < 1e-15);
}

TEST_CASE("partial trace") {
  std::mt19937_64 g(21);
  const CVector a = random_state(g, 2), b = random_state(g, 4);
  // |a>|b> with register "A" most significant.
  CVector prod(8);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j) prod[i * 4 + j] = a[i] * b[j];
  const Statevector s(RegisterLayout({{"A", 1}, {"B", 2}}), prod);
  const DensityMatrix ra = partial_trace(s, {"A"});
  CHECK((ra.entries() - a * a.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ra.rank() == 1);
  CHECK(partial_trace(s, {"B"}).rank() == 1);
  CHECK(ra.is_valid());

  CVector bell = CVector::Zero(4);
  bell[0] = bell[3] = 1 / std::sqrt(2.0);
  const DensityMatrix half = partial_trace(Statevector(RegisterLayout({{"A", 1}, {"B", 1}}), bell), {"A"});
  CHECK((half.entries() - 0.5 * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(half.purity() == doctest::Approx(0.5));

  // x (x) x (x) x, keep the middle copy.
  const CVector x = random_state(g, 2);
  CVector xxx(8);
  for (int i = 0; i < 8; ++i) xxx[i] = x[i >> 2] * x[(i >> 1) & 1] * x[i & 1];
  const DensityMatrix mid = partial_trace(Statevector(RegisterLayout({{"c1", 1}, {"c2", 1}, {"c3", 1}}), xxx), {"c2"});
  CHECK((mid.entries() - x * x.adjoint()).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(partial_trace(s, {}), InvalidArgument);
  CHECK_THROWS_AS(partial_trace(s, {"Z"}), InvalidArgument);
}

TEST_CASE("Hamiltonian evolution") {
  std::mt19937_64 g(4);
  const Statevector s(one_reg(3), random_state(g, 8));
  const Statevector same = evolve_hamiltonian(s, CMatrix::Zero(8, 8), 2.7);
  CHECK((same.amplitudes() - s.amplitudes()).norm() < 1e-15);

  const Statevector z = evolve_hamiltonian(Statevector::basis(one_reg(1), 0), pauli_z_matrix(), std::numbers::pi);
  CHECK(std::abs(z.amplitude(0) - Complex(-1.0, 0.0)) < 1e-12);
  CHECK(std::abs(std::abs(z.amplitude(0)) - 1.0) < 1e-12);

  CMatrix h(8, 8);
  std::normal_distribution<double> nd;
  for (auto& v : h.reshaped()) v = Complex(nd(g), nd(g));
  h = 0.5 * (h + h.adjoint()).eval();
  const Statevector e = evolve_hamiltonian(s, h, 0.1);
  CHECK(std::abs(e.norm() - 1.0) < 1e-9);
  // Oracle: eigendecomposition, exp(+i H t).
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CVector phase = (Complex(0, 0.1) * es.eigenvalues().cast<Complex>()).array().exp();
  const CVector want = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint() * s.amplitudes();
  CHECK((e.amplitudes() - want).norm() < 1e-10);

  CMatrix bad = h;
  bad(0, 1) += 1.0;
  CHECK_THROWS_AS(evolve_hamiltonian(s, bad, 0.1), NotHermitian);
}

TEST_CASE("measurement histograms") {
  const auto c0 = measure_counts(Statevector::basis(one_reg(1), 0), "q", 100, 1);
  CHECK(c0.size() == 1);
  CHECK(c0.at(0) == 100);

  const Statevector u(one_reg(2), CVector::Constant(4, 0.5));
  const auto c = measure_counts(u, "q", 4000, 77);
  const double sigma = std::sqrt(4000 * 0.25 * 0.75);
  for (std::uint64_t k = 0; k < 4; ++k) CHECK(std::abs(static_cast<double>(c.at(k)) - 1000.0) < 5 * sigma);
  CHECK(measure_counts(u, "q", 4000, 77) == c);

  const auto marg = marginal_probabilities(u, "q");
  CHECK(marg.size() == 4);
  CHECK(marg[2] == doctest::Approx(0.25));
}
