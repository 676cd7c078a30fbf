#include "flowq/gates.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "flowq/errors.hpp"

namespace flowq {

CMatrix hadamard_matrix() {
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix m(2, 2);
  m << s, s, s, -s;
  return m;
}

CMatrix pauli_x_matrix() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMatrix pauli_y_matrix() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

CMatrix pauli_z_matrix() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

CMatrix ry_matrix(double theta) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  CMatrix m(2, 2);
  m << c, -s, s, c;
  return m;
}

UnitaryOp hadamard(unsigned q) { return UnitaryOp::dense(hadamard_matrix(), {q}); }
UnitaryOp pauli_x(unsigned q) { return UnitaryOp::permutation({1, 0}, {q}); }
UnitaryOp pauli_y(unsigned q) { return UnitaryOp::dense(pauli_y_matrix(), {q}); }

UnitaryOp pauli_z(unsigned q) {
  CVector ph(2);
  ph << 1, -1;
  return UnitaryOp::diagonal(ph, {q});
}

UnitaryOp ry(unsigned q, double theta) { return UnitaryOp::dense(ry_matrix(theta), {q}); }

UnitaryOp swap_gate(unsigned a, unsigned b) { return UnitaryOp::permutation({0, 2, 1, 3}, {a, b}); }

UnitaryOp mcx(std::vector<unsigned> controls, unsigned target) {
  if (controls.empty()) return pauli_x(target);
  return UnitaryOp::controlled(pauli_x(target), std::move(controls));
}

CMatrix qft_matrix(unsigned n, bool inverse) {
  const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << n);
  const double sign = inverse ? -1.0 : 1.0;
  const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
  CMatrix m(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index k = 0; k < dim; ++k) {
      // Reduce jk mod dim first so the angle stays accurate for large n.
      const auto r = static_cast<double>((static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(k)) %
                                         static_cast<std::uint64_t>(dim));
      const double angle = sign * 2.0 * std::numbers::pi * r / static_cast<double>(dim);
      m(j, k) = std::polar(norm, angle);
    }
  return m;
}

UnitaryOp qft_on(const std::vector<unsigned>& qubits, bool inverse) {
  const auto n = static_cast<unsigned>(qubits.size());
  if (n == 0) throw InvalidArgument("qft: need at least one qubit");
  if (n > max_qubits()) throw QubitCapExceeded("qft: " + std::to_string(n) + " qubits exceeds the cap");
  if (n > kMaxDenseQft)
    throw InvalidArgument("qft: dense transform limited to " + std::to_string(kMaxDenseQft) + " qubits");
  return UnitaryOp::dense(qft_matrix(n, inverse), qubits);
}

UnitaryOp qft(unsigned n) {
  std::vector<unsigned> q(n);
  std::iota(q.begin(), q.end(), 0U);
  return qft_on(q, false);
}

UnitaryOp iqft(unsigned n) {
  std::vector<unsigned> q(n);
  std::iota(q.begin(), q.end(), 0U);
  return qft_on(q, true);
}

}  // namespace flowq
