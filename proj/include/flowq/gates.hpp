#pragma once

#include <vector>

#include "flowq/statevector.hpp"

namespace flowq {

CMatrix hadamard_matrix();
CMatrix pauli_x_matrix();
CMatrix pauli_y_matrix();
CMatrix pauli_z_matrix();
// R_y(theta) = [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]].
CMatrix ry_matrix(double theta);

UnitaryOp hadamard(unsigned q);
UnitaryOp pauli_x(unsigned q);
UnitaryOp pauli_y(unsigned q);
UnitaryOp pauli_z(unsigned q);
UnitaryOp ry(unsigned q, double theta);
UnitaryOp swap_gate(unsigned a, unsigned b);
// X on target when every control is 1.
UnitaryOp mcx(std::vector<unsigned> controls, unsigned target);

// U_jk = exp(+-2 pi i jk / 2^n) / sqrt(2^n); '+' for the forward transform.
CMatrix qft_matrix(unsigned n, bool inverse = false);

// Dense QFT on qubits 0..n-1 (qubit 0 is the least-significant bit of j, k).
// Throws QubitCapExceeded beyond the cap, InvalidArgument for n == 0 or
// n > kMaxDenseQft.
inline constexpr unsigned kMaxDenseQft = 12;
UnitaryOp qft(unsigned n);
UnitaryOp iqft(unsigned n);
// Same transform on an arbitrary qubit list (least-significant first).
UnitaryOp qft_on(const std::vector<unsigned>& qubits, bool inverse = false);

}  // namespace flowq
