#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowq/statevector.hpp"

namespace flowq {

// ---- amplitude encoding

struct AmplitudeEncoding {
  Statevector state;          // single register "x", zero-padded to a power of two
  double norm = 0.0;          // ||x||
  std::size_t length = 0;     // N before padding
};

// Throws InvalidArgument for an empty or all-zero vector.
AmplitudeEncoding amplitude_encode(const std::vector<double>& x, const std::string& reg = "x");
AmplitudeEncoding amplitude_encode(const CVector& x, const std::string& reg = "x");

// Raw amplitudes; `length` > 0 truncates to the first `length` entries.
CVector amplitude_decode(const Statevector& state, std::size_t length = 0);

// ---- basis encodings

enum class BasisFlavor { Binary, FixedPoint, Unary, OneHot };

struct BasisEncoding {
  BasisFlavor flavor = BasisFlavor::Binary;
  unsigned width = 1;
  double scale = 1.0;  // fixed-point only
};

// Binary: integer value < 2^width.
// Unary: value k in 0..width sets the k lowest qubits.
// One-hot: value k in 1..width sets qubit k-1; 0 is out of range.
// Fixed-point: two's complement, value = scale * m / 2^(width-1) for the
// signed integer m held in the register; inputs with |value| <= scale (1 - 2^-width)
// round to the nearest grid point (saturating at the top), so decode is within
// scale * 2^-width.
std::uint64_t basis_encode(double value, const BasisEncoding& enc);
double basis_decode(std::uint64_t index, const BasisEncoding& enc);

// Bit string of a basis index printed qubit 0 first ("1100" is unary 2).
std::string qubit_pattern(std::uint64_t index, unsigned width);

// ---- basis -> amplitude conversion

struct BasisToAmplitudeResult {
  Statevector state;               // register "index" holding sum_j d_j |j> / norm
  double success_probability = 0;  // probability of the ancilla-0 branch
  double max_angle_error = 0;      // max |psi_hat_j - psi_j| from psi-register rounding
  unsigned total_qubits = 0;       // ancilla + psi + index during the protocol
};

// Prepares the uniform superposition over j < N, writes psi_j = (2/pi) acos(d_j)
// into a psi register, rotates an ancilla by R_y(pi psi_j), uncomputes psi and
// post-selects the ancilla on |0>. psi_width = 0 applies the rotation angle
// exactly; psi_width > 0 rounds psi_j to the grid k / (2^w - 1).
// Throws InvalidArgument if some d_j lies outside [0, 1].
BasisToAmplitudeResult basis_to_amplitude(const std::vector<double>& d, unsigned psi_width = 0);

// ---- block encoding

struct BlockEncoding {
  CMatrix a;              // original matrix (rows x cols)
  double alpha = 1.0;
  CMatrix dilation;       // unitary of size 2D x 2D, D = padded system dimension
  unsigned system_qubits = 0;
  UnitaryOp unitary() const;  // dense op on qubits 0..system_qubits (ancilla on top)
};

// Unitary dilation of A/alpha:
//   U = [[B, sqrt(I - B B^+)], [sqrt(I - B^+ B), -B^+]],  B = A/alpha (zero-padded).
// Throws InvalidArgument if alpha < ||A|| - 1e-12.
BlockEncoding block_encode(const CMatrix& a, double alpha);

// alpha * P1 U P2: the leading rows x cols block rescaled.
CMatrix extract_block(const BlockEncoding& be);

}  // namespace flowq
