#pragma once

#include <cstdint>
#include <vector>

#include "flowq/statevector.hpp"

namespace flowq {

// f_alpha(z) = sum_{k,l=0..n} a[alpha][k][l] z_k z_l with z_0 = 1 and f_0 = 1.
class QuadraticMap {
 public:
  explicit QuadraticMap(std::size_t n_vars);

  std::size_t n_vars() const { return n_; }
  double coefficient(std::size_t alpha, std::size_t k, std::size_t l) const;
  // Sets a[alpha][k][l] and a[alpha][l][k]. alpha must be >= 1.
  void set(std::size_t alpha, std::size_t k, std::size_t l, double value);

  // (f_0, f_1, ..., f_n) at z_0 = 1, z = (z_1..z_n).
  CVector apply(const CVector& z) const;
  // Same polynomial, written for the argument z / r: a_00 kept, a_0j and
  // a_j0 multiplied by r, a_jk by r^2.
  QuadraticMap rescaled(double r) const;

  bool measure_preserving = false;  // declared by the caller

 private:
  std::size_t idx(std::size_t alpha, std::size_t k, std::size_t l) const { return (alpha * (n_ + 1) + k) * (n_ + 1) + l; }
  std::size_t n_;
  std::vector<double> a_;
};

// Register "phi" holding (1/sqrt2)|0> + (1/sqrt2) sum_j z_j |j>, padded to a
// power of two. Throws InvalidArgument unless ||z|| = 1 within 1e-10.
Statevector encode_phi(const CVector& z);
// z_j = amp_j / amp_0.
CVector decode_phi(const CVector& amplitudes, std::size_t n_vars);

// A = sum a[alpha][k][l] |alpha 0><k l| on two phi registers (copy 1 is the
// high index). Dimension D^2 with D the padded phi dimension.
CMatrix quadratic_map_operator(const QuadraticMap& map);
// H = -i A (x) |1><0|_P + i A^+ (x) |0><1|_P with the pointer as qubit 0.
CMatrix pointer_hamiltonian(const QuadraticMap& map);

struct QuadraticMapResult {
  CVector z_out;               // amp(alpha, 0) / amp(0, 0) of the pointer-1 branch
  double success_probability = 0.0;
  double fidelity = 0.0;       // |<phi'_target | phi'_sim>| with both normalized
  CVector target;              // F(z)
  unsigned qubits = 0;
};

// Evolves |phi>|phi>|0>_P by exp(i eps H) and post-selects the pointer on |1>.
// Requires 0 < eps <= 0.2.
QuadraticMapResult apply_quadratic_map(const QuadraticMap& map, const CVector& z, double epsilon);

// ceil(16 / eps^2) pairs per step, raised to `steps`; saturates at UINT64_MAX.
std::uint64_t copy_budget(double epsilon, unsigned steps);

struct EulerTrajectory {
  std::vector<CVector> z;                // z_0 .. z_steps
  std::vector<double> success_probability;
  std::vector<double> fidelity;
  std::uint64_t copy_budget = 0;
};

// z <- z + dt F_hat(z) where F_hat comes from the quantum map applied to the
// normalized z (coefficients rescaled by ||z||). The Euler sum itself is
// formed classically between map applications.
EulerTrajectory euler_iterate(const QuadraticMap& map, const CVector& z0, double dt, unsigned steps, double epsilon);

// ---- mean-field copies (pairwise interaction, m = 1)

struct MeanFieldSystem {
  std::size_t d = 2;
  CMatrix f_pair;  // d^2 x d^2 acting on (slot 1, slot 2); anti-Hermitian and swap-symmetric
  unsigned copies = 2;

  void validate() const;
  // f(x) = Tr_2[F (I (x) x x^+)]; the single-copy generator.
  CMatrix generator(const CVector& x) const;
  // H = -i/(n-1) sum_{j<k} F_{jk} on n copies (copy 1 is the most significant).
  CMatrix hamiltonian() const;
};

struct MeanFieldResult {
  std::vector<CMatrix> reduced;        // copy-1 reduced state after each step (index 0 = initial)
  std::vector<CVector> classical;      // normalized nonlinear Euler states
  std::vector<double> trace_distance;  // between the two, per step
  double e_norm = 0.0;                 // mean operator norm of f along the classical path
};

MeanFieldResult meanfield_evolve(const MeanFieldSystem& sys, const CVector& x0, double dt, unsigned steps);

// ---- history-state linear system

struct HistorySpec {
  std::size_t d = 2;
  CMatrix linear;                 // L (d x d), may be empty for zero
  CMatrix f_pair;                 // F (d^2 x d^2), may be empty for zero
  std::vector<CVector> b;         // b_0 .. b_T; b_0 is the initial state
  double dt = 0.0;
  unsigned copies = 1;

  // f(x) = L + Tr_2[F (I (x) x x^+)].
  CMatrix f(const CVector& x) const;
};

struct HistoryLinearSystem {
  CMatrix m;        // (T+1) d^n square, time block k occupies rows k d^n ..
  CVector b;
  unsigned steps = 0;
  std::size_t block = 0;  // d^n
  std::size_t d = 0;
  unsigned copies = 1;
  double dt = 0.0;
};

// M = sum_k I (x) |k><k| - sum_k (I - dt G_n) (x) |k+1><k| with
// G_n = sum_j L_j + 1/(n-1) sum_{j<k} F_jk, so that one copy sees f(x).
HistoryLinearSystem build_history_system(const HistorySpec& spec);

struct HistorySolution {
  CVector history;                 // the solved |X>
  std::vector<CVector> blocks;     // per time step, length d^n
  std::vector<CVector> extracted;  // single-copy vectors
};

// Dense LU solve. Throws SingularMatrix if the pivot ratio drops below 1e-12.
// n = 1 reads x_k directly; n > 1 takes the leading eigenvector of the copy-1
// reduced state scaled by ||block||^(1/n), phase-fixed so its largest entry is real positive.
HistorySolution solve_history(const HistoryLinearSystem& sys);

// Classical nonlinear Euler x_k = (I - dt f(x_{k-1})) x_{k-1} + dt b_k.
std::vector<CVector> nonlinear_euler(const HistorySpec& spec);

// min over phi of ||a - e^{i phi} b||.
double phase_aligned_distance(const CVector& a, const CVector& b);

// Number of nonzero d^n x d^n blocks in M.
std::size_t nonzero_blocks(const HistoryLinearSystem& sys);

}  // namespace flowq
