#pragma once

#include <vector>

#include "flowq/statevector.hpp"

namespace flowq {

// D1Q2 with c = +1, -1, weights 1/2 and c_s^2 = 1 in lattice units.
struct D1Q2Params {
  std::size_t sites = 8;  // M, a power of two
  double u = 0.0;         // advection velocity, |u| <= c_s^2
  double omega = 1.0;     // relaxation; the quantum path requires 1
  static constexpr double kWeight = 0.5;
  static constexpr double kSoundSpeed2 = 1.0;

  void validate() const;
  unsigned position_qubits() const;
  // w_i (1 + c_i u / c_s^2) for i = 0 (c = +1) and 1 (c = -1).
  double equilibrium_factor(int velocity) const;
};

using LatticeField = RVector;

// Flattened [f_+(0..M-1), f_-(0..M-1)].
using DistributionVector = RVector;

DistributionVector equilibrium(const LatticeField& phi, const D1Q2Params& p);
LatticeField zeroth_moment(const DistributionVector& f);

// BGK collision with relaxation omega followed by periodic streaming.
DistributionVector classical_collide_stream(const DistributionVector& f, const D1Q2Params& p);
// With omega = 1 the pre-collision distribution is irrelevant: phi -> moment(stream(f_eq(phi))).
LatticeField classical_lbm_step(const LatticeField& phi, const D1Q2Params& p);

// Register layout [a(1), q(1 + log2 M)]; the top q qubit is the velocity.
// The norm ledger holds ||f||. Throws InvalidArgument for a zero vector.
Statevector encode_distribution(const DistributionVector& f);
// Unnormalized distribution from the q register on the ancilla-0 branch.
DistributionVector decode_distribution(const Statevector& state);

struct CollisionOperators {
  RVector a;      // diagonal of A over the q register
  CVector c1;     // A + i sqrt(I - A^2)
  CVector c2;     // A - i sqrt(I - A^2)
};

// Throws InvalidArgument if an entry of A leaves [-1, 1].
CollisionOperators build_collision(const D1Q2Params& p);

struct StepOutcome {
  Statevector state;
  double probability = 0.0;
};

// H on the ancilla, |0><0| (x) C1 + |1><1| (x) C2, H again, post-select ancilla 0.
StepOutcome collide(const Statevector& state, const CollisionOperators& ops);

// Velocity 0: site j -> j + 1, velocity 1: j -> j - 1 (mod M).
UnitaryOp streaming_operator(const RegisterLayout& layout);
Statevector stream(const Statevector& state);
// Multi-controlled NOTs in the cascaded increment/decrement decomposition.
std::size_t streaming_mcx_count(std::size_t sites);

struct Readout {
  LatticeField phi;
  double probability = 0.0;
};

// SWAP(ancilla, velocity), H on the ancilla, post-select ancilla = 0 and
// velocity = 0, then phi_j = sqrt(2) * ledger * amplitude_j.
Readout macroscopic_readout(const Statevector& state);

struct QLBMStepReport {
  unsigned step = 0;
  double collision_probability = 0.0;
  double readout_probability = 0.0;
  double ledger_encode = 0.0;
  double ledger_collide = 0.0;
  double ledger_readout = 0.0;
  unsigned qubits = 0;
  std::size_t mcx_count = 0;
  double max_delta = 0.0;  // vs classical_lbm_step from the same input
  double mass_in = 0.0;
  double mass_out = 0.0;
  bool norm_ledger_idealized = true;  // renormalization uses the simulator's exact ledger
};

struct QLBMRun {
  std::vector<LatticeField> quantum;    // phi_0 .. phi_steps
  std::vector<LatticeField> classical;  // independent classical trajectory
  std::vector<QLBMStepReport> reports;
};

// Each step re-prepares [phi, phi], collides (so A gives the equilibrium),
// streams, reads out, and compares against the classical step.
QLBMRun qlbm_run(const LatticeField& phi0, const D1Q2Params& p, unsigned steps);

}  // namespace flowq
