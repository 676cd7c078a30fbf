#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "flowq/statevector.hpp"

namespace flowq {

// Boolean "good" marker over system basis indices.
using GoodPredicate = std::function<bool(std::uint64_t)>;

struct GroverOperator {
  unsigned system_qubits = 0;
  CMatrix a;                   // state preparation on the system register
  std::uint64_t initial = 0;   // preparation input basis state
  std::vector<bool> good;      // chi tabulated over the system basis
  CMatrix q;                   // -A S_init A^+ S_chi
  double amplitude = 0.0;      // a = || good part of A|initial> ||^2
  double theta = 0.0;          // sin^2(theta) = a, theta in [0, pi/2]
  bool degenerate = false;     // a computed as exactly 0 or 1

  CVector prepared() const;    // A|initial>
};

// The operator is materialized as a dense matrix on `system_qubits` qubits
// (local bit i of A <-> system qubit i).
GroverOperator build_grover(const CMatrix& a, const GoodPredicate& chi, std::uint64_t initial = 0);
GroverOperator build_grover(const UnitaryOp& a, unsigned system_qubits, const GoodPredicate& chi,
                            std::uint64_t initial = 0);

// Q restricted to span{|n0>, |n1>} in that basis; requires a not in {0, 1}.
CMatrix restricted_grover(const GroverOperator& g);
// Arguments of the two restricted eigenvalues, ascending (expected -2 theta, 2 theta).
std::vector<double> restricted_eigenphases(const GroverOperator& g);

enum class QaeMode { ExactDistribution, Sampled };

struct AmplitudeEstimate {
  double a_hat = 0.0;               // sin^2(pi y / 2^n_phase)
  std::uint64_t y = 0;
  unsigned n_phase = 0;
  std::vector<double> distribution; // phase-register outcome probabilities
  unsigned repetitions = 1;         // M
  std::uint64_t shots_used = 0;     // 0 in exact mode
  double failure_bound = 1.0;       // exp(-M/8) for median runs
  std::vector<double> samples;      // per-repetition estimates
};

// Exact outcome distribution of the phase register after the phase
// estimation circuit: QFT on R, controlled Q^(2^t) from phase qubit t,
// inverse QFT on R. The system register is never measured.
std::vector<double> qae_distribution(const GroverOperator& g, unsigned n_phase);

// Exact mode: modal outcome (smallest y on ties). Sampled: one draw with `seed`.
AmplitudeEstimate qae(const GroverOperator& g, unsigned n_phase, QaeMode mode, std::uint64_t seed = 0);

// Median of M sampled runs, run r drawing with seed + r. M must be odd.
AmplitudeEstimate qae_median(const GroverOperator& g, unsigned n_phase, unsigned M, std::uint64_t seed);

// exp(-M / 8).
double median_failure_bound(unsigned M);

// Lambda_2: per index j, on the chaperon (qubit 0) in the basis (|0>, |1>)
//   [[ sqrt(g),     sqrt(1-g) ],
//    [ -sqrt(1-g),  sqrt(g)   ]]
// so |j>|1> -> sqrt(g)|j>|1> + sqrt(1-g)|j>|0>. Index register on qubits 1..n.
// Length must be a power of two; entries in [0, 1].
UnitaryOp mean_oracle(const std::vector<double>& g_samples);

struct QaeConfig {
  unsigned n_phase = 6;
  QaeMode mode = QaeMode::ExactDistribution;
  unsigned repetitions = 1;  // M, used in sampled mode
  std::uint64_t seed = 0;
};

struct MeanEstimate {
  AmplitudeEstimate estimate;   // estimate of the padded mean
  double mean = 0.0;            // rescaled to the unpadded sample count
  std::size_t n_samples = 0;
  std::size_t n_padded = 0;
  unsigned total_qubits = 0;
};

// Zero-pads g to a power of two, builds A = Lambda_2 (F_n x I) with initial
// state |0...0>|1>_c and chi = "chaperon is 1", then runs QAE.
MeanEstimate estimate_mean(const std::vector<double>& g_samples, const QaeConfig& cfg);

// sin^2(pi y / 2^n_phase)
inline double estimate_from_outcome(std::uint64_t y, unsigned n_phase) {
  const double s = std::sin(std::numbers::pi * static_cast<double>(y) / std::ldexp(1.0, static_cast<int>(n_phase)));
  return s * s;
}

}  // namespace flowq
