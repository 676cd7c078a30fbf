#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowq/linalg.hpp"

namespace flowq {

using Spins = std::vector<int>;  // entries +1 / -1

// E(s) = s^T J s + h^T s + constant, J symmetric with a zero diagonal.
struct IsingProblem {
  RMatrix couplings;
  RVector fields;
  double constant = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(fields.size()); }
  void validate() const;
  double energy(const Spins& s) const;

  // Builds from a full symmetric quadratic form: the diagonal moves into the
  // constant because s_i^2 = 1.
  static IsingProblem from_quadratic(const RMatrix& q, const RVector& h, double constant);

  // One line per nonzero term: "i j w" for i < j with w = 2 J_ij (each pair
  // once), "i w" for fields, and a leading "# constant c" comment.
  std::string edge_list() const;
};

// 0/1 form: E(x) = x^T Q x + offset with Q symmetric (diagonal = linear terms).
struct QuboProblem {
  RMatrix q;
  double offset = 0.0;
  double energy(const std::vector<int>& x) const;
};

// s = 2x - 1 and back; energies agree on corresponding assignments.
QuboProblem ising_to_qubo(const IsingProblem& p);
IsingProblem qubo_to_ising(const QuboProblem& q);

struct IsingSolution {
  Spins spins;
  double energy = 0.0;
};

inline constexpr std::size_t kMaxExhaustiveSpins = 24;

// Global optimum by Gray-code enumeration. Throws InvalidArgument above
// kMaxExhaustiveSpins.
IsingSolution solve_exhaustive(const IsingProblem& p);

struct AnnealSchedule {
  unsigned reads = 32;
  unsigned sweeps = 1000;
  // 0 selects ln(2)/max_flip_cost and ln(100)/min_flip_cost respectively.
  double beta_start = 0.0;
  double beta_end = 0.0;
};

// Geometric inverse-temperature ramp, single-spin Metropolis sweeps in index
// order, best state over all reads. Deterministic in `seed`.
IsingSolution solve_annealing(const IsingProblem& p, const AnnealSchedule& schedule, std::uint64_t seed);

enum class IsingMethod { Exhaustive, Annealing };

struct IsingSolver {
  IsingMethod method = IsingMethod::Exhaustive;
  AnnealSchedule schedule;
  std::uint64_t seed = 0;
  IsingSolution solve(const IsingProblem& p) const;
};

}  // namespace flowq
