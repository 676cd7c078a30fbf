#pragma once

// Dense statevector simulation.
//
// Index convention: qubit 0 is the least-significant bit of a basis index.
// Registers are listed most-significant first, so a layout {R, S} gives
// basis index = r * 2^|S| + s and prints as |r>_R |s>_S.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flowq/linalg.hpp"

namespace flowq {

inline constexpr unsigned kDefaultMaxQubits = 22;

// Qubit cap: FLOWQ_MAX_QUBITS if set to a positive integer, else 22.
unsigned max_qubits();

struct Register {
  std::string name;
  unsigned width = 0;
};

class RegisterLayout {
 public:
  RegisterLayout() = default;
  explicit RegisterLayout(std::vector<Register> registers);

  const std::vector<Register>& registers() const { return registers_; }
  unsigned total_qubits() const { return total_qubits_; }
  std::uint64_t dimension() const { return std::uint64_t{1} << total_qubits_; }

  bool has(std::string_view name) const;
  unsigned width(std::string_view name) const;
  // Index of the register's least-significant qubit.
  unsigned offset(std::string_view name) const;
  // Qubit indices of the register, least-significant first.
  std::vector<unsigned> qubits(std::string_view name) const;

  std::uint64_t extract(std::uint64_t index, std::string_view name) const;
  std::uint64_t insert(std::uint64_t index, std::string_view name, std::uint64_t value) const;

  friend bool operator==(const RegisterLayout&, const RegisterLayout&);

 private:
  const Register& find(std::string_view name) const;

  std::vector<Register> registers_;
  std::vector<unsigned> offsets_;
  unsigned total_qubits_ = 0;
};

class Statevector {
 public:
  Statevector() = default;
  // Throws InvalidArgument if the size is wrong, or if the vector is not
  // unit-norm (1e-10) and `unnormalized` is false.
  Statevector(RegisterLayout layout, CVector amplitudes, double norm_ledger = 1.0,
              bool unnormalized = false);

  static Statevector basis(RegisterLayout layout, std::uint64_t index);

  const RegisterLayout& layout() const { return layout_; }
  const CVector& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::uint64_t index) const { return amplitudes_[static_cast<Eigen::Index>(index)]; }
  std::uint64_t dimension() const { return layout_.dimension(); }
  unsigned num_qubits() const { return layout_.total_qubits(); }

  // Accumulated classical normalization: unnormalized vector = ledger * amplitudes.
  double norm_ledger() const { return norm_ledger_; }
  bool unnormalized() const { return unnormalized_; }
  double norm() const { return amplitudes_.norm(); }

  // Mutable access for kernels; callers keep the norm invariant.
  CVector& data() { return amplitudes_; }
  void set_norm_ledger(double v);

 private:
  RegisterLayout layout_;
  CVector amplitudes_;
  double norm_ledger_ = 1.0;
  bool unnormalized_ = false;
};

// A unitary acting on a subset of qubits. Local matrix index bit i
// corresponds to targets[i].
class UnitaryOp {
 public:
  enum class Kind { Dense, Diagonal, Permutation, Controlled, Multiplexed };

  // Throws NotUnitary if U U^dagger != I within 1e-10.
  static UnitaryOp dense(CMatrix matrix, std::vector<unsigned> targets);
  // Throws NotUnitary on any non-unit-modulus entry.
  static UnitaryOp diagonal(CVector phases, std::vector<unsigned> targets);
  // image[l] is where local basis state l is sent. Throws NotUnitary unless a bijection.
  static UnitaryOp permutation(std::vector<std::uint64_t> image, std::vector<unsigned> targets);
  // Applies `inner` only on basis blocks whose control bits equal control_value
  // (bit i of control_value <-> controls[i]). Default: all controls set.
  static UnitaryOp controlled(const UnitaryOp& inner, std::vector<unsigned> controls);
  static UnitaryOp controlled(const UnitaryOp& inner, std::vector<unsigned> controls,
                              std::uint64_t control_value);
  // Uniformly controlled block: for selector value v, apply blocks[v] to targets.
  static UnitaryOp multiplexed(std::vector<CMatrix> blocks, std::vector<unsigned> selectors,
                               std::vector<unsigned> targets);

  Kind kind() const { return kind_; }
  const std::vector<unsigned>& targets() const { return targets_; }
  const std::vector<unsigned>& controls() const { return controls_; }
  std::uint64_t control_value() const { return control_value_; }
  const CMatrix& matrix() const { return matrix_; }
  const CVector& phases() const { return phases_; }
  const std::vector<std::uint64_t>& image() const { return image_; }
  const std::vector<CMatrix>& blocks() const { return blocks_; }
  const UnitaryOp& inner() const { return *inner_; }

  // Every qubit the op reads or writes.
  std::vector<unsigned> support() const;
  // Renames qubit q to mapping[q] throughout.
  UnitaryOp retarget(const std::vector<unsigned>& mapping) const;
  UnitaryOp adjoint() const;
  // Full matrix on qubits 0..n-1 (by applying the op to each basis vector).
  CMatrix to_matrix(unsigned n_qubits) const;

 private:
  UnitaryOp() = default;

  Kind kind_ = Kind::Dense;
  std::vector<unsigned> targets_;
  std::vector<unsigned> controls_;
  std::uint64_t control_value_ = 0;
  CMatrix matrix_;
  CVector phases_;
  std::vector<std::uint64_t> image_;
  std::vector<CMatrix> blocks_;
  std::shared_ptr<const UnitaryOp> inner_;
};

// In-place kernel shared by apply_unitary; `amps` spans n_qubits qubits.
void apply_in_place(CVector& amps, unsigned n_qubits, const UnitaryOp& op);

Statevector apply_unitary(Statevector state, const UnitaryOp& op);

struct PostSelection {
  Statevector state;
  double probability = 0.0;
};

// Projects onto `qubit == outcome`, renormalizes, multiplies the ledger by
// sqrt(probability). Throws ImpossibleOutcome below 1e-12.
PostSelection postselect(const Statevector& state, unsigned qubit, int outcome);
// Joint post-selection on several (qubit, outcome) pairs.
PostSelection postselect(const Statevector& state,
                         const std::vector<std::pair<unsigned, int>>& outcomes);

class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(CMatrix entries);

  Eigen::Index dim() const { return entries_.rows(); }
  const CMatrix& entries() const { return entries_; }
  Complex trace() const { return entries_.trace(); }
  double purity() const;
  RVector eigenvalues() const;
  std::size_t rank(double tol = 1e-10) const;
  bool is_valid(double tol = 1e-10) const;

  static DensityMatrix pure(const CVector& psi);

 private:
  CMatrix entries_;
};

// Reduced state on the kept registers (kept order follows the layout).
// Throws InvalidArgument if keep is empty or names an unknown register.
DensityMatrix partial_trace(const Statevector& state, const std::vector<std::string>& keep);

// state <- exp(i H t) state. H is over the whole register space.
// Eigendecomposition up to dim 4096, scaled Taylor series beyond.
Statevector evolve_hamiltonian(Statevector state, const CMatrix& hamiltonian, double t);

// Squared marginal amplitudes of one register.
std::vector<double> marginal_probabilities(const Statevector& state, std::string_view reg);

// Shot histogram of one register, deterministic in seed.
std::map<std::uint64_t, std::uint64_t> measure_counts(const Statevector& state, std::string_view reg,
                                                      std::uint64_t shots, std::uint64_t seed);

}  // namespace flowq
