#include "flowq/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <string>

#include "flowq/errors.hpp"
#include "flowq/rng.hpp"

namespace flowq {

unsigned max_qubits() {
  if (const char* env = std::getenv("FLOWQ_MAX_QUBITS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 40) return static_cast<unsigned>(v);
  }
  return kDefaultMaxQubits;
}

// ---------------------------------------------------------------- layout

RegisterLayout::RegisterLayout(std::vector<Register> registers) : registers_(std::move(registers)) {
  std::set<std::string> seen;
  for (const auto& r : registers_) {
    if (r.name.empty()) throw InvalidArgument("register name must be non-empty");
    if (r.width == 0) throw InvalidArgument("register '" + r.name + "' has zero width");
    if (!seen.insert(r.name).second) throw InvalidArgument("duplicate register name '" + r.name + "'");
    total_qubits_ += r.width;
  }
  if (total_qubits_ > max_qubits())
    throw QubitCapExceeded("layout needs " + std::to_string(total_qubits_) + " qubits, cap is " +
                           std::to_string(max_qubits()));
  offsets_.resize(registers_.size());
  unsigned off = 0;
  for (std::size_t i = registers_.size(); i-- > 0;) {
    offsets_[i] = off;
    off += registers_[i].width;
  }
}

const Register& RegisterLayout::find(std::string_view name) const {
  for (const auto& r : registers_)
    if (r.name == name) return r;
  throw InvalidArgument("unknown register '" + std::string(name) + "'");
}

bool RegisterLayout::has(std::string_view name) const {
  return std::any_of(registers_.begin(), registers_.end(), [&](const Register& r) { return r.name == name; });
}

unsigned RegisterLayout::width(std::string_view name) const { return find(name).width; }

unsigned RegisterLayout::offset(std::string_view name) const {
  for (std::size_t i = 0; i < registers_.size(); ++i)
    if (registers_[i].name == name) return offsets_[i];
  throw InvalidArgument("unknown register '" + std::string(name) + "'");
}

std::vector<unsigned> RegisterLayout::qubits(std::string_view name) const {
  const unsigned off = offset(name);
  std::vector<unsigned> q(width(name));
  std::iota(q.begin(), q.end(), off);
  return q;
}

std::uint64_t RegisterLayout::extract(std::uint64_t index, std::string_view name) const {
  return (index >> offset(name)) & ((std::uint64_t{1} << width(name)) - 1);
}

std::uint64_t RegisterLayout::insert(std::uint64_t index, std::string_view name, std::uint64_t value) const {
  const unsigned off = offset(name);
  const std::uint64_t mask = ((std::uint64_t{1} << width(name)) - 1) << off;
  return (index & ~mask) | ((value << off) & mask);
}

bool operator==(const RegisterLayout& a, const RegisterLayout& b) {
  if (a.registers_.size() != b.registers_.size()) return false;
  for (std::size_t i = 0; i < a.registers_.size(); ++i)
    if (a.registers_[i].name != b.registers_[i].name || a.registers_[i].width != b.registers_[i].width)
      return false;
  return true;
}

// ----------------------------------------------------------- statevector

Statevector::Statevector(RegisterLayout layout, CVector amplitudes, double norm_ledger, bool unnormalized)
    : layout_(std::move(layout)),
      amplitudes_(std::move(amplitudes)),
      norm_ledger_(norm_ledger),
      unnormalized_(unnormalized) {
  if (static_cast<std::uint64_t>(amplitudes_.size()) != layout_.dimension())
    throw InvalidArgument("amplitude count " + std::to_string(amplitudes_.size()) +
                          " does not match layout dimension " + std::to_string(layout_.dimension()));
  if (!(norm_ledger_ > 0.0)) throw InvalidArgument("norm ledger must be positive");
  if (!unnormalized_ && std::abs(amplitudes_.norm() - 1.0) > 1e-10)
    throw InvalidArgument("statevector is not normalized (norm " + std::to_string(amplitudes_.norm()) + ")");
}

Statevector Statevector::basis(RegisterLayout layout, std::uint64_t index) {
  if (index >= layout.dimension()) throw InvalidArgument("basis index out of range");
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  amps[static_cast<Eigen::Index>(index)] = 1.0;
  return Statevector(std::move(layout), std::move(amps));
}

void Statevector::set_norm_ledger(double v) {
  if (!(v > 0.0)) throw InvalidArgument("norm ledger must be positive");
  norm_ledger_ = v;
}

// ------------------------------------------------------------ unitaries

namespace {

std::uint64_t scatter_bits(std::uint64_t local, const std::vector<unsigned>& qubits) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < qubits.size(); ++i)
    if ((local >> i) & 1U) idx |= std::uint64_t{1} << qubits[i];
  return idx;
}

std::uint64_t gather_bits(std::uint64_t index, const std::vector<unsigned>& qubits) {
  std::uint64_t local = 0;
  for (std::size_t i = 0; i < qubits.size(); ++i) local |= ((index >> qubits[i]) & 1U) << i;
  return local;
}

// Spreads the bits of x around zero bits at the (ascending) positions.
std::uint64_t insert_zero_bits(std::uint64_t x, const std::vector<unsigned>& sorted_positions) {
  for (unsigned p : sorted_positions) {
    const std::uint64_t low = x & ((std::uint64_t{1} << p) - 1);
    x = ((x >> p) << (p + 1)) | low;
  }
  return x;
}

void require_distinct(const std::vector<unsigned>& qs, const char* what) {
  std::set<unsigned> s(qs.begin(), qs.end());
  if (s.size() != qs.size()) throw InvalidArgument(std::string(what) + ": repeated qubit");
}

std::uint64_t local_dim(const std::vector<unsigned>& targets) { return std::uint64_t{1} << targets.size(); }

}  // namespace

UnitaryOp UnitaryOp::dense(CMatrix matrix, std::vector<unsigned> targets) {
  require_distinct(targets, "dense op");
  const auto d = static_cast<Eigen::Index>(local_dim(targets));
  if (matrix.rows() != d || matrix.cols() != d)
    throw InvalidArgument("dense op: matrix is not 2^k x 2^k for k targets");
  if (!is_unitary(matrix)) throw NotUnitary("dense op: matrix is not unitary within 1e-10");
  UnitaryOp op;
  op.kind_ = Kind::Dense;
  op.matrix_ = std::move(matrix);
  op.targets_ = std::move(targets);
  return op;
}

UnitaryOp UnitaryOp::diagonal(CVector phases, std::vector<unsigned> targets) {
  require_distinct(targets, "diagonal op");
  if (static_cast<std::uint64_t>(phases.size()) != local_dim(targets))
    throw InvalidArgument("diagonal op: wrong number of phases");
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    if (std::abs(std::abs(phases[i]) - 1.0) > kUnitaryTol)
      throw NotUnitary("diagonal op: entry " + std::to_string(i) + " is not unit modulus");
  UnitaryOp op;
  op.kind_ = Kind::Diagonal;
  op.phases_ = std::move(phases);
  op.targets_ = std::move(targets);
  return op;
}

UnitaryOp UnitaryOp::permutation(std::vector<std::uint64_t> image, std::vector<unsigned> targets) {
  require_distinct(targets, "permutation op");
  const std::uint64_t d = local_dim(targets);
  if (image.size() != d) throw InvalidArgument("permutation op: wrong image size");
  std::vector<bool> hit(d, false);
  for (auto v : image) {
    if (v >= d || hit[v]) throw NotUnitary("permutation op: image is not a bijection");
    hit[v] = true;
  }
  UnitaryOp op;
  op.kind_ = Kind::Permutation;
  op.image_ = std::move(image);
  op.targets_ = std::move(targets);
  return op;
}

UnitaryOp UnitaryOp::controlled(const UnitaryOp& inner, std::vector<unsigned> controls) {
  const std::uint64_t all = controls.size() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << controls.size()) - 1;
  return controlled(inner, std::move(controls), all);
}

UnitaryOp UnitaryOp::controlled(const UnitaryOp& inner, std::vector<unsigned> controls,
                                std::uint64_t control_value) {
  require_distinct(controls, "controlled op");
  const auto sup = inner.support();
  for (unsigned c : controls)
    if (std::find(sup.begin(), sup.end(), c) != sup.end())
      throw InvalidArgument("controlled op: control overlaps the inner op's support");
  UnitaryOp op;
  op.kind_ = Kind::Controlled;
  op.controls_ = std::move(controls);
  op.control_value_ = control_value;
  op.targets_ = inner.targets();
  op.inner_ = std::make_shared<const UnitaryOp>(inner);
  return op;
}

UnitaryOp UnitaryOp::multiplexed(std::vector<CMatrix> blocks, std::vector<unsigned> selectors,
                                 std::vector<unsigned> targets) {
  std::vector<unsigned> all = selectors;
  all.insert(all.end(), targets.begin(), targets.end());
  require_distinct(all, "multiplexed op");
  if (blocks.size() != local_dim(selectors)) throw InvalidArgument("multiplexed op: need one block per selector value");
  const auto d = static_cast<Eigen::Index>(local_dim(targets));
  for (std::size_t v = 0; v < blocks.size(); ++v) {
    if (blocks[v].size() == 0) continue;  // identity
    if (blocks[v].rows() != d || blocks[v].cols() != d)
      throw InvalidArgument("multiplexed op: block has wrong size");
    if (!is_unitary(blocks[v]))
      throw NotUnitary("multiplexed op: block " + std::to_string(v) + " is not unitary within 1e-10");
  }
  UnitaryOp op;
  op.kind_ = Kind::Multiplexed;
  op.blocks_ = std::move(blocks);
  op.controls_ = std::move(selectors);
  op.targets_ = std::move(targets);
  return op;
}

std::vector<unsigned> UnitaryOp::support() const {
  std::vector<unsigned> s;
  if (kind_ == Kind::Controlled) {
    s = inner_->support();
    s.insert(s.end(), controls_.begin(), controls_.end());
  } else {
    s = targets_;
    s.insert(s.end(), controls_.begin(), controls_.end());
  }
  std::sort(s.begin(), s.end());
  return s;
}

UnitaryOp UnitaryOp::retarget(const std::vector<unsigned>& mapping) const {
  auto remap = [&](const std::vector<unsigned>& qs) {
    std::vector<unsigned> out;
    out.reserve(qs.size());
    for (unsigned q : qs) {
      if (q >= mapping.size()) throw InvalidArgument("retarget: mapping does not cover qubit " + std::to_string(q));
      out.push_back(mapping[q]);
    }
    return out;
  };
  UnitaryOp op = *this;
  op.targets_ = remap(targets_);
  op.controls_ = remap(controls_);
  if (kind_ == Kind::Controlled) op.inner_ = std::make_shared<const UnitaryOp>(inner_->retarget(mapping));
  require_distinct(op.support(), "retarget");
  return op;
}

UnitaryOp UnitaryOp::adjoint() const {
  UnitaryOp op = *this;
  switch (kind_) {
    case Kind::Dense:
      op.matrix_ = matrix_.adjoint();
      break;
    case Kind::Diagonal:
      op.phases_ = phases_.conjugate();
      break;
    case Kind::Permutation:
      for (std::size_t l = 0; l < image_.size(); ++l) op.image_[image_[l]] = l;
      break;
    case Kind::Controlled:
      op.inner_ = std::make_shared<const UnitaryOp>(inner_->adjoint());
      break;
    case Kind::Multiplexed:
      for (auto& b : op.blocks_)
        if (b.size() != 0) b = b.adjoint().eval();
      break;
  }
  return op;
}

CMatrix UnitaryOp::to_matrix(unsigned n_qubits) const {
  const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << n_qubits);
  CMatrix out(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    CVector e = CVector::Zero(dim);
    e[j] = 1.0;
    apply_in_place(e, n_qubits, *this);
    out.col(j) = e;
  }
  return out;
}

namespace {

void apply_kernel(CVector& amps, unsigned n, const UnitaryOp& op, std::uint64_t cmask, std::uint64_t cval) {
  using Kind = UnitaryOp::Kind;
  const std::uint64_t dim = std::uint64_t{1} << n;

  if (op.kind() == Kind::Controlled) {
    apply_kernel(amps, n, op.inner(), cmask | scatter_bits(~std::uint64_t{0}, op.controls()),
                 cval | scatter_bits(op.control_value(), op.controls()));
    return;
  }

  const auto& targets = op.targets();
  if (op.kind() == Kind::Diagonal) {
    const auto& ph = op.phases();
    for (std::uint64_t i = 0; i < dim; ++i) {
      if ((i & cmask) != cval) continue;
      amps[static_cast<Eigen::Index>(i)] *= ph[static_cast<Eigen::Index>(gather_bits(i, targets))];
    }
    return;
  }

  std::vector<unsigned> sorted_targets = targets;
  std::sort(sorted_targets.begin(), sorted_targets.end());
  const std::uint64_t ld = std::uint64_t{1} << targets.size();
  std::vector<std::uint64_t> offsets(ld);
  for (std::uint64_t l = 0; l < ld; ++l) offsets[l] = scatter_bits(l, targets);
  const std::uint64_t n_bases = dim >> targets.size();
  CVector tmp(static_cast<Eigen::Index>(ld));

  for (std::uint64_t b = 0; b < n_bases; ++b) {
    const std::uint64_t base = insert_zero_bits(b, sorted_targets);
    if ((base & cmask) != cval) continue;
    const CMatrix* m = nullptr;
    if (op.kind() == Kind::Dense) {
      m = &op.matrix();
    } else if (op.kind() == Kind::Multiplexed) {
      const auto& blk = op.blocks()[gather_bits(base, op.controls())];
      if (blk.size() == 0) continue;
      m = &blk;
    }
    for (std::uint64_t l = 0; l < ld; ++l) tmp[static_cast<Eigen::Index>(l)] = amps[static_cast<Eigen::Index>(base | offsets[l])];
    if (m != nullptr) {
      const CVector out = (*m) * tmp;
      for (std::uint64_t l = 0; l < ld; ++l) amps[static_cast<Eigen::Index>(base | offsets[l])] = out[static_cast<Eigen::Index>(l)];
    } else {
      const auto& image = op.image();
      for (std::uint64_t l = 0; l < ld; ++l)
        amps[static_cast<Eigen::Index>(base | offsets[image[l]])] = tmp[static_cast<Eigen::Index>(l)];
    }
  }
}

}  // namespace

void apply_in_place(CVector& amps, unsigned n_qubits, const UnitaryOp& op) {
  for (unsigned q : op.support())
    if (q >= n_qubits)
      throw InvalidArgument("target qubit " + std::to_string(q) + " out of range for " + std::to_string(n_qubits) +
                            " qubits");
  if (static_cast<std::uint64_t>(amps.size()) != (std::uint64_t{1} << n_qubits))
    throw InvalidArgument("apply_in_place: amplitude vector has wrong size");
  apply_kernel(amps, n_qubits, op, 0, 0);
}

Statevector apply_unitary(Statevector state, const UnitaryOp& op) {
  apply_in_place(state.data(), state.num_qubits(), op);
  return state;
}

// ------------------------------------------------------- post-selection

PostSelection postselect(const Statevector& state, unsigned qubit, int outcome) {
  return postselect(state, std::vector<std::pair<unsigned, int>>{{qubit, outcome}});
}

PostSelection postselect(const Statevector& state, const std::vector<std::pair<unsigned, int>>& outcomes) {
  std::uint64_t mask = 0;
  std::uint64_t value = 0;
  for (auto [q, bit] : outcomes) {
    if (q >= state.num_qubits()) throw InvalidArgument("postselect: qubit out of range");
    if (bit != 0 && bit != 1) throw InvalidArgument("postselect: outcome must be 0 or 1");
    mask |= std::uint64_t{1} << q;
    if (bit == 1) value |= std::uint64_t{1} << q;
  }
  CVector amps = state.amplitudes();
  double kept = 0.0;
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    if ((static_cast<std::uint64_t>(i) & mask) != value)
      amps[i] = 0.0;
    else
      kept += std::norm(amps[i]);
  }
  const double total = state.amplitudes().squaredNorm();
  const double p = total > 0.0 ? kept / total : 0.0;
  if (p < kZeroBranchTol) throw ImpossibleOutcome("postselect: branch probability " + std::to_string(p) + " below 1e-12");
  amps /= std::sqrt(kept);
  return {Statevector(state.layout(), std::move(amps), state.norm_ledger() * std::sqrt(p)), p};
}

// --------------------------------------------------------- density matrix

DensityMatrix::DensityMatrix(CMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw InvalidArgument("density matrix must be square");
}

double DensityMatrix::purity() const { return (entries_ * entries_).trace().real(); }

RVector DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(entries_, Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

std::size_t DensityMatrix::rank(double tol) const {
  const RVector ev = eigenvalues();
  return static_cast<std::size_t>((ev.array() > tol).count());
}

bool DensityMatrix::is_valid(double tol) const {
  if (!is_hermitian(entries_, tol)) return false;
  if (std::abs(trace() - Complex(1.0, 0.0)) > tol) return false;
  return eigenvalues().minCoeff() >= -tol;
}

DensityMatrix DensityMatrix::pure(const CVector& psi) { return DensityMatrix(psi * psi.adjoint()); }

DensityMatrix partial_trace(const Statevector& state, const std::vector<std::string>& keep) {
  if (keep.empty()) throw InvalidArgument("partial_trace: keep set is empty");
  const auto& layout = state.layout();
  std::vector<unsigned> kept_qubits;
  std::vector<unsigned> env_qubits;
  for (const auto& name : keep)
    if (!layout.has(name)) throw InvalidArgument("partial_trace: unknown register '" + name + "'");
  for (unsigned q = 0; q < layout.total_qubits(); ++q) {
    bool in_keep = false;
    for (const auto& name : keep) {
      const unsigned off = layout.offset(name);
      if (q >= off && q < off + layout.width(name)) in_keep = true;
    }
    (in_keep ? kept_qubits : env_qubits).push_back(q);
  }
  const auto dk = static_cast<Eigen::Index>(std::uint64_t{1} << kept_qubits.size());
  const auto de = static_cast<Eigen::Index>(std::uint64_t{1} << env_qubits.size());
  CMatrix psi = CMatrix::Zero(dk, de);
  const auto& amps = state.amplitudes();
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    psi(static_cast<Eigen::Index>(gather_bits(idx, kept_qubits)),
        static_cast<Eigen::Index>(gather_bits(idx, env_qubits))) = amps[i];
  }
  CMatrix rho = psi * psi.adjoint();
  const double tr = rho.trace().real();
  if (tr > 0.0) rho /= tr;
  return DensityMatrix(std::move(rho));
}

// ---------------------------------------------------------- evolution

Statevector evolve_hamiltonian(Statevector state, const CMatrix& hamiltonian, double t) {
  const auto dim = static_cast<Eigen::Index>(state.dimension());
  if (hamiltonian.rows() != dim || hamiltonian.cols() != dim)
    throw InvalidArgument("evolve_hamiltonian: Hamiltonian dimension does not match the state");
  if (!is_hermitian(hamiltonian)) throw NotHermitian("evolve_hamiltonian: H is not Hermitian within 1e-10");

  CVector& v = state.data();
  if (dim <= 4096) {
    v = (expm_i_hermitian(hamiltonian, t) * v).eval();
    return state;
  }
  // Split so each substep has ||H tau|| <= 0.5, then sum the series until the
  // geometric tail bound drops below 1e-16.
  const double hnorm = hamiltonian.cwiseAbs().colwise().sum().maxCoeff();
  const int substeps = std::max(1, static_cast<int>(std::ceil(2.0 * hnorm * std::abs(t))));
  const double tau = t / substeps;
  for (int s = 0; s < substeps; ++s) {
    CVector term = v;
    CVector sum = v;
    for (int k = 1; k < 200; ++k) {
      term = (hamiltonian * term).eval() * Complex(0.0, tau / k);
      sum += term;
      const double ratio = hnorm * std::abs(tau) / (k + 1);
      if (term.norm() * ratio / (1.0 - ratio) < 1e-16 * sum.norm()) break;
    }
    v = sum;
  }
  return state;
}

// -------------------------------------------------------- measurement

std::vector<double> marginal_probabilities(const Statevector& state, std::string_view reg) {
  const auto& layout = state.layout();
  std::vector<double> p(std::uint64_t{1} << layout.width(reg), 0.0);
  const auto& amps = state.amplitudes();
  for (Eigen::Index i = 0; i < amps.size(); ++i) p[layout.extract(static_cast<std::uint64_t>(i), reg)] += std::norm(amps[i]);
  return p;
}

std::map<std::uint64_t, std::uint64_t> measure_counts(const Statevector& state, std::string_view reg,
                                                      std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) throw InvalidArgument("measure_counts: shots must be >= 1");
  const auto p = marginal_probabilities(state, reg);
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  Rng rng(seed);
  std::map<std::uint64_t, std::uint64_t> counts;
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    // Skip zero-probability outcomes that share a cdf value with the hit.
    while (p[static_cast<std::size_t>(it - cdf.begin())] == 0.0 && it != cdf.begin()) --it;
    ++counts[static_cast<std::uint64_t>(it - cdf.begin())];
  }
  return counts;
}

}  // namespace flowq
