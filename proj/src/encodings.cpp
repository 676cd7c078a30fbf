#include "flowq/encodings.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "flowq/errors.hpp"
#include "flowq/gates.hpp"

namespace flowq {

AmplitudeEncoding amplitude_encode(const CVector& x, const std::string& reg) {
  if (x.size() == 0) throw InvalidArgument("amplitude_encode: empty vector");
  const double norm = x.norm();
  if (!(norm > 0.0)) throw InvalidArgument("amplitude_encode: all-zero vector");
  if (!std::isfinite(norm)) throw InvalidArgument("amplitude_encode: non-finite entry");
  const unsigned n = std::max(1U, ceil_log2(static_cast<std::uint64_t>(x.size())));
  RegisterLayout layout({{reg, n}});
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  amps.head(x.size()) = x / norm;
  return {Statevector(std::move(layout), std::move(amps)), norm, static_cast<std::size_t>(x.size())};
}

AmplitudeEncoding amplitude_encode(const std::vector<double>& x, const std::string& reg) {
  CVector v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = x[i];
  return amplitude_encode(v, reg);
}

CVector amplitude_decode(const Statevector& state, std::size_t length) {
  if (length == 0) return state.amplitudes();
  if (length > state.dimension()) throw InvalidArgument("amplitude_decode: length exceeds dimension");
  return state.amplitudes().head(static_cast<Eigen::Index>(length));
}

// ---------------------------------------------------------------- basis

namespace {

std::uint64_t require_integer(double value, const char* flavor) {
  if (!(value >= 0.0) || value != std::floor(value) || value >= 0x1.0p63)
    throw InvalidArgument(std::string(flavor) + " encoding: value must be a non-negative integer");
  return static_cast<std::uint64_t>(value);
}

void check_width(const BasisEncoding& enc) {
  if (enc.width == 0 || enc.width > 63) throw InvalidArgument("basis encoding: width must be in 1..63");
}

}  // namespace

std::uint64_t basis_encode(double value, const BasisEncoding& enc) {
  check_width(enc);
  const std::uint64_t full = std::uint64_t{1} << enc.width;
  switch (enc.flavor) {
    case BasisFlavor::Binary: {
      const auto v = require_integer(value, "binary");
      if (v >= full) throw InvalidArgument("binary encoding: value does not fit in width");
      return v;
    }
    case BasisFlavor::Unary: {
      const auto v = require_integer(value, "unary");
      if (v > enc.width) throw InvalidArgument("unary encoding: value exceeds width");
      return (std::uint64_t{1} << v) - 1;
    }
    case BasisFlavor::OneHot: {
      const auto v = require_integer(value, "one-hot");
      if (v == 0 || v > enc.width) throw InvalidArgument("one-hot encoding: value must be in 1..width");
      return std::uint64_t{1} << (v - 1);
    }
    case BasisFlavor::FixedPoint: {
      if (!(enc.scale > 0.0)) throw InvalidArgument("fixed-point encoding: scale must be positive");
      const double step = std::ldexp(1.0, -static_cast<int>(enc.width));
      const double limit = enc.scale * (1.0 - step);
      if (!(std::abs(value) <= limit * (1.0 + 1e-15)))
        throw InvalidArgument("fixed-point encoding: |value| exceeds scale * (1 - 2^-width)");
      const double half = std::ldexp(1.0, static_cast<int>(enc.width) - 1);
      const double m = std::clamp(std::round(value / enc.scale * half), -half, half - 1.0);
      const auto bits = static_cast<std::int64_t>(m);
      return static_cast<std::uint64_t>(bits) & (full - 1);
    }
  }
  throw InvalidArgument("basis encoding: unknown flavor");
}

double basis_decode(std::uint64_t index, const BasisEncoding& enc) {
  check_width(enc);
  const std::uint64_t full = std::uint64_t{1} << enc.width;
  if (index >= full) throw InvalidArgument("basis decode: index does not fit in width");
  switch (enc.flavor) {
    case BasisFlavor::Binary:
      return static_cast<double>(index);
    case BasisFlavor::Unary: {
      if ((index & (index + 1)) != 0) throw InvalidArgument("unary decode: set bits are not the lowest qubits");
      return static_cast<double>(std::popcount(index));
    }
    case BasisFlavor::OneHot: {
      if (std::popcount(index) != 1) throw InvalidArgument("one-hot decode: need exactly one set qubit");
      return static_cast<double>(std::countr_zero(index) + 1);
    }
    case BasisFlavor::FixedPoint: {
      const std::uint64_t half = full >> 1;
      const double m = index >= half ? static_cast<double>(index) - static_cast<double>(full)
                                     : static_cast<double>(index);
      return enc.scale * m / static_cast<double>(half);
    }
  }
  throw InvalidArgument("basis decode: unknown flavor");
}

std::string qubit_pattern(std::uint64_t index, unsigned width) {
  std::string s(width, '0');
  for (unsigned q = 0; q < width; ++q)
    if ((index >> q) & 1U) s[q] = '1';
  return s;
}

// --------------------------------------------------- basis -> amplitude

BasisToAmplitudeResult basis_to_amplitude(const std::vector<double>& d, unsigned psi_width) {
  if (d.empty()) throw InvalidArgument("basis_to_amplitude: empty data");
  for (double v : d)
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("basis_to_amplitude: every d_j must lie in [0, 1]");
  const std::size_t big_n = d.size();
  const unsigned n = std::max(1U, ceil_log2(big_n));
  const std::uint64_t n_pad = std::uint64_t{1} << n;

  std::vector<Register> regs{{"a", 1}};
  if (psi_width > 0) regs.push_back({"psi", psi_width});
  regs.push_back({"index", n});
  RegisterLayout layout(regs);

  // Uniform superposition over the N valid indices, ancilla and psi at zero.
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  const double u = 1.0 / std::sqrt(static_cast<double>(big_n));
  for (std::uint64_t j = 0; j < big_n; ++j) amps[static_cast<Eigen::Index>(j)] = u;
  Statevector state(layout, std::move(amps));

  std::vector<double> psi(n_pad, 1.0);  // padded slots: d = 0
  for (std::size_t j = 0; j < big_n; ++j) psi[j] = 2.0 / std::numbers::pi * std::acos(d[j]);

  const auto index_q = layout.qubits("index");
  const unsigned anc = layout.offset("a");
  double max_err = 0.0;

  if (psi_width == 0) {
    std::vector<CMatrix> blocks(n_pad);
    for (std::uint64_t j = 0; j < n_pad; ++j) blocks[j] = ry_matrix(std::numbers::pi * psi[j]);
    state = apply_unitary(std::move(state), UnitaryOp::multiplexed(std::move(blocks), index_q, {anc}));
  } else {
    const std::uint64_t levels = (std::uint64_t{1} << psi_width) - 1;
    std::vector<std::uint64_t> code(n_pad);
    for (std::uint64_t j = 0; j < n_pad; ++j) {
      code[j] = static_cast<std::uint64_t>(std::llround(psi[j] * static_cast<double>(levels)));
      max_err = std::max(max_err, std::abs(static_cast<double>(code[j]) / static_cast<double>(levels) - psi[j]));
    }
    // |j>|p> -> |j>|p xor code_j>, local bits: index first, then psi.
    const auto psi_q = layout.qubits("psi");
    std::vector<unsigned> targets = index_q;
    targets.insert(targets.end(), psi_q.begin(), psi_q.end());
    std::vector<std::uint64_t> image(n_pad << psi_width);
    for (std::uint64_t l = 0; l < image.size(); ++l) {
      const std::uint64_t j = l & (n_pad - 1);
      const std::uint64_t p = l >> n;
      image[l] = j | ((p ^ code[j]) << n);
    }
    const UnitaryOp oracle = UnitaryOp::permutation(std::move(image), targets);
    std::vector<CMatrix> blocks(std::uint64_t{1} << psi_width);
    for (std::uint64_t p = 0; p < blocks.size(); ++p)
      blocks[p] = ry_matrix(std::numbers::pi * static_cast<double>(p) / static_cast<double>(levels));
    state = apply_unitary(std::move(state), oracle);
    state = apply_unitary(std::move(state), UnitaryOp::multiplexed(std::move(blocks), psi_q, {anc}));
    state = apply_unitary(std::move(state), oracle);
  }

  auto sel = postselect(state, anc, 0);
  // After uncomputation only psi = 0 carries weight; keep the index register.
  RegisterLayout out_layout({{"index", n}});
  CVector out = CVector::Zero(static_cast<Eigen::Index>(n_pad));
  const auto& a = sel.state.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    if (psi_width > 0 && sel.state.layout().extract(idx, "psi") != 0) {
      if (std::abs(a[i]) > 1e-12) throw Error("basis_to_amplitude: psi register was not uncomputed");
      continue;
    }
    if (sel.state.layout().extract(idx, "a") != 0) continue;
    out[static_cast<Eigen::Index>(sel.state.layout().extract(idx, "index"))] = a[i];
  }
  out /= out.norm();
  return {Statevector(std::move(out_layout), std::move(out), sel.state.norm_ledger()), sel.probability, max_err,
          layout.total_qubits()};
}

// ------------------------------------------------------------- block

UnitaryOp BlockEncoding::unitary() const {
  std::vector<unsigned> q(system_qubits + 1);
  for (unsigned i = 0; i <= system_qubits; ++i) q[i] = i;
  return UnitaryOp::dense(dilation, q);
}

BlockEncoding block_encode(const CMatrix& a, double alpha) {
  if (a.rows() == 0 || a.cols() == 0) throw InvalidArgument("block_encode: empty matrix");
  if (!(alpha > 0.0)) throw InvalidArgument("block_encode: alpha must be positive");
  const double norm = spectral_norm(a);
  if (alpha < norm - 1e-12)
    throw InvalidArgument("block_encode: alpha " + std::to_string(alpha) + " is below ||A|| = " + std::to_string(norm));
  const unsigned s = std::max(1U, ceil_log2(static_cast<std::uint64_t>(std::max(a.rows(), a.cols()))));
  if (s + 1 > max_qubits()) throw QubitCapExceeded("block_encode: dilation exceeds the qubit cap");
  const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << s);
  CMatrix b = CMatrix::Zero(dim, dim);
  b.topLeftCorner(a.rows(), a.cols()) = a / alpha;
  // Halmos dilation built from one SVD, so sqrt(1 - sigma^2) stays consistent
  // with sigma even when a singular value sits at 1.
  const Eigen::JacobiSVD<CMatrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const CMatrix& w = svd.matrixU();
  const CMatrix& v = svd.matrixV();
  RVector sigma = svd.singularValues().cwiseMin(1.0);
  const RVector comp = (1.0 - sigma.array().square()).max(0.0).sqrt().matrix();
  CMatrix u(2 * dim, 2 * dim);
  u.topLeftCorner(dim, dim) = w * sigma.cast<Complex>().asDiagonal() * v.adjoint();
  u.topRightCorner(dim, dim) = w * comp.cast<Complex>().asDiagonal() * w.adjoint();
  u.bottomLeftCorner(dim, dim) = v * comp.cast<Complex>().asDiagonal() * v.adjoint();
  u.bottomRightCorner(dim, dim) = -v * sigma.cast<Complex>().asDiagonal() * w.adjoint();
  if (!is_unitary(u)) throw NotUnitary("block_encode: dilation failed the unitarity check");
  return {a, alpha, std::move(u), s};
}

CMatrix extract_block(const BlockEncoding& be) {
  return be.alpha * be.dilation.topLeftCorner(be.a.rows(), be.a.cols());
}

}  // namespace flowq
