#include "flowq/copies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>
#include <unsupported/Eigen/KroneckerProduct>

#include "flowq/errors.hpp"

namespace flowq {

namespace {

std::size_t ipow(std::size_t base, unsigned exp) {
  std::size_t r = 1;
  for (unsigned i = 0; i < exp; ++i) r *= base;
  return r;
}

std::size_t phi_dimension(std::size_t n_vars) { return std::size_t{1} << std::max(1U, ceil_log2(n_vars + 1)); }

}  // namespace

// ------------------------------------------------------------ quadratic map

QuadraticMap::QuadraticMap(std::size_t n_vars) : n_(n_vars), a_((n_vars + 1) * (n_vars + 1) * (n_vars + 1), 0.0) {
  if (n_vars == 0) throw InvalidArgument("QuadraticMap: need at least one variable");
  a_[idx(0, 0, 0)] = 1.0;
}

double QuadraticMap::coefficient(std::size_t alpha, std::size_t k, std::size_t l) const {
  if (alpha > n_ || k > n_ || l > n_) throw InvalidArgument("QuadraticMap: index out of range");
  return a_[idx(alpha, k, l)];
}

void QuadraticMap::set(std::size_t alpha, std::size_t k, std::size_t l, double value) {
  if (alpha == 0) throw InvalidArgument("QuadraticMap: the f_0 row is fixed");
  if (alpha > n_ || k > n_ || l > n_) throw InvalidArgument("QuadraticMap: index out of range");
  if (!std::isfinite(value)) throw InvalidArgument("QuadraticMap: non-finite coefficient");
  a_[idx(alpha, k, l)] = value;
  a_[idx(alpha, l, k)] = value;
}

CVector QuadraticMap::apply(const CVector& z) const {
  if (static_cast<std::size_t>(z.size()) != n_) throw InvalidArgument("QuadraticMap::apply: size mismatch");
  CVector zz(static_cast<Eigen::Index>(n_ + 1));
  zz[0] = 1.0;
  zz.tail(static_cast<Eigen::Index>(n_)) = z;
  CVector f = CVector::Zero(static_cast<Eigen::Index>(n_ + 1));
  for (std::size_t alpha = 0; alpha <= n_; ++alpha)
    for (std::size_t k = 0; k <= n_; ++k)
      for (std::size_t l = 0; l <= n_; ++l) {
        const double c = a_[idx(alpha, k, l)];
        if (c != 0.0) f[static_cast<Eigen::Index>(alpha)] += c * zz[static_cast<Eigen::Index>(k)] * zz[static_cast<Eigen::Index>(l)];
      }
  return f;
}

QuadraticMap QuadraticMap::rescaled(double r) const {
  QuadraticMap out(n_);
  out.measure_preserving = measure_preserving;
  for (std::size_t alpha = 1; alpha <= n_; ++alpha)
    for (std::size_t k = 0; k <= n_; ++k)
      for (std::size_t l = 0; l <= n_; ++l) {
        const int order = (k > 0 ? 1 : 0) + (l > 0 ? 1 : 0);
        out.a_[idx(alpha, k, l)] = a_[idx(alpha, k, l)] * std::pow(r, order);
      }
  return out;
}

Statevector encode_phi(const CVector& z) {
  if (z.size() == 0) throw InvalidArgument("encode_phi: empty vector");
  if (std::abs(z.norm() - 1.0) > 1e-10) throw InvalidArgument("encode_phi: ||z|| must be 1 within 1e-10");
  const std::size_t dim = phi_dimension(static_cast<std::size_t>(z.size()));
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(dim));
  const double s = 1.0 / std::sqrt(2.0);
  amps[0] = s;
  amps.segment(1, z.size()) = z * s;
  return Statevector(RegisterLayout({{"phi", ceil_log2(dim)}}), std::move(amps));
}

CVector decode_phi(const CVector& amplitudes, std::size_t n_vars) {
  if (static_cast<std::size_t>(amplitudes.size()) < n_vars + 1) throw InvalidArgument("decode_phi: too few amplitudes");
  if (std::abs(amplitudes[0]) < kZeroBranchTol) throw InvalidArgument("decode_phi: |0> amplitude vanishes");
  return amplitudes.segment(1, static_cast<Eigen::Index>(n_vars)) / amplitudes[0];
}

CMatrix quadratic_map_operator(const QuadraticMap& map) {
  const std::size_t n = map.n_vars();
  const auto dim = static_cast<Eigen::Index>(phi_dimension(n));
  CMatrix a = CMatrix::Zero(dim * dim, dim * dim);
  for (std::size_t alpha = 0; alpha <= n; ++alpha)
    for (std::size_t k = 0; k <= n; ++k)
      for (std::size_t l = 0; l <= n; ++l) {
        const double c = map.coefficient(alpha, k, l);
        if (c != 0.0)
          a(static_cast<Eigen::Index>(alpha) * dim, static_cast<Eigen::Index>(k) * dim + static_cast<Eigen::Index>(l)) = c;
      }
  return a;
}

CMatrix pointer_hamiltonian(const QuadraticMap& map) {
  const CMatrix a = quadratic_map_operator(map);
  const Eigen::Index dim = a.rows();
  CMatrix h = CMatrix::Zero(2 * dim, 2 * dim);
  const Complex i(0.0, 1.0);
  for (Eigen::Index x = 0; x < dim; ++x)
    for (Eigen::Index y = 0; y < dim; ++y) {
      h(2 * x + 1, 2 * y) = -i * a(x, y);
      h(2 * x, 2 * y + 1) = i * std::conj(a(y, x));
    }
  return h;
}

QuadraticMapResult apply_quadratic_map(const QuadraticMap& map, const CVector& z, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 0.2)) throw InvalidArgument("apply_quadratic_map: epsilon must lie in (0, 0.2]");
  const Statevector phi = encode_phi(z);
  const unsigned q = phi.num_qubits();
  RegisterLayout layout({{"copy1", q}, {"copy2", q}, {"pointer", 1}});
  const CVector pair = Eigen::kroneckerProduct(phi.amplitudes(), phi.amplitudes()).eval();
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  for (Eigen::Index x = 0; x < pair.size(); ++x) amps[2 * x] = pair[x];
  Statevector state(layout, std::move(amps));

  const CMatrix h = pointer_hamiltonian(map);
  if (!is_hermitian(h, 1e-12)) throw NotHermitian("apply_quadratic_map: pointer Hamiltonian is not Hermitian");
  state = evolve_hamiltonian(std::move(state), h, epsilon);
  const PostSelection sel = postselect(state, layout.offset("pointer"), 1);

  const std::size_t n = map.n_vars();
  CVector sim = CVector::Zero(static_cast<Eigen::Index>(n + 1));
  for (std::size_t alpha = 0; alpha <= n; ++alpha)
    sim[static_cast<Eigen::Index>(alpha)] = sel.state.amplitude(layout.insert(
        layout.insert(1, "copy1", alpha), "copy2", 0));

  QuadraticMapResult out;
  out.target = map.apply(z).tail(static_cast<Eigen::Index>(n));
  out.z_out = decode_phi(sim, n);
  out.success_probability = sel.probability;
  CVector target_state = map.apply(z);
  target_state.normalize();
  out.fidelity = std::abs(target_state.dot(sim.normalized()));
  out.qubits = layout.total_qubits();
  return out;
}

std::uint64_t copy_budget(double epsilon, unsigned steps) {
  if (!(epsilon > 0.0)) throw InvalidArgument("copy_budget: epsilon must be positive");
  const double x = 16.0 / (epsilon * epsilon);
  const double rounded = std::round(x);
  const double pairs_d = std::abs(x - rounded) < 1e-9 * std::max(1.0, x) ? rounded : std::ceil(x);
  if (pairs_d >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
  const auto pairs = static_cast<std::uint64_t>(pairs_d);
  std::uint64_t total = 1;
  for (unsigned s = 0; s < steps; ++s) {
    if (total > std::numeric_limits<std::uint64_t>::max() / pairs) return std::numeric_limits<std::uint64_t>::max();
    total *= pairs;
  }
  return total;
}

EulerTrajectory euler_iterate(const QuadraticMap& map, const CVector& z0, double dt, unsigned steps, double epsilon) {
  if (steps == 0) throw InvalidArgument("euler_iterate: steps must be >= 1");
  EulerTrajectory out;
  out.copy_budget = copy_budget(epsilon, steps);
  out.z.push_back(z0);
  for (unsigned s = 0; s < steps; ++s) {
    const CVector& z = out.z.back();
    const double r = z.norm();
    if (!(r > 0.0)) throw InvalidArgument("euler_iterate: state vanished");
    const QuadraticMapResult res = apply_quadratic_map(map.rescaled(r), z / r, epsilon);
    out.z.push_back(z + dt * res.z_out);
    out.success_probability.push_back(res.success_probability);
    out.fidelity.push_back(res.fidelity);
  }
  return out;
}

// ------------------------------------------------------------- mean field

namespace {

// Swap of two d-level slots.
CMatrix slot_swap(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d * d);
  CMatrix s = CMatrix::Zero(n, n);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) s(static_cast<Eigen::Index>(b * d + a), static_cast<Eigen::Index>(a * d + b)) = 1.0;
  return s;
}

// Tr_2[F (I (x) x x^+)] with slot 1 the high index.
CMatrix contract_pair(const CMatrix& f, const CVector& x, std::size_t d) {
  const auto dd = static_cast<Eigen::Index>(d);
  CMatrix out = CMatrix::Zero(dd, dd);
  for (Eigen::Index a = 0; a < dd; ++a)
    for (Eigen::Index b = 0; b < dd; ++b) {
      Complex acc = 0.0;
      for (Eigen::Index c = 0; c < dd; ++c)
        for (Eigen::Index e = 0; e < dd; ++e) acc += f(a * dd + c, b * dd + e) * std::conj(x[c]) * x[e];
      out(a, b) = acc;
    }
  return out;
}

// Embeds a pair operator on copies (j, k) of an n-copy register, copy 0 most significant.
CMatrix embed_pair(const CMatrix& f, std::size_t d, unsigned n, unsigned j, unsigned k) {
  const std::size_t dim = ipow(d, n);
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  auto digit = [&](std::size_t idx, unsigned copy) { return (idx / ipow(d, n - 1 - copy)) % d; };
  auto with = [&](std::size_t idx, unsigned copy, std::size_t v) {
    const std::size_t p = ipow(d, n - 1 - copy);
    return idx - digit(idx, copy) * p + v * p;
  };
  for (std::size_t col = 0; col < dim; ++col) {
    const std::size_t in = digit(col, j) * d + digit(col, k);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        const Complex v = f(static_cast<Eigen::Index>(a * d + b), static_cast<Eigen::Index>(in));
        if (v == Complex(0.0)) continue;
        out(static_cast<Eigen::Index>(with(with(col, j, a), k, b)), static_cast<Eigen::Index>(col)) += v;
      }
  }
  return out;
}

CMatrix embed_single(const CMatrix& l, std::size_t d, unsigned n, unsigned j) {
  const auto left = static_cast<Eigen::Index>(ipow(d, j));
  const auto right = static_cast<Eigen::Index>(ipow(d, n - 1 - j));
  return Eigen::kroneckerProduct(CMatrix::Identity(left, left),
                                 Eigen::kroneckerProduct(l, CMatrix::Identity(right, right)).eval())
      .eval();
}

CMatrix pair_sum(const CMatrix& f, std::size_t d, unsigned n) {
  const auto dim = static_cast<Eigen::Index>(ipow(d, n));
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (unsigned j = 0; j < n; ++j)
    for (unsigned k = j + 1; k < n; ++k) sum += embed_pair(f, d, n, j, k);
  return sum;
}

// Copy-0 reduced state of an n-copy vector.
CMatrix reduce_first(const CVector& v, std::size_t d, unsigned n) {
  const auto dd = static_cast<Eigen::Index>(d);
  const auto rest = static_cast<Eigen::Index>(ipow(d, n - 1));
  CMatrix psi(dd, rest);
  for (Eigen::Index a = 0; a < dd; ++a)
    for (Eigen::Index r = 0; r < rest; ++r) psi(a, r) = v[a * rest + r];
  return psi * psi.adjoint();
}

}  // namespace

void MeanFieldSystem::validate() const {
  if (d < 2) throw InvalidArgument("MeanFieldSystem: d must be >= 2");
  if (copies < 2) throw InvalidArgument("MeanFieldSystem: need at least two copies");
  const auto n = static_cast<Eigen::Index>(d * d);
  if (f_pair.rows() != n || f_pair.cols() != n) throw InvalidArgument("MeanFieldSystem: F must be d^2 x d^2");
  if ((f_pair + f_pair.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidArgument("MeanFieldSystem: F is not anti-Hermitian");
  const CMatrix s = slot_swap(d);
  if ((s * f_pair * s - f_pair).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidArgument("MeanFieldSystem: F is not symmetric under exchange of the two copies");
  if (ipow(d, copies) > (std::size_t{1} << 14)) throw QubitCapExceeded("MeanFieldSystem: copy register too large");
}

CMatrix MeanFieldSystem::generator(const CVector& x) const { return contract_pair(f_pair, x, d); }

CMatrix MeanFieldSystem::hamiltonian() const {
  return Complex(0.0, -1.0 / static_cast<double>(copies - 1)) * pair_sum(f_pair, d, copies);
}

MeanFieldResult meanfield_evolve(const MeanFieldSystem& sys, const CVector& x0, double dt, unsigned steps) {
  sys.validate();
  if (static_cast<std::size_t>(x0.size()) != sys.d) throw InvalidArgument("meanfield_evolve: x0 has the wrong size");
  if (std::abs(x0.norm() - 1.0) > 1e-10) throw InvalidArgument("meanfield_evolve: ||x0|| must be 1");

  const CMatrix h = sys.hamiltonian();
  if (!is_hermitian(h)) throw NotHermitian("meanfield_evolve: induced H is not Hermitian");
  const CMatrix u = expm_i_hermitian(h, -dt);

  CVector state = x0;
  for (unsigned c = 1; c < sys.copies; ++c) state = Eigen::kroneckerProduct(state, x0).eval();
  CVector x = x0;

  MeanFieldResult out;
  out.reduced.push_back(x0 * x0.adjoint());
  out.classical.push_back(x0);
  out.trace_distance.push_back(0.0);
  double e_sum = 0.0;
  for (unsigned s = 0; s < steps; ++s) {
    const CMatrix f = sys.generator(x);
    e_sum += spectral_norm(f);
    x = (x - dt * (f * x)).eval();
    x.normalize();
    state = (u * state).eval();
    const CMatrix rho = reduce_first(state, sys.d, sys.copies);
    out.reduced.push_back(rho);
    out.classical.push_back(x);
    out.trace_distance.push_back(trace_distance(rho, x * x.adjoint()));
  }
  out.e_norm = steps > 0 ? e_sum / steps : spectral_norm(sys.generator(x0));
  return out;
}

// -------------------------------------------------------------- history

CMatrix HistorySpec::f(const CVector& x) const {
  const auto dd = static_cast<Eigen::Index>(d);
  CMatrix out = CMatrix::Zero(dd, dd);
  if (linear.size() != 0) out += linear;
  if (f_pair.size() != 0) out += contract_pair(f_pair, x, d);
  return out;
}

HistoryLinearSystem build_history_system(const HistorySpec& spec) {
  if (spec.d == 0 || spec.copies == 0) throw InvalidArgument("build_history_system: d and copies must be >= 1");
  if (spec.b.size() < 2) throw InvalidArgument("build_history_system: need b_0 .. b_T with T >= 1");
  const auto dd = static_cast<Eigen::Index>(spec.d);
  if (spec.linear.size() != 0 && (spec.linear.rows() != dd || spec.linear.cols() != dd))
    throw InvalidArgument("build_history_system: L must be d x d");
  if (spec.f_pair.size() != 0 && (spec.f_pair.rows() != dd * dd || spec.f_pair.cols() != dd * dd))
    throw InvalidArgument("build_history_system: F must be d^2 x d^2");
  if (spec.f_pair.size() != 0 && spec.copies < 2 && spec.f_pair.cwiseAbs().maxCoeff() > 0.0)
    throw InvalidArgument("build_history_system: a pair interaction needs at least two copies");
  for (const auto& bk : spec.b)
    if (bk.size() != dd) throw InvalidArgument("build_history_system: every b_k must have length d");

  const unsigned n = spec.copies;
  const std::size_t block = ipow(spec.d, n);
  if (block * spec.b.size() > 8192) throw QubitCapExceeded("build_history_system: system too large for a dense solve");
  const auto bl = static_cast<Eigen::Index>(block);

  CMatrix g = CMatrix::Zero(bl, bl);
  if (spec.linear.size() != 0)
    for (unsigned j = 0; j < n; ++j) g += embed_single(spec.linear, spec.d, n, j);
  if (spec.f_pair.size() != 0 && n >= 2) g += pair_sum(spec.f_pair, spec.d, n) / static_cast<double>(n - 1);

  const auto steps = static_cast<unsigned>(spec.b.size() - 1);
  const Eigen::Index total = bl * (steps + 1);
  HistoryLinearSystem sys;
  sys.m = CMatrix::Identity(total, total);
  const CMatrix step = CMatrix::Identity(bl, bl) - spec.dt * g;
  for (unsigned k = 0; k < steps; ++k) sys.m.block((k + 1) * bl, k * bl, bl, bl) = -step;

  sys.b = CVector::Zero(total);
  for (unsigned k = 0; k <= steps; ++k) {
    CVector t = spec.b[k];
    for (unsigned c = 1; c < n; ++c) t = Eigen::kroneckerProduct(t, spec.b[k]).eval();
    sys.b.segment(k * bl, bl) = (k == 0 ? 1.0 : spec.dt) * t;
  }
  sys.steps = steps;
  sys.block = block;
  sys.d = spec.d;
  sys.copies = n;
  sys.dt = spec.dt;
  return sys;
}

HistorySolution solve_history(const HistoryLinearSystem& sys) {
  Eigen::PartialPivLU<CMatrix> lu(sys.m);
  const auto& u = lu.matrixLU();
  const double umax = u.diagonal().cwiseAbs().maxCoeff();
  const double umin = u.diagonal().cwiseAbs().minCoeff();
  if (!(umax > 0.0) || umin / umax < 1e-12) throw SingularMatrix("solve_history: M is singular within 1e-12");

  HistorySolution out;
  out.history = lu.solve(sys.b);
  const auto bl = static_cast<Eigen::Index>(sys.block);
  for (unsigned k = 0; k <= sys.steps; ++k) {
    CVector v = out.history.segment(k * bl, bl);
    out.blocks.push_back(v);
    if (sys.copies == 1) {
      out.extracted.push_back(v);
      continue;
    }
    const double norm = v.norm();
    if (norm == 0.0) {
      out.extracted.push_back(CVector::Zero(static_cast<Eigen::Index>(sys.d)));
      continue;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(reduce_first(v / norm, sys.d, sys.copies));
    CVector e = es.eigenvectors().col(es.eigenvectors().cols() - 1);
    Eigen::Index big = 0;
    e.cwiseAbs().maxCoeff(&big);
    e *= std::conj(e[big]) / std::abs(e[big]);
    out.extracted.push_back(e * std::pow(norm, 1.0 / sys.copies));
  }
  return out;
}

std::vector<CVector> nonlinear_euler(const HistorySpec& spec) {
  if (spec.b.empty()) throw InvalidArgument("nonlinear_euler: empty b sequence");
  std::vector<CVector> xs{spec.b[0]};
  for (std::size_t k = 1; k < spec.b.size(); ++k) {
    const CVector& x = xs.back();
    xs.push_back(x - spec.dt * (spec.f(x) * x) + spec.dt * spec.b[k]);
  }
  return xs;
}

double phase_aligned_distance(const CVector& a, const CVector& b) {
  const Complex overlap = b.dot(a);  // <b|a>
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
  return (a - phase * b).norm();
}

std::size_t nonzero_blocks(const HistoryLinearSystem& sys) {
  const auto bl = static_cast<Eigen::Index>(sys.block);
  const Eigen::Index nb = sys.m.rows() / bl;
  std::size_t count = 0;
  for (Eigen::Index r = 0; r < nb; ++r)
    for (Eigen::Index c = 0; c < nb; ++c)
      if (sys.m.block(r * bl, c * bl, bl, bl).cwiseAbs().maxCoeff() > 0.0) ++count;
  return count;
}

}  // namespace flowq
