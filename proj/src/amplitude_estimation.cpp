#include "flowq/amplitude_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "flowq/errors.hpp"
#include "flowq/gates.hpp"
#include "flowq/rng.hpp"

namespace flowq {

CVector GroverOperator::prepared() const {
  return a.col(static_cast<Eigen::Index>(initial));
}

GroverOperator build_grover(const CMatrix& a, const GoodPredicate& chi, std::uint64_t initial) {
  const auto dim = static_cast<std::uint64_t>(a.rows());
  if (a.rows() != a.cols() || !is_power_of_two(dim) || dim < 2)
    throw InvalidArgument("build_grover: A must be square with a power-of-two dimension >= 2");
  if (!is_unitary(a)) throw NotUnitary("build_grover: A is not unitary within 1e-10");
  if (initial >= dim) throw InvalidArgument("build_grover: initial state out of range");

  GroverOperator g;
  g.system_qubits = ceil_log2(dim);
  g.a = a;
  g.initial = initial;
  g.good.resize(dim);
  for (std::uint64_t i = 0; i < dim; ++i) g.good[i] = chi(i);

  const CVector psi = g.prepared();
  double good_weight = 0.0;
  for (std::uint64_t i = 0; i < dim; ++i)
    if (g.good[i]) good_weight += std::norm(psi[static_cast<Eigen::Index>(i)]);
  g.amplitude = std::clamp(good_weight, 0.0, 1.0);
  g.theta = std::asin(std::sqrt(g.amplitude));
  g.degenerate = g.amplitude < kZeroBranchTol || g.amplitude > 1.0 - kZeroBranchTol;

  // A S_init A^+ = I - 2|psi><psi|, so Q = (2|psi><psi| - I) S_chi.
  const auto n = static_cast<Eigen::Index>(dim);
  CMatrix reflect = 2.0 * psi * psi.adjoint() - CMatrix::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    if (g.good[static_cast<std::uint64_t>(c)]) reflect.col(c) *= -1.0;
  g.q = std::move(reflect);
  if (!is_unitary(g.q)) throw NotUnitary("build_grover: Q failed the unitarity check");
  return g;
}

GroverOperator build_grover(const UnitaryOp& a, unsigned system_qubits, const GoodPredicate& chi,
                            std::uint64_t initial) {
  return build_grover(a.to_matrix(system_qubits), chi, initial);
}

CMatrix restricted_grover(const GroverOperator& g) {
  if (g.degenerate) throw InvalidArgument("restricted_grover: a is 0 or 1, the subspace is one-dimensional");
  const CVector psi = g.prepared();
  CVector n0 = CVector::Zero(psi.size());
  CVector n1 = CVector::Zero(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) (g.good[static_cast<std::uint64_t>(i)] ? n1 : n0)[i] = psi[i];
  n0.normalize();
  n1.normalize();
  CMatrix basis(psi.size(), 2);
  basis.col(0) = n0;
  basis.col(1) = n1;
  return basis.adjoint() * g.q * basis;
}

std::vector<double> restricted_eigenphases(const GroverOperator& g) {
  Eigen::ComplexEigenSolver<CMatrix> es(restricted_grover(g));
  std::vector<double> phases;
  for (Eigen::Index i = 0; i < 2; ++i) phases.push_back(std::arg(es.eigenvalues()[i]));
  std::sort(phases.begin(), phases.end());
  return phases;
}

std::vector<double> qae_distribution(const GroverOperator& g, unsigned n_phase) {
  if (n_phase == 0) throw InvalidArgument("qae: n_phase must be >= 1");
  RegisterLayout layout({{"R", n_phase}, {"S", g.system_qubits}});
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  amps.head(g.q.rows()) = g.prepared();
  Statevector state(layout, std::move(amps));

  const auto r = layout.qubits("R");
  const auto s = layout.qubits("S");
  state = apply_unitary(std::move(state), qft_on(r));
  CMatrix power = g.q;
  for (unsigned t = 0; t < n_phase; ++t) {
    state = apply_unitary(std::move(state), UnitaryOp::controlled(UnitaryOp::dense(power, s), {r[t]}));
    if (t + 1 < n_phase) power = (power * power).eval();
  }
  state = apply_unitary(std::move(state), qft_on(r, true));
  return marginal_probabilities(state, "R");
}

namespace {

std::uint64_t modal_outcome(const std::vector<double>& p) {
  const double best = *std::max_element(p.begin(), p.end());
  for (std::uint64_t y = 0; y < p.size(); ++y)
    if (p[y] >= best - 1e-12) return y;
  return 0;
}

std::uint64_t draw_outcome(const std::vector<double>& p, std::uint64_t seed) {
  Rng rng(seed);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::uint64_t last_nonzero = 0;
  for (std::uint64_t y = 0; y < p.size(); ++y) {
    if (p[y] <= 0.0) continue;
    last_nonzero = y;
    acc += p[y];
    if (u < acc) return y;
  }
  return last_nonzero;
}

}  // namespace

AmplitudeEstimate qae(const GroverOperator& g, unsigned n_phase, QaeMode mode, std::uint64_t seed) {
  AmplitudeEstimate est;
  est.n_phase = n_phase;
  est.distribution = qae_distribution(g, n_phase);
  if (mode == QaeMode::ExactDistribution) {
    est.y = modal_outcome(est.distribution);
  } else {
    est.y = draw_outcome(est.distribution, seed);
    est.shots_used = 1;
  }
  est.a_hat = estimate_from_outcome(est.y, n_phase);
  est.samples = {est.a_hat};
  return est;
}

double median_failure_bound(unsigned M) { return std::exp(-static_cast<double>(M) / 8.0); }

AmplitudeEstimate qae_median(const GroverOperator& g, unsigned n_phase, unsigned M, std::uint64_t seed) {
  if (M == 0 || M % 2 == 0) throw InvalidArgument("qae_median: M must be odd and >= 1");
  AmplitudeEstimate est;
  est.n_phase = n_phase;
  est.repetitions = M;
  est.failure_bound = median_failure_bound(M);
  est.distribution = qae_distribution(g, n_phase);
  std::vector<std::pair<double, std::uint64_t>> runs;
  for (unsigned r = 0; r < M; ++r) {
    const std::uint64_t y = draw_outcome(est.distribution, seed + r);
    runs.emplace_back(estimate_from_outcome(y, n_phase), y);
    est.samples.push_back(runs.back().first);
  }
  est.shots_used = M;
  std::sort(runs.begin(), runs.end());
  est.a_hat = runs[M / 2].first;
  est.y = runs[M / 2].second;
  return est;
}

UnitaryOp mean_oracle(const std::vector<double>& g_samples) {
  const std::uint64_t n_pad = g_samples.size();
  if (!is_power_of_two(n_pad)) throw InvalidArgument("mean_oracle: sample count must be a power of two");
  std::vector<CMatrix> blocks(n_pad);
  for (std::uint64_t j = 0; j < n_pad; ++j) {
    const double gj = g_samples[j];
    if (!(gj >= 0.0 && gj <= 1.0)) throw InvalidArgument("mean_oracle: samples must lie in [0, 1]");
    const double c = std::sqrt(gj);
    const double s = std::sqrt(1.0 - gj);
    CMatrix b(2, 2);
    b << c, s, -s, c;
    blocks[j] = std::move(b);
  }
  const unsigned n = ceil_log2(n_pad);
  std::vector<unsigned> selectors(n);
  std::iota(selectors.begin(), selectors.end(), 1U);
  return UnitaryOp::multiplexed(std::move(blocks), std::move(selectors), {0});
}

MeanEstimate estimate_mean(const std::vector<double>& g_samples, const QaeConfig& cfg) {
  if (g_samples.empty()) throw InvalidArgument("estimate_mean: no samples");
  const unsigned n = std::max(1U, ceil_log2(g_samples.size()));
  const std::uint64_t n_pad = std::uint64_t{1} << n;
  std::vector<double> padded(g_samples);
  padded.resize(n_pad, 0.0);

  std::vector<unsigned> index_q(n);
  std::iota(index_q.begin(), index_q.end(), 1U);
  const CMatrix lambda = mean_oracle(padded).to_matrix(n + 1);
  const CMatrix fourier = qft_on(index_q).to_matrix(n + 1);
  const CMatrix a = lambda * fourier;
  const GroverOperator g = build_grover(a, [](std::uint64_t i) { return (i & 1U) != 0; }, 1);

  MeanEstimate out;
  out.n_samples = g_samples.size();
  out.n_padded = n_pad;
  out.total_qubits = cfg.n_phase + n + 1;
  if (cfg.mode == QaeMode::ExactDistribution)
    out.estimate = qae(g, cfg.n_phase, QaeMode::ExactDistribution);
  else
    out.estimate = qae_median(g, cfg.n_phase, cfg.repetitions, cfg.seed);
  out.mean = out.estimate.a_hat * static_cast<double>(n_pad) / static_cast<double>(g_samples.size());
  return out;
}

}  // namespace flowq
