#include "flowq/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "flowq/errors.hpp"

namespace flowq {

void TimeMesh::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("TimeMesh: horizon must be positive");
  if (n_primary == 0 || n_secondary == 0) throw InvalidArgument("TimeMesh: interval counts must be >= 1");
}

double TimeMesh::node(unsigned i, unsigned k) const {
  const double total = static_cast<double>(n_primary) * n_secondary;
  const double idx = static_cast<double>(i) * n_secondary + k;
  return idx == total ? horizon : horizon * idx / total;
}

Rescaled rescale_to_unit(const std::vector<double>& samples) {
  if (samples.empty()) throw InvalidArgument("rescale_to_unit: no samples");
  for (double s : samples)
    if (!std::isfinite(s)) throw InvalidArgument("rescale_to_unit: non-finite sample");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  Rescaled out;
  out.params = {*mn, *mx, *mn == *mx};
  out.g.reserve(samples.size());
  for (double s : samples) out.g.push_back(std::clamp(out.params.to_unit(s), 0.0, 1.0));
  return out;
}

RVector PiecewiseTaylor::eval(double t) const {
  const double rel = (t - start) / width;
  auto k = static_cast<std::size_t>(std::clamp(std::floor(rel), 0.0, static_cast<double>(coeffs.size() - 1)));
  const double tau = t - (start + static_cast<double>(k) * width);
  const auto& c = coeffs[k];
  RVector v = c.back();
  for (std::size_t m = c.size() - 1; m-- > 0;) v = (v * tau + c[m]).eval();
  return v;
}

RVector PiecewiseTaylor::end_value() const {
  const auto& c = coeffs.back();
  RVector v = c.back();
  for (std::size_t m = c.size() - 1; m-- > 0;) v = (v * width + c[m]).eval();
  return v;
}

PiecewiseTaylor build_piecewise_taylor(const ODESystem& sys, const RVector& y_start, double t_start, double width,
                                       unsigned segments, unsigned r) {
  if (segments == 0) throw InvalidArgument("build_piecewise_taylor: need at least one segment");
  PiecewiseTaylor pt;
  pt.start = t_start;
  pt.width = width;
  RVector y = y_start;
  for (unsigned k = 0; k < segments; ++k) {
    pt.coeffs.push_back(taylor_coefficients(sys, y, r));
    y = pt.end_value();
  }
  return pt;
}

MeanResult QuantumMeanEstimator::estimate(const std::vector<double>& g, std::uint64_t stream) {
  QaeConfig cfg = cfg_;
  cfg.seed = cfg_.seed + stream * 1000003ULL;
  const MeanEstimate m = estimate_mean(g, cfg);
  const double pad = static_cast<double>(m.n_padded) / static_cast<double>(m.n_samples);
  const double half_width = 2.0 * std::numbers::pi / std::ldexp(1.0, static_cast<int>(cfg.n_phase));
  return {m.mean, half_width * pad, m.estimate.y, m.total_qubits};
}

MeanResult ExactMeanEstimator::estimate(const std::vector<double>& g, std::uint64_t) {
  if (g.empty()) throw InvalidArgument("ExactMeanEstimator: no samples");
  return {std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size()), 0.0, 0, 0};
}

RVector propagate_step(const ODESystem& sys, const RVector& y_prev, unsigned i, const TimeMesh& mesh, unsigned r,
                       MeanEstimator& estimator, StepRecord* record) {
  mesh.validate();
  if (i >= mesh.n_primary) throw InvalidArgument("propagate_step: interval index out of range");
  for (Eigen::Index c = 0; c < y_prev.size(); ++c)
    if (!std::isfinite(y_prev[c])) throw InvalidArgument("propagate_step: non-finite state");

  const double t0 = mesh.node(i, 0);
  const double delta = mesh.node(i, mesh.n_secondary) - t0;
  const double h = delta / mesh.n_secondary;
  const PiecewiseTaylor alpha = build_piecewise_taylor(sys, y_prev, t0, h, mesh.n_secondary, r);

  const auto dim = static_cast<Eigen::Index>(sys.dimension());
  std::vector<RVector> f_samples;
  for (unsigned k = 0; k < mesh.n_secondary; ++k) f_samples.push_back(sys.eval(alpha.eval(t0 + (k + 0.5) * h)));

  RVector y = y_prev;
  StepRecord rec;
  rec.interval = i;
  for (Eigen::Index c = 0; c < dim; ++c) {
    std::vector<double> s(mesh.n_secondary);
    for (unsigned k = 0; k < mesh.n_secondary; ++k) s[k] = f_samples[k][c];
    const Rescaled rs = rescale_to_unit(s);
    const std::uint64_t stream = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(dim) +
                                 static_cast<std::uint64_t>(c);
    const MeanResult m = estimator.estimate(rs.g, stream);
    y[c] = y_prev[c] + delta * rs.params.from_unit(m.mean);
    rec.g_means.push_back(m.mean);
    rec.rescale.push_back(rs.params);
    rec.uncertainty.push_back(rs.params.degenerate ? 0.0 : delta * (rs.params.hi - rs.params.lo) * m.uncertainty);
    rec.outcomes.push_back(m.outcome);
    rec.qubits = std::max(rec.qubits, m.qubits);
  }
  rec.y = y;
  if (record != nullptr) *record = std::move(rec);
  return y;
}

IntegratorSolution integrate(const ODESystem& sys, const RVector& y0, const TimeMesh& mesh, unsigned r,
                             MeanEstimator& estimator) {
  mesh.validate();
  if (static_cast<std::size_t>(y0.size()) != sys.dimension()) throw InvalidArgument("integrate: y0 has the wrong size");
  IntegratorSolution sol;
  sol.times.push_back(0.0);
  sol.trajectory.push_back(y0);
  for (unsigned i = 0; i < mesh.n_primary; ++i) {
    StepRecord rec;
    sol.trajectory.push_back(propagate_step(sys, sol.trajectory.back(), i, mesh, r, estimator, &rec));
    sol.times.push_back(mesh.node(i, mesh.n_secondary));
    sol.steps.push_back(std::move(rec));
  }
  return sol;
}

}  // namespace flowq
