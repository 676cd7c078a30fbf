#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "flowq/amplitude_estimation.hpp"
#include "flowq/ode_system.hpp"

namespace flowq {

// [0, T] split into n_primary intervals, each cut into n_secondary pieces.
struct TimeMesh {
  double horizon = 1.0;
  unsigned n_primary = 1;
  unsigned n_secondary = 1;

  void validate() const;
  double primary_length() const { return horizon / n_primary; }
  double secondary_length() const { return horizon / (static_cast<double>(n_primary) * n_secondary); }
  // t_{i,k}; k = n_secondary is the right end of interval i.
  double node(unsigned i, unsigned k) const;
};

struct RescaleParams {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate = false;

  double to_unit(double v) const { return degenerate ? 0.5 : (v - lo) / (hi - lo); }
  // Degenerate parameters return the constant itself, whatever g is.
  double from_unit(double g) const { return degenerate ? lo : lo + g * (hi - lo); }
};

struct Rescaled {
  std::vector<double> g;
  RescaleParams params;
};

// Affine map onto [0, 1] from the sample min/max. Constant samples give
// g = 0.5 everywhere with the degenerate flag set.
Rescaled rescale_to_unit(const std::vector<double>& samples);

// Chained Taylor segments over one primary interval; segment k starts at the
// end value of segment k - 1.
struct PiecewiseTaylor {
  double start = 0.0;
  double width = 0.0;                       // secondary subinterval length
  std::vector<std::vector<RVector>> coeffs; // coeffs[k][m] about segment k's left end

  RVector eval(double t) const;
  RVector end_value() const;
};

PiecewiseTaylor build_piecewise_taylor(const ODESystem& sys, const RVector& y_start, double t_start, double width,
                                       unsigned segments, unsigned r);

struct MeanResult {
  double mean = 0.0;         // estimate of the mean of g
  double uncertainty = 0.0;  // half-width on the g scale
  std::uint64_t outcome = 0;
  unsigned qubits = 0;
};

class MeanEstimator {
 public:
  virtual ~MeanEstimator() = default;
  // `stream` distinguishes independent calls so sampled estimators draw fresh seeds.
  virtual MeanResult estimate(const std::vector<double>& g, std::uint64_t stream) = 0;
};

// Quantum mean estimation through QAE.
class QuantumMeanEstimator : public MeanEstimator {
 public:
  explicit QuantumMeanEstimator(QaeConfig cfg) : cfg_(cfg) {}
  MeanResult estimate(const std::vector<double>& g, std::uint64_t stream) override;

 private:
  QaeConfig cfg_;
};

// Plain arithmetic mean; isolates the quantum error from the quadrature.
class ExactMeanEstimator : public MeanEstimator {
 public:
  MeanResult estimate(const std::vector<double>& g, std::uint64_t stream) override;
};

struct StepRecord {
  unsigned interval = 0;
  RVector y;                              // y_i
  std::vector<double> g_means;            // estimated mean of g per component
  std::vector<RescaleParams> rescale;     // per component
  std::vector<double> uncertainty;        // reported bound on |y_i - y_i(exact mean)| per component
  std::vector<std::uint64_t> outcomes;    // QAE outcome per component
  unsigned qubits = 0;
};

// Integrates over primary interval i: samples f(alpha(t)) at the midpoints
// of the secondary subintervals, rescales each component to [0, 1],
// estimates the mean, and returns y_{i-1} + (interval length) * mean.
RVector propagate_step(const ODESystem& sys, const RVector& y_prev, unsigned i, const TimeMesh& mesh, unsigned r,
                       MeanEstimator& estimator, StepRecord* record = nullptr);

struct IntegratorSolution {
  std::vector<double> times;       // t_0 .. t_n (primary nodes)
  std::vector<RVector> trajectory; // y_0 .. y_n
  std::vector<StepRecord> steps;
};

IntegratorSolution integrate(const ODESystem& sys, const RVector& y0, const TimeMesh& mesh, unsigned r,
                             MeanEstimator& estimator);

}  // namespace flowq
