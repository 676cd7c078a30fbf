#include "flowq/harness/runners.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>

#include "flowq/amplitude_estimation.hpp"
#include "flowq/copies.hpp"
#include "flowq/encodings.hpp"
#include "flowq/gates.hpp"
#include "flowq/harness/sweep.hpp"
#include "flowq/integrator.hpp"
#include "flowq/ising.hpp"
#include "flowq/oracles.hpp"
#include "flowq/qade.hpp"
#include "flowq/qlbm.hpp"
#include "flowq/qrk.hpp"

#ifndef FLOWQ_VERSION
#define FLOWQ_VERSION "0.0.0"
#endif

namespace flowq::harness {

namespace {

using std::int64_t;
using std::uint64_t;

constexpr double kHuge = 1e12;

RVector to_rvector(const std::vector<double>& v) {
  RVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

RMatrix to_rmatrix(const std::vector<std::vector<double>>& rows, const std::string& what) {
  const std::size_t cols = rows.front().size();
  if (cols == 0) throw SchemaError(what + ": rows must be non-empty");
  RMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw SchemaError(what + ": rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

IsingSolver read_solver(Params& p, uint64_t seed) {
  IsingSolver s;
  s.method = p.choice("solver", "exhaustive", {"exhaustive", "annealing"}) == "annealing" ? IsingMethod::Annealing
                                                                                          : IsingMethod::Exhaustive;
  s.schedule.reads = static_cast<unsigned>(p.integer("reads", 32, 1, 100000));
  s.schedule.sweeps = static_cast<unsigned>(p.integer("sweeps", 1000, 1, 10'000'000));
  s.seed = seed;
  return s;
}

// ------------------------------------------------------------------ encode

RunResult run_encode(const Json& params, uint64_t, bool oracle_check) {
  Params p(params, "encode");
  const std::string mode = p.choice("mode", std::nullopt, {"amplitude", "basis", "basis_to_amplitude", "block"});
  RunResult out;
  out.metrics["mode"] = mode;

  if (mode == "amplitude") {
    const auto x = p.numbers("vector", std::nullopt, 1);
    p.finish();
    const AmplitudeEncoding enc = amplitude_encode(x);
    out.data = CsvTable({"index", "pattern", "input", "amplitude", "probability"});
    const unsigned w = enc.state.num_qubits();
    for (uint64_t i = 0; i < enc.state.dimension(); ++i) {
      const Complex a = enc.state.amplitude(i);
      out.data.add_row({i, qubit_pattern(i, w), i < x.size() ? Cell{x[i]} : Cell{0.0}, a.real(), std::norm(a)});
    }
    const CVector back = enc.norm * amplitude_decode(enc.state, enc.length);
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      err = std::max(err, std::abs(back[static_cast<Eigen::Index>(i)] - x[i]));
    out.metrics["qubits"] = w;
    out.metrics["norm"] = enc.norm;
    out.metrics["max_error"] = err;
    if (oracle_check && err > 1e-10 * std::max(1.0, enc.norm))
      out.violations.push_back("amplitude round trip error " + format_number(err));
  } else if (mode == "basis") {
    const std::string flavor_name = p.choice("flavor", "binary", {"binary", "fixed_point", "unary", "one_hot"});
    BasisEncoding enc;
    enc.flavor = flavor_name == "binary"        ? BasisFlavor::Binary
                 : flavor_name == "fixed_point" ? BasisFlavor::FixedPoint
                 : flavor_name == "unary"       ? BasisFlavor::Unary
                                                : BasisFlavor::OneHot;
    enc.width = static_cast<unsigned>(p.integer("width", 4, 1, 62));
    enc.scale = p.number("scale", 1.0, 1e-300, kHuge);
    const double value = p.number("value", std::nullopt, -kHuge, kHuge);
    p.finish();
    const uint64_t index = basis_encode(value, enc);
    const double decoded = basis_decode(index, enc);
    out.data = CsvTable({"value", "index", "pattern", "decoded"});
    out.data.add_row({value, index, qubit_pattern(index, enc.width), decoded});
    out.metrics["qubits"] = enc.width;
    out.metrics["index"] = index;
    out.metrics["decoded"] = decoded;
    out.metrics["max_error"] = std::abs(decoded - value);
    if (oracle_check && enc.flavor != BasisFlavor::FixedPoint && decoded != value)
      out.violations.push_back("basis round trip changed the value");
  } else if (mode == "basis_to_amplitude") {
    const auto d = p.numbers("vector", std::nullopt, 1);
    const auto psi_width = static_cast<unsigned>(p.integer("psi_width", 0, 0, 16));
    p.finish();
    const BasisToAmplitudeResult r = basis_to_amplitude(d, psi_width);
    double sum2 = 0.0;
    for (double v : d) sum2 += v * v;
    const double expected = sum2 / static_cast<double>(d.size());
    const double norm = std::sqrt(sum2);
    out.data = CsvTable({"index", "d", "amplitude", "expected_amplitude"});
    double amp_err = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      const double a = r.state.amplitude(j).real();
      const double e = d[j] / norm;
      amp_err = std::max(amp_err, std::abs(a - e));
      out.data.add_row({static_cast<uint64_t>(j), d[j], a, e});
    }
    out.metrics["qubits"] = r.total_qubits;
    out.metrics["success_probability"] = r.success_probability;
    out.metrics["expected_probability"] = expected;
    out.metrics["max_error"] = amp_err;
    if (oracle_check && psi_width == 0) {
      if (std::abs(r.success_probability - expected) > 1e-12)
        out.violations.push_back("success probability differs from sum d^2 / N");
      if (amp_err > 1e-10) out.violations.push_back("post-selected amplitudes not proportional to d");
    }
  } else {
    const RMatrix a = to_rmatrix(p.rows("matrix", std::nullopt), "encode.matrix");
    const CMatrix ac = a.cast<Complex>();
    const double alpha = p.number("alpha", spectral_norm(ac), 0.0, kHuge);
    p.finish();
    const BlockEncoding be = block_encode(ac, alpha);
    const CMatrix back = extract_block(be);
    out.data = CsvTable({"row", "col", "a", "extracted"});
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c)
        out.data.add_row({static_cast<int64_t>(r), static_cast<int64_t>(c), a(r, c), back(r, c).real()});
    const double err = (back - ac).cwiseAbs().maxCoeff();
    out.metrics["qubits"] = be.system_qubits + 1;
    out.metrics["norm"] = alpha;
    out.metrics["max_error"] = err;
    if (oracle_check && err > 1e-10) out.violations.push_back("block extraction error " + format_number(err));
  }
  return out;
}

// --------------------------------------------------------------------- qae

RunResult run_qae(const Json& params, uint64_t seed, bool oracle_check) {
  Params p(params, "qae");
  const double a = p.number("a", std::nullopt, 0.0, 1.0);
  const auto n_phase = static_cast<unsigned>(p.integer("n_phase", 6, 1, 12));
  const bool sampled = p.choice("mode", "exact", {"exact", "sampled"}) == "sampled";
  const auto reps = static_cast<unsigned>(p.integer("repetitions", 1, 1, 999));
  p.finish();
  if (reps % 2 == 0) throw SchemaError("qae.repetitions: must be odd");

  const double theta = std::asin(std::sqrt(a));
  const GroverOperator g = build_grover(ry_matrix(2.0 * theta), [](uint64_t s) { return s == 1; });
  AmplitudeEstimate est;
  if (sampled && reps > 1)
    est = qae_median(g, n_phase, reps, seed);
  else
    est = qae(g, n_phase, sampled ? QaeMode::Sampled : QaeMode::ExactDistribution, seed);

  RunResult out;
  const double bound = 2.0 * std::numbers::pi / std::ldexp(1.0, static_cast<int>(n_phase));
  const double err = std::abs(est.a_hat - a);
  out.metrics = {{"a", a},
                 {"a_hat", est.a_hat},
                 {"y", est.y},
                 {"error", err},
                 {"error_bound", bound},
                 {"n_phase", n_phase},
                 {"qubits", n_phase + 1},
                 {"repetitions", est.repetitions},
                 {"failure_bound", est.failure_bound}};
  out.data = CsvTable({"y", "probability", "estimate"});
  for (std::size_t y = 0; y < est.distribution.size(); ++y)
    out.data.add_row({static_cast<uint64_t>(y), est.distribution[y], estimate_from_outcome(y, n_phase)});
  if (!est.samples.empty()) out.details["samples"] = est.samples;
  if (oracle_check && !sampled && err > bound)
    out.violations.push_back("modal estimate outside 2 pi / 2^n_phase");
  return out;
}

// --------------------------------------------------------------- integrate

RunResult run_integrate(const Json& params, uint64_t seed, bool oracle_check) {
  Params p(params, "integrate");
  const std::string problem = p.choice("problem", "decay", {"decay", "linear", "pde"});
  TimeMesh mesh;
  mesh.horizon = p.number("horizon", 1.0, 1e-12, kHuge);
  mesh.n_primary = static_cast<unsigned>(p.integer("n_primary", 4, 1, 10000));
  mesh.n_secondary = static_cast<unsigned>(p.integer("n_secondary", 4, 1, 4096));
  const auto r = static_cast<unsigned>(p.integer("r", 2, 1, kMaxTaylorOrder));
  const bool quantum = p.choice("estimator", "quantum", {"quantum", "exact"}) == "quantum";
  QaeConfig qcfg;
  qcfg.n_phase = static_cast<unsigned>(p.integer("n_phase", 7, 1, 12));
  qcfg.mode = p.choice("mode", "exact", {"exact", "sampled"}) == "sampled" ? QaeMode::Sampled
                                                                           : QaeMode::ExactDistribution;
  qcfg.repetitions = static_cast<unsigned>(p.integer("repetitions", 1, 1, 999));
  qcfg.seed = seed;

  std::optional<ODESystem> sys;
  RVector y0;
  std::optional<double> decay_rate;
  if (problem == "decay") {
    const double rate = p.number("rate", 1.0, -kHuge, kHuge);
    y0 = RVector::Constant(1, p.number("y0", 1.0, -kHuge, kHuge));
    RMatrix a(1, 1);
    a(0, 0) = -rate;
    sys = ODESystem::linear(a);
    decay_rate = rate;
  } else if (problem == "linear") {
    const RMatrix a = to_rmatrix(p.rows("a", std::nullopt), "integrate.a");
    if (a.rows() != a.cols()) throw SchemaError("integrate.a: must be square");
    const RVector b = to_rvector(p.numbers("b", std::vector<double>(static_cast<std::size_t>(a.rows()), 0.0)));
    y0 = to_rvector(p.numbers("y0", std::nullopt));
    if (b.size() != a.rows() || y0.size() != a.rows()) throw SchemaError("integrate: a, b and y0 sizes disagree");
    sys = ODESystem::linear(a, b);
  } else {
    FluxSpec flux{p.number("diffusion", 0.0, 0.0, kHuge), p.number("advection", 0.0, -kHuge, kHuge),
                  p.number("burgers", 0.0, -kHuge, kHuge)};
    Grid1D grid{static_cast<std::size_t>(p.integer("points", 8, 3, 256)), p.number("length", 1.0, 1e-12, kHuge)};
    const Scheme scheme = parse_scheme(p.choice("scheme", "central", {"central", "upwind"}));
    const double offset = p.number("offset", 1.0, -kHuge, kHuge);
    const double amplitude = p.number("amplitude", 0.5, -kHuge, kHuge);
    sys = discretize_pde(flux, grid, scheme);
    y0.resize(static_cast<Eigen::Index>(grid.points));
    for (std::size_t j = 0; j < grid.points; ++j)
      y0[static_cast<Eigen::Index>(j)] =
          offset + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid.points));
  }
  p.finish();

  QuantumMeanEstimator qest(qcfg);
  ExactMeanEstimator eest;
  MeanEstimator& est = quantum ? static_cast<MeanEstimator&>(qest) : eest;
  const IntegratorSolution sol = integrate(*sys, y0, mesh, r, est);

  // RK4 reference on a 16x finer secondary mesh.
  const unsigned sub = mesh.n_secondary * 16;
  const double dt_ref = mesh.primary_length() / sub;
  const oracle::ReferenceSolution ref = oracle::rk4_integrate(*sys, y0, dt_ref, mesh.n_primary * sub);

  RunResult out;
  out.data = CsvTable({"step", "t", "component", "y", "reference", "delta", "g_mean", "uncertainty", "outcome"});
  double max_err = 0.0, final_err = 0.0;
  unsigned qubits = 0;
  for (std::size_t i = 0; i < sol.trajectory.size(); ++i) {
    const RVector& yr = ref.trajectory[i * sub];
    for (Eigen::Index c = 0; c < y0.size(); ++c) {
      const double reference = decay_rate ? y0[0] * std::exp(-*decay_rate * sol.times[i]) : yr[c];
      const double delta = sol.trajectory[i][c] - reference;
      max_err = std::max(max_err, std::abs(delta));
      if (i + 1 == sol.trajectory.size()) final_err = std::max(final_err, std::abs(delta));
      std::vector<Cell> row = {static_cast<uint64_t>(i), sol.times[i], static_cast<int64_t>(c), sol.trajectory[i][c],
                               reference, delta};
      if (i == 0) {
        row.insert(row.end(), {Cell{}, Cell{}, Cell{}});
      } else {
        const StepRecord& rec = sol.steps[i - 1];
        const auto ci = static_cast<std::size_t>(c);
        row.insert(row.end(), {rec.g_means[ci], rec.uncertainty[ci], rec.outcomes[ci]});
        qubits = std::max(qubits, rec.qubits);
      }
      out.data.add_row(std::move(row));
    }
  }
  out.metrics = {{"y_final", sol.trajectory.back()[0]},
                 {"final_error", final_err},
                 {"max_error", max_err},
                 {"steps", mesh.n_primary},
                 {"n_phase", qcfg.n_phase},
                 {"qubits", qubits},
                 {"estimator", quantum ? "quantum" : "exact"}};
  for (const auto& y : sol.trajectory)
    for (Eigen::Index c = 0; c < y.size(); ++c)
      if (!std::isfinite(y[c])) {
        if (oracle_check) out.violations.push_back("trajectory is not finite");
        return out;
      }
  return out;
}

// ------------------------------------------------------------------ copies

QuadraticMap read_map(Params& p) {
  const auto n = static_cast<std::size_t>(p.integer("n_vars", std::nullopt, 1, 8));
  QuadraticMap map(n);
  for (const auto& t : p.rows("terms", std::nullopt)) {
    if (t.size() != 4) throw SchemaError("copies.terms: each term is [alpha, k, l, value]");
    for (int i = 0; i < 3; ++i)
      if (t[i] < 0 || t[i] != std::floor(t[i]) || t[i] > static_cast<double>(n))
        throw SchemaError("copies.terms: indices must be integers in [0, n_vars]");
    map.set(static_cast<std::size_t>(t[0]), static_cast<std::size_t>(t[1]), static_cast<std::size_t>(t[2]), t[3]);
  }
  map.measure_preserving = p.flag("measure_preserving", false);
  return map;
}

RunResult run_copies(const Json& params, uint64_t, bool oracle_check) {
  Params p(params, "copies");
  const std::string mode = p.choice("mode", std::nullopt, {"quadratic_map", "euler", "meanfield", "history"});
  RunResult out;
  out.metrics["mode"] = mode;

  if (mode == "quadratic_map" || mode == "euler") {
    const QuadraticMap map = read_map(p);
    const RVector z = to_rvector(p.numbers("z", std::nullopt, 1));
    const double eps = p.number("epsilon", 0.1, 1e-6, 0.2);
    const double dt = mode == "euler" ? p.number("dt", 0.1, 1e-12, kHuge) : 0.0;
    const auto steps = mode == "euler" ? static_cast<unsigned>(p.integer("steps", 4, 1, 1000)) : 1u;
    p.finish();
    if (static_cast<std::size_t>(z.size()) != map.n_vars()) throw SchemaError("copies.z: length must equal n_vars");
    const CVector zc = z.cast<Complex>();
    if (mode == "quadratic_map") {
      const QuadraticMapResult r = apply_quadratic_map(map, zc, eps);
      out.data = CsvTable({"component", "z", "target", "z_out"});
      for (Eigen::Index i = 0; i < z.size(); ++i)
        out.data.add_row({static_cast<int64_t>(i), z[i], r.target[i].real(), r.z_out[i].real()});
      out.metrics["fidelity"] = r.fidelity;
      out.metrics["success_probability"] = r.success_probability;
      out.metrics["nominal_probability"] = eps * eps / 2.0;
      out.metrics["qubits"] = r.qubits;
      out.metrics["copy_budget"] = copy_budget(eps, 1);
      out.metrics["max_error"] = (r.z_out - r.target).cwiseAbs().maxCoeff();
    } else {
      const EulerTrajectory tr = euler_iterate(map, zc, dt, steps, eps);
      out.data = CsvTable({"step", "component", "z", "classical", "delta"});
      CVector zref = zc;
      double max_err = 0.0, min_fid = 1.0;
      for (unsigned s = 0; s <= steps; ++s) {
        if (s > 0) zref = zref + dt * map.apply(zref);
        for (Eigen::Index i = 0; i < z.size(); ++i) {
          const double d = std::abs(tr.z[s][i] - zref[i]);
          max_err = std::max(max_err, d);
          out.data.add_row({static_cast<uint64_t>(s), static_cast<int64_t>(i), tr.z[s][i].real(), zref[i].real(), d});
        }
      }
      for (double f : tr.fidelity) min_fid = std::min(min_fid, f);
      out.metrics["fidelity"] = min_fid;
      out.metrics["copy_budget"] = tr.copy_budget;
      out.metrics["max_error"] = max_err;
      out.metrics["success_probability"] = tr.success_probability.front();
    }
  } else if (mode == "meanfield") {
    const double kappa = p.number("kappa", 1.0, -kHuge, kHuge);
    const double mu = p.number("mu", 0.5, -kHuge, kHuge);
    const RVector x0 = to_rvector(p.numbers("x0", std::vector<double>{1.0, 0.0}));
    const double dt = p.number("dt", 0.01, 1e-12, kHuge);
    const auto steps = static_cast<unsigned>(p.integer("steps", 4, 1, 1000));
    const auto copies = static_cast<unsigned>(p.integer("copies", 4, 2, 6));
    p.finish();
    if (x0.size() != 2 || !(x0.norm() > 0.0)) throw SchemaError("copies.x0: need a non-zero 2-vector");
    const Complex i1(0.0, 1.0);
    const CMatrix id = CMatrix::Identity(2, 2);
    const CMatrix x = pauli_x_matrix(), y = pauli_y_matrix(), zm = pauli_z_matrix();
    auto kron = [](const CMatrix& a, const CMatrix& b) {
      CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
      for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
      return out;
    };
    MeanFieldSystem sys;
    sys.d = 2;
    sys.copies = copies;
    sys.f_pair = -i1 * kappa * (kron(x, x) + kron(zm, zm)) - i1 * mu * (kron(y, id) + kron(id, y));
    const MeanFieldResult r = meanfield_evolve(sys, x0.normalized().cast<Complex>(), dt, steps);
    out.data = CsvTable({"step", "trace_distance"});
    double worst = 0.0;
    for (std::size_t s = 0; s < r.trace_distance.size(); ++s) {
      out.data.add_row({static_cast<uint64_t>(s), r.trace_distance[s]});
      worst = std::max(worst, r.trace_distance[s]);
    }
    out.metrics["max_error"] = worst;
    out.metrics["e_dt"] = r.e_norm * dt;
    out.metrics["qubits"] = copies;
  } else {
    const RMatrix l = to_rmatrix(p.rows("linear", std::nullopt), "copies.linear");
    if (l.rows() != l.cols()) throw SchemaError("copies.linear: must be square");
    const RVector b0 = to_rvector(p.numbers("b0", std::nullopt, 1));
    const double dt = p.number("dt", 0.1, 1e-12, kHuge);
    const auto steps = static_cast<unsigned>(p.integer("steps", 4, 1, 1000));
    p.finish();
    if (b0.size() != l.rows()) throw SchemaError("copies.b0: length must match the linear matrix");
    HistorySpec spec;
    spec.d = static_cast<std::size_t>(l.rows());
    spec.linear = l.cast<Complex>();
    spec.dt = dt;
    spec.copies = 1;
    spec.b.assign(steps + 1, CVector::Zero(l.rows()));
    spec.b[0] = b0.cast<Complex>();
    const HistorySolution sol = solve_history(build_history_system(spec));
    // x_{k+1} = x_k - dt L x_k.
    RVector xr = b0;
    out.data = CsvTable({"step", "component", "history", "euler", "delta"});
    double max_err = 0.0, scale = 1.0;
    for (unsigned k = 0; k <= steps; ++k) {
      if (k > 0) xr = xr - dt * (l * xr);
      scale = std::max(scale, xr.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < xr.size(); ++i) {
        const double d = std::abs(sol.extracted[k][i] - xr[i]);
        max_err = std::max(max_err, d);
        out.data.add_row({static_cast<uint64_t>(k), static_cast<int64_t>(i), sol.extracted[k][i].real(), xr[i], d});
      }
    }
    out.metrics["max_error"] = max_err;
    out.metrics["blocks"] = nonzero_blocks(build_history_system(spec));
    if (oracle_check && max_err > 1e-12 * scale)
      out.violations.push_back("history solution differs from classical Euler");
  }
  return out;
}

// -------------------------------------------------------------------- qade

RunResult run_qade(const Json& params, uint64_t seed, bool oracle_check) {
  Params p(params, "qade");
  const std::string problem = p.choice("problem", "quadratic", {"quadratic", "decay"});
  const BasisFamily family = parse_basis_family(p.choice("basis", "monomial", {"monomial", "chebyshev"}));
  const auto degree = static_cast<unsigned>(p.integer("degree", 2, 0, 8));
  const auto spins = static_cast<unsigned>(p.integer("spins", 3, 1, 16));
  const double scale = p.number("scale", 1.0, 1e-300, kHuge);
  const auto center = p.numbers("center", std::vector<double>(degree + 1, 0.0));
  const auto epochs = static_cast<unsigned>(p.integer("epochs", 6, 1, 200));
  const double shrink = p.number("shrink", 0.5, 1e-6, 1.0 - 1e-12);
  const auto samples = static_cast<unsigned>(p.integer("samples", 5, 1, 1000));
  const IsingSolver solver = read_solver(p, seed);
  p.finish();
  if (center.size() != degree + 1) throw SchemaError("qade.center: length must be degree + 1");

  std::vector<double> xs;
  for (unsigned i = 0; i < samples; ++i) xs.push_back(samples == 1 ? 0.5 : static_cast<double>(i) / (samples - 1));
  FunctionalResidual fr;
  auto one = [](double) { return 1.0; };
  oracle::ReferenceSolution ref;
  if (problem == "quadratic") {
    // f'' - 2 = 0, f(0) = 0, f(1) - 1 = 0.
    fr.equations.push_back({{{0, 2, one}}, [](double) { return -2.0; }, xs});
    fr.equations.push_back({{{0, 0, one}}, {}, {0.0}});
    fr.equations.push_back({{{0, 0, one}}, [](double) { return -1.0; }, {1.0}});
    ref = oracle::closed_form("qade_quadratic");
  } else {
    // f' + f = 0, f(0) - 1 = 0.
    fr.equations.push_back({{{0, 1, one}, {0, 0, one}}, {}, xs});
    fr.equations.push_back({{{0, 0, one}}, [](double) { return -1.0; }, {0.0}});
    ref = oracle::closed_form("exp_decay");
  }
  const BasisSet basis(family, degree);
  SpinEncoding enc = SpinEncoding::uniform(degree + 1, spins, scale);
  enc.center = center;
  const ZoomResult z = zoom_iterate(fr, basis, enc, epochs, shrink, solver);

  RunResult out;
  out.data = CsvTable({"epoch", "weight", "center", "scale", "value", "residual", "best_residual"});
  for (std::size_t e = 0; e < z.epochs.size(); ++e) {
    const ZoomEpoch& ep = z.epochs[e];
    for (std::size_t w = 0; w <= degree; ++w)
      out.data.add_row({static_cast<uint64_t>(e), static_cast<uint64_t>(w), ep.encoding.center[w], ep.encoding.scale[w],
                        ep.weights[static_cast<Eigen::Index>(w)], ep.residual, ep.best_residual});
  }
  double field_err = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double x = i / 20.0;
    double f = 0.0;
    for (std::size_t m = 0; m <= degree; ++m) f += z.weights[static_cast<Eigen::Index>(m)] * basis.eval(m, 0, x);
    const double fx = problem == "quadratic" ? ref.value(0.0, x) : ref.value(x, 0.0);
    field_err = std::max(field_err, std::abs(f - fx));
  }
  out.metrics = {{"residual", z.residual},
                 {"max_error", field_err},
                 {"epochs", epochs},
                 {"qubits", enc.total_spins()}};
  out.details["weights"] = std::vector<double>(z.weights.data(), z.weights.data() + z.weights.size());
  (void)oracle_check;
  return out;
}

// --------------------------------------------------------------------- qrk

// R(z) = 1 + z b^T (I - z A)^{-1} 1.
double stability_function(const ButcherTableau& t, double z) {
  const auto s = static_cast<Eigen::Index>(t.stages());
  const RMatrix m = RMatrix::Identity(s, s) - z * t.a;
  const RVector k = oracle::dense_solve(m, RVector::Ones(s)).vector;
  return 1.0 + z * t.b.dot(k);
}

RunResult run_qrk(const Json& params, uint64_t seed, bool oracle_check) {
  Params p(params, "qrk");
  const ButcherTableau tab = ButcherTableau::by_name(
      p.choice("tableau", "implicit_midpoint", {"forward_euler", "backward_euler", "implicit_midpoint", "rk4"}));
  const double rate = p.number("rate", 1.0, -kHuge, kHuge);
  const double u0 = p.number("u0", 1.0, -kHuge, kHuge);
  const double dt = p.number("dt", 0.1, 1e-12, kHuge);
  const bool windowed = p.choice("mode", "windowed", {"windowed", "continuous"}) == "windowed";
  const auto bits = static_cast<unsigned>(p.integer("bits", 6, 1, 12));
  const auto epochs = static_cast<unsigned>(p.integer("epochs", 10, 1, 200));
  const auto k0 = static_cast<int>(p.integer("k0", 3, -30, 50));
  const IsingSolver solver = read_solver(p, seed);
  p.finish();

  RMatrix a(1, 1);
  a(0, 0) = -rate;
  RKStageProblem prob{ODESystem::linear(a), tab, dt, RVector::Constant(1, u0)};
  const double reference = stability_function(tab, -rate * dt) * u0;

  RunResult out;
  double u_next = 0.0;
  if (windowed) {
    const WindowedReport rep = rk_windowed_solve(prob, bits, epochs, solver, k0);
    u_next = rep.u_next[0];
    out.data = CsvTable({"epoch", "variable", "k", "offset", "value", "saturated", "objective"});
    for (std::size_t e = 0; e < rep.epochs.size(); ++e) {
      const WindowedEpoch& ep = rep.epochs[e];
      for (std::size_t v = 0; v < ep.windows.size(); ++v)
        out.data.add_row({static_cast<uint64_t>(e), static_cast<uint64_t>(v), static_cast<int64_t>(ep.windows[v].k),
                          ep.windows[v].d(), ep.z[static_cast<Eigen::Index>(v)],
                          static_cast<uint64_t>(ep.saturated[v] ? 1 : 0), ep.objective});
    }
    out.metrics["objective"] = rep.objective;
    out.metrics["saturated"] = rep.any_saturated;
    out.metrics["qubits"] = bits * (tab.stages() + 1);
  } else {
    const ContinuousRKSolution sol = minimize_rk_residual(build_rk_residual(prob));
    u_next = sol.u_next[0];
    out.data = CsvTable({"variable", "value"});
    for (Eigen::Index v = 0; v < sol.z.size(); ++v) out.data.add_row({static_cast<int64_t>(v), sol.z[v]});
    out.metrics["objective"] = sol.objective;
  }
  out.metrics["u_next"] = u_next;
  out.metrics["reference"] = reference;
  out.metrics["error"] = std::abs(u_next - reference);
  if (oracle_check && !windowed && std::abs(u_next - reference) > 1e-10 * std::max(1.0, std::abs(reference)))
    out.violations.push_back("continuous minimizer differs from the stability function");
  return out;
}

// -------------------------------------------------------------------- qlbm

RunResult run_qlbm(const Json& params, uint64_t, bool oracle_check) {
  Params p(params, "qlbm");
  D1Q2Params lp;
  lp.sites = static_cast<std::size_t>(p.integer("sites", 8, 2, 1 << 16));
  lp.u = p.number("u", 0.0, -1.0, 1.0);
  const auto steps = static_cast<unsigned>(p.integer("steps", 10, 1, 100000));
  const std::string initial = p.choice("initial", "uniform", {"uniform", "gaussian", "values"});
  const double level = p.number("level", 1.0, -kHuge, kHuge);
  const double height = p.number("height", 1.0, -kHuge, kHuge);
  const double center = p.number("center", static_cast<double>(lp.sites) / 2.0, -kHuge, kHuge);
  const double width = p.number("width", 1.5, 1e-12, kHuge);
  std::vector<double> values;
  if (initial == "values") values = p.numbers("values", std::nullopt);
  p.finish();
  if (!is_power_of_two(lp.sites)) throw SchemaError("qlbm.sites: must be a power of two");

  LatticeField phi(static_cast<Eigen::Index>(lp.sites));
  for (Eigen::Index j = 0; j < phi.size(); ++j) {
    if (initial == "uniform") phi[j] = level;
    else if (initial == "gaussian") {
      const double x = (static_cast<double>(j) - center) / width;
      phi[j] = level + height * std::exp(-0.5 * x * x);
    }
  }
  if (initial == "values") {
    if (values.size() != lp.sites) throw SchemaError("qlbm.values: length must equal sites");
    phi = to_rvector(values);
  }
  const QLBMRun run = qlbm_run(phi, lp, steps);

  RunResult out;
  out.data = CsvTable({"step", "site", "phi_quantum", "phi_classical", "delta"});
  double max_delta = 0.0;
  for (std::size_t s = 0; s < run.quantum.size(); ++s)
    for (Eigen::Index j = 0; j < phi.size(); ++j) {
      const double d = run.quantum[s][j] - run.classical[s][j];
      max_delta = std::max(max_delta, std::abs(d));
      out.data.add_row({static_cast<uint64_t>(s), static_cast<int64_t>(j), run.quantum[s][j], run.classical[s][j], d});
    }
  double step_delta = 0.0, mass_drift = 0.0;
  Json per_step = Json::array();
  for (const auto& r : run.reports) {
    step_delta = std::max(step_delta, r.max_delta);
    mass_drift = std::max(mass_drift, std::abs(r.mass_out - r.mass_in));
    per_step.push_back({{"step", r.step},
                        {"collision_probability", r.collision_probability},
                        {"readout_probability", r.readout_probability},
                        {"ledger", r.ledger_readout},
                        {"max_delta", r.max_delta}});
  }
  out.details["steps"] = per_step;
  out.details["norm_ledger_idealized"] = true;
  const double mass0 = phi.sum();
  out.metrics = {{"max_delta", max_delta},
                 {"max_step_delta", step_delta},
                 {"mass_drift", mass_drift},
                 {"collision_probability", run.reports.front().collision_probability},
                 {"qubits", run.reports.front().qubits},
                 {"mcx_count", run.reports.front().mcx_count},
                 {"steps", steps}};
  if (oracle_check) {
    if (step_delta > 1e-8) out.violations.push_back("quantum step differs from classical_lbm_step");
    if (mass_drift > 1e-10 * std::max(1.0, std::abs(mass0))) out.violations.push_back("mass not conserved");
  }
  return out;
}

}  // namespace

const std::vector<std::string>& summary_columns(const std::string& algorithm) {
  static const std::map<std::string, std::vector<std::string>> cols = {
      {"encode", {"mode", "qubits", "norm", "index", "decoded", "success_probability", "expected_probability", "max_error"}},
      {"qae", {"a", "a_hat", "y", "error", "error_bound", "n_phase", "qubits", "repetitions", "failure_bound"}},
      {"integrate", {"estimator", "n_phase", "steps", "qubits", "y_final", "final_error", "max_error"}},
      {"copies",
       {"mode", "qubits", "fidelity", "success_probability", "nominal_probability", "copy_budget", "e_dt", "blocks",
        "max_error"}},
      {"qade", {"epochs", "qubits", "residual", "max_error"}},
      {"qrk", {"qubits", "u_next", "reference", "error", "objective", "saturated"}},
      {"qlbm", {"steps", "qubits", "mcx_count", "collision_probability", "max_delta", "max_step_delta", "mass_drift"}},
      {"sweep", {"algorithm", "points"}},
  };
  auto it = cols.find(algorithm);
  if (it == cols.end()) throw SchemaError("unknown algorithm '" + algorithm + "'");
  return it->second;
}

RunResult run_algorithm(const std::string& algorithm, const Json& params, uint64_t seed, bool oracle_check) {
  if (algorithm == "encode") return run_encode(params, seed, oracle_check);
  if (algorithm == "qae") return run_qae(params, seed, oracle_check);
  if (algorithm == "integrate") return run_integrate(params, seed, oracle_check);
  if (algorithm == "copies") return run_copies(params, seed, oracle_check);
  if (algorithm == "qade") return run_qade(params, seed, oracle_check);
  if (algorithm == "qrk") return run_qrk(params, seed, oracle_check);
  if (algorithm == "qlbm") return run_qlbm(params, seed, oracle_check);
  if (algorithm == "sweep") return run_sweep(params, seed, oracle_check);
  throw SchemaError("unknown algorithm '" + algorithm + "'");
}

Json make_report(const ExperimentConfig& cfg, const RunResult& r) {
  Json metrics = Json::object();
  for (const auto& k : summary_columns(cfg.algorithm))
    if (r.metrics.contains(k)) metrics[k] = r.metrics[k];
  // The output directory says where the files went, not what was run.
  Json echo = config_to_json(cfg);
  echo.erase("output");
  return Json{{"artifact_version", FLOWQ_VERSION},
              {"algorithm", cfg.algorithm},
              {"seed", cfg.seed},
              {"config", echo},
              {"metrics", metrics},
              {"details", r.details},
              {"data_rows", r.data.rows()},
              {"violations", r.violations},
              {"status", r.violations.empty() ? "ok" : "invariant_violation"}};
}

Json make_metadata(const ExperimentConfig& cfg, double wall_seconds) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return Json{{"artifact_version", FLOWQ_VERSION},
              {"algorithm", cfg.algorithm},
              {"seed", cfg.seed},
              {"finished_at", stamp},
              {"wall_time_seconds", wall_seconds}};
}

void write_outputs(const std::string& dir, const ExperimentConfig& cfg, const RunResult& r, double wall_seconds) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (fs::path(dir) / name).string());
    f << text;
  };
  write("report.json", make_report(cfg, r).dump(2) + "\n");
  write("data.csv", r.data.str());
  write("metadata.json", make_metadata(cfg, wall_seconds).dump(2) + "\n");
}

int execute(const ExperimentConfig& cfg, std::ostream& log) {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r = run_algorithm(cfg.algorithm, cfg.params, cfg.seed, cfg.oracle_check);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_outputs(cfg.out_dir, cfg, r, wall);
    if (!r.violations.empty()) {
      for (const auto& v : r.violations) log << "invariant violation: " << v << '\n';
      return kExitInvariant;
    }
    return kExitOk;
  } catch (const SchemaError& e) {
    log << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const InvariantViolation& e) {
    log << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const NotUnitary& e) {
    log << "invariant violation (" << cfg.algorithm << "): " << e.what() << '\n';
    return kExitInvariant;
  } catch (const NotHermitian& e) {
    log << "invariant violation (" << cfg.algorithm << "): " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    log << "error (" << cfg.algorithm << "): " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace flowq::harness
