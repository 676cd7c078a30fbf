#include "flowq/qlbm.hpp"

#include <cmath>
#include <string>

#include "flowq/errors.hpp"
#include "flowq/gates.hpp"

namespace flowq {

void D1Q2Params::validate() const {
  if (sites < 2 || !is_power_of_two(sites)) throw InvalidArgument("D1Q2Params: sites must be a power of two >= 2");
  if (!(std::abs(u) <= kSoundSpeed2)) throw InvalidArgument("D1Q2Params: |u| must not exceed c_s^2");
  if (!(omega > 0.0 && omega < 2.0)) throw InvalidArgument("D1Q2Params: omega must lie in (0, 2)");
}

unsigned D1Q2Params::position_qubits() const { return ceil_log2(sites); }

double D1Q2Params::equilibrium_factor(int velocity) const {
  const double c = velocity == 0 ? 1.0 : -1.0;
  return kWeight * (1.0 + c * u / kSoundSpeed2);
}

DistributionVector equilibrium(const LatticeField& phi, const D1Q2Params& p) {
  p.validate();
  const auto m = static_cast<Eigen::Index>(p.sites);
  if (phi.size() != m) throw InvalidArgument("equilibrium: field length must equal the site count");
  DistributionVector f(2 * m);
  f.head(m) = p.equilibrium_factor(0) * phi;
  f.tail(m) = p.equilibrium_factor(1) * phi;
  return f;
}

LatticeField zeroth_moment(const DistributionVector& f) {
  const Eigen::Index m = f.size() / 2;
  return f.head(m) + f.tail(m);
}

DistributionVector classical_collide_stream(const DistributionVector& f, const D1Q2Params& p) {
  p.validate();
  const auto m = static_cast<Eigen::Index>(p.sites);
  if (f.size() != 2 * m) throw InvalidArgument("classical_collide_stream: distribution length must be 2M");
  const DistributionVector post = (1.0 - p.omega) * f + p.omega * equilibrium(zeroth_moment(f), p);
  DistributionVector out(2 * m);
  for (Eigen::Index j = 0; j < m; ++j) {
    out[(j + 1) % m] = post[j];
    out[m + (j + m - 1) % m] = post[m + j];
  }
  return out;
}

LatticeField classical_lbm_step(const LatticeField& phi, const D1Q2Params& p) {
  D1Q2Params eq = p;
  eq.omega = 1.0;
  return zeroth_moment(classical_collide_stream(equilibrium(phi, eq), eq));
}

Statevector encode_distribution(const DistributionVector& f) {
  if (f.size() < 4 || !is_power_of_two(static_cast<std::uint64_t>(f.size())))
    throw InvalidArgument("encode_distribution: length must be 2M with M a power of two >= 2");
  const double norm = f.norm();
  if (!(norm > 0.0)) throw InvalidArgument("encode_distribution: zero distribution");
  RegisterLayout layout({{"a", 1}, {"q", ceil_log2(static_cast<std::uint64_t>(f.size()))}});
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  amps.head(f.size()) = f.cast<Complex>() / norm;
  return Statevector(std::move(layout), std::move(amps), norm);
}

DistributionVector decode_distribution(const Statevector& state) {
  const auto n = static_cast<Eigen::Index>(std::uint64_t{1} << state.layout().width("q"));
  return state.norm_ledger() * state.amplitudes().head(n).real();
}

CollisionOperators build_collision(const D1Q2Params& p) {
  p.validate();
  const auto m = static_cast<Eigen::Index>(p.sites);
  CollisionOperators ops;
  ops.a.resize(2 * m);
  ops.a.head(m).setConstant(p.equilibrium_factor(0));
  ops.a.tail(m).setConstant(p.equilibrium_factor(1));
  ops.c1.resize(2 * m);
  ops.c2.resize(2 * m);
  for (Eigen::Index i = 0; i < 2 * m; ++i) {
    const double a = ops.a[i];
    if (!(std::abs(a) <= 1.0)) throw InvalidArgument("build_collision: entry of A outside [-1, 1]");
    const double s = std::sqrt(std::max(0.0, 1.0 - a * a));
    ops.c1[i] = Complex(a, s);
    ops.c2[i] = Complex(a, -s);
  }
  return ops;
}

StepOutcome collide(const Statevector& state, const CollisionOperators& ops) {
  const auto& layout = state.layout();
  const unsigned anc = layout.offset("a");
  const auto q = layout.qubits("q");
  if (static_cast<std::uint64_t>(ops.c1.size()) != (std::uint64_t{1} << q.size()))
    throw InvalidArgument("collide: operator size does not match the q register");
  // Ancilla-selected diagonal over (q, a), ancilla as the top local bit.
  std::vector<unsigned> targets = q;
  targets.push_back(anc);
  CVector phases(2 * ops.c1.size());
  phases << ops.c1, ops.c2;
  Statevector s = apply_unitary(state, hadamard(anc));
  s = apply_unitary(std::move(s), UnitaryOp::diagonal(phases, targets));
  s = apply_unitary(std::move(s), hadamard(anc));
  PostSelection sel = postselect(s, anc, 0);
  return {std::move(sel.state), sel.probability};
}

UnitaryOp streaming_operator(const RegisterLayout& layout) {
  const auto q = layout.qubits("q");
  const std::uint64_t dim = std::uint64_t{1} << q.size();
  const std::uint64_t m = dim / 2;
  std::vector<std::uint64_t> image(dim);
  for (std::uint64_t j = 0; j < m; ++j) {
    image[j] = (j + 1) % m;
    image[m + j] = m + (j + m - 1) % m;
  }
  return UnitaryOp::permutation(std::move(image), q);
}

Statevector stream(const Statevector& state) { return apply_unitary(state, streaming_operator(state.layout())); }

std::size_t streaming_mcx_count(std::size_t sites) { return 2 * ceil_log2(sites); }

Readout macroscopic_readout(const Statevector& state) {
  const auto& layout = state.layout();
  const unsigned anc = layout.offset("a");
  const unsigned vel = layout.offset("q") + layout.width("q") - 1;
  Statevector s = apply_unitary(state, swap_gate(anc, vel));
  s = apply_unitary(std::move(s), hadamard(anc));
  const PostSelection sel = postselect(s, {{anc, 0}, {vel, 0}});
  const auto m = static_cast<Eigen::Index>(std::uint64_t{1} << (layout.width("q") - 1));
  Readout out;
  out.probability = sel.probability;
  out.phi = std::sqrt(2.0) * sel.state.norm_ledger() * sel.state.amplitudes().head(m).real();
  return out;
}

QLBMRun qlbm_run(const LatticeField& phi0, const D1Q2Params& p, unsigned steps) {
  p.validate();
  if (p.omega != 1.0) throw InvalidArgument("qlbm_run: the quantum path requires omega = 1");
  if (steps == 0) throw InvalidArgument("qlbm_run: steps must be >= 1");
  const auto m = static_cast<Eigen::Index>(p.sites);
  if (phi0.size() != m) throw InvalidArgument("qlbm_run: field length must equal the site count");

  const CollisionOperators ops = build_collision(p);
  QLBMRun run;
  run.quantum.push_back(phi0);
  run.classical.push_back(phi0);
  for (unsigned k = 0; k < steps; ++k) {
    const LatticeField& phi = run.quantum.back();
    DistributionVector pre(2 * m);
    pre << phi, phi;
    QLBMStepReport rep;
    rep.step = k + 1;
    const Statevector s0 = encode_distribution(pre);
    rep.ledger_encode = s0.norm_ledger();
    rep.qubits = s0.num_qubits();
    const StepOutcome c = collide(s0, ops);
    rep.collision_probability = c.probability;
    rep.ledger_collide = c.state.norm_ledger();
    const Statevector s2 = stream(c.state);
    const Readout r = macroscopic_readout(s2);
    rep.readout_probability = r.probability;
    rep.ledger_readout = rep.ledger_collide * std::sqrt(r.probability);
    rep.mcx_count = streaming_mcx_count(p.sites);
    const LatticeField expected = classical_lbm_step(phi, p);
    rep.max_delta = (r.phi - expected).cwiseAbs().maxCoeff();
    rep.mass_in = phi.sum();
    rep.mass_out = r.phi.sum();
    run.quantum.push_back(r.phi);
    run.classical.push_back(classical_lbm_step(run.classical.back(), p));
    run.reports.push_back(rep);
  }
  return run;
}

}  // namespace flowq
