#include "flowq/qade.hpp"

#include <cmath>
#include <string>

#include "flowq/errors.hpp"

namespace flowq {

BasisSet::BasisSet(BasisFamily family, unsigned degree) : family_(family), degree_(degree) {
  if (degree > 16) throw InvalidArgument("BasisSet: degree above 16");
}

BasisFamily parse_basis_family(const std::string& name) {
  if (name == "monomial") return BasisFamily::Monomial;
  if (name == "chebyshev") return BasisFamily::Chebyshev;
  throw InvalidArgument("unknown basis family '" + name + "' (expected monomial or chebyshev)");
}

double BasisSet::eval(std::size_t m, unsigned k, double x) const {
  if (m > degree_) throw InvalidArgument("BasisSet: index beyond degree");
  if (k > kMaxDerivative) throw InvalidArgument("BasisSet: derivative order above " + std::to_string(kMaxDerivative));
  if (family_ == BasisFamily::Monomial) {
    if (k > m) return 0.0;
    double c = 1.0;
    for (unsigned i = 0; i < k; ++i) c *= static_cast<double>(m - i);
    return c * std::pow(x, static_cast<double>(m - k));
  }
  // d^j T_{i+1} = 2y d^j T_i + 2j d^{j-1} T_i - d^j T_{i-1}, then the chain rule gives 2^k.
  const double y = 2.0 * x - 1.0;
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(k + 1, 0.0));
  t[0][0] = 1.0;
  if (m >= 1) {
    t[1][0] = y;
    if (k >= 1) t[1][1] = 1.0;
  }
  for (std::size_t i = 1; i < m; ++i)
    for (unsigned j = 0; j <= k; ++j)
      t[i + 1][j] = 2.0 * y * t[i][j] + (j > 0 ? 2.0 * j * t[i][j - 1] : 0.0) - t[i - 1][j];
  return std::ldexp(t[m][k], static_cast<int>(k));
}

ContinuousQuadraticLoss assemble_loss(const FunctionalResidual& problem, const BasisSet& basis) {
  if (problem.n_fields == 0) throw InvalidArgument("assemble_loss: need at least one field");
  const std::size_t nb = basis.size();
  const auto nw = static_cast<Eigen::Index>(problem.n_fields * nb);
  ContinuousQuadraticLoss loss{RMatrix::Zero(nw, nw), RVector::Zero(nw), 0.0};
  for (std::size_t e = 0; e < problem.equations.size(); ++e) {
    const auto& eq = problem.equations[e];
    if (eq.samples.empty()) throw InvalidArgument("assemble_loss: equation " + std::to_string(e) + " has no samples");
    for (const auto& term : eq.terms) {
      if (term.field >= problem.n_fields) throw InvalidArgument("assemble_loss: term refers to an unknown field");
      if (term.order > BasisSet::kMaxDerivative) throw InvalidArgument("assemble_loss: derivative order too high");
    }
    for (double x : eq.samples) {
      RVector hx = RVector::Zero(nw);
      for (const auto& term : eq.terms) {
        const double c = term.coef ? term.coef(x) : 1.0;
        for (std::size_t m = 0; m < nb; ++m)
          hx[static_cast<Eigen::Index>(term.field * nb + m)] += c * basis.eval(m, term.order, x);
      }
      const double b = eq.inhomogeneity ? eq.inhomogeneity(x) : 0.0;
      loss.j += hx * hx.transpose();
      loss.h += 2.0 * b * hx;
      loss.constant += b * b;
    }
  }
  return loss;
}

SpinEncoding SpinEncoding::uniform(std::size_t weights, unsigned spins, double scale, double center) {
  return {std::vector<double>(weights, center), std::vector<double>(weights, scale),
          std::vector<unsigned>(weights, spins)};
}

void SpinEncoding::validate() const {
  if (center.size() != scale.size() || center.size() != n_spins.size())
    throw InvalidArgument("SpinEncoding: center, scale and n_spins must have equal length");
  for (std::size_t i = 0; i < scale.size(); ++i) {
    if (!(scale[i] > 0.0)) throw InvalidArgument("SpinEncoding: scale must be positive");
    if (n_spins[i] == 0) throw InvalidArgument("SpinEncoding: each weight needs at least one spin");
  }
}

std::size_t SpinEncoding::total_spins() const {
  std::size_t n = 0;
  for (unsigned s : n_spins) n += s;
  return n;
}

RMatrix SpinEncoding::spin_matrix() const {
  validate();
  RMatrix s = RMatrix::Zero(static_cast<Eigen::Index>(center.size()), static_cast<Eigen::Index>(total_spins()));
  Eigen::Index col = 0;
  for (std::size_t w = 0; w < center.size(); ++w)
    for (unsigned a = 1; a <= n_spins[w]; ++a) s(static_cast<Eigen::Index>(w), col++) = std::ldexp(scale[w], -static_cast<int>(a));
  return s;
}

RVector SpinEncoding::decode(const Spins& spins) const {
  if (spins.size() != total_spins()) throw InvalidArgument("SpinEncoding::decode: wrong spin count");
  RVector v(static_cast<Eigen::Index>(spins.size()));
  for (std::size_t i = 0; i < spins.size(); ++i) v[static_cast<Eigen::Index>(i)] = spins[i];
  RVector c(static_cast<Eigen::Index>(center.size()));
  for (std::size_t i = 0; i < center.size(); ++i) c[static_cast<Eigen::Index>(i)] = center[i];
  return c + spin_matrix() * v;
}

IsingProblem spin_encode(const ContinuousQuadraticLoss& loss, const SpinEncoding& enc) {
  enc.validate();
  if (static_cast<Eigen::Index>(enc.center.size()) != loss.h.size())
    throw InvalidArgument("spin_encode: encoding and loss disagree on the number of weights");
  const RMatrix s = enc.spin_matrix();
  RVector c(static_cast<Eigen::Index>(enc.center.size()));
  for (std::size_t i = 0; i < enc.center.size(); ++i) c[static_cast<Eigen::Index>(i)] = enc.center[i];
  const RMatrix jsym = 0.5 * (loss.j + loss.j.transpose());
  return IsingProblem::from_quadratic(s.transpose() * jsym * s, s.transpose() * (loss.h + 2.0 * jsym * c),
                                      c.dot(jsym * c) + loss.h.dot(c) + loss.constant);
}

Reconstruction decode_and_reconstruct(const Spins& spins, const SpinEncoding& enc, const BasisSet& basis,
                                      const ContinuousQuadraticLoss& loss) {
  Reconstruction r;
  r.weights = enc.decode(spins);
  r.residual = loss.eval(r.weights);
  const RVector w = r.weights;
  r.field = [w, basis](std::size_t field, unsigned k, double x) {
    double acc = 0.0;
    for (std::size_t m = 0; m < basis.size(); ++m)
      acc += w[static_cast<Eigen::Index>(field * basis.size() + m)] * basis.eval(m, k, x);
    return acc;
  };
  return r;
}

ZoomResult zoom_iterate(const FunctionalResidual& problem, const BasisSet& basis, const SpinEncoding& enc0,
                        unsigned epochs, double shrink, const IsingSolver& solver) {
  if (epochs == 0) throw InvalidArgument("zoom_iterate: epochs must be >= 1");
  if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("zoom_iterate: shrink must lie in (0, 1)");
  const ContinuousQuadraticLoss loss = assemble_loss(problem, basis);
  SpinEncoding enc = enc0;
  ZoomResult out;
  for (unsigned e = 0; e < epochs; ++e) {
    const IsingProblem ising = spin_encode(loss, enc);
    const IsingSolution sol = solver.solve(ising);
    ZoomEpoch ep;
    ep.encoding = enc;
    ep.weights = enc.decode(sol.spins);
    ep.residual = loss.eval(ep.weights);
    ep.energy = sol.energy;
    if (e == 0 || ep.residual < out.residual) {
      out.residual = ep.residual;
      out.weights = ep.weights;
    }
    ep.best_residual = out.residual;
    for (std::size_t i = 0; i < enc.center.size(); ++i) {
      enc.center[i] = ep.weights[static_cast<Eigen::Index>(i)];
      enc.scale[i] *= shrink;
    }
    out.epochs.push_back(std::move(ep));
  }
  return out;
}

}  // namespace flowq
