#include "flowq/ode_system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowq/errors.hpp"

namespace flowq {

ODESystem::ODESystem(std::size_t dimension, unsigned max_degree)
    : terms_(dimension), max_degree_(max_degree) {
  if (dimension == 0) throw InvalidArgument("ODESystem: dimension must be >= 1");
}

void ODESystem::add_term(std::size_t component, double coef, std::vector<unsigned> vars) {
  if (component >= terms_.size()) throw InvalidArgument("ODESystem: component out of range");
  if (!std::isfinite(coef)) throw InvalidArgument("ODESystem: non-finite coefficient");
  if (vars.size() > max_degree_)
    throw InvalidArgument("ODESystem: term degree " + std::to_string(vars.size()) + " exceeds the cap " +
                          std::to_string(max_degree_));
  for (unsigned v : vars)
    if (v >= terms_.size()) throw InvalidArgument("ODESystem: variable index out of range");
  std::sort(vars.begin(), vars.end());
  terms_[component].push_back({coef, std::move(vars)});
}

unsigned ODESystem::degree() const {
  std::size_t d = 0;
  for (const auto& row : terms_)
    for (const auto& m : row) d = std::max(d, m.vars.size());
  return static_cast<unsigned>(d);
}

RVector ODESystem::eval(const RVector& y) const {
  if (static_cast<std::size_t>(y.size()) != terms_.size()) throw InvalidArgument("ODESystem::eval: size mismatch");
  RVector out = RVector::Zero(y.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    double acc = 0.0;
    for (const auto& m : terms_[i]) {
      double p = m.coef;
      for (unsigned v : m.vars) p *= y[v];
      acc += p;
    }
    out[static_cast<Eigen::Index>(i)] = acc;
  }
  return out;
}

ODESystem ODESystem::linear(const RMatrix& a, const RVector& b) {
  if (a.rows() != a.cols()) throw InvalidArgument("ODESystem::linear: A must be square");
  if (b.size() != 0 && b.size() != a.rows()) throw InvalidArgument("ODESystem::linear: b has the wrong size");
  ODESystem sys(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (b.size() != 0 && b[i] != 0.0) sys.add_term(static_cast<std::size_t>(i), b[i], {});
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0) sys.add_term(static_cast<std::size_t>(i), a(i, j), {static_cast<unsigned>(j)});
  }
  return sys;
}

Scheme parse_scheme(const std::string& name) {
  if (name == "central") return Scheme::Central;
  if (name == "upwind") return Scheme::Upwind;
  throw InvalidArgument("unsupported spatial scheme '" + name + "' (expected central or upwind)");
}

ODESystem discretize_pde(const FluxSpec& flux, const Grid1D& grid, Scheme scheme) {
  const std::size_t n = grid.points;
  if (n < 3) throw InvalidArgument("discretize_pde: need at least 3 grid points");
  if (!(grid.length > 0.0)) throw InvalidArgument("discretize_pde: grid length must be positive");
  const double dx = grid.dx();
  ODESystem sys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<unsigned>(i);
    const auto l = static_cast<unsigned>((i + n - 1) % n);
    const auto r = static_cast<unsigned>((i + 1) % n);
    if (flux.diffusion != 0.0) {
      const double k = flux.diffusion / (dx * dx);
      sys.add_term(i, -2.0 * k, {c});
      sys.add_term(i, k, {l});
      sys.add_term(i, k, {r});
    }
    // First-derivative stencil as (weight, index) pairs.
    auto derivative = [&](double coef) -> std::vector<std::pair<double, unsigned>> {
      if (scheme == Scheme::Central) return {{1.0 / (2.0 * dx), r}, {-1.0 / (2.0 * dx), l}};
      if (coef >= 0.0) return {{1.0 / dx, c}, {-1.0 / dx, l}};
      return {{1.0 / dx, r}, {-1.0 / dx, c}};
    };
    if (flux.advection != 0.0)
      for (auto [w, j] : derivative(flux.advection)) sys.add_term(i, -flux.advection * w, {j});
    if (flux.burgers != 0.0)
      for (auto [w, j] : derivative(flux.burgers)) sys.add_term(i, -flux.burgers * w, {c, j});
  }
  const char* scheme_name = scheme == Scheme::Central ? "central" : "upwind";
  sys.provenance = "pde, " + std::string(scheme_name) + ", " + std::to_string(n) + " points";
  return sys;
}

std::vector<RVector> taylor_coefficients(const ODESystem& sys, const RVector& y, unsigned r) {
  if (r == 0 || r > kMaxTaylorOrder)
    throw InvalidArgument("taylor_coefficients: order must be in 1.." + std::to_string(kMaxTaylorOrder));
  const std::size_t dim = sys.dimension();
  if (static_cast<std::size_t>(y.size()) != dim) throw InvalidArgument("taylor_coefficients: size mismatch");

  std::vector<RVector> c{y};
  std::vector<double> prod;
  std::vector<double> next;
  for (unsigned k = 0; k < r; ++k) {
    // k-th series coefficient of f(y(t)) from the known c_0..c_k.
    RVector fk = RVector::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      double acc = 0.0;
      for (const auto& m : sys.terms()[i]) {
        prod.assign(k + 1, 0.0);
        prod[0] = m.coef;
        for (unsigned v : m.vars) {
          next.assign(k + 1, 0.0);
          for (unsigned a = 0; a <= k; ++a)
            for (unsigned b = 0; a + b <= k; ++b) next[a + b] += prod[a] * c[b][v];
          prod.swap(next);
        }
        acc += prod[k];
      }
      fk[static_cast<Eigen::Index>(i)] = acc;
    }
    c.push_back(fk / static_cast<double>(k + 1));
  }
  return c;
}

}  // namespace flowq
