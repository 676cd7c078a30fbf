#pragma once

#include <functional>
#include <string>
#include <vector>

#include "flowq/ising.hpp"
#include "flowq/linalg.hpp"

namespace flowq {

enum class BasisFamily { Monomial, Chebyshev };

// Phi_m for m = 0..degree on [0, 1]: x^m, or T_m(2x - 1).
class BasisSet {
 public:
  static constexpr unsigned kMaxDerivative = 4;

  BasisSet(BasisFamily family, unsigned degree);

  BasisFamily family() const { return family_; }
  std::size_t size() const { return degree_ + 1; }
  // d^k Phi_m / dx^k at x. Throws InvalidArgument for k > kMaxDerivative.
  double eval(std::size_t m, unsigned k, double x) const;

 private:
  BasisFamily family_;
  unsigned degree_;
};

BasisFamily parse_basis_family(const std::string& name);

using ScalarFn = std::function<double(double)>;

// sum_terms coef(x) * d^order f_field(x) + inhomogeneity(x) = 0 on `samples`.
struct ResidualTerm {
  std::size_t field = 0;
  unsigned order = 0;
  ScalarFn coef;
};

struct ResidualEquation {
  std::vector<ResidualTerm> terms;
  ScalarFn inhomogeneity;  // empty means zero
  std::vector<double> samples;
};

struct FunctionalResidual {
  std::size_t n_fields = 1;
  std::vector<ResidualEquation> equations;
};

// loss(w) = w^T J w + h^T w + constant, w indexed field-major (n * |basis| + m).
struct ContinuousQuadraticLoss {
  RMatrix j;
  RVector h;
  double constant = 0.0;
  double eval(const RVector& w) const { return w.dot(j * w) + h.dot(w) + constant; }
};

// J = sum H H^T, h = 2 sum H B, constant = sum B^2 over equations and samples.
// Throws InvalidArgument on an equation without samples or a derivative
// order beyond the basis limit.
ContinuousQuadraticLoss assemble_loss(const FunctionalResidual& problem, const BasisSet& basis);

// w_i = c_i + s_i sum_{a=1..n_i} spin_{i,a} / 2^a, spins ordered weight-major with a = 1 first.
struct SpinEncoding {
  std::vector<double> center;
  std::vector<double> scale;
  std::vector<unsigned> n_spins;

  static SpinEncoding uniform(std::size_t weights, unsigned spins, double scale, double center = 0.0);
  void validate() const;
  std::size_t total_spins() const;
  // w = c + S spins.
  RMatrix spin_matrix() const;
  RVector decode(const Spins& spins) const;
};

// energy(spins) == loss(decode(spins)) for every assignment (the loss constant
// is carried into the Ising constant).
IsingProblem spin_encode(const ContinuousQuadraticLoss& loss, const SpinEncoding& enc);

struct Reconstruction {
  RVector weights;
  double residual = 0.0;  // loss(weights)
  // f_n(x) = sum_m w_{nm} Phi_m(x), derivative order k.
  std::function<double(std::size_t field, unsigned k, double x)> field;
};

Reconstruction decode_and_reconstruct(const Spins& spins, const SpinEncoding& enc, const BasisSet& basis,
                                      const ContinuousQuadraticLoss& loss);

struct ZoomEpoch {
  SpinEncoding encoding;   // window used in this epoch
  RVector weights;         // decoded this epoch
  double residual = 0.0;
  double best_residual = 0.0;
  double energy = 0.0;
};

struct ZoomResult {
  RVector weights;  // best across epochs
  double residual = 0.0;
  std::vector<ZoomEpoch> epochs;
};

// Per epoch: solve, then re-center on the decoded weights and multiply every scale by `shrink`.
ZoomResult zoom_iterate(const FunctionalResidual& problem, const BasisSet& basis, const SpinEncoding& enc0,
                        unsigned epochs, double shrink, const IsingSolver& solver);

}  // namespace flowq
