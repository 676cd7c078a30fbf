#include "flowq/ising.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "flowq/errors.hpp"
#include "flowq/rng.hpp"

namespace flowq {

void IsingProblem::validate() const {
  const auto n = fields.size();
  if (couplings.rows() != n || couplings.cols() != n) throw InvalidArgument("IsingProblem: J must be n x n");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (couplings(i, i) != 0.0) throw InvalidArgument("IsingProblem: J must have a zero diagonal");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(couplings(i, j) - couplings(j, i)) > 1e-12 * std::max(1.0, std::abs(couplings(i, j))))
        throw InvalidArgument("IsingProblem: J must be symmetric");
  }
}

double IsingProblem::energy(const Spins& s) const {
  if (s.size() != size()) throw InvalidArgument("IsingProblem::energy: wrong spin count");
  RVector v(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != 1 && s[i] != -1) throw InvalidArgument("IsingProblem::energy: spins must be +1 or -1");
    v[static_cast<Eigen::Index>(i)] = s[i];
  }
  return v.dot(couplings * v) + fields.dot(v) + constant;
}

IsingProblem IsingProblem::from_quadratic(const RMatrix& q, const RVector& h, double constant) {
  if (q.rows() != q.cols() || q.rows() != h.size()) throw InvalidArgument("from_quadratic: size mismatch");
  IsingProblem p;
  p.couplings = 0.5 * (q + q.transpose());
  p.constant = constant + p.couplings.trace();
  p.couplings.diagonal().setZero();
  p.fields = h;
  return p;
}

std::string IsingProblem::edge_list() const {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof buf, "# constant %.17g\n", constant);
  out += buf;
  const auto n = fields.size();
  for (Eigen::Index i = 0; i < n; ++i)
    if (fields[i] != 0.0) {
      std::snprintf(buf, sizeof buf, "%td %.17g\n", static_cast<std::ptrdiff_t>(i), fields[i]);
      out += buf;
    }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (couplings(i, j) != 0.0) {
        std::snprintf(buf, sizeof buf, "%td %td %.17g\n", static_cast<std::ptrdiff_t>(i),
                      static_cast<std::ptrdiff_t>(j), 2.0 * couplings(i, j));
        out += buf;
      }
  return out;
}

double QuboProblem::energy(const std::vector<int>& x) const {
  if (static_cast<Eigen::Index>(x.size()) != q.rows()) throw InvalidArgument("QuboProblem::energy: wrong size");
  RVector v(q.rows());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0 && x[i] != 1) throw InvalidArgument("QuboProblem::energy: entries must be 0 or 1");
    v[static_cast<Eigen::Index>(i)] = x[i];
  }
  return v.dot(q * v) + offset;
}

QuboProblem ising_to_qubo(const IsingProblem& p) {
  p.validate();
  // s = 2x - 1: s^T J s = 4 x^T J x - 4 (J 1)^T x + 1^T J 1, h^T s = 2 h^T x - h^T 1.
  const Eigen::Index n = p.fields.size();
  const RVector ones = RVector::Ones(n);
  QuboProblem q;
  q.q = 4.0 * p.couplings;
  const RVector lin = -4.0 * (p.couplings * ones) + 2.0 * p.fields;
  q.q.diagonal() += lin;  // x_i^2 = x_i
  q.offset = ones.dot(p.couplings * ones) - p.fields.sum() + p.constant;
  return q;
}

IsingProblem qubo_to_ising(const QuboProblem& q) {
  if (q.q.rows() != q.q.cols()) throw InvalidArgument("qubo_to_ising: Q must be square");
  // x = (1 + s)/2: x^T Q x = (1/4)(1^T Q 1 + 2 (Q 1)^T s + s^T Q s).
  const RMatrix sym = 0.5 * (q.q + q.q.transpose());
  const RVector ones = RVector::Ones(sym.rows());
  return IsingProblem::from_quadratic(0.25 * sym, 0.5 * (sym * ones), 0.25 * ones.dot(sym * ones) + q.offset);
}

IsingSolution solve_exhaustive(const IsingProblem& p) {
  p.validate();
  const std::size_t n = p.size();
  if (n > kMaxExhaustiveSpins)
    throw InvalidArgument("solve_exhaustive: " + std::to_string(n) + " spins exceeds the cap of " +
                          std::to_string(kMaxExhaustiveSpins));
  Spins s(n, -1);
  if (n == 0) return {s, p.constant};
  // local[i] = 2 sum_j J_ij s_j + h_i, so flipping i changes E by -2 s_i local[i].
  std::vector<double> local(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = p.fields[static_cast<Eigen::Index>(i)];
    for (std::size_t j = 0; j < n; ++j) acc += 2.0 * p.couplings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * s[j];
    local[i] = acc;
  }
  double e = p.energy(s);
  IsingSolution best{s, e};
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const auto i = static_cast<std::size_t>(std::countr_zero(k));
    e += -2.0 * s[i] * local[i];
    s[i] = -s[i];
    for (std::size_t j = 0; j < n; ++j)
      local[j] += 4.0 * p.couplings(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * s[i];
    if (e < best.energy) best = {s, e};
  }
  best.energy = p.energy(best.spins);  // drop accumulated rounding
  return best;
}

IsingSolution solve_annealing(const IsingProblem& p, const AnnealSchedule& schedule, std::uint64_t seed) {
  p.validate();
  const std::size_t n = p.size();
  if (schedule.reads == 0 || schedule.sweeps == 0) throw InvalidArgument("solve_annealing: reads and sweeps must be >= 1");
  if (n == 0) return {{}, p.constant};

  double max_cost = 0.0;
  double min_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    double row = std::abs(p.fields[ii]);
    if (p.fields[ii] != 0.0) min_cost = std::min(min_cost, 2.0 * std::abs(p.fields[ii]));
    for (std::size_t j = 0; j < n; ++j) {
      const double c = std::abs(p.couplings(ii, static_cast<Eigen::Index>(j)));
      row += 2.0 * c;
      if (c != 0.0) min_cost = std::min(min_cost, 4.0 * c);
    }
    max_cost = std::max(max_cost, 2.0 * row);
  }
  if (max_cost == 0.0) return {Spins(n, -1), p.constant};
  const double b0 = schedule.beta_start > 0.0 ? schedule.beta_start : std::log(2.0) / max_cost;
  const double b1 = schedule.beta_end > 0.0 ? schedule.beta_end : std::log(100.0) / min_cost;
  const double ratio = schedule.sweeps > 1 ? std::pow(b1 / b0, 1.0 / (schedule.sweeps - 1)) : 1.0;

  Rng rng(seed);
  IsingSolution best{Spins(n, -1), std::numeric_limits<double>::infinity()};
  std::vector<double> local(n);
  Spins s(n);
  for (unsigned r = 0; r < schedule.reads; ++r) {
    for (auto& v : s) v = rng.uniform() < 0.5 ? -1 : 1;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = p.fields[static_cast<Eigen::Index>(i)];
      for (std::size_t j = 0; j < n; ++j)
        acc += 2.0 * p.couplings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * s[j];
      local[i] = acc;
    }
    double beta = b0;
    for (unsigned sw = 0; sw < schedule.sweeps; ++sw, beta *= ratio) {
      for (std::size_t i = 0; i < n; ++i) {
        const double delta = -2.0 * s[i] * local[i];
        if (delta <= 0.0 || rng.uniform() < std::exp(-beta * delta)) {
          s[i] = -s[i];
          for (std::size_t j = 0; j < n; ++j)
            local[j] += 4.0 * p.couplings(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * s[i];
        }
      }
    }
    const double e = p.energy(s);
    if (e < best.energy) best = {s, e};
  }
  return best;
}

IsingSolution IsingSolver::solve(const IsingProblem& p) const {
  return method == IsingMethod::Exhaustive ? solve_exhaustive(p) : solve_annealing(p, schedule, seed);
}

}  // namespace flowq
