#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "flowq/amplitude_estimation.hpp"
#include "flowq/errors.hpp"
#include "flowq/gates.hpp"

using namespace flowq;

namespace {

constexpr double kPi = std::numbers::pi;

CMatrix random_unitary(Eigen::Index dim, std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix z(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) z(i, j) = Complex(n(g), n(g));
  Eigen::HouseholderQR<CMatrix> qr(z);
  return qr.householderQ() * CMatrix::Identity(dim, dim);
}

// Phase estimation of a state split evenly over eigenphases +-theta/pi.
double fejer_probability(std::uint64_t y, unsigned n_phase, double theta) {
  const double N = std::ldexp(1.0, static_cast<int>(n_phase));
  auto kernel = [&](double delta) {
    const double den = std::sin(kPi * delta / N);
    if (std::abs(den) < 1e-14) return 1.0;
    const double num = std::sin(kPi * delta);
    return num * num / (N * N * den * den);
  };
  const double phase = N * theta / kPi;
  return 0.5 * (kernel(static_cast<double>(y) - phase) + kernel(static_cast<double>(y) + phase));
}

GroverOperator grover_for(double a) {
  return build_grover(ry_matrix(2.0 * std::asin(std::sqrt(a))), [](std::uint64_t i) { return i == 1; });
}

}  // namespace

TEST_CASE("Grover operator from a Hadamard") {
  const GroverOperator g = build_grover(hadamard_matrix(), [](std::uint64_t i) { return i == 1; });
  CHECK(std::abs(g.amplitude - 0.5) < 1e-12);
  CHECK(std::abs(g.theta - kPi / 4) < 1e-12);
  CHECK_FALSE(g.degenerate);
  const auto ph = restricted_eigenphases(g);
  REQUIRE(ph.size() == 2);
  CHECK(std::abs(ph[0] + kPi / 2) < 1e-9);
  CHECK(std::abs(ph[1] - kPi / 2) < 1e-9);
}

TEST_CASE("degenerate good subspace") {
  const GroverOperator none = build_grover(hadamard_matrix(), [](std::uint64_t) { return false; });
  CHECK(none.amplitude == 0.0);
  CHECK(none.degenerate);
  CHECK(is_unitary(none.q));
  CHECK_THROWS_AS(restricted_grover(none), InvalidArgument);

  const AmplitudeEstimate e = qae(none, 4, QaeMode::ExactDistribution);
  CHECK(e.y == 0);
  CHECK(std::abs(e.distribution[0] - 1.0) < 1e-12);
  CHECK(e.a_hat == 0.0);
}

TEST_CASE("Grover operators of random preparations on three qubits") {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 20; ++t) {
    const CMatrix a = random_unitary(8, gen);
    std::vector<bool> mark(8);
    for (auto&& m : mark) m = gen() & 1U;
    mark[gen() % 8] = true;
    const auto chi = [&](std::uint64_t i) { return static_cast<bool>(mark[i]); };
    const GroverOperator g = build_grover(a, chi);
    CHECK(is_unitary(g.q, 1e-10));

    CMatrix s0 = CMatrix::Identity(8, 8);
    s0(0, 0) = -1.0;
    CMatrix sc = CMatrix::Identity(8, 8);
    for (int i = 0; i < 8; ++i)
      if (mark[static_cast<std::size_t>(i)]) sc(i, i) = -1.0;
    const CMatrix expected = -a * s0 * a.adjoint() * sc;
    CHECK((g.q - expected).norm() < 1e-10);

    double good = 0.0;
    for (int i = 0; i < 8; ++i)
      if (mark[static_cast<std::size_t>(i)]) good += std::norm(a(i, 0));
    CHECK(std::abs(g.amplitude - good) < 1e-12);
    if (good > 1e-9 && good < 1 - 1e-9) {
      const double theta = std::asin(std::sqrt(good));
      const auto ph = restricted_eigenphases(g);
      CHECK(std::abs(ph[0] + 2 * theta) < 1e-9);
      CHECK(std::abs(ph[1] - 2 * theta) < 1e-9);
    }
  }
}

TEST_CASE("preparation from a non-zero input state") {
  const CMatrix a = hadamard_matrix();
  const GroverOperator g = build_grover(a, [](std::uint64_t i) { return i == 0; }, 1);
  CHECK(std::abs(g.amplitude - 0.5) < 1e-12);
  CHECK(is_unitary(g.q));
  CHECK_THROWS_AS(build_grover(a, [](std::uint64_t) { return true; }, 2), InvalidArgument);
}

TEST_CASE("exactly representable phase") {
  const GroverOperator g = grover_for(0.5);
  const AmplitudeEstimate e = qae(g, 3, QaeMode::ExactDistribution);
  REQUIRE(e.distribution.size() == 8);
  CHECK(std::abs(e.distribution[2] + e.distribution[6] - 1.0) < 1e-12);
  CHECK((e.y == 2 || e.y == 6));
  CHECK(std::abs(e.a_hat - 0.5) < 1e-12);
  CHECK(e.shots_used == 0);
}

TEST_CASE("outcome distribution against the Fejer kernel") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int t = 0; t < 10; ++t) {
    const double a = u(gen);
    const GroverOperator g = grover_for(a);
    const AmplitudeEstimate e = qae(g, 6, QaeMode::ExactDistribution);
    double total = 0.0;
    for (std::uint64_t y = 0; y < 64; ++y) {
      CHECK(std::abs(e.distribution[y] - fejer_probability(y, 6, g.theta)) < 1e-10);
      total += e.distribution[y];
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
    CHECK(std::abs(e.a_hat - a) <= 2 * kPi / 64);
    CHECK(e.a_hat == estimate_from_outcome(e.y, 6));
  }
}

TEST_CASE("qae rejects an empty phase register") {
  CHECK_THROWS_AS(qae(grover_for(0.3), 0, QaeMode::ExactDistribution), InvalidArgument);
}

TEST_CASE("median amplification") {
  const GroverOperator g = grover_for(0.3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const AmplitudeEstimate single = qae(g, 5, QaeMode::Sampled, seed);
    const AmplitudeEstimate med = qae_median(g, 5, 1, seed);
    CHECK(med.a_hat == single.a_hat);
    CHECK(med.y == single.y);
  }
  CHECK(std::abs(median_failure_bound(8) - std::exp(-1.0)) < 1e-15);
  CHECK(std::abs(median_failure_bound(8) - 0.3679) < 1e-4);

  const AmplitudeEstimate m9 = qae_median(g, 5, 9, 42);
  CHECK(m9.repetitions == 9);
  CHECK(m9.samples.size() == 9);
  std::vector<double> s = m9.samples;
  std::sort(s.begin(), s.end());
  CHECK(m9.a_hat == s[4]);
  CHECK(m9.failure_bound == median_failure_bound(9));

  const AmplitudeEstimate again = qae_median(g, 5, 9, 42);
  CHECK(again.samples == m9.samples);

  CHECK_THROWS_AS(qae_median(g, 5, 8, 0), InvalidArgument);
  CHECK_THROWS_AS(qae_median(g, 5, 0, 0), InvalidArgument);
}

TEST_CASE("mean oracle action") {
  const unsigned n = 3;
  const CMatrix ones = mean_oracle(std::vector<double>(8, 1.0)).to_matrix(n + 1);
  const CMatrix zeros = mean_oracle(std::vector<double>(8, 0.0)).to_matrix(n + 1);
  for (Eigen::Index j = 0; j < 8; ++j) {
    CVector e1 = CVector::Zero(16);
    e1[2 * j + 1] = 1.0;
    CVector e0 = CVector::Zero(16);
    e0[2 * j] = 1.0;
    CHECK((ones * e1 - e1).norm() < 1e-15);
    CHECK(((zeros * e1).cwiseAbs() - e0).norm() < 1e-15);
  }

  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> g(8);
  for (auto& x : g) x = u(gen);
  const CMatrix m = mean_oracle(g).to_matrix(n + 1);
  CHECK(is_unitary(m, 1e-12));
  for (Eigen::Index j = 0; j < 8; ++j) {
    CHECK(std::abs(m(2 * j + 1, 2 * j + 1) - std::sqrt(g[static_cast<std::size_t>(j)])) < 1e-15);
    CHECK(std::abs(std::abs(m(2 * j, 2 * j + 1)) - std::sqrt(1 - g[static_cast<std::size_t>(j)])) < 1e-15);
  }

  CHECK_THROWS_AS(mean_oracle({0.5, 1.5}), InvalidArgument);
  CHECK_THROWS_AS(mean_oracle({0.5, -0.1}), InvalidArgument);
  CHECK_THROWS_AS(mean_oracle({0.5, 0.5, 0.5}), InvalidArgument);
}

TEST_CASE("mean estimation") {
  QaeConfig cfg;
  cfg.n_phase = 4;
  CHECK(estimate_mean({0, 0, 0, 0}, cfg).mean == 0.0);

  const MeanEstimate half = estimate_mean({0, 1, 0, 1}, cfg);
  CHECK(std::abs(half.mean - 0.5) < 1e-12);
  CHECK(half.n_padded == 4);
  CHECK(half.total_qubits == 4 + 2 + 1);

  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  cfg.n_phase = 7;
  for (int t = 0; t < 3; ++t) {
    std::vector<double> g(8);
    for (auto& x : g) x = u(gen);
    double mean = 0.0;
    for (double x : g) mean += x / 8.0;
    const MeanEstimate e = estimate_mean(g, cfg);
    CHECK(std::abs(e.mean - mean) <= 2 * kPi / 128);

    std::vector<double> shuffled = g;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const MeanEstimate p = estimate_mean(shuffled, cfg);
    for (std::size_t y = 0; y < e.estimate.distribution.size(); ++y)
      CHECK(std::abs(p.estimate.distribution[y] - e.estimate.distribution[y]) < 1e-12);
  }
}

TEST_CASE("mean estimation pads to a power of two") {
  QaeConfig cfg;
  cfg.n_phase = 6;
  const MeanEstimate e = estimate_mean({0.5, 0.5, 0.5}, cfg);
  CHECK(e.n_samples == 3);
  CHECK(e.n_padded == 4);
  CHECK(std::abs(e.estimate.a_hat - 0.375) <= 2 * kPi / 64);
  CHECK(std::abs(e.mean - e.estimate.a_hat * 4.0 / 3.0) < 1e-15);
  CHECK_THROWS_AS(estimate_mean({}, cfg), InvalidArgument);
}
