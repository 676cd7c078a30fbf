#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace flowq {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kZeroBranchTol = 1e-12;

bool is_unitary(const CMatrix& u, double tol = kUnitaryTol);
bool is_hermitian(const CMatrix& h, double tol = kHermitianTol);

// Principal square root of a Hermitian positive-semidefinite matrix.
// Eigenvalues in [-clamp_tol, 0) are clamped to zero; anything more negative
// throws InvalidArgument.
CMatrix hermitian_psd_sqrt(const CMatrix& h, double clamp_tol = 1e-12);

// exp(i * t * H) for Hermitian H via eigendecomposition.
CMatrix expm_i_hermitian(const CMatrix& h, double t);

// Largest singular value.
double spectral_norm(const CMatrix& a);

// Trace distance 0.5 * ||rho - sigma||_1 between Hermitian matrices.
double trace_distance(const CMatrix& rho, const CMatrix& sigma);

inline bool is_power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Smallest q with 2^q >= n (q >= 0).
unsigned ceil_log2(std::uint64_t n);

}  // namespace flowq
