#include "flowq/linalg.hpp"

#include <cmath>

#include "flowq/errors.hpp"

namespace flowq {

bool is_unitary(const CMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const CMatrix prod = u * u.adjoint();
  return (prod - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const CMatrix& h, double tol) {
  if (h.rows() != h.cols()) return false;
  if (h.size() == 0) return true;
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

CMatrix hermitian_psd_sqrt(const CMatrix& h, double clamp_tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw Error("hermitian_psd_sqrt: eigendecomposition failed");
  RVector ev = eig.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -clamp_tol)
      throw InvalidArgument("hermitian_psd_sqrt: matrix has eigenvalue " + std::to_string(ev[i]));
    ev[i] = ev[i] < 0.0 ? 0.0 : std::sqrt(ev[i]);
  }
  return eig.eigenvectors() * ev.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
}

CMatrix expm_i_hermitian(const CMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw Error("expm_i_hermitian: eigendecomposition failed");
  const RVector& ev = eig.eigenvalues();
  CVector phases(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) phases[i] = std::polar(1.0, ev[i] * t);
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

double spectral_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()[0];
}

double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho - sigma, Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

unsigned ceil_log2(std::uint64_t n) {
  unsigned q = 0;
  while ((std::uint64_t{1} << q) < n) ++q;
  return q;
}

}  // namespace flowq
