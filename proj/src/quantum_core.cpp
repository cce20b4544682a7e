#include "erasure/quantum_core.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace erasure {

QuantumState QuantumState::pure(const ComplexVector& psi) {
  ComplexVector n = psi / psi.norm();
  return QuantumState(n * n.adjoint());
}

void QuantumState::validate(double trace_tol, double eig_tol) const {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw DomainError("state: density matrix must be square and non-empty");
  const cplx tr = rho.trace();
  if (std::abs(tr.real() - 1.0) > trace_tol || std::abs(tr.imag()) > trace_tol) {
    std::ostringstream os;
    os << "state: trace " << tr.real() << " deviates from 1";
    throw DomainError(os.str());
  }
  if (!is_hermitian(rho, 1e-10 * std::max(1.0, rho.norm()))) throw DomainError("state: density matrix not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -eig_tol) {
    std::ostringstream os;
    os << "state: negative eigenvalue " << es.eigenvalues().minCoeff();
    throw DomainError(os.str());
  }
}

void ProbDist::validate(double tol) const {
  if (probs.size() != derivs.size()) throw DomainError("distribution: probs and derivs differ in length");
  double s = 0.0, ds = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0) throw DomainError("distribution: negative probability");
    s += probs[i];
    ds += derivs[i];
  }
  if (std::abs(s - 1.0) > tol) throw DomainError("distribution: probabilities do not sum to 1");
  if (std::abs(ds) > tol) throw DomainError("distribution: derivatives do not sum to 0");
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  ComplexMatrix id = ComplexMatrix::Identity(m.rows(), m.cols());
  return (m.adjoint() * m - id).cwiseAbs().maxCoeff() <= tol;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

ComplexMatrix expm(const ComplexMatrix& a) {
  ComplexMatrix out = a.exp();
  if (!out.allFinite()) {
    std::ostringstream os;
    os << "expm: non-finite result (input norm " << a.norm() << ", dim " << a.rows() << ")";
    throw NumericError(os.str());
  }
  return out;
}

ComplexMatrix unitary_exp(const ComplexMatrix& h, double s) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  ComplexVector ph(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) ph(i) = std::exp(-kI * s * es.eigenvalues()(i));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

ComplexVector vec(const ComplexMatrix& m) {
  ComplexVector v(m.rows() * m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  return v;
}

ComplexMatrix unvec(const ComplexVector& v, int dim) {
  if (dim < 0 || v.size() != static_cast<Eigen::Index>(dim) * dim) throw DomainError("unvec: length is not dim^2");
  ComplexMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = v(i * dim + j);
  return m;
}

double fd_step(double omega) { return 1e-6 * std::max(1.0, std::abs(omega)); }

double default_cutoff(const ComplexMatrix& rho) { return 1e-12 * std::abs(rho.trace().real()); }

double qfi_sum(const ComplexMatrix& rho, const ComplexMatrix& drho, double cutoff) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  const auto& p = es.eigenvalues();
  const ComplexMatrix& v = es.eigenvectors();
  ComplexMatrix d = v.adjoint() * drho * v;
  double total = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double s = p(j) + p(k);
      if (s > cutoff && s > 0.0) total += 2.0 * std::norm(d(j, k)) / s;
    }
  }
  return total;
}

double qfi_density(const QuantumState& state, const ComplexMatrix& drho, double eigenvalue_cutoff) {
  if (drho.rows() != state.rho.rows() || drho.cols() != state.rho.cols())
    throw DomainError("qfi_density: derivative dimension mismatch");
  const double scale = std::max(1.0, drho.norm());
  if (!is_hermitian(state.rho, 1e-10 * std::max(1.0, state.rho.norm())))
    throw DomainError("qfi_density: density matrix not Hermitian");
  if (!is_hermitian(drho, 1e-10 * scale)) throw DomainError("qfi_density: derivative not Hermitian");
  if (std::abs(drho.trace()) > 1e-9 * scale) throw DomainError("qfi_density: derivative not traceless");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(state.rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-6) throw DomainError("qfi_density: density matrix has a negative eigenvalue");
  const double cutoff = eigenvalue_cutoff < 0.0 ? default_cutoff(state.rho) : eigenvalue_cutoff;
  return qfi_sum(state.rho, drho, cutoff);
}

ComplexMatrix sld(const ComplexMatrix& rho, const ComplexMatrix& drho, double cutoff) {
  if (cutoff < 0.0) cutoff = default_cutoff(rho);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  const auto& p = es.eigenvalues();
  const ComplexMatrix& v = es.eigenvectors();
  ComplexMatrix d = v.adjoint() * drho * v;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double s = p(j) + p(k);
      d(j, k) = (s > cutoff && s > 0.0) ? 2.0 * d(j, k) / s : cplx(0.0);
    }
  }
  return v * d * v.adjoint();
}

double pure_state_qfi(const ComplexVector& psi, const ComplexVector& dpsi) {
  const cplx overlap = psi.dot(dpsi);
  return 4.0 * (dpsi.squaredNorm() - std::norm(overlap));
}

double cfi(const ProbDist& dist) {
  if (dist.probs.size() != dist.derivs.size()) throw DomainError("cfi: probs and derivs differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    const double p = dist.probs[i];
    const double dp = dist.derivs[i];
    if (p < 0.0) throw DomainError("cfi: negative probability");
    if (p == 0.0) {
      if (dp != 0.0) throw NumericError("cfi: singular distribution (zero probability with nonzero derivative)");
      continue;
    }
    total += dp * dp / p;
  }
  return total;
}

double error_propagation_qfi(double signal_deriv, double variance) {
  if (!(variance > 0.0)) throw DomainError("error_propagation_qfi: variance must be positive");
  return signal_deriv * signal_deriv / variance;
}

}  // namespace erasure
