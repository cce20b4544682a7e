#ifndef ERASURE_QUANTUM_CORE_HPP
#define ERASURE_QUANTUM_CORE_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace erasure {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// Precondition violations.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure: optimizer did not converge, quadrature failed, etc.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuantumState {
  ComplexMatrix rho;

  QuantumState() = default;
  explicit QuantumState(ComplexMatrix r) : rho(std::move(r)) {}
  static QuantumState pure(const ComplexVector& psi);

  int dim() const { return static_cast<int>(rho.rows()); }
  // Throws DomainError unless trace, hermiticity and positivity hold.
  void validate(double trace_tol = 1e-9, double eig_tol = 1e-9) const;
};

struct ProbDist {
  std::vector<double> probs;
  std::vector<double> derivs;

  void validate(double tol = 1e-9) const;
};

bool is_hermitian(const ComplexMatrix& m, double tol = 1e-10);
bool is_unitary(const ComplexMatrix& m, double tol = 1e-10);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

// Pade-13 scaling and squaring. Throws NumericError on a non-finite result.
ComplexMatrix expm(const ComplexMatrix& a);
// exp(-i*s*h) for Hermitian h via its eigendecomposition.
ComplexMatrix unitary_exp(const ComplexMatrix& h, double s);

// Row-major vectorization: vec(A rho B) = (A kron B^T) vec(rho).
ComplexVector vec(const ComplexMatrix& m);
ComplexMatrix unvec(const ComplexVector& v, int dim);

double fd_step(double omega);

template <class F>
auto central_difference(F&& f, double x, double step) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

double default_cutoff(const ComplexMatrix& rho);

// Core QFI sum without input validation; rho may be an unnormalized block.
double qfi_sum(const ComplexMatrix& rho, const ComplexMatrix& drho, double cutoff);

// cutoff < 0 selects the default 1e-12 * trace.
double qfi_density(const QuantumState& state, const ComplexMatrix& drho, double eigenvalue_cutoff = -1.0);

ComplexMatrix sld(const ComplexMatrix& rho, const ComplexMatrix& drho, double cutoff = -1.0);

double pure_state_qfi(const ComplexVector& psi, const ComplexVector& dpsi);

double cfi(const ProbDist& dist);

double error_propagation_qfi(double signal_deriv, double variance);

}  // namespace erasure

#endif
