#ifndef ERASURE_CHANNEL_BOUNDS_HPP
#define ERASURE_CHANNEL_BOUNDS_HPP

#include "erasure/erasure_model.hpp"

#include <map>
#include <string>
#include <vector>

namespace erasure {

struct ProtocolReport {
  double rate = 0.0;  // QFI per unit N*T
  std::map<std::string, double> params;
  std::string strategy;  // prod, ent, cd, ult, qec, iss

  double param(const std::string& name) const;
  std::string csv_header() const;
  std::string csv_row() const;
};

struct GaugeMatrix {
  ComplexMatrix h;
};

// alpha = (Kdot - i h K)^dagger (Kdot - i h K), summed over Kraus index.
ComplexMatrix alpha_matrix(const KrausSet& ks, const ComplexMatrix& h);

// Real parametrization of an m x m Hermitian matrix: diagonal entries, then
// (real, imaginary) pairs of the strict upper triangle in row order.
ComplexMatrix hermitian_from_params(const Eigen::VectorXd& x, int m);
Eigen::VectorXd params_from_hermitian(const ComplexMatrix& h);

// Minimize lambda_max(A(x)^dagger A(x)) with A(x) = base + sum_k x_k directions[k],
// all M x 2 complex. Convex in x.
struct SpectralProblem {
  ComplexMatrix base;
  std::vector<ComplexMatrix> directions;
};

struct SpectralOptimum {
  Eigen::VectorXd x;
  double value = 0.0;        // lambda_max at x
  ComplexMatrix dual_state;  // 2x2 density matrix certifying the minimum
  double dual_value = 0.0;   // min_x tr(A^dagger A rho) at dual_state
  double gap = 0.0;
  double grad_norm = 0.0;    // smoothed-objective gradient at the last temperature
  int iterations = 0;
};

SpectralOptimum minimize_max_eigenvalue(const SpectralProblem& problem, double rel_gap_tol = 1e-9);
// min_x tr(A(x)^dagger A(x) rho), solved exactly as a linear least-squares problem.
double spectral_dual_value(const SpectralProblem& problem, const ComplexMatrix& rho);

struct EcqfiResult {
  double value = 0.0;
  GaugeMatrix gauge;
  ComplexMatrix input_state;  // optimal (possibly ancilla-reduced) qubit input
  double gap = 0.0;
  int iterations = 0;
};

EcqfiResult ecqfi_detailed(const KrausSet& ks);
double ecqfi(const KrausSet& ks);

// Closed-form single-shot sz ECQFI: 16 t^2 / (exp(G1 t/2) + exp(G2 t/2))^2.
double sigma_z_ecqfi(double gamma1, double gamma2, double t);

ProtocolReport product_bound_sigma_z(double gamma1, double gamma2);
ProtocolReport product_bound_sigma_x(double gamma_max, double gamma_min, double omega);

}  // namespace erasure

#endif
