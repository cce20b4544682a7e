#ifndef ERASURE_ERASURE_MODEL_HPP
#define ERASURE_ERASURE_MODEL_HPP

#include "erasure/quantum_core.hpp"

#include <functional>
#include <string>
#include <vector>

namespace erasure {

// Qubit levels |1>, |2> occupy indices 0 and 1; erasure level e_j sits at 2 + j.
// H = omega * (cos(theta) sz + sin(theta) sx) with sz = |1><1| - |2><2|.
class ErasureModel {
 public:
  ErasureModel() : ErasureModel(0.0, 0.0, Eigen::MatrixXd::Zero(2, 0)) {}
  ErasureModel(double omega, double theta, Eigen::MatrixXd gamma);

  // Single erasure level with rates gamma1 (from |1>) and gamma2 (from |2>).
  static ErasureModel single(double gamma1, double gamma2, double omega = 0.0, double theta = 0.0);

  double omega() const { return omega_; }
  double theta() const { return theta_; }
  const Eigen::MatrixXd& gamma() const { return gamma_; }
  double gamma(int level, int j) const { return gamma_(level, j); }
  int k() const { return static_cast<int>(gamma_.cols()); }
  int dim() const { return 2 + k(); }
  double Gamma1() const { return total_[0]; }
  double Gamma2() const { return total_[1]; }

  ErasureModel with_omega(double omega) const { return ErasureModel(omega, theta_, gamma_); }

  ComplexMatrix generator() const;    // G embedded in the full space
  ComplexMatrix hamiltonian() const;  // omega * G
  // L_{i,j} = sqrt(gamma_ij) |e_j><i|, ordered level-major: (1,1..k), (2,1..k).
  std::vector<ComplexMatrix> jump_operators() const;

  std::string to_text() const;
  static ErasureModel from_text(const std::string& text);
  // Keys: omega, theta, k, gamma[i][j] (1-based); used by the CLI loader.
  static ErasureModel from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);

 private:
  double omega_;
  double theta_;
  Eigen::MatrixXd gamma_;
  double total_[2];
};

struct KrausSet {
  std::vector<ComplexMatrix> ops;
  std::vector<ComplexMatrix> dops;

  std::size_t size() const { return ops.size(); }
  ComplexMatrix apply(const ComplexMatrix& rho) const;
  // Derivative of the channel output with respect to omega.
  ComplexMatrix apply_derivative(const ComplexMatrix& rho) const;
  double completeness_error() const;
};

ComplexMatrix build_liouvillian(const ErasureModel& model);
// d L / d omega, the Hamiltonian-direction superoperator.
ComplexMatrix liouvillian_signal_part(const ErasureModel& model);

ComplexMatrix propagator(const ErasureModel& model, double t);
// Exact omega-derivative of exp(L t) via the block-triangular exponential.
ComplexMatrix propagator_derivative(const ErasureModel& model, double t);

QuantumState evolve(const ErasureModel& model, const QuantumState& state, double t);
ComplexMatrix evolve_derivative(const ErasureModel& model, const QuantumState& state, double t);

// Kraus operators with qubit input (d_in = 2) and full output (d_out = 2 + k).
KrausSet kraus(const ErasureModel& model, double t);

// Same construction for any channel given its row-major superoperator as a
// function of omega; inputs are restricted to the first two of d levels.
KrausSet kraus_from_propagators(const std::function<ComplexMatrix(double)>& propagator_at, double omega, int d);

// Embeds a qubit state a|1> + b|2> into the full space.
ComplexVector embed_qubit(const ComplexVector& qubit, int dim);

}  // namespace erasure

#endif
