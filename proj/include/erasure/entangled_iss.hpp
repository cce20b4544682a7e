#ifndef ERASURE_ENTANGLED_ISS_HPP
#define ERASURE_ENTANGLED_ISS_HPP

#include "erasure/channel_bounds.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace erasure {

inline constexpr int kMaxBosonicN = 12;

// Two lossy modes truncated at N photons: H = omega (n1 - n2), jumps
// sqrt(Gamma_k) a_k. Basis ordered by total photon number M, then n1 = 0..M.
struct BosonicModel {
  int N = 1;
  double gamma1 = 0.0, gamma2 = 0.0, omega = 0.0;

  int dim() const { return (N + 1) * (N + 2) / 2; }
  int index(int n1, int n2) const;
  ComplexMatrix hamiltonian() const;
  std::vector<ComplexMatrix> jump_operators() const;
  // Row-major Lindbladian; only for N <= 6.
  ComplexMatrix liouvillian() const;
};

BosonicModel build_bosonic(int N, double gamma1, double gamma2, double omega);

// One loss Kraus operator: n1 -> n1 - lost1 with weight amplitude(n1)
// (zero where the move is impossible).
struct LossBranch {
  int lost1 = 0;
  Eigen::VectorXd amplitude;
};

// The channel at time t restricted to N-photon inputs, written with the
// loss Kraus operators: output sector M receives K U rho U^dag K^dag.
struct BosonicChannel {
  int N = 1;
  double t = 0.0;
  Eigen::VectorXd generator;                  // n1 - n2 on the input sector
  ComplexVector phases;                       // diagonal of U = exp(-i omega t generator)
  std::vector<std::vector<ComplexMatrix>> kraus;  // kraus[M]: (M+1) x (N+1)
  std::vector<std::vector<LossBranch>> branches;  // same operators, one nonzero per column
};

BosonicChannel bosonic_channel(const BosonicModel& model, double t);

// Output blocks and their omega-derivatives for an input density matrix.
std::vector<ComplexMatrix> bosonic_output(const BosonicChannel& ch, const ComplexMatrix& rho_in);
std::vector<ComplexMatrix> bosonic_output_derivative(const BosonicChannel& ch, const ComplexMatrix& rho_in);

double bosonic_qfi(const BosonicChannel& ch, const ComplexVector& psi);

// |+x>^N in the Dicke basis indexed by n1.
ComplexVector spin_coherent_x(int N);

struct IssResult {
  double qfi = 0.0;
  ComplexVector state;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // qfi after each see-saw step
};

// One see-saw run from `start`.
IssResult iss_run(const BosonicChannel& ch, const ComplexVector& start, double tol = 1e-10, int max_iter = 500);

// Coherent +x start plus three seeded random restarts (and `warm` when given).
// Each start gets a short screening run; the leader continues to convergence.
IssResult iss_optimize(const BosonicModel& model, double t, double tol = 1e-10, int max_iter = 500,
                       const ComplexVector* warm = nullptr, std::uint64_t seed = 20240917);

struct IssRate {
  ProtocolReport report;  // rate = QFI / (N t) at the optimal t
  IssResult best;
};

// Golden-section over log t with warm-started states.
IssRate iss_rate(int N, double gamma1, double gamma2, double tol = 1e-10);

// Rows "n1,re,im,prob" for external plotting.
std::string dicke_amplitudes_csv(const ComplexVector& state);

}  // namespace erasure

#endif
