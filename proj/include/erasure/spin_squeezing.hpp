#ifndef ERASURE_SPIN_SQUEEZING_HPP
#define ERASURE_SPIN_SQUEEZING_HPP

#include "erasure/channel_bounds.hpp"

#include <vector>

namespace erasure {

// Collective spin moments with J = sum sigma / 2 and the standard
// Jy = (J+ - J-) / 2i. cov_xy is the symmetrized covariance.
struct CollectiveMoments {
  double jx = 0.0, jy = 0.0, jz = 0.0;
  double var_x = 0.0, var_y = 0.0, cov_xy = 0.0;
  int N = 1;
};

struct SqueezeParams {
  double chi = 0.0;
  double phi = 0.0;
};

inline constexpr int kMaxSqueezeN = 40;

// Dicke basis of N qubits indexed by n1 = number of qubits in |1>, so
// Jz = n1 - N/2 and J+ raises n1.
struct CollectiveOperators {
  ComplexMatrix jx, jy, jz;
};
CollectiveOperators collective_operators(int N);

// Applies exp(i pi/2 Jy'), exp(i chi (Jz Jy' + Jy' Jz)), exp(-i phi Jy') to
// |1>^N with Jy' = -Jy, which takes |1>^N to the +x coherent state and leaves
// <Jx> ~ N/2 cos(phi), <Jz> ~ N/2 sin(phi).
ComplexVector squeezed_vector(int N, const SqueezeParams& p);
QuantumState build_squeezed_state(int N, const SqueezeParams& p);

CollectiveMoments moments_of(const ComplexMatrix& rho);

// Closed-form moment maps under independent erasure with eta_i = exp(-Gamma_i t)
// and the collective rotation angle 2 omega t.
CollectiveMoments evolve_moments(const CollectiveMoments& m0, double gamma1, double gamma2, double omega, double t);

// d<Jx>_t / d omega for the same maps.
double signal_derivative(const CollectiveMoments& m0, double gamma1, double gamma2, double omega, double t);

// Error-propagation QFI per N*t of an initial symmetric state read out along
// Jx at rotation angle pi/2.
double error_propagation_rate(const CollectiveMoments& m0, double gamma1, double gamma2, double t);

// Large-N rate 16 t e^{-(G1+G2)t} / (sqrt(1-e^{-G1 t}) + sqrt(1-e^{-G2 t}))^2 / t.
double squeezed_rate_at(double gamma1, double gamma2, double t);
ProtocolReport squeezed_rate(int N, double gamma1, double gamma2);

// Independent photon loss on both modes applied to a symmetric N-qubit pure
// state. Entry M is the unnormalized state of the M surviving qubits in their
// Dicke basis; entries with different M are incoherent.
std::vector<ComplexMatrix> collective_loss(const ComplexVector& psi, double eta1, double eta2);

// Moments of Jx, Jy, Jz summed over surviving qubits.
CollectiveMoments moments_after_loss(const std::vector<ComplexMatrix>& blocks, int N);

// Exact QFI of the N-qubit state after time t with H = omega sum sigma_z.
double collective_qfi(const ComplexVector& psi, double gamma1, double gamma2, double t);

// Exact finite-N squeezed-state rate maximized over (chi, phi, t).
ProtocolReport squeezed_rate_exact(int N, double gamma1, double gamma2);

}  // namespace erasure

#endif
