#ifndef ERASURE_CONTINUOUS_DETECTION_HPP
#define ERASURE_CONTINUOUS_DETECTION_HPP

#include "erasure/channel_bounds.hpp"

#include <cstdint>
#include <limits>
#include <ostream>

namespace erasure {

inline constexpr double kInfiniteTau = std::numeric_limits<double>::infinity();

enum class CdKind { fixed_tau_after_reset, fixed_tau_lapses, decay_time_sigma_x, ghz, two_qubit_entangled };

const char* cd_kind_name(CdKind kind);

struct CdStrategy {
  CdKind kind = CdKind::fixed_tau_after_reset;
  double tau = 1.0;  // kInfiniteTau allowed for decay_time_sigma_x only
  ComplexVector input = ComplexVector::Constant(2, std::sqrt(0.5));  // qubit input a|1> + b|2>

  // Input sqrt(p)|1> + sqrt(1-p)|2>.
  static CdStrategy after_reset(double tau, double p);
  static CdStrategy lapses(double tau, double p);
  // Input |1>, reset only after a decay unless tau is finite.
  static CdStrategy decay_time(double tau = kInfiniteTau);
};

struct CycleStats {
  double mean_cycle_time = 0.0;
  double mean_cycle_fi = 0.0;
  double rate = 0.0;  // ratio estimator of FI per unit time
  double rate_stderr = 0.0;
  double cycle_time_stderr = 0.0;
  double cycle_fi_stderr = 0.0;
  std::int64_t cycles = 0;
  bool insufficient = false;  // fewer than 100 cycles
};

// I_j = int_0^tau e^{G_j t} dt; rate 16 tau^2 / (sqrt(I_1) + sqrt(I_2))^2.
double cd_strategy1_rate(double gamma1, double gamma2, double tau);
double cd_strategy1_p_opt(double gamma1, double gamma2, double tau);
ProtocolReport cd_sigma_z_strategy1(double gamma1, double gamma2);

double cd_strategy2_rate(double gamma, double tau);
ProtocolReport cd_sigma_z_strategy2(double gamma);

// Closed forms for the sigma_x decay-time protocol with input |1>, gamma_1 = 0.
double sigma_x_decay_density(double gamma, double omega, double t);
double sigma_x_survival(double gamma, double omega, double t);
ProtocolReport cd_sigma_x(double gamma, double omega, double tau);

ProtocolReport cd_ghz(int N, double gamma);

double cd_two_qubit_rate(double gamma, double theta, double tau);
ProtocolReport cd_two_qubit(double gamma);

// Renewal-reward FI rate of the reset-after-decay protocol for an arbitrary
// model and qubit input, by quadrature over the decay-time density.
struct RenewalTerms {
  double cycle_fi = 0.0;
  double cycle_time = 0.0;
  double rate() const { return cycle_fi / cycle_time; }
};
RenewalTerms renewal_after_reset(const ErasureModel& model, const ComplexVector& input, double tau);

// jobs = 0 uses the available hardware parallelism. Results do not depend on
// jobs: every trajectory has its own seed derived from (seed, index).
CycleStats monte_carlo_cd(const ErasureModel& model, const CdStrategy& strategy, double total_time,
                          int n_trajectories, std::uint64_t seed, int jobs = 0, std::ostream* dump = nullptr);

}  // namespace erasure

#endif
