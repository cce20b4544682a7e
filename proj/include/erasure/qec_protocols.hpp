#ifndef ERASURE_QEC_PROTOCOLS_HPP
#define ERASURE_QEC_PROTOCOLS_HPP

#include "erasure/channel_bounds.hpp"
#include "erasure/optimize.hpp"

#include <string>
#include <vector>

namespace erasure {

enum class CodeLabel { hl_plus_minus, zero_signal, dephasing_ancilla, thermal_conversion };

const char* code_label_name(CodeLabel label);
CodeLabel code_label_from_name(const std::string& name);

inline constexpr double kDefaultCodeEpsilon = 1e-3;

// Two logical states on `sites` probes of dimension `levels`, tensored with a
// noiseless ancilla of dimension `ancilla` (1 = none). Site 0 is the most
// significant tensor factor and the ancilla the least significant.
struct CodeSpace {
  CodeLabel label = CodeLabel::hl_plus_minus;
  double epsilon = 0.0;
  int sites = 1;
  int levels = 2;
  int ancilla = 1;
  ComplexVector logical0, logical1;

  int dim() const;
  ComplexMatrix isometry() const;  // columns logical0, logical1
};

// |+>^n, |->^n with |+-> = (|1> +- |2>)/sqrt(2); needs n >= 2.
CodeSpace hl_code(int sites, int k);
// (eps|w> +- sqrt(1-eps^2)|s>)|0/1>_a with w the level of smaller total rate.
CodeSpace zero_signal_code(const ErasureModel& model, double epsilon = kDefaultCodeEpsilon);
// |+>|0>_a, |->|1>_a.
CodeSpace dephasing_ancilla_code(int k);
// |11>, |22> on two thermal qubits (no erasure levels).
CodeSpace thermal_code();

// Correction operators written in logical coordinates: the recovery acts as
// X -> V (sum_a M_a X M_a^dag) V^dag with V the code isometry and M_a of size 2 x D.
struct RecoveryMap {
  std::vector<ComplexMatrix> rows;
};

// Per erasure level: 1 when gamma_1j >= gamma_2j (the level-1 jump is
// corrected, the level-2 jump becomes a logical phase flip), 2 otherwise.
std::vector<int> recovery_sign_flags(const ErasureModel& model);

RecoveryMap default_recovery(const CodeSpace& code, const ErasureModel& model);

struct EffectiveDynamics {
  ComplexMatrix generator;     // logical G with H_eff = omega * G
  ComplexMatrix hamiltonian;   // omega * generator
  ComplexMatrix superoperator; // 4x4 row-major logical Lindbladian at the model's omega
  ComplexMatrix dissipator;    // superoperator minus its Hamiltonian part
  double dephasing_rate = 0.0; // gamma in gamma (Z rho Z - rho)
  bool dephasing_type = false;
  double residual = 0.0;       // max deviation of the dissipator from pure dephasing
  double trace_defect = 0.0;   // failure of P + R P_perp to preserve trace on reachable states
};

EffectiveDynamics effective_lindbladian(const CodeSpace& code, const RecoveryMap& recovery, const ErasureModel& model);

// Logical Lindbladian at a different omega (the dissipator does not depend on it).
ComplexMatrix logical_superoperator(const EffectiveDynamics& eff, double omega);

// Rate per N*T for dephasing-type logical noise, or coefficient of N^2 T^2 when
// the logical dynamics is noiseless (params: heisenberg = 1). Other logical noise
// falls back to the t-optimized single-use ECQFI of the logical channel
// (params: numeric = 1), which for pure dephasing is smaller by a factor e.
ProtocolReport qec_qfi(const CodeSpace& code, const ErasureModel& model, int N, double T);
ProtocolReport qec_qfi(const CodeSpace& code, const RecoveryMap& recovery, const ErasureModel& model, int N, double T);

// max_t ECQFI(exp(L_eff t)) / t per logical qubit; t is searched from 1e-3 / rate_scale upward.
Optimum1d logical_ecqfi_rate(const EffectiveDynamics& eff, double omega, double rate_scale);

// Rates of the zero-signal code at eps in {1e-2, 1e-3, 1e-4}; rate is the default-eps value.
ProtocolReport zero_signal_scan(const ErasureModel& model);

struct ThermalConversion {
  ErasureModel logical_model;  // omega = 0, generator sigma_z; signal scale in report
  ProtocolReport report;
};

// Thermal qubits with up-rate Gamma1 (from |1>) and down-rate Gamma2 (from |2>),
// paired into {|11>, |22>} logical erasure qubits.
ThermalConversion thermal_conversion(double gamma1, double gamma2, int N);

struct AdiabaticElimination {
  double coefficient = 0.0;  // L_eff = coefficient * |e><1|
  double gamma_eff = 0.0;
};

AdiabaticElimination adiabatic_elimination(double gamma2, double omega);
double adiabatic_population(const AdiabaticElimination& ae, double t);
// max |p_e exact - p_e effective| over `samples` evenly spaced times in [t_lo, t_hi].
double adiabatic_population_error(double gamma2, double omega, double t_lo, double t_hi, int samples = 46);
// (d p_e / d omega)^2 / p_e of the effective model.
double adiabatic_effective_fi(double gamma2, double omega, double t);
// Small-t limit of adiabatic_effective_fi / t.
double adiabatic_fi_slope(double gamma2, double omega);

struct TrotterCheck {
  double error = 0.0;  // Frobenius distance of the logical blocks at t
  double bound = 0.0;  // 5 * dt * rate * t
  double dt = 0.0;
  long steps = 0;
  double leaked = 0.0;  // trace lost to states outside code and recovery
};

// Physical evolution interleaved with P + R P_perp every dt, against the
// effective logical evolution. Step count is capped at 1e5.
TrotterCheck trotter_validation(const CodeSpace& code, const RecoveryMap& recovery, const ErasureModel& model,
                                const ComplexMatrix& logical_rho, double t, double dt);

}  // namespace erasure

#endif
