#include "erasure/qec_protocols.hpp"

#include "erasure/asymptotic_bounds.hpp"

#include <algorithm>
#include <cmath>

namespace erasure {

const char* code_label_name(CodeLabel label) {
  switch (label) {
    case CodeLabel::hl_plus_minus:
      return "hl_plus_minus";
    case CodeLabel::zero_signal:
      return "zero_signal";
    case CodeLabel::dephasing_ancilla:
      return "dephasing_ancilla";
    case CodeLabel::thermal_conversion:
      return "thermal_conversion";
  }
  return "unknown";
}

CodeLabel code_label_from_name(const std::string& name) {
  if (name == "hl" || name == "hl_plus_minus") return CodeLabel::hl_plus_minus;
  if (name == "zero_signal") return CodeLabel::zero_signal;
  if (name == "dephasing_ancilla") return CodeLabel::dephasing_ancilla;
  if (name == "thermal" || name == "thermal_conversion") return CodeLabel::thermal_conversion;
  throw DomainError("unknown code label '" + name + "'");
}

int CodeSpace::dim() const {
  int d = ancilla;
  for (int s = 0; s < sites; ++s) d *= levels;
  return d;
}

ComplexMatrix CodeSpace::isometry() const {
  ComplexMatrix v(dim(), 2);
  v.col(0) = logical0;
  v.col(1) = logical1;
  return v;
}

namespace {

ComplexVector basis_vector(int dim, int index) {
  ComplexVector v = ComplexVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

ComplexVector tensor(const std::vector<ComplexVector>& factors) {
  ComplexMatrix out = ComplexMatrix::Ones(1, 1);
  for (const auto& f : factors) out = kron(out, ComplexMatrix(f));
  return out.col(0);
}

ComplexVector plus_minus(int levels, double sign) {
  ComplexVector v = ComplexVector::Zero(levels);
  v(0) = std::sqrt(0.5);
  v(1) = sign * std::sqrt(0.5);
  return v;
}

// op acting on one site of a code-space-shaped column block.
ComplexMatrix apply_local(const ComplexMatrix& op, int site, const CodeSpace& code, const ComplexMatrix& m) {
  const int d = code.levels;
  int stride = code.ancilla;
  for (int s = site + 1; s < code.sites; ++s) stride *= d;
  const int block = stride * d;
  ComplexMatrix out = ComplexMatrix::Zero(m.rows(), m.cols());
  for (Eigen::Index base = 0; base < m.rows(); base += block)
    for (int inner = 0; inner < stride; ++inner)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          if (op(a, b) != cplx(0.0)) out.row(base + a * stride + inner) += op(a, b) * m.row(base + b * stride + inner);
  return out;
}

ComplexMatrix embed_local(const ComplexMatrix& op, int site, const CodeSpace& code) {
  return apply_local(op, site, code, ComplexMatrix::Identity(code.dim(), code.dim()));
}

void check_compatible(const CodeSpace& code, const ErasureModel& model) {
  if (code.label == CodeLabel::thermal_conversion)
    throw DomainError("the thermal code has no erasure levels; use thermal_conversion");
  if (code.levels != model.dim())
    throw DomainError("code site dimension does not match the model's 2 + k levels");
  if (code.logical0.size() != code.dim() || code.logical1.size() != code.dim())
    throw DomainError("code vectors have the wrong dimension");
}

std::vector<ComplexMatrix> nonzero_jumps(const ErasureModel& model) {
  std::vector<ComplexMatrix> out;
  for (const auto& l : model.jump_operators())
    if (l.norm() > 0.0) out.push_back(l);
  return out;
}

ComplexVector vec2(const ComplexMatrix& m) {
  ComplexVector v(4);
  v << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
  return v;
}

ComplexMatrix hamiltonian_superop(const ComplexMatrix& h) {
  const ComplexMatrix id = ComplexMatrix::Identity(h.rows(), h.cols());
  return -kI * (kron(h, id) - kron(id, h.transpose()));
}

}  // namespace

CodeSpace hl_code(int sites, int k) {
  if (sites < 2) throw DomainError("hl_code: needs at least two sites");
  if (k < 1) throw DomainError("hl_code: needs at least one erasure level");
  CodeSpace c;
  c.label = CodeLabel::hl_plus_minus;
  c.sites = sites;
  c.levels = 2 + k;
  c.logical0 = tensor(std::vector<ComplexVector>(sites, plus_minus(c.levels, 1.0)));
  c.logical1 = tensor(std::vector<ComplexVector>(sites, plus_minus(c.levels, -1.0)));
  return c;
}

CodeSpace zero_signal_code(const ErasureModel& model, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("zero_signal_code: epsilon must lie in (0, 1)");
  if (model.k() < 1) throw DomainError("zero_signal_code: needs at least one erasure level");
  const int weak = model.Gamma1() <= model.Gamma2() ? 0 : 1;
  const int d = model.dim();
  CodeSpace c;
  c.label = CodeLabel::zero_signal;
  c.epsilon = epsilon;
  c.levels = d;
  c.ancilla = 2;
  const double big = std::sqrt(1.0 - epsilon * epsilon);
  ComplexVector a = epsilon * basis_vector(d, weak) + big * basis_vector(d, 1 - weak);
  ComplexVector b = epsilon * basis_vector(d, weak) - big * basis_vector(d, 1 - weak);
  c.logical0 = tensor({a, basis_vector(2, 0)});
  c.logical1 = tensor({b, basis_vector(2, 1)});
  return c;
}

CodeSpace dephasing_ancilla_code(int k) {
  if (k < 1) throw DomainError("dephasing_ancilla_code: needs at least one erasure level");
  CodeSpace c;
  c.label = CodeLabel::dephasing_ancilla;
  c.levels = 2 + k;
  c.ancilla = 2;
  c.logical0 = tensor({plus_minus(c.levels, 1.0), basis_vector(2, 0)});
  c.logical1 = tensor({plus_minus(c.levels, -1.0), basis_vector(2, 1)});
  return c;
}

CodeSpace thermal_code() {
  CodeSpace c;
  c.label = CodeLabel::thermal_conversion;
  c.sites = 2;
  c.levels = 2;
  c.logical0 = basis_vector(4, 0);
  c.logical1 = basis_vector(4, 3);
  return c;
}

std::vector<int> recovery_sign_flags(const ErasureModel& model) {
  std::vector<int> flags(model.k());
  for (int j = 0; j < model.k(); ++j) flags[j] = model.gamma(0, j) >= model.gamma(1, j) ? 1 : 2;
  return flags;
}

RecoveryMap default_recovery(const CodeSpace& code, const ErasureModel& model) {
  check_compatible(code, model);
  const int d = code.levels;
  const int D = code.dim();
  RecoveryMap r;
  auto row_pair = [&](const ComplexVector& from0, const ComplexVector& from1, double sign) {
    ComplexMatrix m(2, D);
    m.row(0) = from0.adjoint();
    m.row(1) = sign * from1.adjoint();
    r.rows.push_back(std::move(m));
  };
  const std::vector<int> flags = recovery_sign_flags(model);
  switch (code.label) {
    case CodeLabel::hl_plus_minus:
      // One correction per (erasure level, site); the error states of different
      // sites are orthogonal, so this is a valid trace-nonincreasing map.
      for (int j = 0; j < model.k(); ++j) {
        const double sign = flags[j] == 1 ? 1.0 : -1.0;
        for (int s = 0; s < code.sites; ++s) {
          std::vector<ComplexVector> f0(code.sites, plus_minus(d, 1.0)), f1(code.sites, plus_minus(d, -1.0));
          f0[s] = f1[s] = basis_vector(d, 2 + j);
          row_pair(tensor(f0), tensor(f1), sign);
        }
      }
      break;
    case CodeLabel::dephasing_ancilla:
      for (int j = 0; j < model.k(); ++j) {
        const double sign = flags[j] == 1 ? 1.0 : -1.0;
        row_pair(tensor({basis_vector(d, 2 + j), basis_vector(2, 0)}),
                 tensor({basis_vector(d, 2 + j), basis_vector(2, 1)}), sign);
      }
      break;
    case CodeLabel::zero_signal:
      // Corrects jumps from the strong level; jumps from the weak one become Z_L.
      for (int j = 0; j < model.k(); ++j)
        row_pair(tensor({basis_vector(d, 2 + j), basis_vector(2, 0)}),
                 tensor({basis_vector(d, 2 + j), basis_vector(2, 1)}), -1.0);
      break;
    case CodeLabel::thermal_conversion:
      break;
  }
  return r;
}

EffectiveDynamics effective_lindbladian(const CodeSpace& code, const RecoveryMap& recovery, const ErasureModel& model) {
  check_compatible(code, model);
  for (const auto& m : recovery.rows)
    if (m.rows() != 2 || m.cols() != code.dim()) throw DomainError("recovery rows do not match the code dimension");
  const ComplexMatrix v = code.isometry();
  if ((v.adjoint() * v - ComplexMatrix::Identity(2, 2)).norm() > 1e-10)
    throw DomainError("code logical states are not orthonormal");

  ComplexMatrix gv = ComplexMatrix::Zero(v.rows(), 2);
  for (int s = 0; s < code.sites; ++s) gv += apply_local(model.generator(), s, code, v);

  EffectiveDynamics eff;
  eff.generator = v.adjoint() * gv;
  eff.hamiltonian = model.omega() * eff.generator;

  struct JumpImage {
    ComplexMatrix lv, inside, norm;
    std::vector<ComplexMatrix> recovered, leak;
  };
  std::vector<JumpImage> images;
  for (const auto& l : nonzero_jumps(model)) {
    for (int s = 0; s < code.sites; ++s) {
      JumpImage im;
      im.lv = apply_local(l, s, code, v);
      im.inside = v.adjoint() * im.lv;
      im.norm = im.lv.adjoint() * im.lv;
      for (const auto& m : recovery.rows) {
        im.recovered.push_back(m * im.lv);
        im.leak.push_back((m * v) * im.inside);
      }
      images.push_back(std::move(im));
    }
  }

  eff.superoperator = ComplexMatrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      ComplexMatrix e = ComplexMatrix::Zero(2, 2);
      e(a, b) = 1.0;
      ComplexMatrix out = -kI * (eff.hamiltonian * e - e * eff.hamiltonian);
      for (const auto& im : images) {
        ComplexMatrix jump = im.inside * e * im.inside.adjoint();
        for (std::size_t r = 0; r < im.recovered.size(); ++r)
          jump += im.recovered[r] * e * im.recovered[r].adjoint() - im.leak[r] * e * im.leak[r].adjoint();
        out += jump - 0.5 * (im.norm * e + e * im.norm);
        const cplx produced = (im.lv * e * im.lv.adjoint()).trace();
        eff.trace_defect = std::max(eff.trace_defect, std::abs(jump.trace() - produced));
      }
      eff.superoperator.col(a * 2 + b) = vec2(out);
    }
  }
  eff.dissipator = eff.superoperator - hamiltonian_superop(eff.hamiltonian);

  ComplexMatrix z = ComplexMatrix::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  const ComplexMatrix dephasing = kron(z, z) - ComplexMatrix::Identity(4, 4);
  eff.dephasing_rate = -0.5 * eff.dissipator(1, 1).real();
  eff.residual = (eff.dissipator - eff.dephasing_rate * dephasing).cwiseAbs().maxCoeff();
  eff.dephasing_type = eff.residual <= 1e-9 * std::max(1.0, eff.dissipator.cwiseAbs().maxCoeff());
  return eff;
}

ComplexMatrix logical_superoperator(const EffectiveDynamics& eff, double omega) {
  return eff.dissipator + hamiltonian_superop(omega * eff.generator);
}

Optimum1d logical_ecqfi_rate(const EffectiveDynamics& eff, double omega, double rate_scale) {
  if (!(rate_scale > 0.0)) throw DomainError("logical_ecqfi_rate: rate scale must be positive");
  auto per_time = [&](double t) {
    const KrausSet ks = kraus_from_propagators(
        [&](double w) { return ComplexMatrix(expm(logical_superoperator(eff, w) * t)); }, omega, 2);
    return ecqfi(ks) / t;
  };
  return maximize_positive(per_time, 1e-3 / rate_scale, 1e2 / rate_scale, 24, 1e-8);
}

ProtocolReport qec_qfi(const CodeSpace& code, const ErasureModel& model, int N, double T) {
  return qec_qfi(code, default_recovery(code, model), model, N, T);
}

ProtocolReport qec_qfi(const CodeSpace& code, const RecoveryMap& recovery, const ErasureModel& model, int N, double T) {
  if (N < 1 || N % code.sites != 0) throw DomainError("qec_qfi: N must be a positive multiple of the code size");
  if (!(T > 0.0)) throw DomainError("qec_qfi: T must be positive");
  const EffectiveDynamics eff = effective_lindbladian(code, recovery, model);
  const double blocks = static_cast<double>(N / code.sites);
  const double gap = (eff.generator(0, 0) - eff.generator(1, 1)).real();
  const double scale = std::max(1.0, eff.generator.cwiseAbs().maxCoeff());
  const double rate_scale = std::max({model.Gamma1(), model.Gamma2(), 1e-300});

  ProtocolReport rep;
  rep.strategy = "qec";
  rep.params["N"] = N;
  rep.params["T"] = T;
  rep.params["signal_gap"] = gap;
  rep.params["gamma_eff"] = eff.dephasing_rate;
  rep.params["heisenberg"] = 0.0;
  rep.params["numeric"] = 0.0;
  if (code.label == CodeLabel::zero_signal) rep.params["epsilon"] = code.epsilon;

  if (eff.dephasing_type && std::abs(eff.generator(0, 1)) < 1e-12 * scale) {
    if (eff.dephasing_rate <= 1e-14 * rate_scale) {
      // Noiseless logical qubits prepared in a logical GHZ state across blocks.
      const double qfi = blocks * gap * blocks * gap * T * T;
      rep.rate = qfi / (static_cast<double>(N) * N * T * T);
      rep.params["qfi"] = qfi;
      rep.params["heisenberg"] = 1.0;
      return rep;
    }
    const double per_block = 0.25 * gap * gap / eff.dephasing_rate;
    rep.rate = blocks * per_block / N;
    rep.params["qfi"] = blocks * per_block * T;
    return rep;
  }

  // General logical noise: t-optimized ECQFI of the logical channel per block.
  const Optimum1d best = logical_ecqfi_rate(eff, model.omega(), rate_scale);
  rep.rate = blocks * best.value / N;
  rep.params["qfi"] = blocks * best.value * T;
  rep.params["numeric"] = 1.0;
  rep.params["t_opt"] = best.x;
  return rep;
}

ProtocolReport zero_signal_scan(const ErasureModel& model) {
  ProtocolReport rep;
  rep.strategy = "qec";
  const char* names[] = {"rate_eps_1e-2", "rate_eps_1e-3", "rate_eps_1e-4"};
  const double eps[] = {1e-2, 1e-3, 1e-4};
  for (int i = 0; i < 3; ++i) {
    const double r = qec_qfi(zero_signal_code(model, eps[i]), model, 1, 1.0).rate;
    rep.params[names[i]] = r;
    if (eps[i] == kDefaultCodeEpsilon) rep.rate = r;
  }
  const double weak = std::min(model.Gamma1(), model.Gamma2());
  rep.params["limit"] = weak > 0.0 ? 4.0 / weak : std::numeric_limits<double>::infinity();
  return rep;
}

ThermalConversion thermal_conversion(double gamma1, double gamma2, int N) {
  if (gamma1 < 0.0 || gamma2 < 0.0) throw DomainError("thermal_conversion: negative rate");
  if (N < 2 || N % 2 != 0) throw DomainError("thermal_conversion: N must be a positive even number");
  const CodeSpace code = thermal_code();
  const ComplexMatrix v = code.isometry();

  ComplexMatrix lower = ComplexMatrix::Zero(2, 2), raise = ComplexMatrix::Zero(2, 2), z = ComplexMatrix::Zero(2, 2);
  lower(0, 1) = 1.0;  // |1><2|
  raise(1, 0) = 1.0;  // |2><1|
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;

  // Leakage rate out of each logical state and the logical generator.
  double leak[2] = {0.0, 0.0};
  ComplexMatrix g = ComplexMatrix::Zero(2, 2);
  for (int s = 0; s < 2; ++s) {
    g += v.adjoint() * apply_local(z, s, code, v);
    for (const auto& [op, rate] : {std::pair{raise, gamma1}, std::pair{lower, gamma2}}) {
      const ComplexMatrix lv = std::sqrt(rate) * apply_local(op, s, code, v);
      if ((v.adjoint() * lv).norm() > 1e-12) throw NumericError("thermal_conversion: jump stays in the code space");
      const ComplexMatrix gram = lv.adjoint() * lv;
      if (std::abs(gram(0, 1)) > 1e-12) throw NumericError("thermal_conversion: jump images are not orthogonal");
      leak[0] += gram(0, 0).real();
      leak[1] += gram(1, 1).real();
    }
  }
  const double signal_scale = 0.5 * (g(0, 0) - g(1, 1)).real();

  ThermalConversion out;
  out.logical_model = ErasureModel::single(leak[0], leak[1], 0.0, 0.0);
  ProtocolReport& rep = out.report;
  rep.strategy = "ult";
  rep.params["N"] = N;
  rep.params["logical_qubits"] = N / 2;
  rep.params["logical_gamma1"] = leak[0];
  rep.params["logical_gamma2"] = leak[1];
  rep.params["signal_scale"] = signal_scale;
  const UltimateBound logical = ultimate_sigma_z(leak[0], leak[1]);
  rep.params["heisenberg"] = logical.heisenberg ? 1.0 : 0.0;
  if (logical.heisenberg) {
    // Logical GHZ over N/2 qubits with generator scaled by signal_scale.
    rep.rate = logical.value * signal_scale * signal_scale * 0.25;
  } else {
    rep.rate = logical.value * signal_scale * signal_scale * 0.5;
  }
  return out;
}

AdiabaticElimination adiabatic_elimination(double gamma2, double omega) {
  if (!(gamma2 > 0.0)) throw DomainError("adiabatic_elimination: gamma2 must be positive");
  if (omega < 0.0) throw DomainError("adiabatic_elimination: omega must be nonnegative");
  return {2.0 * omega / std::sqrt(gamma2), 4.0 * omega * omega / gamma2};
}

double adiabatic_population(const AdiabaticElimination& ae, double t) { return -std::expm1(-ae.gamma_eff * t); }

double adiabatic_population_error(double gamma2, double omega, double t_lo, double t_hi, int samples) {
  if (samples < 2 || !(t_hi > t_lo) || t_lo < 0.0) throw DomainError("adiabatic_population_error: bad time grid");
  const AdiabaticElimination ae = adiabatic_elimination(gamma2, omega);
  const ErasureModel model = ErasureModel::single(0.0, gamma2, omega, kPi / 2.0);
  ComplexVector one(2);
  one << 1.0, 0.0;
  const QuantumState start = QuantumState::pure(embed_qubit(one, model.dim()));
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / (samples - 1);
    const double exact = evolve(model, start, t).rho(2, 2).real();
    worst = std::max(worst, std::abs(exact - adiabatic_population(ae, t)));
  }
  return worst;
}

double adiabatic_effective_fi(double gamma2, double omega, double t) {
  if (!(gamma2 > 0.0) || omega < 0.0 || t < 0.0) throw DomainError("adiabatic_effective_fi: bad arguments");
  const double x = 4.0 * omega * omega * t / gamma2;
  if (x == 0.0) return 16.0 * t / gamma2;  // omega -> 0 limit of (dp)^2 / p
  const double dp = 8.0 * omega * t / gamma2 * std::exp(-x);
  return dp * dp / -std::expm1(-x);
}

double adiabatic_fi_slope(double gamma2, double omega) {
  if (omega == 0.0) return 16.0 / gamma2;
  const double t = 1e-4 * gamma2 / (4.0 * omega * omega);
  return adiabatic_effective_fi(gamma2, omega, t) / t;
}

TrotterCheck trotter_validation(const CodeSpace& code, const RecoveryMap& recovery, const ErasureModel& model,
                                const ComplexMatrix& logical_rho, double t, double dt) {
  check_compatible(code, model);
  const int D = code.dim();
  if (D > 32) throw DomainError("trotter_validation: physical dimension above 32");
  if (!(t > 0.0) || !(dt > 0.0)) throw DomainError("trotter_validation: t and dt must be positive");
  constexpr long kMaxSteps = 100000;
  long steps = static_cast<long>(std::ceil(t / dt - 1e-9));
  if (steps > kMaxSteps) steps = kMaxSteps;
  dt = t / static_cast<double>(steps);

  ComplexMatrix h = ComplexMatrix::Zero(D, D);
  std::vector<ComplexMatrix> jumps;
  for (int s = 0; s < code.sites; ++s) {
    h += model.omega() * embed_local(model.generator(), s, code);
    for (const auto& l : nonzero_jumps(model)) jumps.push_back(embed_local(l, s, code));
  }
  const ComplexMatrix id = ComplexMatrix::Identity(D, D);
  ComplexMatrix lind = hamiltonian_superop(h);
  for (const auto& l : jumps) {
    const ComplexMatrix ll = l.adjoint() * l;
    lind += kron(l, l.conjugate()) - 0.5 * kron(ll, id) - 0.5 * kron(id, ll.transpose());
  }
  const ComplexMatrix step = expm(lind * dt);
  const ComplexMatrix v = code.isometry();
  const ComplexMatrix proj = v * v.adjoint();

  ComplexMatrix rho = v * logical_rho * v.adjoint();
  TrotterCheck out;
  out.dt = dt;
  out.steps = steps;
  for (long n = 0; n < steps; ++n) {
    rho = unvec(step * vec(rho), D);
    const double before = rho.trace().real();
    const ComplexMatrix inside = proj * rho * proj;
    const ComplexMatrix outside = rho - inside;
    ComplexMatrix restored = ComplexMatrix::Zero(2, 2);
    for (const auto& m : recovery.rows) restored += m * outside * m.adjoint();
    rho = inside + v * restored * v.adjoint();
    out.leaked += before - rho.trace().real();
  }

  const EffectiveDynamics eff = effective_lindbladian(code, recovery, model);
  const ComplexMatrix logical = expm(eff.superoperator * t) * vec2(logical_rho);
  ComplexMatrix expected(2, 2);
  expected << logical(0), logical(1), logical(2), logical(3);
  out.error = (v.adjoint() * rho * v - expected).norm();
  out.bound = 5.0 * dt * std::max(model.Gamma1(), model.Gamma2()) * t;
  return out;
}

}  // namespace erasure
