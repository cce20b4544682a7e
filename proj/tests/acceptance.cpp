// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "erasure/asymptotic_bounds.hpp"
#include "erasure/channel_bounds.hpp"
#include "erasure/continuous_detection.hpp"
#include "erasure/entangled_iss.hpp"
#include "erasure/erasure_model.hpp"
#include "erasure/optimize.hpp"
#include "erasure/qec_protocols.hpp"
#include "erasure/spin_squeezing.hpp"

#include <boost/math/special_functions/lambert_w.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace erasure;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Eigen::MatrixXd column(double a, double b) {
  Eigen::MatrixXd g(2, 1);
  g << a, b;
  return g;
}

void sigma_z_ultimate(Verdict& v) {
  const double rates[] = {0.0, 0.15, 0.4, 0.9, 1.6};
  double worst_closed = 0.0, worst_numeric = 0.0;
  for (double g1 : rates)
    for (double g2 : rates) {
      if (g1 + g2 == 0.0) continue;
      const double s = std::sqrt(g1) + std::sqrt(g2);
      const double closed = 16.0 / (s * s);
      worst_closed = std::max(worst_closed, rel(ultimate_sigma_z(g1, g2).value, closed));
      worst_numeric = std::max(worst_numeric, rel(ultimate_numeric(ErasureModel::single(g1, g2, 0.5, 0.0)).bound.value, closed));
    }
  v.require(worst_closed <= 1e-15, "closed form");
  v.require(worst_numeric <= 1e-6, "numeric minimax within 1e-6");
  v.detail << "closed-form rel err " << worst_closed << ", numeric minimax rel err " << worst_numeric << " on 5x5 grid";
}

void sigma_z_product(Verdict& v) {
  double worst = 0.0;
  for (double g : {0.5, 1.0, 2.0}) worst = std::max(worst, rel(product_bound_sigma_z(g, g).rate, 4.0 / (std::exp(1.0) * g)));
  const ProtocolReport edge = product_bound_sigma_z(0.0, 1.0);
  const double t_expect = 1.0 + 2.0 * boost::math::lambert_w0(0.5 / std::sqrt(std::exp(1.0)));
  v.require(worst <= 1e-9, "4/(e Gamma) within 1e-9");
  v.require(rel(edge.rate, 2.47) <= 0.005, "2.47/Gamma_max within 0.5%");
  v.require(std::abs(edge.param("t_opt") - t_expect) <= 1e-6, "t_opt within 1e-6");
  v.detail << "symmetric rel err " << worst << "; Gamma_min=0 rate " << edge.rate << ", t_opt " << edge.param("t_opt")
           << " vs " << t_expect;
}

void gain_interval(Verdict& v) {
  double hi = 0.0, lo = 1e300;
  auto gain = [](double r) { return ultimate_sigma_z(r, 1.0).value / product_bound_sigma_z(r, 1.0).rate; };
  std::vector<double> ratios{0.0};
  for (int i = 0; i <= 240; ++i) ratios.push_back(std::pow(10.0, -8.0 + 8.0 * i / 240.0));
  for (double r : ratios) {
    const double g = gain(r);
    hi = std::max(hi, g);
    lo = std::min(lo, g);
  }
  v.require(hi >= 6.4 && hi <= 6.55, "max in [6.4, 6.55]");
  v.require(lo >= 2.65 && lo <= 2.75, "min in [2.65, 2.75]");
  v.detail << "ult/prod over Gamma_min/Gamma_max in [0,1]: max " << hi << ", min " << lo;
}

void cd_sigma_z(Verdict& v) {
  const double s1 = cd_sigma_z_strategy1(1.0, 1.0).rate;
  const double s1_edge = cd_sigma_z_strategy1(0.0, 1.0).rate;
  const double s2 = cd_sigma_z_strategy2(1.0).rate;
  const double pair = cd_two_qubit(1.0).rate;
  v.require(rel(s1, 2.6) <= 0.01, "strategy 1 symmetric");
  v.require(rel(s1_edge, 4.16) <= 0.01, "strategy 1 Gamma_min=0");
  v.require(rel(s2, 2.4) <= 0.01, "strategy 2");
  v.require(rel(pair, 2.72) <= 0.01, "two-qubit");
  v.detail << "strategy1 " << s1 << ", strategy1(Gamma_min=0) " << s1_edge << ", strategy2 " << s2 << ", two-qubit " << pair;
}

void renewal_vs_monte_carlo(Verdict& v) {
  const ProtocolReport s1 = cd_sigma_z_strategy1(1.0, 1.0);
  const CdStrategy strat = CdStrategy::after_reset(s1.param("tau_opt"), s1.param("p_opt"));
  const double time1 = 1.05e6 / 16 * 0.5 * s1.param("tau_opt");  // per trajectory
  const CycleStats a = monte_carlo_cd(ErasureModel::single(1.0, 1.0, 0.3, 0.0), strat, time1, 16, 2024, 0);
  const ProtocolReport sx = cd_sigma_x(1.0, 0.2, kInfiniteTau);
  const double time2 = 1.05e6 / 16 * sx.param("cycle_time");
  const CycleStats b = monte_carlo_cd(ErasureModel::single(0.0, 1.0, 0.2, kPi / 2), CdStrategy::decay_time(), time2, 16, 2025, 0);
  const double za = (a.rate - s1.rate) / a.rate_stderr, zb = (b.rate - sx.rate) / b.rate_stderr;
  v.require(a.cycles >= 1000000 && b.cycles >= 1000000, "10^6 cycles");
  v.require(std::abs(za) <= 3.0, "strategy 1 within 3 s.e.");
  v.require(std::abs(zb) <= 3.0, "sigma_x decay-time within 3 s.e.");
  v.detail << "strategy1: MC " << a.rate << " +- " << a.rate_stderr << " vs " << s1.rate << " (z " << za << ", " << a.cycles
           << " cycles); sigma_x: MC " << b.rate << " +- " << b.rate_stderr << " vs " << sx.rate << " (z " << zb << ", "
           << b.cycles << " cycles)";
}

void sigma_x_cd_exact(Verdict& v) {
  double worst = 0.0;
  for (double g : {0.5, 1.0})
    for (double w : {0.01, 0.1, 1.0}) worst = std::max(worst, std::abs(cd_sigma_x(g, w, kInfiniteTau).rate - 16.0 / g));
  v.require(worst <= 1e-10, "16/gamma to 1e-10");
  v.detail << "max |rate - 16/gamma| over omega in {0.01, 0.1, 1} = " << worst;
}

void sigma_x_ultimate(Verdict& v) {
  double worst = 0.0;
  for (auto [a, b] : {std::pair{0.3, 1.0}, std::pair{2.0, 0.5}, std::pair{0.7, 0.7}})
    worst = std::max(worst, rel(ultimate_sigma_x(column(a, b)).value, 4.0 / std::min(a, b)));
  const bool hl = ultimate_sigma_x(column(0.0, 1.0)).heisenberg && ultimate_sigma_x(column(1.0, 0.0)).heisenberg &&
                  !ultimate_sigma_x(column(0.2, 1.0)).heisenberg;
  // Two erasure levels, gamma_min on the diagonal and gamma_max off it.
  const double gmin = 0.5;
  bool monotone = true, inside = true;
  double last = 1e300, first = 0.0, final = 0.0;
  for (int i = 0; i <= 60; ++i) {
    const double r = std::pow(10.0, 6.0 * i / 60.0);
    Eigen::MatrixXd g(2, 2);
    g << gmin, r * gmin, r * gmin, gmin;
    const double val = ultimate_sigma_x(g).value;
    monotone = monotone && val <= last + 1e-12;
    inside = inside && val >= 1.0 / gmin - 1e-9 && val <= 2.0 / gmin + 1e-9;
    if (i == 0) first = val;
    final = val;
    last = val;
  }
  v.require(worst <= 1e-9, "single erasure 4/min");
  v.require(hl, "HL marker");
  v.require(monotone && inside, "two-erasure monotone between 1/gmin and 2/gmin");
  v.require(rel(first, 2.0 / gmin) <= 1e-8 && rel(final, 1.0 / gmin) <= 1e-3, "two-erasure end points");
  v.detail << "single-erasure rel err " << worst << "; two-erasure from " << first * gmin << "/gmin to " << final * gmin
           << "/gmin over ratio 1..1e6";
}

void general_generator(Verdict& v) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  int inside = 0, total = 0;
  for (double theta : {kPi / 8, 3 * kPi / 8})
    for (int i = 0; i < 20; ++i) {
      const double g1 = u(rng), g2 = u(rng);
      const UltimateBound b = ultimate_general_g(theta, g1, g2);
      const double numeric = ultimate_numeric(ErasureModel::single(g1, g2, 0.3, theta)).bound.value;
      ++total;
      if (numeric >= b.lower - 1e-9 && numeric <= b.upper + 1e-9) ++inside;
    }
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double g1 = u(rng), g2 = u(rng);
    worst = std::max(worst, rel(ultimate_general_g(0.0, g1, g2).value, ultimate_sigma_z(g1, g2).value));
    worst = std::max(worst, rel(ultimate_general_g(kPi / 2, g1, g2).value, ultimate_sigma_x(column(g1, g2)).value));
  }
  v.require(inside == total, "numeric inside bracket");
  v.require(worst <= 1e-8, "closed forms at 0 and pi/2");
  v.detail << inside << "/" << total << " numeric minimax values inside [lower, upper]; endpoint rel err " << worst;
}

void squeezing_mechanism(Verdict& v) {
  double worst = 0.0;
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{0.0, 1.0}, std::pair{0.3, 1.2}})
    worst = std::max(worst, rel(squeezed_rate(1000, a, b).rate, ultimate_sigma_z(a, b).value));
  const double exact = squeezed_rate_exact(40, 1.0, 1.0).rate;
  const double limit = squeezed_rate(40, 1.0, 1.0).rate;
  v.require(worst <= 1e-12, "squeezed_rate(inf) = ultimate");
  v.require(exact >= 0.8 * limit, "N=40 exact >= 80% of asymptotic");
  v.detail << "asymptotic rel err " << worst << "; exact N=40 rate " << exact << " = " << 100.0 * exact / limit
           << "% of " << limit;
}

void qec(Verdict& v) {
  ComplexMatrix z = ComplexMatrix::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  const double w = 0.3;
  const ErasureModel hl_model = ErasureModel::single(1.0, 0.0, w, kPi / 2);
  const CodeSpace hl = hl_code(2, 1);
  const EffectiveDynamics e_hl = effective_lindbladian(hl, default_recovery(hl, hl_model), hl_model);
  const double hl_res = std::max(e_hl.dissipator.norm(), (e_hl.hamiltonian - 2.0 * w * z).norm());

  const ErasureModel zs_model = ErasureModel::single(0.5, 1.0, w, kPi / 2);
  const double eps = 0.01;
  const CodeSpace zs = zero_signal_code(zs_model, eps);
  const EffectiveDynamics e_zs = effective_lindbladian(zs, default_recovery(zs, zs_model), zs_model);
  const double zs_err = std::max((e_zs.hamiltonian - 2.0 * w * eps * std::sqrt(1 - eps * eps) * z).norm(),
                                 std::abs(e_zs.dephasing_rate - 0.5 * eps * eps));

  Eigen::MatrixXd g(2, 2);
  g << 0.1, 0.9, 0.5, 0.3;
  const ErasureModel anc_model(w, kPi / 2, g);
  const CodeSpace anc = dephasing_ancilla_code(2);
  const EffectiveDynamics e_anc = effective_lindbladian(anc, default_recovery(anc, anc_model), anc_model);
  const double anc_err = std::max(std::abs(e_anc.dephasing_rate - 0.2), std::abs(qec_qfi(anc, anc_model, 2, 1.0).rate - 5.0));

  bool trotter_ok = true;
  std::ostringstream tr;
  const ComplexMatrix plus = ComplexMatrix::Constant(2, 2, 0.5);
  for (const auto& [code, model] : {std::pair{hl, hl_model}, std::pair{zs, zs_model}, std::pair{anc, anc_model}}) {
    const double rate = std::max(model.Gamma1(), model.Gamma2());
    const TrotterCheck c = trotter_validation(code, default_recovery(code, model), model, plus, 2.0 / rate, 1e-3 / rate);
    trotter_ok = trotter_ok && c.error < c.bound;
    tr << c.error << "/" << c.bound << " ";
  }
  v.require(hl_res < 1e-10, "HL code");
  v.require(zs_err < 1e-10, "zero-signal code");
  v.require(anc_err < 1e-10, "dephasing-ancilla code");
  v.require(trotter_ok, "trotter error below 5 dt rate t");
  v.detail << "HL residual " << hl_res << ", zero-signal err " << zs_err << ", ancilla err " << anc_err
           << ", trotter error/bound " << tr.str();
}

void adiabatic(Verdict& v) {
  const double err = adiabatic_population_error(1.0, 0.04, 5.0, 50.0);
  const double slope = adiabatic_fi_slope(1.0, 0.04);
  v.require(err < 5e-3, "|e> population error < 5e-3");
  v.require(rel(slope, 16.0) <= 0.02, "FI slope 16/gamma within 2%");
  v.detail << "max population error on [5,50] " << err << ", effective FI slope " << slope;
}

void iss(Verdict& v) {
  double n1 = 0.0;
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{0.2, 1.0}})
    for (double t : {0.6, 1.4}) {
      const double q = iss_optimize(build_bosonic(1, a, b, 1.0), t, 1e-12, 2000).qfi;
      n1 = std::max(n1, rel(q, ecqfi(kraus(ErasureModel::single(a, b, 0.4, 0.0), t))));
    }

  // Brute force over all two-probe pure inputs through the collective-spin QFI.
  double n2 = 0.0;
  for (auto [a, b, t] : {std::tuple{1.0, 1.0, 1.0}, std::tuple{0.2, 1.0, 1.3}}) {
    auto objective = [&](const std::vector<double>& x) {
      ComplexVector s(3);
      s << cplx(x[0], 0.0), cplx(x[1], x[2]), cplx(x[3], x[4]);
      return -collective_qfi(s.normalized(), a, b, t);
    };
    double brute = 0.0;
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd;
    for (int s = 0; s < 6; ++s) {
      std::vector<double> x(5);
      for (auto& e : x) e = nd(rng);
      NelderMeadResult r = nelder_mead_min(objective, x, 0.3, 1e-14, 6000);
      r = nelder_mead_min(objective, r.x, 0.02, 1e-15, 6000);
      brute = std::max(brute, -r.value);
    }
    n2 = std::max(n2, rel(iss_optimize(build_bosonic(2, a, b, 1.0), t, 1e-12, 2000).qfi, brute));
  }

  bool monotone = true, hierarchy = true;
  std::ostringstream rates;
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{0.1, 1.0}}) {
    const double prod = product_bound_sigma_z(a, b).rate, ult = ultimate_sigma_z(a, b).value;
    rates << "(" << a << "," << b << "):";
    for (int N = 1; N <= 8; ++N) {
      const IssRate r = iss_rate(N, a, b);
      for (std::size_t i = 1; i < r.best.history.size(); ++i) monotone = monotone && r.best.history[i] >= r.best.history[i - 1];
      hierarchy = hierarchy && prod <= r.report.rate + 1e-9 && r.report.rate <= ult + 1e-6;
      rates << " " << r.report.rate;
    }
    rates << " ";
  }
  v.require(n1 <= 1e-6, "N=1 vs ECQFI");
  v.require(n2 <= 1e-5, "N=2 vs brute force");
  v.require(monotone, "monotone iterations");
  v.require(hierarchy, "product <= ISS <= ultimate");
  v.detail << "N=1 rel err " << n1 << ", N=2 rel err " << n2 << "; rates N=1..8 " << rates.str();
}

void properties(Verdict& v) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> nd;
  double trace = 0.0, negativity = 0.0, semigroup = 0.0, completeness = 0.0, deriv = 0.0;
  Eigen::MatrixXd g(2, 2);
  g << 0.3, 0.8, 0.6, 0.1;
  for (const ErasureModel& m : {ErasureModel::single(0.4, 1.1, 0.7, 0.3), ErasureModel(0.5, 1.2, g)}) {
    ComplexVector q(2);
    q << cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng));
    const QuantumState s0 = QuantumState::pure(embed_qubit(q.normalized(), m.dim()));
    for (double t : {0.3, 1.7}) {
      const QuantumState s = evolve(m, s0, t);
      trace = std::max(trace, std::abs(s.rho.trace().real() - 1.0));
      negativity = std::max(negativity, -Eigen::SelfAdjointEigenSolver<ComplexMatrix>(s.rho).eigenvalues().minCoeff());
      semigroup = std::max(semigroup, (evolve(m, evolve(m, s0, 0.5 * t), 0.5 * t).rho - s.rho).norm());
      completeness = std::max(completeness, kraus(m, t).completeness_error());
      const double h = fd_step(m.omega());
      const ComplexMatrix fd = (evolve(m.with_omega(m.omega() + h), s0, t).rho - evolve(m.with_omega(m.omega() - h), s0, t).rho) / (2 * h);
      const ComplexMatrix exact = evolve_derivative(m, s0, t);
      deriv = std::max(deriv, (fd - exact).norm() / exact.norm());
    }
  }
  const ErasureModel mc_model = ErasureModel::single(0.5, 1.0, 0.3, 0.0);
  const CdStrategy strat = CdStrategy::after_reset(1.0, 0.4);
  std::ostringstream d1, d4;
  const CycleStats a = monte_carlo_cd(mc_model, strat, 5e3, 8, 77, 1, &d1);
  const CycleStats b = monte_carlo_cd(mc_model, strat, 5e3, 8, 77, 4, &d4);
  const bool deterministic = a.rate == b.rate && a.cycles == b.cycles && d1.str() == d4.str();
  v.require(trace < 1e-10 && negativity < 1e-10 && semigroup < 1e-10, "trace/positivity/semigroup");
  v.require(completeness < 1e-10, "Kraus completeness");
  v.require(deriv < 1e-5, "finite-difference derivative");
  v.require(deterministic, "seeded Monte Carlo determinism");
  v.detail << "trace " << trace << ", negativity " << negativity << ", semigroup " << semigroup << ", completeness "
           << completeness << ", derivative rel err " << deriv << ", MC deterministic " << (deterministic ? "yes" : "no");
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Verdict&)>> criteria[] = {
      {"sigma_z ultimate bound", sigma_z_ultimate},
      {"sigma_z product bound", sigma_z_product},
      {"gain interval", gain_interval},
      {"continuous detection sigma_z", cd_sigma_z},
      {"renewal-reward vs Monte Carlo", renewal_vs_monte_carlo},
      {"sigma_x detection exactness", sigma_x_cd_exact},
      {"sigma_x ultimate bound", sigma_x_ultimate},
      {"general-generator bound", general_generator},
      {"squeezing mechanism", squeezing_mechanism},
      {"error-correction codes", qec},
      {"adiabatic elimination", adiabatic},
      {"iterative see-saw", iss},
      {"property suite", properties},
  };
  int failures = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      check(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("%s  %2d  %-32s %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", index, name, v.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
