#include "erasure/continuous_detection.hpp"

#include "erasure/optimize.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

namespace erasure {

const char* cd_kind_name(CdKind kind) {
  switch (kind) {
    case CdKind::fixed_tau_after_reset:
      return "fixed_tau_after_reset";
    case CdKind::fixed_tau_lapses:
      return "fixed_tau_lapses";
    case CdKind::decay_time_sigma_x:
      return "decay_time_sigma_x";
    case CdKind::ghz:
      return "ghz";
    case CdKind::two_qubit_entangled:
      return "two_qubit_entangled";
  }
  return "unknown";
}

namespace {

ComplexVector qubit_input(double p) {
  if (p < 0.0 || p > 1.0) throw DomainError("cd strategy: population must lie in [0, 1]");
  ComplexVector v(2);
  v << std::sqrt(p), std::sqrt(1.0 - p);
  return v;
}

cplx sinhc(cplx z) {
  if (std::abs(z) < 1e-4) return 1.0 + z * z / 6.0 + z * z * z * z / 120.0;
  return std::sinh(z) / z;
}

// exp(a) for a 2x2 matrix: with b = a - tr(a)/2, b^2 = -det(b) I.
ComplexMatrix exp2(const ComplexMatrix& a) {
  const cplx m = 0.5 * (a(0, 0) + a(1, 1));
  ComplexMatrix b = a;
  b(0, 0) -= m;
  b(1, 1) -= m;
  const cplx delta = std::sqrt(-(b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0)));
  if (std::abs(delta) < 1.0)
    return std::exp(m) * (std::cosh(delta) * ComplexMatrix::Identity(2, 2) + sinhc(delta) * b);
  // Fold e^m into the exponentials so long times underflow instead of giving inf * 0.
  const cplx up = std::exp(m + delta), down = std::exp(m - delta);
  return 0.5 * (up + down) * ComplexMatrix::Identity(2, 2) + (0.5 * (up - down) / delta) * b;
}

// Qubit-block no-jump generator -iH - (1/2) diag(Gamma1, Gamma2).
ComplexMatrix no_jump_generator(const ErasureModel& model) {
  ComplexMatrix a = -kI * model.hamiltonian().topLeftCorner(2, 2);
  a(0, 0) -= 0.5 * model.Gamma1();
  a(1, 1) -= 0.5 * model.Gamma2();
  return a;
}

double positive_or_throw(double v, const char* what) {
  if (!(v > 0.0)) throw DomainError(what);
  return v;
}

double integrate(const std::function<double(double)>& f, double a, double b, const char* what) {
  using rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  // The stopping rule is relative only, so an integrand made of roundoff
  // (e.g. decay branches that carry no signal) would refine forever. Convert
  // an absolute floor of 1e-13 into a relative tolerance via a coarse L1 pass.
  double err = 0.0, l1 = 0.0;
  rule::integrate(f, a, b, 0, 1e-12, &err, &l1);
  const double tol = std::min(1.0, std::max(1e-12, 1e-13 / std::max(l1, 1e-300)));
  const double v = rule::integrate(f, a, b, 20, tol, &err);
  if (!std::isfinite(v) || err > 1e-10 + 1e-9 * std::abs(v)) {
    std::ostringstream os;
    os << what << ": quadrature did not converge (estimate " << v << ", error " << err << ")";
    throw NumericError(os.str());
  }
  return v;
}

}  // namespace

CdStrategy CdStrategy::after_reset(double tau, double p) {
  return {CdKind::fixed_tau_after_reset, positive_or_throw(tau, "cd strategy: tau must be positive"), qubit_input(p)};
}

CdStrategy CdStrategy::lapses(double tau, double p) {
  return {CdKind::fixed_tau_lapses, positive_or_throw(tau, "cd strategy: tau must be positive"), qubit_input(p)};
}

CdStrategy CdStrategy::decay_time(double tau) {
  return {CdKind::decay_time_sigma_x, positive_or_throw(tau, "cd strategy: tau must be positive"), qubit_input(1.0)};
}

double cd_strategy1_rate(double gamma1, double gamma2, double tau) {
  auto integral = [tau](double g) { return g == 0.0 ? tau : std::expm1(g * tau) / g; };
  const double s = std::sqrt(integral(gamma1)) + std::sqrt(integral(gamma2));
  return 16.0 * tau * tau / (s * s);
}

double cd_strategy1_p_opt(double gamma1, double gamma2, double tau) {
  auto lm = [tau](double g) { return std::exp(-g * tau) * (g == 0.0 ? tau : -std::expm1(-g * tau) / g); };
  return 1.0 / (1.0 + std::sqrt(lm(gamma1) / lm(gamma2)));
}

ProtocolReport cd_sigma_z_strategy1(double gamma1, double gamma2) {
  if (gamma1 < 0.0 || gamma2 < 0.0 || !(gamma1 + gamma2 > 0.0))
    throw DomainError("cd_sigma_z_strategy1: rates must be nonnegative with a positive sum");
  const double gmax = std::max(gamma1, gamma2);
  const Optimum1d best =
      maximize_positive([&](double tau) { return cd_strategy1_rate(gamma1, gamma2, tau); }, 1e-4 / gmax, 20.0 / gmax);
  ProtocolReport rep;
  rep.strategy = "cd";
  rep.rate = best.value;
  rep.params["tau_opt"] = best.x;
  rep.params["p_opt"] = cd_strategy1_p_opt(gamma1, gamma2, best.x);
  return rep;
}

double cd_strategy2_rate(double gamma, double tau) {
  const double x = gamma * tau;
  return 8.0 / gamma / x * (-std::expm1(-x) - x * std::exp(-x));
}

ProtocolReport cd_sigma_z_strategy2(double gamma) {
  positive_or_throw(gamma, "cd_sigma_z_strategy2: rate must be positive");
  const Optimum1d best =
      maximize_positive([&](double tau) { return cd_strategy2_rate(gamma, tau); }, 1e-4 / gamma, 20.0 / gamma);
  ProtocolReport rep;
  rep.strategy = "cd";
  rep.rate = best.value;
  rep.params["tau_opt"] = best.x;
  return rep;
}

double sigma_x_decay_density(double gamma, double omega, double t) {
  const cplx kappa = std::sqrt(cplx(gamma * gamma - 16.0 * omega * omega));
  const cplx s = 0.25 * t * sinhc(0.25 * kappa * t);
  return (16.0 * std::exp(-0.5 * gamma * t) * gamma * omega * omega * s * s).real();
}

double sigma_x_survival(double gamma, double omega, double t) {
  const cplx kappa = std::sqrt(cplx(gamma * gamma - 16.0 * omega * omega));
  const cplx z = 0.5 * kappa * t;
  const cplx half = sinhc(0.5 * z);
  const cplx cosh_term = 0.5 * (0.5 * t) * (0.5 * t) * half * half;  // (cosh z - 1) / kappa^2
  const cplx sinh_term = 0.5 * t * sinhc(z);                          // sinh z / kappa
  return (std::exp(-0.5 * gamma * t) * (1.0 + gamma * gamma * cosh_term + gamma * sinh_term)).real();
}

RenewalTerms renewal_after_reset(const ErasureModel& model, const ComplexVector& input, double tau) {
  if (input.size() != 2 || std::abs(input.norm() - 1.0) > 1e-9)
    throw DomainError("renewal_after_reset: input must be a normalized qubit vector");
  positive_or_throw(tau, "renewal_after_reset: tau must be positive");
  const ComplexMatrix a = no_jump_generator(model);
  const ComplexMatrix da = -kI * model.generator().topLeftCorner(2, 2);
  const Eigen::MatrixXd& g = model.gamma();

  auto propagate = [&](double t, ComplexVector& psi, ComplexVector& dpsi) {
    ComplexMatrix big = ComplexMatrix::Zero(4, 4);
    big.topLeftCorner(2, 2) = a * t;
    big.bottomRightCorner(2, 2) = a * t;
    big.topRightCorner(2, 2) = da * t;
    const ComplexMatrix e = expm(big);
    psi = e.topLeftCorner(2, 2) * input;
    dpsi = e.topRightCorner(2, 2) * input;
  };

  auto decay_fi = [&](double t) {
    ComplexVector psi, dpsi;
    propagate(t, psi, dpsi);
    double total = 0.0;
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      double p = 0.0, dp = 0.0;
      for (int i = 0; i < 2; ++i) {
        p += g(i, j) * std::norm(psi(i));
        dp += g(i, j) * 2.0 * (std::conj(psi(i)) * dpsi(i)).real();
      }
      if (p > 1e-300) total += dp * dp / p;
    }
    return total;
  };
  auto survival = [&](double t) { return (exp2(a * t) * input).squaredNorm(); };

  RenewalTerms out;
  if (std::isinf(tau)) {
    if (!(model.Gamma1() + model.Gamma2() > 0.0)) throw DomainError("renewal_after_reset: cycles never terminate");
    out.cycle_fi = integrate(decay_fi, 0.0, std::numeric_limits<double>::infinity(), "renewal_after_reset");
    out.cycle_time = integrate(survival, 0.0, std::numeric_limits<double>::infinity(), "renewal_after_reset");
    if (!std::isfinite(out.cycle_time)) throw DomainError("renewal_after_reset: cycles never terminate");
    return out;
  }
  out.cycle_fi = integrate(decay_fi, 0.0, tau, "renewal_after_reset");
  out.cycle_time = integrate(survival, 0.0, tau, "renewal_after_reset");

  ComplexVector psi, dpsi;
  propagate(tau, psi, dpsi);
  const double s = psi.squaredNorm();
  if (s > 1e-300) {
    const double ds = 2.0 * psi.dot(dpsi).real();
    const ComplexVector unit = psi / std::sqrt(s);
    const ComplexVector dunit = dpsi / std::sqrt(s) - psi * (0.5 * ds / std::pow(s, 1.5));
    out.cycle_fi += ds * ds / s + s * pure_state_qfi(unit, dunit);
  }
  return out;
}

ProtocolReport cd_sigma_x(double gamma, double omega, double tau) {
  positive_or_throw(gamma, "cd_sigma_x: gamma must be positive");
  positive_or_throw(omega, "cd_sigma_x: omega must be positive");
  positive_or_throw(tau, "cd_sigma_x: tau must be positive");
  ProtocolReport rep;
  rep.strategy = "cd";
  rep.params["omega"] = omega;
  if (std::isinf(tau)) {
    const double w2 = omega * omega, g2 = gamma * gamma;
    const double cycle_fi = (4.0 * g2 + 32.0 * w2) / (w2 * g2);
    const double cycle_time = (g2 + 8.0 * w2) / (4.0 * w2 * gamma);
    rep.rate = cycle_fi / cycle_time;
    rep.params["cycle_fi"] = cycle_fi;
    rep.params["cycle_time"] = cycle_time;
    rep.params["tau_infinite"] = 1.0;
    return rep;
  }
  ComplexVector one(2);
  one << 1.0, 0.0;
  const RenewalTerms terms = renewal_after_reset(ErasureModel::single(0.0, gamma, omega, kPi / 2.0), one, tau);
  rep.rate = terms.rate();
  rep.params["cycle_fi"] = terms.cycle_fi;
  rep.params["cycle_time"] = terms.cycle_time;
  rep.params["tau"] = tau;
  rep.params["tau_infinite"] = 0.0;
  return rep;
}

ProtocolReport cd_ghz(int N, double gamma) {
  if (N < 1) throw DomainError("cd_ghz: N must be positive");
  positive_or_throw(gamma, "cd_ghz: gamma must be positive");
  const double g = N * gamma;
  // N^2 * 4 g tau^2 e^{-g tau} / (1 - e^{-g tau}) per T, divided by N probes.
  auto rate = [&](double tau) { return N * 4.0 * g * tau * tau / std::expm1(g * tau); };
  const Optimum1d best = maximize_positive(rate, 1e-4 / g, 20.0 / g);
  ProtocolReport rep;
  rep.strategy = "cd";
  rep.rate = best.value;
  rep.params["N"] = N;
  rep.params["tau_opt"] = best.x;
  return rep;
}

double cd_two_qubit_rate(double gamma, double theta, double tau) {
  const double x = 2.0 * gamma * tau;
  const double c = std::cos(theta);
  const double decayed = -std::expm1(-x) - std::exp(-x) * (x + 0.5 * x * x);
  const double cycle_fi = std::exp(-x) * tau * tau * 16.0 * c * c + 2.0 * std::sin(2.0 * theta) / (gamma * gamma) * decayed;
  const double cycle_time = -std::expm1(-x) / (2.0 * gamma);
  return 0.5 * cycle_fi / cycle_time;
}

ProtocolReport cd_two_qubit(double gamma) {
  positive_or_throw(gamma, "cd_two_qubit: gamma must be positive");
  double best = -1.0, best_theta = 0.0, best_tau = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double theta = 0.5 * kPi * i / 59.0;
    for (int j = 0; j < 60; ++j) {
      const double tau = std::exp(std::log(0.01) + j * std::log(1000.0) / 59.0) / gamma;
      const double v = cd_two_qubit_rate(gamma, theta, tau);
      if (v > best) {
        best = v;
        best_theta = theta;
        best_tau = tau;
      }
    }
  }
  auto objective = [&](const std::vector<double>& x) {
    const double theta = std::clamp(x[0], 0.0, 0.5 * kPi);
    return -cd_two_qubit_rate(gamma, theta, std::exp(x[1]));
  };
  const NelderMeadResult nm = nelder_mead_min(objective, {best_theta, std::log(best_tau)}, 0.05);
  ProtocolReport rep;
  rep.strategy = "cd";
  rep.rate = -nm.value;
  rep.params["theta_opt"] = std::clamp(nm.x[0], 0.0, 0.5 * kPi);
  rep.params["tau_opt"] = std::exp(nm.x[1]);
  return rep;
}

namespace {

struct Accumulator {
  std::int64_t n = 0;
  double t = 0.0, f = 0.0, tt = 0.0, ff = 0.0, tf = 0.0;

  void add(double duration, double fi) {
    ++n;
    t += duration;
    f += fi;
    tt += duration * duration;
    ff += fi * fi;
    tf += duration * fi;
  }
  void merge(const Accumulator& o) {
    n += o.n;
    t += o.t;
    f += o.f;
    tt += o.tt;
    ff += o.ff;
    tf += o.tf;
  }
};

// No-jump evolution of the qubit block at omega and omega +- delta.
class TrajectoryModel {
 public:
  TrajectoryModel(const ErasureModel& model, const ComplexVector& input, double delta)
      : input_(input), gamma_(model.gamma()), delta_(delta) {
    for (int s = -1; s <= 1; ++s) gen_[s + 1] = no_jump_generator(model.with_omega(model.omega() + s * delta));
  }

  // s = -1, 0, +1 selects omega - delta, omega, omega + delta.
  ComplexVector state(int s, double t) const { return exp2(gen_[s + 1] * t) * input_; }
  double survival(double t) const { return state(0, t).squaredNorm(); }

  double level_density(int s, double t, Eigen::Index j) const {
    const ComplexVector psi = state(s, t);
    return gamma_(0, j) * std::norm(psi(0)) + gamma_(1, j) * std::norm(psi(1));
  }
  Eigen::Index levels() const { return gamma_.cols(); }

  double log_derivative(double minus, double center, double plus) const {
    return (plus - minus) / (2.0 * delta_ * center);
  }

  // Optimal projective basis for the normalized state after t without decay.
  ComplexMatrix measurement_basis(double t) const {
    auto normalized = [&](int s) {
      const ComplexVector psi = state(s, t);
      return ComplexMatrix(psi * psi.adjoint() / psi.squaredNorm());
    };
    const ComplexMatrix rho = normalized(0);
    const ComplexMatrix drho = (normalized(1) - normalized(-1)) / (2.0 * delta_);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sld(rho, drho));
    return es.eigenvectors();
  }

 private:
  ComplexVector input_;
  Eigen::MatrixXd gamma_;
  double delta_;
  ComplexMatrix gen_[3];
};

struct Outcome {
  bool decayed = false;
  double time = 0.0;
  double score = 0.0;
  std::string label;
};

class CycleSampler {
 public:
  CycleSampler(const TrajectoryModel& tm, std::mt19937_64& rng) : tm_(tm), rng_(rng) {}

  // Decay within [0, horizon] or survival to horizon (no score for survival).
  Outcome next_decay(double horizon) {
    Outcome o;
    const double u = uniform_(rng_);
    double hi = horizon;
    if (std::isinf(horizon)) throw DomainError("monte_carlo_cd: unbounded horizon");
    if (tm_.survival(hi) >= u) {
      o.time = horizon;
      return o;
    }
    auto f = [&](double t) { return tm_.survival(t) - u; };
    std::uintmax_t iters = 200;
    const auto root =
        boost::math::tools::toms748_solve(f, 0.0, hi, 1.0 - u, tm_.survival(hi) - u,
                                          boost::math::tools::eps_tolerance<double>(50), iters);
    o.decayed = true;
    o.time = 0.5 * (root.first + root.second);

    std::vector<double> w(tm_.levels());
    double total = 0.0;
    for (Eigen::Index j = 0; j < tm_.levels(); ++j) total += (w[j] = tm_.level_density(0, o.time, j));
    double pick = uniform_(rng_) * total;
    Eigen::Index j = 0;
    while (j + 1 < tm_.levels() && pick >= w[j]) pick -= w[j++];
    o.score = tm_.log_derivative(tm_.level_density(-1, o.time, j), w[j], tm_.level_density(1, o.time, j));
    o.label = "decay_e" + std::to_string(j + 1);
    return o;
  }

  double censored_score(double t) {
    return tm_.log_derivative(tm_.state(-1, t).squaredNorm(), tm_.survival(t), tm_.state(1, t).squaredNorm());
  }

  // Measurement in the supplied basis after surviving for t.
  double measurement_score(double t, const ComplexMatrix& basis, std::string& label) {
    const ComplexVector psi = tm_.state(0, t);
    const double s = psi.squaredNorm();
    double pick = uniform_(rng_) * s;
    Eigen::Index k = 0;
    double pk = std::norm(basis.col(0).dot(psi));
    while (k + 1 < basis.cols() && pick >= pk) {
      pick -= pk;
      pk = std::norm(basis.col(++k).dot(psi));
    }
    label = "measure_" + std::to_string(k);
    const double minus = std::norm(basis.col(k).dot(tm_.state(-1, t)));
    const double plus = std::norm(basis.col(k).dot(tm_.state(1, t)));
    return tm_.log_derivative(minus, pk, plus);
  }

 private:
  const TrajectoryModel& tm_;
  std::mt19937_64& rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace

CycleStats monte_carlo_cd(const ErasureModel& model, const CdStrategy& strategy, double total_time,
                          int n_trajectories, std::uint64_t seed, int jobs, std::ostream* dump) {
  if (strategy.kind == CdKind::ghz || strategy.kind == CdKind::two_qubit_entangled)
    throw DomainError(std::string("monte_carlo_cd: strategy ") + cd_kind_name(strategy.kind) + " is not simulated");
  if (strategy.input.size() != 2 || std::abs(strategy.input.norm() - 1.0) > 1e-9)
    throw DomainError("monte_carlo_cd: input must be a normalized qubit vector");
  positive_or_throw(total_time, "monte_carlo_cd: total time must be positive");
  if (n_trajectories < 1) throw DomainError("monte_carlo_cd: need at least one trajectory");
  if (!(strategy.tau > 0.0)) throw DomainError("monte_carlo_cd: tau must be positive");
  if (std::isinf(strategy.tau) && strategy.kind != CdKind::decay_time_sigma_x)
    throw DomainError("monte_carlo_cd: infinite tau is only defined for the decay-time strategy");
  if (strategy.kind == CdKind::decay_time_sigma_x && model.theta() == 0.0)
    throw DomainError("monte_carlo_cd: the decay-time strategy needs a transverse generator");

  const double scale = std::max({model.Gamma1(), model.Gamma2(), 0.0});
  const double delta = 1e-4 * (scale > 0.0 ? scale : 1.0);
  const TrajectoryModel tm(model, strategy.input, delta);
  const bool reset_protocol = strategy.kind != CdKind::fixed_tau_lapses;
  const bool finite_tau = std::isfinite(strategy.tau);
  const ComplexMatrix fixed_basis = finite_tau ? tm.measurement_basis(strategy.tau) : ComplexMatrix();

  std::vector<Accumulator> acc(n_trajectories);
  std::vector<std::string> records(dump ? n_trajectories : 0);

  auto run_one = [&](int index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    CycleSampler sampler(tm, rng);
    Accumulator& a = acc[index];
    std::ostringstream rec;
    double now = 0.0;
    std::int64_t cycle = 0;
    while (now < total_time) {
      double duration = 0.0, score = 0.0;
      std::string label;
      if (reset_protocol) {
        const double horizon = finite_tau ? strategy.tau : total_time - now;
        const Outcome o = sampler.next_decay(horizon);
        duration = o.time;
        if (o.decayed) {
          score = o.score;
          label = o.label;
        } else if (finite_tau) {
          score = sampler.measurement_score(strategy.tau, fixed_basis, label);
        } else {
          score = sampler.censored_score(horizon);
          label = "censored";
        }
      } else {
        double since_reset = 0.0;
        duration = strategy.tau;
        int decays = 0;
        while (true) {
          const Outcome o = sampler.next_decay(strategy.tau - since_reset);
          if (!o.decayed) break;
          score += o.score;
          since_reset += o.time;
          ++decays;
        }
        const double s = strategy.tau - since_reset;
        std::string m;
        score += sampler.measurement_score(s, tm.measurement_basis(s), m);
        label = m + "_after_" + std::to_string(decays) + "_decays";
      }
      a.add(duration, score * score);
      if (dump) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", duration);
        rec << index << "," << cycle << "," << buf << "," << label << "\n";
      }
      ++cycle;
      now += duration;
    }
    if (dump) records[index] = rec.str();
  };

  int workers = jobs > 0 ? jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n_trajectories);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n_trajectories; i = next++) {
        try {
          run_one(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  Accumulator total;
  for (const auto& a : acc) total.merge(a);
  if (dump) {
    *dump << "trajectory,cycle,duration,outcome\n";
    for (const auto& r : records) *dump << r;
  }

  CycleStats out;
  out.cycles = total.n;
  out.insufficient = total.n < 100;
  if (total.n == 0) return out;
  const double n = static_cast<double>(total.n);
  out.mean_cycle_time = total.t / n;
  out.mean_cycle_fi = total.f / n;
  out.rate = total.f / total.t;
  if (total.n > 1) {
    const double var_t = std::max(0.0, (total.tt - n * out.mean_cycle_time * out.mean_cycle_time) / (n - 1.0));
    const double var_f = std::max(0.0, (total.ff - n * out.mean_cycle_fi * out.mean_cycle_fi) / (n - 1.0));
    const double r = out.rate;
    // Delta method for the ratio of means.
    const double var_resid =
        std::max(0.0, (total.ff - 2.0 * r * total.tf + r * r * total.tt) / (n - 1.0));
    out.cycle_time_stderr = std::sqrt(var_t / n);
    out.cycle_fi_stderr = std::sqrt(var_f / n);
    out.rate_stderr = std::sqrt(var_resid / n) / out.mean_cycle_time;
  }
  return out;
}

}  // namespace erasure
