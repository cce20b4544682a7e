#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "erasure/channel_bounds.hpp"
#include "erasure/optimize.hpp"

#include <boost/math/special_functions/lambert_w.hpp>

#include <cmath>
#include <random>

using namespace erasure;

namespace {

// 4 * lambda_max of sum_i (Kdot_i - i sum_j h_ij K_j)^dag (...), written out directly.
double gauge_objective(const KrausSet& ks, const ComplexMatrix& h) {
  const std::size_t m = ks.size();
  ComplexMatrix alpha = ComplexMatrix::Zero(ks.ops[0].cols(), ks.ops[0].cols());
  for (std::size_t i = 0; i < m; ++i) {
    ComplexMatrix k = ks.dops[i];
    for (std::size_t j = 0; j < m; ++j) k -= kI * h(i, j) * ks.ops[j];
    alpha += k.adjoint() * k;
  }
  return 4.0 * Eigen::SelfAdjointEigenSolver<ComplexMatrix>(alpha, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

ComplexMatrix hermitian(const std::vector<double>& x, int m) {
  ComplexMatrix h = ComplexMatrix::Zero(m, m);
  int p = 0;
  for (int i = 0; i < m; ++i) h(i, i) = x[p++];
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      h(i, j) = cplx(x[p], x[p + 1]);
      h(j, i) = std::conj(h(i, j));
      p += 2;
    }
  return h;
}

double t_scan(const std::function<double(double)>& f, double lo, double hi) {
  double best_t = lo, best = -1.0;
  for (int i = 0; i <= 400; ++i) {
    const double t = lo * std::pow(hi / lo, i / 400.0);
    const double v = f(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  return golden_section_max(f, best_t / 1.03, best_t * 1.03, 1e-10).value;
}

}  // namespace

TEST_CASE("single-erasure sigma_z ECQFI matches its closed form") {
  // 16 t^2 / (2 e^{t/2})^2 at t = 1.
  CHECK(ecqfi(kraus(ErasureModel::single(1, 1, 0.3, 0), 1.0)) == doctest::Approx(4.0 / std::exp(1.0)).epsilon(1e-6));
  for (double g1 : {0.0, 0.3, 1.0})
    for (double g2 : {0.2, 1.0, 2.5})
      for (double t : {0.4, 1.7}) {
        const double closed = sigma_z_ecqfi(g1, g2, t);
        CHECK(closed == doctest::Approx(16 * t * t / std::pow(std::exp(g1 * t / 2) + std::exp(g2 * t / 2), 2)));
        CHECK(ecqfi(kraus(ErasureModel::single(g1, g2, 0.7, 0), t)) == doctest::Approx(closed).epsilon(1e-6));
      }
}

TEST_CASE("noiseless channel gives 4 t^2") {
  for (double theta : {0.0, 0.6}) {
    const ErasureModel m(0.4, theta, Eigen::MatrixXd::Zero(2, 1));
    CHECK(ecqfi(kraus(m, 1.3)) == doctest::Approx(4 * 1.3 * 1.3).epsilon(1e-8));
  }
}

TEST_CASE("no random gauge beats the ECQFI minimum") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n;
  for (const ErasureModel& m : {ErasureModel::single(0.3, 1.0, 0.5, 0.0), ErasureModel::single(0.0, 1.0, 0.2, kPi / 2),
                                ErasureModel::single(0.6, 0.1, 0.9, 0.7)}) {
    const KrausSet ks = kraus(m, 1.1);
    const double value = ecqfi(ks);
    const int d = static_cast<int>(ks.size());
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(d * d);
      for (auto& v : x) v = 0.5 * n(rng);
      CHECK(gauge_objective(ks, hermitian(x, d)) >= value - 1e-9);
    }
  }
}

TEST_CASE("sigma_x ECQFI agrees with a direct gauge search") {
  const KrausSet ks = kraus(ErasureModel::single(0.0, 1.0, 0.01, kPi / 2), 50.0);
  const int d = static_cast<int>(ks.size());
  auto f = [&](const std::vector<double>& x) { return gauge_objective(ks, hermitian(x, d)); };
  std::mt19937_64 rng(22);
  std::normal_distribution<double> n;
  double best = f(std::vector<double>(d * d, 0.0));
  for (int start = 0; start < 12; ++start) {
    std::vector<double> x(d * d);
    for (auto& v : x) v = n(rng);
    NelderMeadResult r = nelder_mead_min(f, x, 0.5, 1e-15, 40000);
    for (int polish = 0; polish < 3; ++polish) r = nelder_mead_min(f, r.x, 0.05, 1e-15, 40000);
    best = std::min(best, r.value);
  }
  const double value = ecqfi(ks);
  CHECK(value <= best * (1 + 1e-9));
  CHECK(value == doctest::Approx(best).epsilon(1e-4));
}

TEST_CASE("sigma_z product bound") {
  const ProtocolReport sym = product_bound_sigma_z(1.0, 1.0);
  CHECK(sym.rate == doctest::Approx(4.0 / std::exp(1.0)).epsilon(1e-9));
  CHECK(sym.param("t_opt") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sym.param("p_opt") == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sym.strategy == "prod");

  const ProtocolReport sym2 = product_bound_sigma_z(2.0, 2.0);
  CHECK(sym2.rate == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-9));

  const ProtocolReport edge = product_bound_sigma_z(0.0, 1.0);
  const double w = boost::math::lambert_w0(0.5 / std::sqrt(std::exp(1.0)));
  CHECK(edge.param("t_opt") == doctest::Approx(1.0 + 2.0 * w).epsilon(1e-6));
  CHECK(std::abs(edge.rate - 2.47) < 0.005 * 2.47);
  CHECK(product_bound_sigma_z(1.0, 0.0).rate == doctest::Approx(edge.rate).epsilon(1e-12));

  const double scan = t_scan([](double t) { return ecqfi(kraus(ErasureModel::single(0.25, 1.0, 0.5, 0.0), t)) / t; },
                             0.05, 20.0);
  CHECK(product_bound_sigma_z(0.25, 1.0).rate == doctest::Approx(scan).epsilon(1e-6));
  CHECK_THROWS_AS(product_bound_sigma_z(0.0, 0.0), DomainError);
}

TEST_CASE("sigma_x product bound limits") {
  const double small = product_bound_sigma_x(1.0, 0.0, 0.001).rate;
  CHECK(std::abs(small - 16.0) < 0.05 * 16.0);
  const double large = product_bound_sigma_x(1.0, 0.0, 100.0).rate;
  CHECK(std::abs(large - 8.0 / std::exp(1.0)) < 0.03 * 8.0 / std::exp(1.0));
  for (double w : {0.05, 1.0, 7.0})
    CHECK(product_bound_sigma_x(1.0, 1.0, w).rate == doctest::Approx(4.0 / std::exp(1.0)).epsilon(1e-6));
}

TEST_CASE("Hermitian parametrization and alpha matrix") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n;
  Eigen::VectorXd x(9);
  for (auto& v : x) v = n(rng);
  const ComplexMatrix h = hermitian_from_params(x, 3);
  CHECK(is_hermitian(h));
  CHECK((params_from_hermitian(h) - x).norm() < 1e-15);

  const KrausSet ks = kraus(ErasureModel::single(0.4, 0.9, 0.3, 0.2), 0.8);
  const ComplexMatrix hg = hermitian_from_params(Eigen::VectorXd::Random(9), 3);
  const ComplexMatrix a = alpha_matrix(ks, hg);
  CHECK(is_hermitian(a, 1e-12));
  CHECK(4.0 * Eigen::SelfAdjointEigenSolver<ComplexMatrix>(a).eigenvalues().maxCoeff() ==
        doctest::Approx(gauge_objective(ks, hg)).epsilon(1e-12));
}

TEST_CASE("spectral minimization on a problem with a known answer") {
  // A(x) = I + x diag(1, -1): lambda_max = max((1+x)^2, (1-x)^2), minimum 1 at x = 0.
  SpectralProblem p;
  p.base = ComplexMatrix::Identity(2, 2);
  ComplexMatrix dir = ComplexMatrix::Zero(2, 2);
  dir(0, 0) = 1.0;
  dir(1, 1) = -1.0;
  p.directions.push_back(dir);
  const SpectralOptimum opt = minimize_max_eigenvalue(p);
  CHECK(opt.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(opt.x(0)) < 1e-6);
  CHECK(opt.dual_value <= opt.value + 1e-12);
  CHECK(opt.gap < 1e-9);
  CHECK(spectral_dual_value(p, ComplexMatrix::Identity(2, 2) * 0.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("report formatting") {
  ProtocolReport r;
  r.rate = 0.1;
  r.strategy = "prod";
  r.params["t_opt"] = 2.0;
  CHECK(r.csv_header() == "strategy,rate,t_opt");
  CHECK(r.csv_row() == "prod,0.10000000000000001,2");
  CHECK_THROWS(r.param("missing"));
}
