#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "erasure/quantum_core.hpp"

#include <cmath>
#include <random>

using namespace erasure;

namespace {

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix random_matrix(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

ComplexMatrix random_density(int d, std::mt19937_64& rng) {
  const ComplexMatrix a = random_matrix(d, rng);
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// Qubit |+> rotated by exp(-i w t sz).
ComplexVector rotated_plus(double w, double t) {
  ComplexVector v(2);
  v << std::exp(-kI * w * t) / std::sqrt(2.0), std::exp(kI * w * t) / std::sqrt(2.0);
  return v;
}

}  // namespace

TEST_CASE("kron and vectorization identities") {
  std::mt19937_64 rng(1);
  const ComplexMatrix a = random_matrix(3, rng), b = random_matrix(3, rng), x = random_matrix(3, rng);
  const ComplexVector lhs = vec(a * x * b);
  const ComplexVector rhs = kron(a, b.transpose()) * vec(x);
  CHECK((lhs - rhs).norm() < 1e-12 * lhs.norm());
  CHECK((unvec(vec(x), 3) - x).norm() == doctest::Approx(0.0));
  const ComplexMatrix k = kron(pauli_x(), pauli_z());
  CHECK(k.rows() == 4);
  CHECK(k(0, 2) == cplx(1.0));
  CHECK(k(1, 3) == cplx(-1.0));
  CHECK_THROWS_AS(unvec(ComplexVector::Zero(5), 2), DomainError);
}

TEST_CASE("matrix exponential against closed forms") {
  const double s = 0.73;
  const ComplexMatrix rot = expm(-kI * s * pauli_x());
  ComplexMatrix expect = std::cos(s) * ComplexMatrix::Identity(2, 2) - kI * std::sin(s) * pauli_x();
  CHECK((rot - expect).norm() < 1e-14);

  ComplexMatrix nil = ComplexMatrix::Zero(2, 2);
  nil(0, 1) = 3.0;
  ComplexMatrix unip = ComplexMatrix::Identity(2, 2);
  unip(0, 1) = 3.0;
  CHECK((expm(nil) - unip).norm() < 1e-14);

  ComplexMatrix diag = ComplexMatrix::Zero(3, 3);
  diag.diagonal() << -20.0, 0.5, cplx(0.0, 2.0);
  const ComplexMatrix e = expm(diag);
  CHECK(std::abs(e(0, 0) - std::exp(-20.0)) < 1e-20);
  CHECK(std::abs(e(2, 2) - std::exp(cplx(0.0, 2.0))) < 1e-14);

  std::mt19937_64 rng(2);
  const ComplexMatrix h0 = random_matrix(4, rng);
  const ComplexMatrix h = 0.5 * (h0 + h0.adjoint());
  CHECK((unitary_exp(h, 0.9) - expm(-kI * 0.9 * h)).norm() < 1e-12);
  CHECK(is_unitary(unitary_exp(h, 0.9)));

  ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(expm(bad), NumericError);
}

TEST_CASE("state validation") {
  ComplexMatrix rho = ComplexMatrix::Identity(2, 2) * 0.5;
  CHECK_NOTHROW(QuantumState(rho).validate());
  CHECK_THROWS_AS(QuantumState(ComplexMatrix::Identity(2, 2)).validate(), DomainError);
  ComplexMatrix neg(2, 2);
  neg << 1.2, 0, 0, -0.2;
  CHECK_THROWS_AS(QuantumState(neg).validate(), DomainError);
  ComplexMatrix nonherm(2, 2);
  nonherm << 0.5, 0.3, 0.0, 0.5;
  CHECK_THROWS_AS(QuantumState(nonherm).validate(), DomainError);
}

TEST_CASE("QFI of a noiselessly rotated pure qubit is 4 t^2") {
  for (double t : {0.3, 1.0, 2.5}) {
    const double w = 0.4, h = fd_step(w);
    const ComplexMatrix rho = QuantumState::pure(rotated_plus(w, t)).rho;
    const ComplexMatrix drho = (QuantumState::pure(rotated_plus(w + h, t)).rho -
                                QuantumState::pure(rotated_plus(w - h, t)).rho) /
                               (2.0 * h);
    CHECK(qfi_density(QuantumState(rho), drho) == doctest::Approx(4.0 * t * t).epsilon(1e-8));
  }
  CHECK(qfi_density(QuantumState(ComplexMatrix::Identity(2, 2) * 0.5), ComplexMatrix::Zero(2, 2)) == 0.0);
}

TEST_CASE("QFI of the symmetric erasure state at t = 1/Gamma") {
  // Equator input, equal rates: populations e^{-Gt}/2 each, coherence
  // e^{-Gt} e^{-2iwt}/2, erased weight 1 - e^{-Gt}.
  const double g = 1.0, t = 1.0 / g, w = 0.3;
  auto state = [&](double ww) {
    ComplexMatrix r = ComplexMatrix::Zero(3, 3);
    const double keep = std::exp(-g * t);
    r(0, 0) = r(1, 1) = keep / 2.0;
    r(0, 1) = keep / 2.0 * std::exp(-2.0 * kI * ww * t);
    r(1, 0) = std::conj(r(0, 1));
    r(2, 2) = 1.0 - keep;
    return r;
  };
  const double h = fd_step(w);
  const ComplexMatrix drho = (state(w + h) - state(w - h)) / (2.0 * h);
  CHECK(qfi_density(QuantumState(state(w)), drho) == doctest::Approx(4.0 * std::exp(-1.0) / (g * g)).epsilon(1e-8));
}

TEST_CASE("pure-state QFI formula, unitary invariance, and the SLD") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix h0 = random_matrix(3, rng);
    const ComplexMatrix gen = 0.5 * (h0 + h0.adjoint());
    ComplexVector psi0 = random_matrix(3, rng).col(0).normalized();
    auto psi = [&](double w) { return ComplexVector(unitary_exp(gen, w) * psi0); };
    const double w = 0.7, step = fd_step(w);
    const ComplexVector dpsi = (psi(w + step) - psi(w - step)) / (2.0 * step);
    const ComplexMatrix rho = psi(w) * psi(w).adjoint();
    const ComplexMatrix drho = dpsi * psi(w).adjoint() + psi(w) * dpsi.adjoint();
    const double q = qfi_density(QuantumState(rho), drho);
    CHECK(q == doctest::Approx(pure_state_qfi(psi(w), dpsi)).epsilon(1e-8));

    const ComplexMatrix u = unitary_exp(gen * 0.3 + ComplexMatrix::Identity(3, 3), 1.1);
    CHECK(qfi_density(QuantumState(u * rho * u.adjoint()), u * drho * u.adjoint()) == doctest::Approx(q).epsilon(1e-9));
  }

  const ComplexMatrix rho = random_density(3, rng);
  const ComplexMatrix h0 = random_matrix(3, rng);
  const ComplexMatrix gen = 0.5 * (h0 + h0.adjoint());
  const ComplexMatrix drho = -kI * commutator(gen, rho);
  const ComplexMatrix l = sld(rho, drho);
  CHECK(is_hermitian(l, 1e-10));
  CHECK((0.5 * (l * rho + rho * l) - drho).norm() < 1e-10);
  CHECK((drho * l).trace().real() == doctest::Approx(qfi_density(QuantumState(rho), drho)).epsilon(1e-10));
}

TEST_CASE("mixed qubit QFI equals 4 |r|^2 for a rotating Bloch vector") {
  const double len = 0.6, w = 0.2;
  auto state = [&](double ww) {
    ComplexMatrix r(2, 2);
    const cplx c = 0.5 * len * std::exp(-2.0 * kI * ww);
    r << 0.5, c, std::conj(c), 0.5;
    return r;
  };
  const double h = fd_step(w);
  const ComplexMatrix drho = (state(w + h) - state(w - h)) / (2.0 * h);
  CHECK(qfi_density(QuantumState(state(w)), drho) == doctest::Approx(4.0 * len * len).epsilon(1e-8));
}

TEST_CASE("input checks of qfi_density") {
  const ComplexMatrix rho = ComplexMatrix::Identity(2, 2) * 0.5;
  ComplexMatrix nonherm = ComplexMatrix::Zero(2, 2);
  nonherm(0, 1) = 1.0;
  CHECK_THROWS_AS(qfi_density(QuantumState(rho), nonherm), DomainError);
  CHECK_THROWS_AS(qfi_density(QuantumState(rho), ComplexMatrix::Identity(2, 2)), DomainError);
  CHECK_THROWS_AS(qfi_density(QuantumState(rho), ComplexMatrix::Zero(3, 3)), DomainError);
}

TEST_CASE("classical Fisher information") {
  for (double t : {0.5, 1.3}) {
    const double w = 0.37;
    ProbDist d;
    d.probs = {std::pow(std::cos(w * t), 2), std::pow(std::sin(w * t), 2)};
    d.derivs = {-t * std::sin(2 * w * t), t * std::sin(2 * w * t)};
    CHECK(cfi(d) == doctest::Approx(4.0 * t * t).epsilon(1e-12));
  }
  ProbDist flat{{0.25, 0.75}, {0.0, 0.0}};
  CHECK(cfi(flat) == 0.0);
  ProbDist singular{{0.0, 1.0}, {0.1, -0.1}};
  CHECK_THROWS_AS(cfi(singular), NumericError);
  ProbDist negative{{-0.1, 1.1}, {0.0, 0.0}};
  CHECK_THROWS_AS(cfi(negative), DomainError);
}

TEST_CASE("CFI of the eigenbasis measurement never exceeds the QFI") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix rho = random_density(3, rng);
    const ComplexMatrix h0 = random_matrix(3, rng);
    const ComplexMatrix gen = 0.5 * (h0 + h0.adjoint());
    const ComplexMatrix drho = -kI * commutator(gen, rho) + 0.1 * (rho - ComplexMatrix::Identity(3, 3) / 3.0);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
    ProbDist d;
    for (int j = 0; j < 3; ++j) {
      const ComplexVector v = es.eigenvectors().col(j);
      d.probs.push_back((v.adjoint() * rho * v)(0, 0).real());
      d.derivs.push_back((v.adjoint() * drho * v)(0, 0).real());
    }
    CHECK(cfi(d) <= qfi_density(QuantumState(rho), drho) + 1e-8);
  }
}

TEST_CASE("error propagation and finite differences") {
  CHECK(error_propagation_qfi(2.0 * 1.5, 1.0) == doctest::Approx(4.0 * 1.5 * 1.5));
  CHECK(error_propagation_qfi(0.0, 2.0) == 0.0);
  CHECK_THROWS_AS(error_propagation_qfi(1.0, 0.0), DomainError);
  CHECK(fd_step(0.0) == doctest::Approx(1e-6));
  CHECK(fd_step(10.0) == doctest::Approx(1e-5));
  const double d = central_difference([](double x) { return std::sin(x); }, 0.4, 1e-5);
  CHECK(d == doctest::Approx(std::cos(0.4)).epsilon(1e-9));
}
