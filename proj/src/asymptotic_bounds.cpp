#include "erasure/asymptotic_bounds.hpp"

#include "erasure/channel_bounds.hpp"
#include "erasure/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace erasure {

UltimateBound UltimateBound::heisenberg_limit(double coefficient) {
  return {true, coefficient, coefficient, coefficient, "N2T2"};
}

namespace {

ComplexMatrix qubit_block(const ComplexMatrix& m) { return m.topLeftCorner(2, 2); }

ComplexVector flatten(const ComplexMatrix& m) {
  ComplexVector v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  return v;
}

int numeric_rank(const ComplexMatrix& cols, double tol) {
  if (cols.cols() == 0) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(cols);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, smax)) ++r;
  return r;
}

std::vector<ComplexMatrix> nonzero_jumps(const ErasureModel& model) {
  std::vector<ComplexMatrix> out;
  for (const auto& l : model.jump_operators())
    if (l.norm() > 0.0) out.push_back(l);
  return out;
}

}  // namespace

bool hnls_check(const ErasureModel& model, double tol) {
  const auto jumps = nonzero_jumps(model);
  const int dim = model.dim();
  std::vector<ComplexVector> span;
  span.push_back(flatten(qubit_block(ComplexMatrix::Identity(dim, dim))));
  for (const auto& l : jumps) {
    span.push_back(flatten(qubit_block(l)));
    span.push_back(flatten(qubit_block(l.adjoint())));
  }
  for (const auto& a : jumps)
    for (const auto& b : jumps) span.push_back(flatten(qubit_block(a.adjoint() * b)));

  ComplexMatrix basis(4, static_cast<Eigen::Index>(span.size()));
  for (std::size_t i = 0; i < span.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = span[i];
  ComplexMatrix with_g(4, basis.cols() + 1);
  with_g << basis, flatten(qubit_block(model.generator()));
  return numeric_rank(basis, tol) == numeric_rank(with_g, tol);
}

UltimateBound ultimate_sigma_z(double gamma1, double gamma2) {
  if (gamma1 < 0.0 || gamma2 < 0.0) throw DomainError("ultimate_sigma_z: negative rate");
  if (gamma1 == 0.0 && gamma2 == 0.0) return UltimateBound::heisenberg_limit(4.0);
  const double s = std::sqrt(gamma1) + std::sqrt(gamma2);
  return UltimateBound::exact(16.0 / (s * s));
}

SigmaXSolution ultimate_sigma_x_detailed(const Eigen::MatrixXd& gamma) {
  if (gamma.rows() != 2) throw DomainError("ultimate_sigma_x: rate grid must have two rows");
  if ((gamma.array() < 0.0).any()) throw DomainError("ultimate_sigma_x: negative rate");
  const Eigen::Index k = gamma.cols();
  const Eigen::VectorXd a = gamma.row(0).transpose(), b = gamma.row(1).transpose();
  const double sum_min = a.cwiseMin(b).sum();

  SigmaXSolution out;
  out.h = Eigen::VectorXd::Zero(k);
  if (sum_min == 0.0) {
    out.bound = UltimateBound::heisenberg_limit(4.0);
    out.certified = true;
    return out;
  }
  Eigen::VectorXd cross(k);
  for (Eigen::Index j = 0; j < k; ++j) cross(j) = std::sqrt(a(j) * b(j));
  if (cross.sum() == 0.0) throw DomainError("ultimate_sigma_x: constraint infeasible");

  // min_h max(sum h^2 a, sum h^2 b) s.t. sum h c = 1 equals
  // max_s 1 / sum_j c_j^2 / (s a_j + (1-s) b_j), a convex 1-D problem in s.
  auto inverse_value = [&](double s) {
    double f = 0.0;
    for (Eigen::Index j = 0; j < k; ++j)
      if (cross(j) > 0.0) f += cross(j) * cross(j) / (s * a(j) + (1.0 - s) * b(j));
    return f;
  };
  const bool first_small = (a.array() <= b.array()).all();
  const bool second_small = (a.array() >= b.array()).all();
  double s_opt;
  if (first_small) {
    s_opt = 0.0;
  } else if (second_small) {
    s_opt = 1.0;
  } else {
    s_opt = golden_section_min(inverse_value, 0.0, 1.0, 1e-14).x;
  }
  const double f = inverse_value(s_opt);
  for (Eigen::Index j = 0; j < k; ++j)
    if (cross(j) > 0.0) out.h(j) = cross(j) / (s_opt * a(j) + (1.0 - s_opt) * b(j)) / f;
  out.weight = s_opt;

  const double value = 4.0 / f;
  out.bound = {false, value, 2.0 / sum_min, 4.0 / sum_min, "NT"};
  if (first_small || second_small) out.bound.value = 4.0 / sum_min;

  auto objective = [&](const Eigen::VectorXd& h) {
    const Eigen::VectorXd h2 = h.array().square();
    return std::max(h2.dot(a), h2.dot(b));
  };
  const double base = objective(out.h);
  std::mt19937_64 rng(20240917);
  std::normal_distribution<double> normal;
  out.certified = true;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd d(k);
    for (Eigen::Index j = 0; j < k; ++j) d(j) = normal(rng);
    d -= (d.dot(cross) / cross.squaredNorm()) * cross;
    const double scale = std::pow(10.0, -1.0 - (trial % 5)) * std::max(1.0, out.h.norm());
    if (d.norm() == 0.0) continue;
    d *= scale / d.norm();
    if (objective(out.h + d) < base - 1e-8 * std::max(1.0, base)) out.certified = false;
  }
  return out;
}

UltimateBound ultimate_sigma_x(const Eigen::MatrixXd& gamma) { return ultimate_sigma_x_detailed(gamma).bound; }

double lambda_plus(double theta, double gamma1, double gamma2, double hh) {
  const double c = std::cos(theta), sn = std::sin(theta);
  const double p = 1.0 + hh * hh + 2.0 * hh * c, m = 1.0 + hh * hh - 2.0 * hh * c;
  const double s = gamma1 * p + gamma2 * m;
  // s^2 - 4 (h^2 - 1)^2 g1 g2 written as a sum of squares; the direct
  // difference loses half the digits near its double root.
  const double split = gamma1 * p - gamma2 * m;
  const double disc = split * split + 16.0 * gamma1 * gamma2 * hh * hh * sn * sn;
  return (s + std::sqrt(disc)) / (2.0 * gamma1 * gamma2);
}

GeneralGBound ultimate_general_g_detailed(double theta, double gamma1, double gamma2) {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw DomainError("ultimate_general_g: rates must be positive");
  if (theta < 0.0 || theta > kPi / 2.0 + 1e-15) throw DomainError("ultimate_general_g: theta outside [0, pi/2]");
  auto f = [&](double hh) { return lambda_plus(theta, gamma1, gamma2, hh); };
  double lo = -2.0, hi = 2.0;
  Optimum1d best;
  for (int expand = 0; expand < 30; ++expand) {
    best = golden_section_min(f, lo, hi, 1e-14);
    const double edge = 1e-6 * (hi - lo);
    if (best.x - lo > edge && hi - best.x > edge) break;
    lo *= 2.0;
    hi *= 2.0;
  }
  const double c = std::cos(theta), sn = std::sin(theta);
  const double sum = gamma1 + gamma2;
  const double d1 = 4.0 * gamma1 * c * c / (sum * sum) + sn * sn / gamma2;
  const double d2 = 4.0 * gamma2 * c * c / (sum * sum) + sn * sn / gamma1;
  const double lower =
      c * c * ultimate_sigma_z(gamma1, gamma2).value + sn * sn * 4.0 / std::min(gamma1, gamma2);

  GeneralGBound out;
  out.h_opt = best.x;
  out.bound = {false, 4.0 * best.value, lower, 4.0 * std::max(d1, d2), "NT"};
  return out;
}

UltimateBound ultimate_general_g(double theta, double gamma1, double gamma2) {
  return ultimate_general_g_detailed(theta, gamma1, gamma2).bound;
}

NumericUltimate ultimate_numeric(const ErasureModel& model) {
  NumericUltimate out;
  if (!hnls_check(model)) {
    out.bound = UltimateBound::heisenberg_limit(4.0);
    return out;
  }
  const auto jumps = nonzero_jumps(model);
  const int r = static_cast<int>(jumps.size());
  const int dim = model.dim();
  const int nh = r * r;
  const int n = nh + 1;  // gauge parameters plus the identity shift

  // Qubit-block constraint  sum_jk h_jk P L_j^dag L_k P + shift * P = P G P  as 4 real rows.
  auto constraint = [&](const Eigen::VectorXd& x) {
    const ComplexMatrix h = hermitian_from_params(x.head(nh), r);
    ComplexMatrix m = x(nh) * ComplexMatrix::Identity(2, 2);
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) m += h(j, k) * qubit_block(jumps[j].adjoint() * jumps[k]);
    Eigen::Vector4d v(m(0, 0).real(), m(1, 1).real(), m(0, 1).real(), m(0, 1).imag());
    return v;
  };
  Eigen::MatrixXd cmat(4, n);
  for (int i = 0; i < n; ++i) cmat.col(i) = constraint(Eigen::VectorXd::Unit(n, i));
  const ComplexMatrix g = qubit_block(model.generator());
  const Eigen::Vector4d target(g(0, 0).real(), g(1, 1).real(), g(0, 1).real(), g(0, 1).imag());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cmat, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-12 * sv(0)) ++rank;
  Eigen::VectorXd particular = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd ut = svd.matrixU().transpose() * target;
  for (int i = 0; i < rank; ++i) particular += (ut(i) / sv(i)) * svd.matrixV().col(i);
  const Eigen::MatrixXd null = svd.matrixV().rightCols(n - rank);

  // Stacked rows sum_b h_ab L_b P; the identity shift does not enter.
  auto stacked = [&](const Eigen::VectorXd& x) {
    const ComplexMatrix h = hermitian_from_params(x.head(nh), r);
    ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(r) * dim, 2);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) a.block(i * dim, 0, dim, 2) += h(i, j) * jumps[j].leftCols(2);
    return a;
  };
  SpectralProblem prob;
  prob.base = stacked(particular);
  for (Eigen::Index i = 0; i < null.cols(); ++i) {
    const ComplexMatrix d = stacked(null.col(i));
    if (d.norm() > 0.0) prob.directions.push_back(d);
  }
  const SpectralOptimum opt = minimize_max_eigenvalue(prob);
  out.bound = UltimateBound::exact(4.0 * opt.value);
  out.gap = 4.0 * opt.gap;
  out.iterations = opt.iterations;
  return out;
}

}  // namespace erasure
