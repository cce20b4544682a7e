#include "erasure/channel_bounds.hpp"

#include "erasure/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace erasure {

double ProtocolReport::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) throw DomainError("report: no parameter named " + name);
  return it->second;
}

namespace {
std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string ProtocolReport::csv_header() const {
  std::string out = "strategy,rate";
  for (const auto& [k, v] : params) out += "," + k;
  return out;
}

std::string ProtocolReport::csv_row() const {
  std::string out = strategy + "," + fmt17(rate);
  for (const auto& [k, v] : params) out += "," + fmt17(v);
  return out;
}

ComplexMatrix alpha_matrix(const KrausSet& ks, const ComplexMatrix& h) {
  const std::size_t m = ks.size();
  if (h.rows() != static_cast<Eigen::Index>(m)) throw DomainError("alpha_matrix: gauge size differs from Kraus count");
  const Eigen::Index din = ks.ops.front().cols();
  ComplexMatrix alpha = ComplexMatrix::Zero(din, din);
  for (std::size_t i = 0; i < m; ++i) {
    ComplexMatrix t = ks.dops[i];
    for (std::size_t j = 0; j < m; ++j) t -= kI * h(i, j) * ks.ops[j];
    alpha += t.adjoint() * t;
  }
  return alpha;
}

ComplexMatrix hermitian_from_params(const Eigen::VectorXd& x, int m) {
  ComplexMatrix h = ComplexMatrix::Zero(m, m);
  int p = 0;
  for (int i = 0; i < m; ++i) h(i, i) = x(p++);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      h(i, j) = cplx(x(p), x(p + 1));
      h(j, i) = cplx(x(p), -x(p + 1));
      p += 2;
    }
  }
  return h;
}

Eigen::VectorXd params_from_hermitian(const ComplexMatrix& h) {
  const int m = static_cast<int>(h.rows());
  Eigen::VectorXd x(m * m);
  int p = 0;
  for (int i = 0; i < m; ++i) x(p++) = h(i, i).real();
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      x(p++) = h(i, j).real();
      x(p++) = h(i, j).imag();
    }
  }
  return x;
}

namespace {

// Log-sum-exp smoothing of the largest eigenvalue of a 2x2 Gram matrix:
// F = (a+d)/2 + mu log(2 cosh(r/mu)), r = |((a-d)/2, Re b, Im b)|.
class SmoothedSpectral {
 public:
  explicit SmoothedSpectral(const SpectralProblem& prob) {
    const Eigen::Index m = prob.base.rows();
    n_ = static_cast<Eigen::Index>(prob.directions.size());
    p0_ = prob.base.col(0);
    p1_ = prob.base.col(1);
    q0_.resize(m, n_);
    q1_.resize(m, n_);
    for (Eigen::Index k = 0; k < n_; ++k) {
      q0_.col(k) = prob.directions[k].col(0);
      q1_.col(k) = prob.directions[k].col(1);
    }
    ha_ = 2.0 * (q0_.adjoint() * q0_).real();
    hd_ = 2.0 * (q1_.adjoint() * q1_).real();
    const ComplexMatrix s = q0_.adjoint() * q1_;
    hb_ = s + s.transpose();
  }

  Eigen::Index size() const { return n_; }

  struct Gram {
    double a, d;
    cplx b;
    double lam_max() const { return 0.5 * (a + d) + radius(); }
    double radius() const { return std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b)); }
  };

  Gram gram(const Eigen::VectorXd& x) const {
    const ComplexVector c0 = p0_ + q0_ * x;
    const ComplexVector c1 = p1_ + q1_ * x;
    return {c0.squaredNorm(), c1.squaredNorm(), c0.dot(c1)};
  }

  double value(const Eigen::VectorXd& x, double mu) const {
    const Gram g = gram(x);
    const double r = g.radius();
    return 0.5 * (g.a + g.d) + r + mu * std::log1p(std::exp(-2.0 * r / mu));
  }

  // Rows: gradients of ((a-d)/2, Re b, Im b).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    const ComplexVector c0 = p0_ + q0_ * x;
    const ComplexVector c1 = p1_ + q1_ * x;
    const Eigen::VectorXd ga = 2.0 * (q0_.adjoint() * c0).real();
    const Eigen::VectorXd gd = 2.0 * (q1_.adjoint() * c1).real();
    const ComplexVector gb = q0_.adjoint() * c1 + (q1_.adjoint() * c0).conjugate();
    Eigen::MatrixXd jac(3, n_);
    jac.row(0) = 0.5 * (ga - gd).transpose();
    jac.row(1) = gb.real().transpose();
    jac.row(2) = gb.imag().transpose();
    return jac;
  }

  // Gradient of (a+d)/2.
  Eigen::VectorXd trace_gradient(const Eigen::VectorXd& x) const {
    const ComplexVector c0 = p0_ + q0_ * x;
    const ComplexVector c1 = p1_ + q1_ * x;
    return (q0_.adjoint() * c0).real() + (q1_.adjoint() * c1).real();
  }

  double derivatives(const Eigen::VectorXd& x, double mu, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const ComplexVector c0 = p0_ + q0_ * x;
    const ComplexVector c1 = p1_ + q1_ * x;
    const double a = c0.squaredNorm(), d = c1.squaredNorm();
    const cplx b = c0.dot(c1);
    const Eigen::VectorXd ga = 2.0 * (q0_.adjoint() * c0).real();
    const Eigen::VectorXd gd = 2.0 * (q1_.adjoint() * c1).real();
    const ComplexVector gb = q0_.adjoint() * c1 + (q1_.adjoint() * c0).conjugate();

    const Eigen::Vector3d u(0.5 * (a - d), b.real(), b.imag());
    Eigen::MatrixXd jac(3, n_);
    jac.row(0) = 0.5 * (ga - gd).transpose();
    jac.row(1) = gb.real().transpose();
    jac.row(2) = gb.imag().transpose();

    const double r = u.norm();
    const double th = std::tanh(r / mu);
    const double c1coef = (r < 1e-8 * mu) ? 1.0 / mu : th / r;
    const double phi2 = (1.0 - th * th) / mu;

    grad = 0.5 * (ga + gd) + c1coef * jac.transpose() * u;
    hess = 0.5 * (ha_ + hd_);
    Eigen::MatrixXd curv = jac.transpose() * jac + u(0) * 0.5 * (ha_ - hd_) + u(1) * hb_.real() + u(2) * hb_.imag();
    hess += c1coef * curv;
    if (r >= 1e-8 * mu) {
      const Eigen::VectorXd gr = jac.transpose() * (u / r);
      hess += (phi2 - c1coef) * gr * gr.transpose();
    }
    return 0.5 * (a + d) + r + mu * std::log1p(std::exp(-2.0 * r / mu));
  }

 private:
  Eigen::Index n_ = 0;
  ComplexVector p0_, p1_;
  ComplexMatrix q0_, q1_;
  Eigen::MatrixXd ha_, hd_;
  ComplexMatrix hb_;
};

ComplexMatrix gram_matrix(const SmoothedSpectral::Gram& g) {
  ComplexMatrix m(2, 2);
  m << g.a, g.b, std::conj(g.b), g.d;
  return m;
}

}  // namespace

double spectral_dual_value(const SpectralProblem& prob, const ComplexMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const ComplexMatrix root = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  const Eigen::Index m = prob.base.rows();
  const Eigen::Index n = static_cast<Eigen::Index>(prob.directions.size());
  auto realify = [&](const ComplexMatrix& a) {
    const ComplexMatrix t = a * root;
    Eigen::VectorXd v(4 * m);
    for (Eigen::Index c = 0; c < 2; ++c) {
      v.segment(2 * c * m, m) = t.col(c).real();
      v.segment(2 * c * m + m, m) = t.col(c).imag();
    }
    return v;
  };
  const Eigen::VectorXd b0 = realify(prob.base);
  if (n == 0) return b0.squaredNorm();
  Eigen::MatrixXd cm(4 * m, n);
  for (Eigen::Index k = 0; k < n; ++k) cm.col(k) = realify(prob.directions[k]);
  const Eigen::VectorXd x = cm.completeOrthogonalDecomposition().solve(-b0);
  return (b0 + cm * x).squaredNorm();
}

SpectralOptimum minimize_max_eigenvalue(const SpectralProblem& prob, double rel_gap_tol) {
  if (prob.base.cols() != 2) throw DomainError("spectral minimization: input dimension must be 2");
  SmoothedSpectral obj(prob);
  const Eigen::Index n = obj.size();
  SpectralOptimum out;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

  const double scale = obj.gram(x).lam_max();
  if (!(scale > 0.0) || n == 0) {
    out.x = x;
    out.value = scale;
    // Nothing to optimize: the top eigenvector certifies the value exactly.
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(prob.base.adjoint() * prob.base);
    const ComplexVector top = es.eigenvectors().col(1);
    out.dual_state = n == 0 ? ComplexMatrix(top * top.adjoint()) : ComplexMatrix(0.5 * ComplexMatrix::Identity(2, 2));
    out.dual_value = spectral_dual_value(prob, out.dual_state);
    out.gap = out.value - out.dual_value;
    return out;
  }

  // Below ~1e-10 relative the kink is no longer resolved in double precision.
  double mu = scale;
  const double mu_min = 1e-10 * scale;
  Eigen::VectorXd grad(n);
  Eigen::MatrixXd hess(n, n);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  while (true) {
    for (int it = 0; it < 100; ++it) {
      ++out.iterations;
      const double f = obj.derivatives(x, mu, grad, hess);
      if (grad.norm() <= 1e-14 * scale) break;
      double shift = 1e-14 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
      Eigen::VectorXd step;
      for (int tries = 0; tries < 30; ++tries) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess + shift * eye);
        step = ldlt.solve(-grad);
        if (ldlt.info() == Eigen::Success && step.allFinite() && grad.dot(step) < 0.0) break;
        shift *= 100.0;
      }
      const double slope = grad.dot(step);
      if (!(slope < 0.0)) break;
      double t = 1.0;
      double fnew = f;
      for (int ls = 0; ls < 60; ++ls) {
        const Eigen::VectorXd trial = x + t * step;
        fnew = obj.value(trial, mu);
        if (fnew <= f + 1e-4 * t * slope) {
          x = trial;
          break;
        }
        t *= 0.5;
      }
      if (f - fnew <= 1e-15 * std::abs(f)) break;
    }
    if (mu <= mu_min) break;
    mu = std::max(mu * 0.1, mu_min);
  }
  const double fval = obj.derivatives(x, mu, grad, hess);
  (void)fval;
  out.grad_norm = grad.norm();

  const auto g = obj.gram(x);
  out.x = x;
  out.value = g.lam_max();

  // Two dual candidates: the softmax weights of the smoothed problem, and the
  // density matrix that makes x stationary for tr(alpha rho).
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram_matrix(g));
  const double th = std::tanh(g.radius() / mu);
  const ComplexVector vhi = es.eigenvectors().col(1), vlo = es.eigenvectors().col(0);
  const ComplexMatrix soft = 0.5 * (1.0 + th) * vhi * vhi.adjoint() + 0.5 * (1.0 - th) * vlo * vlo.adjoint();

  const Eigen::MatrixXd jac = obj.jacobian(x);
  const Eigen::VectorXd gs = obj.trace_gradient(x);
  Eigen::Vector3d w = jac.transpose().completeOrthogonalDecomposition().solve(-gs);
  if (w.norm() > 1.0) w.normalize();
  ComplexMatrix stat(2, 2);
  stat << 0.5 * (1.0 + w(0)), 0.5 * cplx(w(1), w(2)), 0.5 * cplx(w(1), -w(2)), 0.5 * (1.0 - w(0));

  const double dv_soft = spectral_dual_value(prob, soft);
  const double dv_stat = spectral_dual_value(prob, stat);
  out.dual_state = dv_stat >= dv_soft ? stat : soft;
  out.dual_value = std::max(dv_soft, dv_stat);
  out.gap = out.value - out.dual_value;
  if (out.gap > rel_gap_tol * std::max(1.0, out.value)) {
    std::ostringstream os;
    os << "spectral minimization did not converge: duality gap " << out.gap << " at value " << out.value
       << ", gradient norm " << out.grad_norm;
    throw NumericError(os.str());
  }
  return out;
}

EcqfiResult ecqfi_detailed(const KrausSet& ks) {
  if (ks.ops.empty() || ks.ops.size() != ks.dops.size()) throw DomainError("ecqfi: Kraus set lacks derivatives");
  const int m = static_cast<int>(ks.size());
  const Eigen::Index dout = ks.ops.front().rows();
  if (ks.ops.front().cols() != 2) throw DomainError("ecqfi: qubit input expected");
  auto stack = [&](const std::vector<ComplexMatrix>& blocks) {
    ComplexMatrix s(m * dout, 2);
    for (int i = 0; i < m; ++i) s.middleRows(i * dout, dout) = blocks[i];
    return s;
  };
  SpectralProblem prob;
  prob.base = stack(ks.dops);
  const ComplexMatrix zero = ComplexMatrix::Zero(dout, 2);
  for (int i = 0; i < m; ++i) {
    std::vector<ComplexMatrix> b(m, zero);
    b[i] = -kI * ks.ops[i];
    prob.directions.push_back(stack(b));
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      std::vector<ComplexMatrix> re(m, zero), im(m, zero);
      re[i] = -kI * ks.ops[j];
      re[j] = -kI * ks.ops[i];
      im[i] = ks.ops[j];
      im[j] = -ks.ops[i];
      prob.directions.push_back(stack(re));
      prob.directions.push_back(stack(im));
    }
  }
  const SpectralOptimum opt = minimize_max_eigenvalue(prob);
  EcqfiResult r;
  r.value = 4.0 * opt.value;
  r.gauge.h = hermitian_from_params(opt.x, m);
  r.input_state = opt.dual_state;
  r.gap = 4.0 * opt.gap;
  r.iterations = opt.iterations;
  return r;
}

double ecqfi(const KrausSet& ks) { return ecqfi_detailed(ks).value; }

double sigma_z_ecqfi(double gamma1, double gamma2, double t) {
  const double s = std::exp(0.5 * gamma1 * t) + std::exp(0.5 * gamma2 * t);
  return 16.0 * t * t / (s * s);
}

ProtocolReport product_bound_sigma_z(double gamma1, double gamma2) {
  if (gamma1 < 0.0 || gamma2 < 0.0) throw DomainError("product_bound_sigma_z: negative rate");
  if (gamma1 + gamma2 <= 0.0) throw DomainError("product_bound_sigma_z: both rates zero");
  const double gmax = std::max(gamma1, gamma2);
  auto rate = [&](double t) { return sigma_z_ecqfi(gamma1, gamma2, t) / t; };
  const Optimum1d opt = maximize_positive(rate, 1e-4 / gmax, 20.0 / gmax);
  ProtocolReport rep;
  rep.strategy = "prod";
  rep.rate = opt.value;
  const double th = std::tanh(opt.x * (gamma1 - gamma2) / 4.0);
  rep.params["t_opt"] = opt.x;
  rep.params["p_opt"] = 0.5 * (1.0 + th);
  rep.params["sin_phi_opt"] = th;
  return rep;
}

ProtocolReport product_bound_sigma_x(double gamma_max, double gamma_min, double omega) {
  if (!(gamma_max > 0.0)) throw DomainError("product_bound_sigma_x: gamma_max must be positive");
  if (gamma_min < 0.0 || gamma_min > gamma_max) throw DomainError("product_bound_sigma_x: need 0 <= gamma_min <= gamma_max");
  const ErasureModel model = ErasureModel::single(gamma_min, gamma_max, omega, kPi / 2);
  auto rate = [&](double t) { return ecqfi(kraus(model, t)) / t; };
  const double scale = std::max(gamma_max, std::abs(omega));
  const Optimum1d opt = maximize_positive(rate, 1e-4 / scale, 20.0 / scale, 80);
  const EcqfiResult at = ecqfi_detailed(kraus(model, opt.x));
  ProtocolReport rep;
  rep.strategy = "prod";
  rep.rate = opt.value;
  const ComplexMatrix& rho = at.input_state;
  rep.params["t_opt"] = opt.x;
  rep.params["phi_opt"] = std::atan2((rho(0, 0) - rho(1, 1)).real(), 2.0 * rho(0, 1).real());
  rep.params["p_opt"] = rho(0, 0).real();
  if (rep.rate > 16.0 / gamma_max * (1.0 + 1e-6)) {
    std::ostringstream os;
    os << "product_bound_sigma_x: rate " << rep.rate << " exceeds the 16/gamma_max cap";
    throw NumericError(os.str());
  }
  return rep;
}

}  // namespace erasure
