#include "erasure/erasure_model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <regex>
#include <sstream>

namespace erasure {

ErasureModel::ErasureModel(double omega, double theta, Eigen::MatrixXd gamma)
    : omega_(omega), theta_(theta), gamma_(std::move(gamma)) {
  if (gamma_.rows() != 2) throw DomainError("model: rate grid must have two rows");
  if (!std::isfinite(omega_) || !std::isfinite(theta_)) throw DomainError("model: omega and theta must be finite");
  if (theta_ < -1e-12 || theta_ > kPi / 2 + 1e-12) throw DomainError("model: theta outside [0, pi/2]");
  for (Eigen::Index i = 0; i < gamma_.size(); ++i)
    if (!(gamma_.data()[i] >= 0.0) || !std::isfinite(gamma_.data()[i])) throw DomainError("model: rates must be >= 0");
  total_[0] = gamma_.row(0).sum();
  total_[1] = gamma_.row(1).sum();
}

ErasureModel ErasureModel::single(double gamma1, double gamma2, double omega, double theta) {
  Eigen::MatrixXd g(2, 1);
  g << gamma1, gamma2;
  return ErasureModel(omega, theta, g);
}

ComplexMatrix ErasureModel::generator() const {
  ComplexMatrix g = ComplexMatrix::Zero(dim(), dim());
  const double c = std::cos(theta_), s = std::sin(theta_);
  g(0, 0) = c;
  g(1, 1) = -c;
  g(0, 1) = s;
  g(1, 0) = s;
  return g;
}

ComplexMatrix ErasureModel::hamiltonian() const { return omega_ * generator(); }

std::vector<ComplexMatrix> ErasureModel::jump_operators() const {
  std::vector<ComplexMatrix> out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < k(); ++j) {
      ComplexMatrix l = ComplexMatrix::Zero(dim(), dim());
      l(2 + j, i) = std::sqrt(gamma_(i, j));
      out.push_back(std::move(l));
    }
  }
  return out;
}

std::string ErasureModel::to_text() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "omega=" << omega_ << "\n";
  os << "theta=" << theta_ << "\n";
  os << "k=" << k() << "\n";
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < k(); ++j) os << "gamma[" << i + 1 << "][" << j + 1 << "]=" << gamma_(i, j) << "\n";
  return os.str();
}

namespace {

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw DomainError("model: cannot parse value for " + key + ": '" + value + "'");
  }
  while (used < value.size() && std::isspace(static_cast<unsigned char>(value[used]))) ++used;
  if (used != value.size()) throw DomainError("model: trailing characters in value for " + key);
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ErasureModel ErasureModel::from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
  static const std::regex gamma_key(R"(gamma\[(\d+)\]\[(\d+)\])");
  double omega = 0.0, theta = 0.0;
  int k = -1;
  std::map<std::pair<int, int>, double> rates;
  for (const auto& [key, value] : pairs) {
    std::smatch m;
    if (key == "omega") {
      omega = parse_real(key, value);
    } else if (key == "theta") {
      theta = parse_real(key, value);
    } else if (key == "k") {
      const double kv = parse_real(key, value);
      if (kv < 0 || kv != std::floor(kv)) throw DomainError("model: k must be a nonnegative integer");
      k = static_cast<int>(kv);
    } else if (std::regex_match(key, m, gamma_key)) {
      const int i = std::stoi(m[1]), j = std::stoi(m[2]);
      if (i < 1 || i > 2 || j < 1) throw DomainError("model: rate index out of range in " + key);
      rates[{i - 1, j - 1}] = parse_real(key, value);
    } else {
      throw DomainError("model: unknown key '" + key + "'");
    }
  }
  int max_j = 0;
  for (const auto& [ij, v] : rates) max_j = std::max(max_j, ij.second + 1);
  if (k < 0) k = max_j;
  if (max_j > k) throw DomainError("model: rate index exceeds k");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, k);
  for (const auto& [ij, v] : rates) g(ij.first, ij.second) = v;
  return ErasureModel(omega, theta, g);
}

ErasureModel ErasureModel::from_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError("model: line " + std::to_string(lineno) + " lacks '='");
    pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return from_pairs(pairs);
}

ComplexMatrix KrausSet::apply(const ComplexMatrix& rho) const {
  ComplexMatrix out = ComplexMatrix::Zero(ops.front().rows(), ops.front().rows());
  for (const auto& k : ops) out += k * rho * k.adjoint();
  return out;
}

ComplexMatrix KrausSet::apply_derivative(const ComplexMatrix& rho) const {
  ComplexMatrix out = ComplexMatrix::Zero(ops.front().rows(), ops.front().rows());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    ComplexMatrix t = dops[i] * rho * ops[i].adjoint();
    out += t + t.adjoint();
  }
  return out;
}

double KrausSet::completeness_error() const {
  ComplexMatrix s = ComplexMatrix::Zero(ops.front().cols(), ops.front().cols());
  for (const auto& k : ops) s += k.adjoint() * k;
  return (s - ComplexMatrix::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();
}

ComplexMatrix build_liouvillian(const ErasureModel& model) {
  const int d = model.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix h = model.hamiltonian();
  ComplexMatrix lv = -kI * (kron(h, id) - kron(id, h.transpose()));
  for (const auto& l : model.jump_operators()) {
    if (l.cwiseAbs().maxCoeff() == 0.0) continue;
    const ComplexMatrix ll = l.adjoint() * l;
    lv += kron(l, l.conjugate()) - 0.5 * kron(ll, id) - 0.5 * kron(id, ll.transpose());
  }
  return lv;
}

ComplexMatrix liouvillian_signal_part(const ErasureModel& model) {
  const int d = model.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix g = model.generator();
  return -kI * (kron(g, id) - kron(id, g.transpose()));
}

ComplexMatrix propagator(const ErasureModel& model, double t) {
  if (t < 0.0) throw DomainError("propagator: negative time");
  return expm(build_liouvillian(model) * t);
}

ComplexMatrix propagator_derivative(const ErasureModel& model, double t) {
  if (t < 0.0) throw DomainError("propagator: negative time");
  const ComplexMatrix lv = build_liouvillian(model) * t;
  const Eigen::Index n = lv.rows();
  ComplexMatrix big = ComplexMatrix::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = lv;
  big.bottomRightCorner(n, n) = lv;
  big.topRightCorner(n, n) = liouvillian_signal_part(model) * t;
  return expm(big).topRightCorner(n, n);
}

QuantumState evolve(const ErasureModel& model, const QuantumState& state, double t) {
  if (state.dim() != model.dim()) throw DomainError("evolve: state dimension does not match model");
  if (t < 0.0) throw DomainError("evolve: negative time");
  if (t == 0.0) return state;
  const ComplexVector out = propagator(model, t) * vec(state.rho);
  ComplexMatrix rho = unvec(out, model.dim());
  rho = 0.5 * (rho + rho.adjoint());
  return QuantumState(rho);
}

ComplexMatrix evolve_derivative(const ErasureModel& model, const QuantumState& state, double t) {
  if (state.dim() != model.dim()) throw DomainError("evolve: state dimension does not match model");
  const ComplexVector out = propagator_derivative(model, t) * vec(state.rho);
  ComplexMatrix d = unvec(out, model.dim());
  return 0.5 * (d + d.adjoint());
}

ComplexVector embed_qubit(const ComplexVector& qubit, int dim) {
  ComplexVector v = ComplexVector::Zero(dim);
  v.head(2) = qubit;
  return v;
}

namespace {

// Choi matrix of the channel restricted to qubit inputs, index (a, x) -> a * d + x.
ComplexMatrix qubit_choi(const ComplexMatrix& prop, int d) {
  ComplexMatrix choi = ComplexMatrix::Zero(2 * d, 2 * d);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      ComplexMatrix in = ComplexMatrix::Zero(d, d);
      in(a, b) = 1.0;
      choi.block(a * d, b * d, d, d) = unvec(prop * vec(in), d);
    }
  }
  return 0.5 * (choi + choi.adjoint());
}

// Kraus operators from the top `count` Choi eigenpairs (count < 0: all above cutoff).
std::vector<ComplexMatrix> choi_kraus(const ComplexMatrix& choi, int d, int count) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(choi);
  const auto& lam = es.eigenvalues();
  if (lam.minCoeff() < -1e-8) {
    std::ostringstream os;
    os << "kraus: Choi matrix has negative eigenvalue " << lam.minCoeff();
    throw NumericError(os.str());
  }
  const double cutoff = 1e-12 * std::abs(choi.trace().real());
  std::vector<int> idx;
  for (int i = static_cast<int>(lam.size()) - 1; i >= 0; --i) {
    if (count < 0 ? lam(i) > cutoff : static_cast<int>(idx.size()) < count) idx.push_back(i);
  }
  std::vector<ComplexMatrix> ops;
  for (int i : idx) {
    ComplexVector v = es.eigenvectors().col(i);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v *= std::conj(v(imax)) / std::abs(v(imax));
    ComplexMatrix kop(d, 2);
    const double s = std::sqrt(std::max(lam(i), 0.0));
    for (int a = 0; a < 2; ++a)
      for (int x = 0; x < d; ++x) kop(x, a) = s * v(a * d + x);
    ops.push_back(std::move(kop));
  }
  return ops;
}

// Rotates `ops` by the unitary that brings them closest to `ref` (orthogonal Procrustes).
std::vector<ComplexMatrix> align_to(const std::vector<ComplexMatrix>& ref, const std::vector<ComplexMatrix>& ops) {
  const std::size_t m = ref.size();
  const Eigen::Index sz = ref.front().size();
  ComplexMatrix a(m, sz), b(m, sz);
  for (std::size_t i = 0; i < m; ++i) {
    a.row(i) = Eigen::Map<const ComplexVector>(ref[i].data(), sz).transpose();
    b.row(i) = Eigen::Map<const ComplexVector>(ops[i].data(), sz).transpose();
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(a * b.adjoint(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const ComplexMatrix u = svd.matrixU() * svd.matrixV().adjoint();
  std::vector<ComplexMatrix> out(m, ComplexMatrix::Zero(ref.front().rows(), ref.front().cols()));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i] += u(i, j) * ops[j];
  return out;
}

}  // namespace

KrausSet kraus_from_propagators(const std::function<ComplexMatrix(double)>& propagator_at, double omega, int d) {
  KrausSet ks;
  ks.ops = choi_kraus(qubit_choi(propagator_at(omega), d), d, -1);
  const int m = static_cast<int>(ks.ops.size());
  const double h = fd_step(omega);
  const auto plus = align_to(ks.ops, choi_kraus(qubit_choi(propagator_at(omega + h), d), d, m));
  const auto minus = align_to(ks.ops, choi_kraus(qubit_choi(propagator_at(omega - h), d), d, m));
  for (int i = 0; i < m; ++i) ks.dops.push_back((plus[i] - minus[i]) / (2.0 * h));
  return ks;
}

KrausSet kraus(const ErasureModel& model, double t) {
  if (t < 0.0) throw DomainError("kraus: negative time");
  return kraus_from_propagators([&](double w) { return propagator(model.with_omega(w), t); }, model.omega(),
                                model.dim());
}

}  // namespace erasure
