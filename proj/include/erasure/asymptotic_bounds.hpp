#ifndef ERASURE_ASYMPTOTIC_BOUNDS_HPP
#define ERASURE_ASYMPTOTIC_BOUNDS_HPP

#include "erasure/erasure_model.hpp"

#include <string>

namespace erasure {

// Asymptotic sequential QFI. value is the coefficient of N*T (or of N^2 T^2
// when heisenberg is set).
struct UltimateBound {
  bool heisenberg = false;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string scaling = "NT";  // NT or N2T2

  static UltimateBound heisenberg_limit(double coefficient);
  static UltimateBound exact(double v) { return {false, v, v, v, "NT"}; }
};

// True iff the qubit-block generator lies in span{1, L, L^dagger, L^dagger L}.
bool hnls_check(const ErasureModel& model, double tol = 1e-9);

UltimateBound ultimate_sigma_z(double gamma1, double gamma2);

struct SigmaXSolution {
  UltimateBound bound;
  Eigen::VectorXd h;      // optimal coupling per erasure level
  double weight = 0.0;    // optimal mixing s in [0, 1]
  bool certified = false; // no random feasible perturbation improved the objective
};

// gamma is 2 x k, rows are the qubit levels.
SigmaXSolution ultimate_sigma_x_detailed(const Eigen::MatrixXd& gamma);
UltimateBound ultimate_sigma_x(const Eigen::MatrixXd& gamma);

// Largest eigenvalue of the asymptotic alpha for a single erasure level as a
// function of the identity coefficient hh.
double lambda_plus(double theta, double gamma1, double gamma2, double hh);

struct GeneralGBound {
  UltimateBound bound;  // value with (convex-sum lower, zero-off-diagonal upper)
  double h_opt = 0.0;
};

GeneralGBound ultimate_general_g_detailed(double theta, double gamma1, double gamma2);
UltimateBound ultimate_general_g(double theta, double gamma1, double gamma2);

// Direct numerical minimax over the full gauge (h over all nonzero jump
// operators plus the identity shift) for an arbitrary model.
struct NumericUltimate {
  UltimateBound bound;
  double gap = 0.0;
  int iterations = 0;
};
NumericUltimate ultimate_numeric(const ErasureModel& model);

}  // namespace erasure

#endif
