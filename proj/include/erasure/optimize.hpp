#ifndef ERASURE_OPTIMIZE_HPP
#define ERASURE_OPTIMIZE_HPP

#include <functional>
#include <vector>

namespace erasure {

struct Optimum1d {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

// Maximizes a unimodal f on [a, b].
Optimum1d golden_section_max(const std::function<double(double)>& f, double a, double b, double xtol = 1e-12,
                             int max_iter = 500);

inline Optimum1d golden_section_min(const std::function<double(double)>& f, double a, double b, double xtol = 1e-12,
                                    int max_iter = 500) {
  Optimum1d r = golden_section_max([&](double x) { return -f(x); }, a, b, xtol, max_iter);
  r.value = -r.value;
  return r;
}

// Global-ish maximization of f over x > 0: log-spaced scan on [lo, hi], expanding
// geometrically while the best grid point sits on an edge, then golden-section
// refinement between the neighbours of the best grid point.
Optimum1d maximize_positive(const std::function<double(double)>& f, double lo, double hi, int grid = 60,
                            double xtol_rel = 1e-12, int max_expansions = 12);

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead_min(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                 double step, double ftol = 1e-13, int max_iter = 20000);

}  // namespace erasure

#endif
