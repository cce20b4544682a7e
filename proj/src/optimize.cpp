#include "erasure/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace erasure {

Optimum1d golden_section_max(const std::function<double(double)>& f, double a, double b, double xtol, int max_iter) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  Optimum1d out;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  out.evaluations = 2;
  for (int it = 0; it < max_iter && std::abs(b - a) > xtol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
    ++out.evaluations;
  }
  if (fc >= fd) {
    out.x = c;
    out.value = fc;
  } else {
    out.x = d;
    out.value = fd;
  }
  return out;
}

Optimum1d maximize_positive(const std::function<double(double)>& f, double lo, double hi, int grid, double xtol_rel,
                            int max_expansions) {
  std::vector<double> xs(grid), fs(grid);
  int evals = 0;
  std::size_t best = 0;
  for (int expansion = 0;; ++expansion) {
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < grid; ++i) {
      xs[i] = std::exp(llo + (lhi - llo) * i / (grid - 1));
      fs[i] = f(xs[i]);
      ++evals;
    }
    best = static_cast<std::size_t>(std::max_element(fs.begin(), fs.end()) - fs.begin());
    if (expansion >= max_expansions) break;
    if (best == 0) {
      lo /= 10.0;
    } else if (best + 1 == xs.size()) {
      hi *= 10.0;
    } else {
      break;
    }
  }
  const double a = best == 0 ? xs[0] : xs[best - 1];
  const double b = best + 1 == xs.size() ? xs.back() : xs[best + 1];
  Optimum1d r = golden_section_max(f, a, b, xtol_rel);
  r.evaluations += evals;
  if (fs[best] > r.value) {
    r.x = xs[best];
    r.value = fs[best];
  }
  return r;
}

NelderMeadResult nelder_mead_min(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                 double step, double ftol, int max_iter) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

  NelderMeadResult res;
  std::vector<std::size_t> order(n + 1);
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it;
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t ib = order.front(), iw = order.back(), isw = order[n - 1];
    if (std::abs(fv[iw] - fv[ib]) <= ftol * (std::abs(fv[ib]) + std::abs(fv[iw]) + 1e-300)) {
      double spread = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = 0; j < n; ++j) spread = std::max(spread, std::abs(simplex[i][j] - simplex[ib][j]));
      if (spread < 1e-10) {
        res.converged = true;
        break;
      }
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != iw)
        for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    auto along = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + coef * (simplex[iw][j] - centroid[j]);
      return p;
    };
    std::vector<double> xr = along(-1.0);
    const double fr = f(xr);
    if (fr < fv[ib]) {
      std::vector<double> xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        simplex[iw] = xe;
        fv[iw] = fe;
      } else {
        simplex[iw] = xr;
        fv[iw] = fr;
      }
    } else if (fr < fv[isw]) {
      simplex[iw] = xr;
      fv[iw] = fr;
    } else {
      const bool outside = fr < fv[iw];
      std::vector<double> xc = along(outside ? -0.5 : 0.5);
      const double fc = f(xc);
      if (fc < (outside ? fr : fv[iw])) {
        simplex[iw] = xc;
        fv[iw] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == ib) continue;
          for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[ib][j] + 0.5 * (simplex[i][j] - simplex[ib][j]);
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  const std::size_t ib = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = simplex[ib];
  res.value = fv[ib];
  return res;
}

}  // namespace erasure
