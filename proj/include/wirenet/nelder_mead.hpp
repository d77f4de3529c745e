#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace wirenet {

struct NelderMeadResult {
  std::vector<double> x;
  double fval = 0.0;
  int evals = 0;
  bool converged = false;  // simplex collapsed below xtol / ftol
};

// Derivative-free simplex minimizer. Standard coefficients, deterministic
// tie-breaking; good enough for the small-dimension gap refinements here.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0, double step,
                                    int max_evals = 4000, double xtol = 1e-12,
                                    double ftol = 1e-15) {
  const size_t n = x0.size();
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> pts(n + 1, x0);
  for (size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  std::vector<double> fv(n + 1);
  int evals = 0;
  for (size_t i = 0; i <= n; ++i) { fv[i] = f(pts[i]); ++evals; }

  std::vector<size_t> idx(n + 1);
  auto order = [&]() {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return fv[a] < fv[b]; });
  };

  NelderMeadResult res;
  while (true) {
    order();
    const size_t best = idx[0], worst = idx[n], second = idx[n - 1];

    double diam = 0.0;
    for (size_t i = 1; i <= n; ++i)
      for (size_t d = 0; d < n; ++d)
        diam = std::max(diam, std::abs(pts[idx[i]][d] - pts[best][d]));
    if (diam < xtol || std::abs(fv[worst] - fv[best]) < ftol) {
      res.converged = true;
      break;
    }
    if (evals >= max_evals) break;

    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
    }
    for (size_t d = 0; d < n; ++d) centroid[d] /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> y(n);
      for (size_t d = 0; d < n; ++d) y[d] = centroid[d] + coef * (centroid[d] - pts[worst][d]);
      return y;
    };

    std::vector<double> xr = blend(alpha);
    double fr = f(xr); ++evals;
    if (fr < fv[best]) {
      std::vector<double> xe = blend(gamma);
      double fe = f(xe); ++evals;
      if (fe < fr) { pts[worst] = xe; fv[worst] = fe; }
      else { pts[worst] = xr; fv[worst] = fr; }
    } else if (fr < fv[second]) {
      pts[worst] = xr; fv[worst] = fr;
    } else {
      std::vector<double> xc = blend(-rho);
      double fc = f(xc); ++evals;
      if (fc < fv[worst]) { pts[worst] = xc; fv[worst] = fc; }
      else {
        for (size_t i = 1; i <= n; ++i) {
          size_t j = idx[i];
          for (size_t d = 0; d < n; ++d) pts[j][d] = pts[best][d] + sigma * (pts[j][d] - pts[best][d]);
          fv[j] = f(pts[j]); ++evals;
        }
      }
    }
  }

  order();
  res.x = pts[idx[0]];
  res.fval = fv[idx[0]];
  res.evals = evals;
  return res;
}

}  // namespace wirenet
