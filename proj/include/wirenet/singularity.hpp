#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "wirenet/bloch.hpp"
#include "wirenet/nelder_mead.hpp"
#include "wirenet/parallel.hpp"

namespace wirenet {

// ---------------------------------------------------------------------------
// Characteristic map: coefficients of det(zI - H(k)) and of its trace-free
// depression, plus the discriminant. Degeneracies are exactly the zeros of
// the discriminant.

struct CharMapPoint {
  KVec k;
  std::vector<double> b;  // monic coefficients, b[j] multiplies z^j (j < bands)
  std::vector<double> a;  // depressed coefficients a[0..bands-2]
  double discriminant = 0.0;
  double shift_residual = 0.0;  // |coefficient of z^{bands-1}| after depression
};

namespace detail {

inline std::vector<double> poly_from_roots(const std::vector<double>& roots) {
  std::vector<double> c{1.0};
  for (double r : roots) {
    std::vector<double> nxt(c.size() + 1, 0.0);
    for (size_t i = 0; i < c.size(); ++i) {
      nxt[i + 1] += c[i];
      nxt[i] -= r * c[i];
    }
    c = std::move(nxt);
  }
  return c;  // c[i] multiplies z^i, degree = roots.size(), leading 1
}

}  // namespace detail

inline CharMapPoint char_map(const HamiltonianFamily& f, const KVec& k) {
  CharMapPoint p;
  p.k = k;
  auto ev = f.eigenvalues(k);
  const int n = static_cast<int>(ev.size());
  auto full = detail::poly_from_roots(ev);
  p.b.assign(full.begin(), full.end() - 1);

  double mean = std::accumulate(ev.begin(), ev.end(), 0.0) / n;
  std::vector<double> shifted(ev);
  for (double& x : shifted) x -= mean;
  auto dep = detail::poly_from_roots(shifted);
  p.shift_residual = std::abs(dep[n - 1]);
  p.a.assign(dep.begin(), dep.begin() + std::max(0, n - 1));

  p.discriminant = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) p.discriminant *= (ev[i] - ev[j]) * (ev[i] - ev[j]);
  return p;
}

// ---------------------------------------------------------------------------
// Degenerate locus: coarse grid scan, local refinement, stratum labels and
// the Morse-signature test for conical crossings.

struct ScanParams {
  int grid = 32;
  double coarse_tol = -1.0;      // < 0: auto = 0.3 * spectral_width / bands
  double cluster_tol = 1e-6;     // eigenvalue clustering at a refined point
  double gap_tol = 1e-8;         // refinement success threshold
  double fd_step = 1e-4;         // finite-difference step for the Morse test
  double dedupe_tol = 1e-4;      // merge refined points closer than this
  double budget = 2e9;
  int nm_max_evals = 4000;
  int large_component = 9;       // >= this many cells: refine every cell (curve case)
};

struct DiracVerdict {
  int pair_low = -1;       // bands (pair_low, pair_low+1)
  double lambda = 0.0;
  bool applicable = false; // pair coincides and is isolated from the rest
  bool nondegenerate = false;
  bool is_dirac = false;
  int n_pos = 0, n_neg = 0;
  double min_abs_hessian_eig = 0.0;
};

struct DegeneracyPoint {
  KVec k;
  std::vector<double> eigenvalues;
  std::vector<int> partition;  // multiplicities of coincident clusters, ascending order
  std::vector<int> stratum;    // r for each A_r factor, ascending
  std::vector<DiracVerdict> dirac;
  double min_gap = 0.0;
  double discriminant = 0.0;
  bool converged = false;
  bool ambiguous_clusters = false;
  int component = -1;
  bool non_isolated = false;
};

struct DegeneracyReport {
  std::vector<DegeneracyPoint> points;
  int grid = 0;
  double coarse_tol = 0.0;
  int component_count = 0;
};

struct RefineResult {
  KVec k;
  double gap = 0.0;
  bool converged = false;
};

inline double wrap_2pi(double x) {
  double t = std::fmod(x, 2.0 * M_PI);
  if (t < 0) t += 2.0 * M_PI;
  // avoid emitting 2*pi itself for values a hair below it
  if (2.0 * M_PI - t < 1e-12) t = 0.0;
  return t;
}

inline double cyclic_sep(double a, double b) {
  double d = std::fabs(wrap_2pi(a) - wrap_2pi(b));
  return std::min(d, 2.0 * M_PI - d);
}

inline double torus_dist(const KVec& a, const KVec& b) {
  double s = 0.0;
  for (size_t d = 0; d < a.size(); ++d) {
    double x = std::fabs(wrap_2pi(a[d]) - wrap_2pi(b[d]));
    x = std::min(x, 2.0 * M_PI - x);
    s += x * x;
  }
  return std::sqrt(s);
}

inline RefineResult refine_degenerate(const HamiltonianFamily& f, const KVec& k0,
                                      double step0, const ScanParams& sp = {}) {
  auto gap = [&](const std::vector<double>& k) { return f.min_gap(k); };
  RefineResult r;
  r.k = k0;
  r.gap = gap(k0);
  double step = step0;
  for (int round = 0; round < 8 && r.gap > sp.gap_tol; ++round) {
    auto nm = nelder_mead(gap, r.k, step, sp.nm_max_evals, 1e-13, 0.0);
    if (nm.fval < r.gap) { r.k = nm.x; r.gap = nm.fval; }
    step = std::max(1e-9, r.gap * 0.5);
  }
  for (auto& x : r.k) x = wrap_2pi(x);
  r.converged = r.gap < sp.gap_tol;
  return r;
}

// Grid cells that are local minima of the adjacent-eigenvalue gap below the
// coarse tolerance, grouped into connected components (Chebyshev distance
// <= 2, periodic).
struct ScanComponent {
  std::vector<std::vector<int>> cells;
};

inline std::vector<ScanComponent> degenerate_scan(const HamiltonianFamily& f, int M,
                                                  double coarse_tol, double budget = 2e9) {
  if (M < 8) throw std::invalid_argument("degenerate_scan needs grid M >= 8");
  if (f.bands() < 2) return {};
  check_grid_budget(f.dim(), M, f.bands(), budget);
  const int n = f.dim();
  size_t total = 1;
  for (int d = 0; d < n; ++d) total *= static_cast<size_t>(M);

  std::vector<double> gap(total);
  parallel_for(total, [&](size_t flat) {
    size_t rest = flat;
    KVec k(n);
    for (int d = n - 1; d >= 0; --d) {
      k[d] = 2.0 * M_PI * static_cast<double>(rest % M) / M;
      rest /= M;
    }
    gap[flat] = f.min_gap(k);
  });

  auto flat_of = [&](const std::vector<int>& idx) {
    size_t flat = 0;
    for (int d = 0; d < n; ++d) flat = flat * M + static_cast<size_t>((idx[d] % M + M) % M);
    return flat;
  };

  std::vector<std::vector<int>> cand;
  std::vector<int> idx(n, 0);
  for (size_t flat = 0; flat < total; ++flat) {
    double g0 = gap[flat];
    if (g0 < coarse_tol) {
      bool is_min = true;
      for (int d = 0; d < n && is_min; ++d) {
        for (int s : {-1, +1}) {
          auto nb = idx;
          nb[d] += s;
          if (gap[flat_of(nb)] < g0) { is_min = false; break; }
        }
      }
      if (is_min) cand.push_back(idx);
    }
    int d = n - 1;
    while (d >= 0 && ++idx[d] == M) idx[d--] = 0;
  }

  // union-find over candidates within Chebyshev distance 2
  std::vector<int> parent(cand.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) { parent[x] = parent[parent[x]]; x = parent[x]; }
    return x;
  };
  auto cheb = [&](const std::vector<int>& a, const std::vector<int>& b) {
    int m = 0;
    for (int d = 0; d < n; ++d) {
      int x = std::abs(a[d] - b[d]);
      x = std::min(x, M - x);
      m = std::max(m, x);
    }
    return m;
  };
  for (size_t i = 0; i < cand.size(); ++i)
    for (size_t j = i + 1; j < cand.size(); ++j)
      if (cheb(cand[i], cand[j]) <= 2) parent[find(static_cast<int>(i))] = find(static_cast<int>(j));

  std::map<int, ScanComponent> comps;
  for (size_t i = 0; i < cand.size(); ++i) comps[find(static_cast<int>(i))].cells.push_back(cand[i]);
  std::vector<ScanComponent> out;
  for (auto& [root, comp] : comps) {
    std::sort(comp.cells.begin(), comp.cells.end());
    out.push_back(std::move(comp));
  }
  std::sort(out.begin(), out.end(),
            [](const ScanComponent& a, const ScanComponent& b) { return a.cells[0] < b.cells[0]; });
  return out;
}

inline std::vector<int> cluster_partition(const std::vector<double>& ev, double tol,
                                          bool* ambiguous = nullptr) {
  std::vector<int> part;
  int run = 1;
  for (size_t i = 1; i <= ev.size(); ++i) {
    if (i < ev.size() && ev[i] - ev[i - 1] < tol) {
      ++run;
    } else {
      part.push_back(run);
      run = 1;
    }
    if (ambiguous && i < ev.size()) {
      double g = ev[i] - ev[i - 1];
      if (g >= tol && g < 10.0 * tol) *ambiguous = true;
    }
  }
  return part;
}

inline std::vector<int> stratum_of_partition(const std::vector<int>& part, int bands) {
  std::vector<int> s;
  for (int m : part)
    if (m >= 2) s.push_back(m - 1);
  std::sort(s.begin(), s.end());
  int total = std::accumulate(s.begin(), s.end(), 0);
  if (!s.empty() && total > bands - static_cast<int>(s.size()))
    throw std::logic_error("stratum constraint sum(r_i) <= k - s violated");
  return s;
}

struct StratumResult {
  std::vector<int> partition;  // coincident-cluster sizes, ascending eigenvalue order
  std::vector<int> stratum;    // r for each A_r factor, ascending
  bool ambiguous = false;      // some gap fell inside [tol, 10 tol)
};

inline StratumResult classify_stratum(const HamiltonianFamily& f, const KVec& kstar,
                                      double cluster_tol = 1e-6) {
  StratumResult out;
  auto ev = f.eigenvalues(kstar);
  out.partition = cluster_partition(ev, cluster_tol, &out.ambiguous);
  out.stratum = stratum_of_partition(out.partition, f.bands());
  return out;
}

// Morse-signature test for the crossing pair (pair_low, pair_low+1) at k*.
// Builds F(k,z) = det(zI - H(k)) and certifies a nondegenerate Hessian with
// exactly one eigenvalue of minority sign. Either overall sign is accepted.
inline DiracVerdict dirac_test(const HamiltonianFamily& f, const KVec& kstar, int pair_low,
                               const ScanParams& sp = {}) {
  DiracVerdict v;
  v.pair_low = pair_low;
  auto ev = f.eigenvalues(kstar);
  const int bands = static_cast<int>(ev.size());
  if (pair_low < 0 || pair_low + 1 >= bands) return v;
  const double isolation = std::max(10.0 * sp.cluster_tol, 1e-9);
  if (ev[pair_low + 1] - ev[pair_low] >= sp.cluster_tol) return v;
  if (pair_low > 0 && ev[pair_low] - ev[pair_low - 1] < isolation) return v;
  if (pair_low + 2 < bands && ev[pair_low + 2] - ev[pair_low + 1] < isolation) return v;
  v.applicable = true;
  v.lambda = 0.5 * (ev[pair_low] + ev[pair_low + 1]);

  const int n = f.dim();
  const int m = n + 1;
  auto F = [&](const std::vector<double>& x) {
    KVec k(x.begin(), x.begin() + n);
    auto e = f.eigenvalues(k);
    double p = 1.0;
    for (double lam : e) p *= (x[n] - lam);
    return p;
  };
  std::vector<double> x0(kstar);
  x0.push_back(v.lambda);

  auto hessian = [&](double h) {
    std::vector<std::vector<double>> H(m, std::vector<double>(m, 0.0));
    double f0 = F(x0);
    for (int i = 0; i < m; ++i) {
      auto xp = x0, xm = x0;
      xp[i] += h;
      xm[i] -= h;
      H[i][i] = (F(xp) - 2.0 * f0 + F(xm)) / (h * h);
    }
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        auto xpp = x0, xpm = x0, xmp = x0, xmm = x0;
        xpp[i] += h; xpp[j] += h;
        xpm[i] += h; xpm[j] -= h;
        xmp[i] -= h; xmp[j] += h;
        xmm[i] -= h; xmm[j] -= h;
        H[i][j] = H[j][i] = (F(xpp) - F(xpm) - F(xmp) + F(xmm)) / (4.0 * h * h);
      }
    return H;
  };

  auto Hh = hessian(sp.fd_step);
  auto Hh2 = hessian(sp.fd_step / 2.0);
  CMatrix Hc(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) Hc(i, j) = (4.0 * Hh2[i][j] - Hh[i][j]) / 3.0;

  auto eig = eigvals_hermitian(Hc);
  const double tol = 1e-6 * f.spectral_width() * f.spectral_width();
  v.min_abs_hessian_eig = 1e300;
  for (double lam : eig) {
    v.min_abs_hessian_eig = std::min(v.min_abs_hessian_eig, std::abs(lam));
    if (lam > 0) ++v.n_pos;
    else ++v.n_neg;
  }
  v.nondegenerate = v.min_abs_hessian_eig >= tol;
  v.is_dirac = v.nondegenerate && (v.n_pos == 1 || v.n_neg == 1);
  return v;
}

// Full pipeline: scan -> refine -> classify -> Morse test.
inline DegeneracyReport scan_and_classify(const HamiltonianFamily& f, const ScanParams& sp = {}) {
  DegeneracyReport rep;
  rep.grid = sp.grid;
  double tol = sp.coarse_tol > 0 ? sp.coarse_tol
                                 : 0.3 * f.spectral_width() / std::max(1, f.bands());
  rep.coarse_tol = tol;
  if (f.bands() < 2) return rep;

  auto comps = degenerate_scan(f, sp.grid, tol, sp.budget);
  rep.component_count = static_cast<int>(comps.size());
  const double cell = 2.0 * M_PI / sp.grid;

  for (size_t c = 0; c < comps.size(); ++c) {
    const auto& comp = comps[c];
    std::vector<std::vector<int>> seeds;
    if (static_cast<int>(comp.cells.size()) >= sp.large_component) {
      seeds = comp.cells;  // extended locus: sample along it
    } else {
      // isolated point: refine from the deepest cell
      const std::vector<int>* best = nullptr;
      double bg = 1e300;
      for (const auto& cellidx : comp.cells) {
        KVec k(f.dim());
        for (int d = 0; d < f.dim(); ++d) k[d] = cell * cellidx[d];
        double g = f.min_gap(k);
        if (g < bg) { bg = g; best = &cellidx; }
      }
      seeds.push_back(*best);
    }

    std::vector<DegeneracyPoint> pts;
    for (const auto& s : seeds) {
      KVec k0(f.dim());
      for (int d = 0; d < f.dim(); ++d) k0[d] = cell * s[d];
      auto rr = refine_degenerate(f, k0, cell * 0.5, sp);
      bool dup = false;
      for (const auto& p : pts)
        if (torus_dist(p.k, rr.k) < sp.dedupe_tol) { dup = true; break; }
      if (dup) continue;
      DegeneracyPoint p;
      p.k = rr.k;
      p.min_gap = rr.gap;
      p.converged = rr.converged;
      p.component = static_cast<int>(c);
      p.eigenvalues = f.eigenvalues(rr.k);
      auto strat = classify_stratum(f, rr.k, sp.cluster_tol);
      p.partition = strat.partition;
      p.stratum = strat.stratum;
      p.ambiguous_clusters = strat.ambiguous;
      p.discriminant = char_map(f, rr.k).discriminant;
      // Morse test per size-2 cluster
      int band = 0;
      for (int msize : p.partition) {
        if (msize == 2) p.dirac.push_back(dirac_test(f, p.k, band, sp));
        band += msize;
      }
      pts.push_back(std::move(p));
    }
    bool noniso = false;
    for (size_t i = 0; i < pts.size() && !noniso; ++i)
      for (size_t j = i + 1; j < pts.size(); ++j)
        if (torus_dist(pts[i].k, pts[j].k) < 4.0 * cell) { noniso = true; break; }
    for (auto& p : pts) p.non_isolated = noniso;
    for (auto& p : pts) rep.points.push_back(std::move(p));
  }

  std::sort(rep.points.begin(), rep.points.end(),
            [](const DegeneracyPoint& a, const DegeneracyPoint& b) { return a.k < b.k; });
  return rep;
}

}  // namespace wirenet
