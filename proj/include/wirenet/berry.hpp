#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "wirenet/bloch.hpp"
#include "wirenet/singularity.hpp"

namespace wirenet {

struct SlicingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChernParams {
  int M = 24;
  double gap_floor = 1e-3;
  double link_floor = 0.1;
  double budget = 2e9;
};

// Per-band Chern numbers of one 2-torus leaf k[axis] = s, computed with
// oriented link variables and principal-branch plaquette fluxes. The slice is
// valid only if the bands stay separated on (a refinement of) the leaf.
struct SliceChern {
  int axis = 0;
  double s = 0.0;
  int M = 0;
  bool valid = false;
  std::vector<int> chern;
  double min_gap = 0.0;          // refined in-slice minimum of the band gap
  double min_link = 0.0;
  double max_int_defect = 0.0;   // distance of the plaquette sums from integers
};

inline SliceChern chern_slice(const HamiltonianFamily& f, int axis, double s,
                              const ChernParams& cp = {}) {
  if (f.dim() != 3)
    throw SlicingError("chern_slice: slicing implemented for 3-torus families");
  if (axis < 0 || axis >= 3) throw SlicingError("chern_slice: axis out of range");
  if (cp.M < 8) throw std::invalid_argument("chern_slice needs M >= 8");
  const int M = cp.M;
  const int bands = f.bands();
  // cyclic in-plane axes keep (u, v, axis) right-handed, so monopole charges
  // agree across the three slicing directions
  const int u = (axis + 1) % 3;
  const int v = (axis + 2) % 3;

  auto kpoint = [&](double ku, double kv) {
    KVec k(3);
    k[axis] = s;
    k[u] = ku;
    k[v] = kv;
    return k;
  };

  std::vector<CMatrix> vecs(static_cast<size_t>(M) * M);
  std::vector<double> gap(static_cast<size_t>(M) * M);
  parallel_for(static_cast<size_t>(M) * M, [&](size_t flat) {
    int i = static_cast<int>(flat) / M;
    int j = static_cast<int>(flat) % M;
    auto sp = f.spectrum(kpoint(2 * M_PI * i / M, 2 * M_PI * j / M));
    vecs[flat] = std::move(sp.vectors);
    double g = std::numeric_limits<double>::infinity();
    for (int b = 0; b + 1 < bands; ++b) g = std::min(g, sp.eigenvalues[b + 1] - sp.eigenvalues[b]);
    gap[flat] = g;
  });

  SliceChern out;
  out.axis = axis;
  out.s = s;
  out.M = M;

  // true in-slice minimum: polish the best grid cell inside the leaf
  size_t argmin = 0;
  for (size_t t = 1; t < gap.size(); ++t)
    if (gap[t] < gap[argmin]) argmin = t;
  out.min_gap = gap[argmin];
  if (bands >= 2) {
    auto in_slice_gap = [&](const std::vector<double>& x) {
      return f.min_gap(kpoint(x[0], x[1]));
    };
    std::vector<double> x0{2 * M_PI * static_cast<double>(argmin / M) / M,
                           2 * M_PI * static_cast<double>(argmin % M) / M};
    auto nm = nelder_mead(in_slice_gap, x0, M_PI / M, 1200, 1e-10);
    out.min_gap = std::min(out.min_gap, nm.fval);
  }

  auto at = [&](int i, int j) -> const CMatrix& {
    return vecs[static_cast<size_t>((i % M + M) % M) * M + static_cast<size_t>((j % M + M) % M)];
  };
  auto link = [&](const CMatrix& a, const CMatrix& b, int band) {
    cplx acc = 0.0;
    for (int r = 0; r < bands; ++r) acc += std::conj(a(r, band)) * b(r, band);
    return acc;
  };

  out.chern.assign(bands, 0);
  out.min_link = 1.0;
  for (int b = 0; b < bands; ++b) {
    double total = 0.0;
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        cplx u1 = link(at(i, j), at(i + 1, j), b);
        cplx u2 = link(at(i + 1, j), at(i + 1, j + 1), b);
        cplx u3 = link(at(i, j + 1), at(i + 1, j + 1), b);
        cplx u4 = link(at(i, j), at(i, j + 1), b);
        out.min_link = std::min({out.min_link, std::abs(u1), std::abs(u2), std::abs(u3), std::abs(u4)});
        cplx w = u1 * u2 * std::conj(u3) * std::conj(u4);
        total += std::arg(w);
      }
    }
    double c = total / (2.0 * M_PI);
    out.chern[b] = static_cast<int>(std::lround(c));
    out.max_int_defect = std::max(out.max_int_defect, std::abs(c - out.chern[b]));
  }
  out.valid = out.min_gap > cp.gap_floor && out.min_link > cp.link_floor;
  return out;
}

// ---------------------------------------------------------------------------
// Slice scan: Chern vectors versus the transverse coordinate, with jump
// intervals marking monopoles between leaves.

struct ChernJump {
  double s_lo = 0.0, s_hi = 0.0;  // bracketing valid leaves (s_hi may wrap past 2*pi)
  std::vector<int> delta;         // chern(s_hi) - chern(s_lo)
};

struct SliceScan {
  int axis = 0;
  std::vector<SliceChern> slices;
  std::vector<ChernJump> jumps;
};

inline SliceScan slice_scan(const HamiltonianFamily& f, int axis, int S, const ChernParams& cp = {}) {
  if (S < 8) throw std::invalid_argument("slice_scan needs S >= 8");
  SliceScan out;
  out.axis = axis;
  for (int j = 0; j < S; ++j) out.slices.push_back(chern_slice(f, axis, 2 * M_PI * j / S, cp));

  std::vector<int> valid;
  for (int j = 0; j < S; ++j)
    if (out.slices[j].valid) valid.push_back(j);
  if (valid.empty())
    throw SlicingError("slicing inapplicable along axis " + std::to_string(axis) +
                       ": every slice meets the degenerate locus");
  for (size_t t = 0; t < valid.size(); ++t) {
    int j0 = valid[t];
    int j1 = valid[(t + 1) % valid.size()];
    const auto& a = out.slices[j0];
    const auto& b = out.slices[j1];
    if (a.chern != b.chern) {
      ChernJump jump;
      jump.s_lo = a.s;
      jump.s_hi = (j1 > j0) ? b.s : b.s + 2 * M_PI;
      jump.delta.resize(a.chern.size());
      for (size_t i = 0; i < a.chern.size(); ++i) jump.delta[i] = b.chern[i] - a.chern[i];
      out.jumps.push_back(std::move(jump));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local charges by bracketing slices.

struct PointCharge {
  KVec k;
  std::vector<int> charge;
  double s_lo = 0.0, s_hi = 0.0;
  bool ok = false;
};

struct ChargeReport {
  int axis = 0;
  std::vector<PointCharge> points;
  std::vector<int> band_sums;
  bool sums_zero = false;
};

// First axis whose coordinates separate all points by more than min_sep.
inline std::optional<int> separating_axis(const std::vector<KVec>& pts, int dim, double min_sep) {
  for (int a = 0; a < dim; ++a) {
    bool ok = true;
    for (size_t i = 0; i < pts.size() && ok; ++i)
      for (size_t j = i + 1; j < pts.size(); ++j)
        if (cyclic_sep(pts[i][a], pts[j][a]) <= min_sep) { ok = false; break; }
    if (ok) return a;
  }
  return std::nullopt;
}

// Charge of the degenerate set inside the transverse window around `center`,
// from Chern numbers on a pair of bracketing leaves. Doubles the offset up to
// three times when a bracketing leaf is invalid. The leaf grid is refined so
// that a plaquette stays small against the clearance to the nearest monopole;
// the plaquette fluxes would otherwise leave the principal branch.
inline PointCharge bracket_charge(const HamiltonianFamily& f, int axis, double center,
                                  double half_width, const std::vector<double>& other_coords,
                                  const ChernParams& cp = {}, double ds0 = 2 * M_PI / 64) {
  PointCharge pc;
  double ds = ds0;
  for (int attempt = 0; attempt <= 3; ++attempt, ds *= 2) {
    double lo = center - half_width - ds;
    double hi = center + half_width + ds;
    bool crosses = false;
    for (double c : other_coords)
      if (cyclic_sep(c, center) <= half_width + 2.0 * ds + 1e-12) crosses = true;
    if (crosses) break;
    ChernParams local = cp;
    local.M = std::max(cp.M, static_cast<int>(std::ceil(4.0 * M_PI / ds)));
    local.M = std::min(local.M, 256);
    auto below = chern_slice(f, axis, wrap_2pi(lo), local);
    auto above = chern_slice(f, axis, wrap_2pi(hi), local);
    if (!below.valid || !above.valid) continue;
    pc.s_lo = lo;
    pc.s_hi = hi;
    pc.charge.resize(above.chern.size());
    for (size_t b = 0; b < above.chern.size(); ++b) pc.charge[b] = above.chern[b] - below.chern[b];
    pc.ok = true;
    return pc;
  }
  return pc;
}

inline ChargeReport local_charges(const HamiltonianFamily& f, const std::vector<KVec>& points,
                                  int axis, const ChernParams& cp = {},
                                  double ds0 = 2 * M_PI / 64) {
  if (points.empty()) throw std::invalid_argument("local_charges: no degenerate points given");
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      if (cyclic_sep(points[i][axis], points[j][axis]) < 4 * ds0)
        throw SlicingError("local_charges: axis " + std::to_string(axis) +
                           " does not separate the degenerate points; pick another axis");

  ChargeReport rep;
  rep.axis = axis;
  rep.band_sums.assign(f.bands(), 0);
  for (const auto& p : points) {
    std::vector<double> others;
    for (const auto& q : points)
      if (&q != &p) others.push_back(q[axis]);
    auto pc = bracket_charge(f, axis, p[axis], 0.0, others, cp, ds0);
    pc.k = p;
    if (!pc.ok)
      throw SlicingError("local_charges: bracketing slices stayed invalid after 3 doublings");
    for (int b = 0; b < f.bands(); ++b) rep.band_sums[b] += pc.charge[b];
    rep.points.push_back(std::move(pc));
  }
  rep.sums_zero = std::all_of(rep.band_sums.begin(), rep.band_sums.end(),
                              [](int s) { return s == 0; });
  return rep;
}

// ---------------------------------------------------------------------------
// Topological stability under seeded edge-weight perturbations.

struct StabilityParams {
  double eps = -1.0;  // < 0: default 0.01 * spectral width
  std::uint64_t seed = 0;
  bool complex_perturbation = false;
  double match_radius = 0.3;
  int zoom_grid = 24;
  double zoom_radius = 0.15;
  ScanParams scan;
  ChernParams chern;
};

struct StabilityComponent {
  KVec base_k;
  std::vector<int> base_stratum;
  std::vector<int> base_charge;       // empty if charges unavailable
  std::vector<KVec> matched;          // perturbed refined points
  std::vector<std::vector<int>> matched_strata;
  std::vector<int> component_charge;  // empty if charges unavailable
  bool charge_conserved = false;
  bool split = false;                 // more than one matched point
  bool gapped_out = false;            // no matched points survive
};

struct StabilityReport {
  double eps = 0.0;
  std::uint64_t seed = 0;
  bool charges_available = false;
  int axis = -1;
  std::vector<StabilityComponent> components;
  std::vector<KVec> unmatched_points;   // perturbed points near no original
  std::vector<KVec> unconverged_points; // refinements that missed the gap tolerance
  bool all_charges_conserved = false;
  std::string note;
};

namespace detail {

// Dense local minima search in a box followed by refinement; resolves
// clusters of split points that a global grid cannot separate.
inline std::vector<RefineResult> zoom_refine(const HamiltonianFamily& f, const KVec& center,
                                             double radius, int G, const ScanParams& sp) {
  const int n = f.dim();
  size_t total = 1;
  for (int d = 0; d < n; ++d) total *= static_cast<size_t>(G);
  std::vector<double> gap(total);
  auto kof = [&](size_t flat) {
    KVec k(n);
    size_t rest = flat;
    for (int d = n - 1; d >= 0; --d) {
      k[d] = center[d] - radius + 2.0 * radius * static_cast<double>(rest % G) / (G - 1);
      rest /= G;
    }
    return k;
  };
  parallel_for(total, [&](size_t flat) { gap[flat] = f.min_gap(kof(flat)); });

  std::vector<size_t> seeds;
  std::vector<int> idx(n, 0);
  for (size_t flat = 0; flat < total; ++flat) {
    bool is_min = true;
    double g0 = gap[flat];
    for (int d = 0; d < n && is_min; ++d) {
      for (int s : {-1, 1}) {
        int t = idx[d] + s;
        if (t < 0 || t >= G) continue;
        size_t nb = flat + static_cast<size_t>(s) * [&] {
          size_t stride = 1;
          for (int e = d + 1; e < n; ++e) stride *= static_cast<size_t>(G);
          return stride;
        }();
        if (gap[nb] < g0) { is_min = false; break; }
      }
    }
    if (is_min) seeds.push_back(flat);
    int d = n - 1;
    while (d >= 0 && ++idx[d] == G) idx[d--] = 0;
  }

  std::vector<RefineResult> out;
  const double cell = 2.0 * radius / (G - 1);
  for (size_t s : seeds) {
    auto rr = refine_degenerate(f, kof(s), cell * 0.6, sp);
    if (!rr.converged) continue;
    bool dup = false;
    for (const auto& p : out)
      if (torus_dist(p.k, rr.k) < 1e-5) { dup = true; break; }
    if (!dup) out.push_back(rr);
  }
  return out;
}

}  // namespace detail

inline StabilityReport stability_experiment(const HamiltonianFamily& f, StabilityParams par = {}) {
  if (!f.model()) throw ModelError("stability_experiment needs a model-backed family");
  StabilityReport rep;
  rep.eps = par.eps > 0 ? par.eps : 0.01 * f.spectral_width();
  rep.seed = par.seed;

  std::mt19937_64 rng(par.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> deltas(f.model()->edge_count());
  for (auto& d : deltas) {
    double re = rep.eps * u(rng);
    double im = par.complex_perturbation ? rep.eps * u(rng) : 0.0;
    d = cplx(re, im);
  }
  auto fp = f.perturbed(deltas);

  auto base = scan_and_classify(f, par.scan);
  auto pert = scan_and_classify(fp, par.scan);

  // resolve split clusters around every original point
  std::vector<RefineResult> pert_points;
  for (const auto& p : pert.points) {
    if (p.converged) pert_points.push_back({p.k, p.min_gap, true});
    else rep.unconverged_points.push_back(p.k);
  }
  for (const auto& bp : base.points) {
    auto local = detail::zoom_refine(fp, bp.k, par.zoom_radius, par.zoom_grid, par.scan);
    for (auto& rr : local) {
      bool dup = false;
      for (const auto& q : pert_points)
        if (torus_dist(q.k, rr.k) < 1e-5) { dup = true; break; }
      if (!dup) pert_points.push_back(rr);
    }
  }

  // assign each perturbed point to the nearest base point within the radius
  std::vector<std::vector<KVec>> matched(base.points.size());
  for (const auto& q : pert_points) {
    double bd = 1e300;
    int arg = -1;
    for (size_t i = 0; i < base.points.size(); ++i) {
      double d = torus_dist(base.points[i].k, q.k);
      if (d < bd) { bd = d; arg = static_cast<int>(i); }
    }
    if (arg >= 0 && bd <= par.match_radius) matched[arg].push_back(q.k);
    else rep.unmatched_points.push_back(q.k);
  }

  // charges only in the 3-torus monopole setting with isolated points
  bool charges = f.dim() == 3 && !base.points.empty();
  for (const auto& p : base.points) charges = charges && !p.non_isolated;
  int axis = -1;
  if (charges) {
    std::vector<KVec> base_ks;
    for (const auto& p : base.points) base_ks.push_back(p.k);
    auto ax = separating_axis(base_ks, 3, 4 * 2 * M_PI / 64);
    if (ax) axis = *ax;
    charges = ax.has_value();
  }
  rep.charges_available = charges;
  rep.axis = axis;

  rep.all_charges_conserved = true;
  for (size_t i = 0; i < base.points.size(); ++i) {
    StabilityComponent comp;
    comp.base_k = base.points[i].k;
    comp.base_stratum = base.points[i].stratum;
    comp.matched = matched[i];
    std::sort(comp.matched.begin(), comp.matched.end());
    for (const auto& q : comp.matched) {
      auto ev = fp.eigenvalues(q);
      bool amb = false;
      comp.matched_strata.push_back(
          stratum_of_partition(cluster_partition(ev, par.scan.cluster_tol, &amb), fp.bands()));
    }
    comp.split = comp.matched.size() > 1;
    comp.gapped_out = comp.matched.empty();

    if (charges) {
      std::vector<double> others;
      for (size_t j = 0; j < base.points.size(); ++j)
        if (j != i) others.push_back(base.points[j].k[axis]);
      auto bc = bracket_charge(f, axis, base.points[i].k[axis], 0.0, others, par.chern);
      if (bc.ok) comp.base_charge = bc.charge;
      if (!comp.matched.empty()) {
        // unwrap the matched coordinates around the base point; the interval
        // may straddle 0/2pi
        double b = base.points[i].k[axis];
        double lo = 1e300, hi = -1e300;
        for (const auto& q : comp.matched) {
          double d = std::remainder(q[axis] - b, 2.0 * M_PI);
          lo = std::min(lo, b + d);
          hi = std::max(hi, b + d);
        }
        double center = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
        auto cc = bracket_charge(fp, axis, center, hw, others, par.chern);
        if (cc.ok) comp.component_charge = cc.charge;
      } else {
        comp.component_charge.assign(f.bands(), 0);
      }
      comp.charge_conserved =
          !comp.base_charge.empty() && comp.base_charge == comp.component_charge;
      rep.all_charges_conserved = rep.all_charges_conserved && comp.charge_conserved;
    }
    rep.components.push_back(std::move(comp));
  }
  if (!charges)
    rep.note = "charges unavailable (needs an isolated degenerate locus on a 3-torus); "
               "band touchings carry no protected charge here";
  bool any_gapped = false;
  for (const auto& c : rep.components) any_gapped = any_gapped || c.gapped_out;
  if (any_gapped && f.dim() == 2)
    rep.note = rep.unmatched_points.empty()
                   ? "degenerate points disappeared under the perturbation: no protected charge"
                   : "degenerate points left their neighborhoods under the perturbation: "
                     "no protected charge";
  return rep;
}

}  // namespace wirenet
