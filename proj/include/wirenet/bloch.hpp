#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "wirenet/hermitian_eig.hpp"
#include "wirenet/matrix.hpp"
#include "wirenet/model.hpp"
#include "wirenet/parallel.hpp"

namespace wirenet {

using KVec = std::vector<double>;

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Family of Bloch matrices k -> H(k) over the n-torus. Either backed by a
// quotient-graph model with a gauge choice (plus optional edge-weight
// perturbations), or a raw evaluator for synthetic test families.
class HamiltonianFamily {
 public:
  HamiltonianFamily(QuotientGraphModel model, GaugeChoice gauge,
                    std::vector<cplx> weight_deltas = {})
      : model_(std::make_shared<QuotientGraphModel>(std::move(model))),
        gauge_(std::make_shared<GaugeChoice>(std::move(gauge))),
        deltas_(std::move(weight_deltas)) {
    if (!deltas_.empty() && deltas_.size() != model_->edges.size())
      throw ModelError("perturbation must supply one delta per edge");
    dim_ = model_->dim;
    bands_ = model_->vertex_count();
    bound_ = model_->weight_bound();
    for (const auto& d : deltas_) bound_ += 2.0 * std::abs(d);
    probe_width();
  }

  HamiltonianFamily(int dim, int bands, std::function<CMatrix(const KVec&)> eval,
                    double weight_bound)
      : eval_(std::move(eval)), dim_(dim), bands_(bands), bound_(weight_bound) {
    probe_width();
  }

  int dim() const { return dim_; }
  int bands() const { return bands_; }
  double weight_bound() const { return bound_; }
  double spectral_width() const { return width_; }
  const QuotientGraphModel* model() const { return model_.get(); }
  const GaugeChoice* gauge() const { return gauge_.get(); }
  const std::vector<cplx>& weight_deltas() const { return deltas_; }

  cplx edge_weight(int e) const {
    cplx w = model_->edges[e].weight;
    if (!deltas_.empty()) w += deltas_[e];
    return w;
  }

  HamiltonianFamily perturbed(std::vector<cplx> deltas) const {
    if (!model_) throw ModelError("cannot perturb a synthetic family");
    HamiltonianFamily f(*model_, *gauge_, std::move(deltas));
    return f;
  }

  CMatrix operator()(const KVec& k) const {
    if (static_cast<int>(k.size()) != dim_)
      throw std::invalid_argument("k has wrong dimension");
    if (eval_) return eval_(k);
    const auto& m = *model_;
    const auto& g = *gauge_;
    CMatrix H(bands_);
    for (int e = 0; e < m.edge_count(); ++e) {
      const Edge& ed = m.edges[e];
      double ph = 0.0;
      for (int d = 0; d < dim_; ++d) ph += k[d] * g.loop_vectors[e][d];
      cplx t = edge_weight(e) * std::polar(1.0, ph);
      int a = g.row(ed.from), b = g.row(ed.to);
      if (a == b) {
        H(a, a) += t + std::conj(t);
      } else {
        H(a, b) += t;
        H(b, a) += std::conj(t);
      }
    }
    return H;
  }

  Spectrum spectrum(const KVec& k) const { return eig_hermitian((*this)(k)); }

  std::vector<double> eigenvalues(const KVec& k) const { return eigvals_hermitian((*this)(k)); }

  // Smallest gap between adjacent eigenvalues; +inf for one-band families.
  double min_gap(const KVec& k) const {
    auto ev = eigenvalues(k);
    if (ev.size() < 2) return std::numeric_limits<double>::infinity();
    double g = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < ev.size(); ++i) g = std::min(g, ev[i + 1] - ev[i]);
    return g;
  }

 private:
  void probe_width() {
    // Deterministic coarse probe of the spectral range.
    const int M = (dim_ <= 2) ? 9 : 7;
    double lo = 1e300, hi = -1e300;
    std::vector<int> idx(dim_, 0);
    for (;;) {
      KVec k(dim_);
      for (int d = 0; d < dim_; ++d) k[d] = 2.0 * M_PI * idx[d] / M;
      auto ev = eigenvalues(k);
      lo = std::min(lo, ev.front());
      hi = std::max(hi, ev.back());
      int d = dim_ - 1;
      while (d >= 0 && ++idx[d] == M) idx[d--] = 0;
      if (d < 0) break;
    }
    width_ = std::max(hi - lo, 1e-12);
  }

  std::shared_ptr<const QuotientGraphModel> model_;
  std::shared_ptr<const GaugeChoice> gauge_;
  std::vector<cplx> deltas_;
  std::function<CMatrix(const KVec&)> eval_;
  int dim_ = 0;
  int bands_ = 0;
  double bound_ = 0.0;
  double width_ = 0.0;
};

inline HamiltonianFamily make_family(const QuotientGraphModel& m, int root = 0) {
  return HamiltonianFamily(m, make_gauge(m, root));
}

inline CMatrix bloch_hamiltonian(const HamiltonianFamily& f, const KVec& k) { return f(k); }

// ---------------------------------------------------------------------------
// Band structure table.

inline void check_grid_budget(int dim, int M, int bands, double budget) {
  double cost = std::pow(static_cast<double>(M), dim) * std::pow(static_cast<double>(bands), 3);
  if (cost > budget)
    throw BudgetError("grid of " + std::to_string(M) + "^" + std::to_string(dim) +
                      " points exceeds the operation budget; lower the resolution or raise --budget");
}

struct BandTable {
  int M = 0;
  std::vector<KVec> kpoints;                 // lexicographic in grid indices
  std::vector<std::vector<double>> bands;    // per point, ascending
};

inline BandTable band_structure(const HamiltonianFamily& f, int M, double budget = 2e9) {
  if (M < 2) throw std::invalid_argument("band grid needs M >= 2");
  check_grid_budget(f.dim(), M, f.bands(), budget);
  BandTable t;
  t.M = M;
  size_t total = 1;
  for (int d = 0; d < f.dim(); ++d) total *= static_cast<size_t>(M);
  t.kpoints.resize(total);
  t.bands.resize(total);
  parallel_for(total, [&](size_t flat) {
    size_t rest = flat;
    KVec k(f.dim());
    for (int d = f.dim() - 1; d >= 0; --d) {
      k[d] = 2.0 * M_PI * static_cast<double>(rest % M) / M;
      rest /= M;
    }
    t.kpoints[flat] = k;
    t.bands[flat] = f.eigenvalues(k);
  });
  return t;
}

inline void write_band_csv(const BandTable& t, int dim, int bands, std::ostream& os) {
  for (int d = 0; d < dim; ++d) os << "k" << (d + 1) << ",";
  for (int b = 0; b < bands; ++b) os << "lambda" << (b + 1) << (b + 1 < bands ? "," : "\n");
  char buf[32];
  for (size_t i = 0; i < t.kpoints.size(); ++i) {
    for (int d = 0; d < dim; ++d) {
      std::snprintf(buf, sizeof buf, "%.17g", t.kpoints[i][d]);
      os << buf << ",";
    }
    for (int b = 0; b < bands; ++b) {
      std::snprintf(buf, sizeof buf, "%.17g", t.bands[i][b]);
      os << buf << (b + 1 < bands ? "," : "\n");
    }
  }
}

// ---------------------------------------------------------------------------
// Re-gauging invariance: two gauges of the same model must be isospectral.

inline double regauge_deviation(const QuotientGraphModel& m, const GaugeChoice& g1,
                                const GaugeChoice& g2, const std::vector<KVec>& samples) {
  HamiltonianFamily f1(m, g1), f2(m, g2);
  double dev = 0.0;
  for (const auto& k : samples) {
    auto a = f1.eigenvalues(k);
    auto b = f2.eigenvalues(k);
    for (size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
  }
  return dev;
}

inline std::vector<KVec> random_kpoints(int dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  std::vector<KVec> ks(count, KVec(dim));
  for (auto& k : ks)
    for (auto& x : k) x = u(rng);
  return ks;
}

}  // namespace wirenet
