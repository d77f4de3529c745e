#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "wirenet/berry.hpp"
#include "wirenet/nctorus.hpp"
#include "wirenet/singularity.hpp"

namespace wirenet {

using Json = nlohmann::ordered_json;

inline Json to_json(const DiracVerdict& d) {
  Json j;
  j["pair"] = {d.pair_low, d.pair_low + 1};
  j["applicable"] = d.applicable;
  if (d.applicable) {
    j["lambda"] = d.lambda;
    j["nondegenerate"] = d.nondegenerate;
    j["is_dirac"] = d.is_dirac;
    j["signature"] = {d.n_pos, d.n_neg};
    j["min_abs_hessian_eig"] = d.min_abs_hessian_eig;
    if (!d.nondegenerate) j["verdict"] = "not Morse / inconclusive";
    else j["verdict"] = d.is_dirac ? "dirac" : "morse, non-conical signature";
  }
  return j;
}

inline Json to_json(const DegeneracyPoint& p) {
  Json j;
  j["k"] = p.k;
  j["eigenvalues"] = p.eigenvalues;
  j["partition"] = p.partition;
  Json strata = Json::array();
  for (int r : p.stratum) strata.push_back("A" + std::to_string(r));
  j["stratum"] = strata;
  j["dirac"] = Json::array();
  for (const auto& d : p.dirac) j["dirac"].push_back(to_json(d));
  j["converged"] = p.converged;
  j["min_gap"] = p.min_gap;
  j["discriminant"] = p.discriminant;
  j["component"] = p.component;
  j["non_isolated"] = p.non_isolated;
  if (p.ambiguous_clusters) j["ambiguous_clusters"] = true;
  return j;
}

inline Json to_json(const DegeneracyReport& rep) {
  Json j;
  j["grid"] = rep.grid;
  j["coarse_tol"] = rep.coarse_tol;
  j["component_count"] = rep.component_count;
  j["points"] = Json::array();
  for (const auto& p : rep.points) j["points"].push_back(to_json(p));
  return j;
}

inline Json to_json(const SliceChern& s) {
  Json j;
  j["axis"] = s.axis;
  j["s"] = s.s;
  j["grid"] = s.M;
  j["valid"] = s.valid;
  if (s.valid) {
    j["chern"] = s.chern;
    j["max_integer_defect"] = s.max_int_defect;
  }
  j["min_gap"] = s.min_gap;
  j["min_link"] = s.min_link;
  return j;
}

inline Json to_json(const SliceScan& scan) {
  Json j;
  j["axis"] = scan.axis;
  j["slices"] = Json::array();
  for (const auto& s : scan.slices) j["slices"].push_back(to_json(s));
  j["jumps"] = Json::array();
  for (const auto& jm : scan.jumps) {
    Json jj;
    jj["s_lo"] = jm.s_lo;
    jj["s_hi"] = jm.s_hi;
    jj["delta"] = jm.delta;
    j["jumps"].push_back(jj);
  }
  return j;
}

inline void write_chern_series_csv(const SliceScan& scan, int bands, std::ostream& os) {
  os << "s";
  for (int b = 0; b < bands; ++b) os << ",chern" << (b + 1);
  os << ",valid\n";
  char buf[32];
  for (const auto& s : scan.slices) {
    std::snprintf(buf, sizeof buf, "%.17g", s.s);
    os << buf;
    for (int b = 0; b < bands; ++b) {
      os << ",";
      if (s.valid) os << s.chern[b];
    }
    os << "," << (s.valid ? 1 : 0) << "\n";
  }
}

inline Json to_json(const ChargeReport& rep) {
  Json j;
  j["axis"] = rep.axis;
  j["points"] = Json::array();
  for (const auto& p : rep.points) {
    Json jp;
    jp["k"] = p.k;
    jp["charge"] = p.charge;
    jp["s_lo"] = p.s_lo;
    jp["s_hi"] = p.s_hi;
    j["points"].push_back(jp);
  }
  j["band_sums"] = rep.band_sums;
  j["band_sums_zero"] = rep.sums_zero;
  return j;
}

inline Json to_json(const StabilityReport& rep) {
  Json j;
  j["eps"] = rep.eps;
  j["seed"] = rep.seed;
  j["charges_available"] = rep.charges_available;
  if (rep.charges_available) j["axis"] = rep.axis;
  j["components"] = Json::array();
  for (const auto& c : rep.components) {
    Json jc;
    jc["base_k"] = c.base_k;
    Json strata = Json::array();
    for (int r : c.base_stratum) strata.push_back("A" + std::to_string(r));
    jc["base_stratum"] = strata;
    if (!c.base_charge.empty()) jc["base_charge"] = c.base_charge;
    jc["matched_points"] = Json::array();
    for (size_t i = 0; i < c.matched.size(); ++i) {
      Json jm;
      jm["k"] = c.matched[i];
      Json ms = Json::array();
      for (int r : c.matched_strata[i]) ms.push_back("A" + std::to_string(r));
      jm["stratum"] = ms;
      jc["matched_points"].push_back(jm);
    }
    if (!c.component_charge.empty()) jc["component_charge"] = c.component_charge;
    jc["charge_conserved"] = c.charge_conserved;
    jc["split"] = c.split;
    jc["gapped_out"] = c.gapped_out;
    j["components"].push_back(jc);
  }
  j["unmatched_points"] = Json::array();
  for (const auto& k : rep.unmatched_points) j["unmatched_points"].push_back(k);
  if (!rep.unconverged_points.empty()) {
    j["unconverged_points"] = Json::array();
    for (const auto& k : rep.unconverged_points) j["unconverged_points"].push_back(k);
  }
  j["all_charges_conserved"] = rep.all_charges_conserved;
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

inline Json to_json(const NcVerdict& v) {
  Json j;
  j["verdict"] = v.full ? "full" : "proper";
  j["case"] = v.label;
  Json params;
  for (const auto& [k, val] : v.params) params[k] = val;
  j["parameters"] = params;
  return j;
}

inline Json to_json(const FullnessCertificate& c) {
  Json j;
  j["model"] = c.model;
  j["flux"] = c.flux_upper;
  j["denominator"] = c.N;
  j["torus_dim"] = c.torus_dim;
  j["expected_full_rank"] = c.expected_full;
  j["concrete_dim"] = c.concrete_dim;
  j["concrete_dim_squared"] = c.dsq;
  j["generic_ranks"] = c.generic_ranks;
  j["sign_character_ranks"] = c.special_ranks;
  j["min_rank"] = c.min_rank;
  j["max_rank"] = c.max_rank;
  j["numeric_verdict"] = c.numeric_full ? "full" : "proper";
  j["flagged"] = c.flagged;
  if (c.has_analytic) {
    j["analytic"] = to_json(c.analytic);
    j["agree"] = c.agree;
  }
  return j;
}

inline void write_butterfly_csv(const ButterflyTable& t, std::ostream& os) {
  os << "p,q,eigenvalue\n";
  char buf[32];
  for (const auto& row : t.rows)
    for (double x : row.levels) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      os << row.p << "," << row.q << "," << buf << "\n";
    }
}

inline Json to_json(const ButterflyTable& t) {
  Json j = Json::array();
  for (const auto& row : t.rows) {
    Json jr;
    jr["p"] = row.p;
    jr["q"] = row.q;
    jr["hull"] = {row.lo, row.hi};
    jr["gap_count"] = row.gap_count;
    Json bands = Json::array();
    for (auto [lo, hi] : row.bands) bands.push_back({lo, hi});
    jr["bands"] = bands;
    j.push_back(jr);
  }
  return j;
}

}  // namespace wirenet
