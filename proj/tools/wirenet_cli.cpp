// Command-line driver for the wirenet library: band structures, degeneracy
// scans, slice Chern numbers, monopole charges, stability experiments, and
// rational-flux torus diagnostics for periodic wire networks.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wirenet/wirenet.hpp"

namespace {

using namespace wirenet;

struct ModelSource {
  std::string builtin;
  std::string file;

  QuotientGraphModel load() const {
    if (!builtin.empty()) return builtin_model(builtin);
    std::ifstream in(file);
    if (!in) throw ModelError("cannot open model file '" + file + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_model(ss.str());
  }
};

void add_model_options(CLI::App* cmd, ModelSource& src) {
  auto* a = cmd->add_option("--model", src.builtin, "built-in model: P, D, G or honeycomb");
  auto* b = cmd->add_option("--model-file", src.file, "path to a model file");
  a->excludes(b);
  b->excludes(a);
}

QuotientGraphModel require_model(const ModelSource& src) {
  if (src.builtin.empty() && src.file.empty())
    throw std::invalid_argument("give --model or --model-file");
  return src.load();
}

std::vector<Rational> parse_rational_list(const std::string& s) {
  std::vector<Rational> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_rational(tok));
  return out;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write output file '" + path + "'");
  out << content;
}

Json config_block(const std::string& command, const ModelSource& src, const Json& params) {
  Json j;
  j["command"] = command;
  if (!src.builtin.empty()) j["model"] = src.builtin;
  if (!src.file.empty()) j["model_file"] = src.file;
  j["parameters"] = params;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

FluxSpec flux_for_model(const QuotientGraphModel& m, const std::string& flux_str,
                        const std::string& phi_str, const std::string& t_str) {
  int given = (!flux_str.empty() ? 1 : 0) + (!phi_str.empty() ? 1 : 0) + (!t_str.empty() ? 1 : 0);
  if (given == 0) return FluxSpec::zero(m.dim);
  if (given > 1) throw std::invalid_argument("give exactly one of --flux, --phi, --t");
  if (!phi_str.empty()) {
    if (m.name != "honeycomb")
      throw std::invalid_argument("--phi is the honeycomb cell-flux parameter");
    return honeycomb_flux_from_phi(parse_rational(phi_str));
  }
  if (!t_str.empty()) {
    if (m.name != "D") throw std::invalid_argument("--t takes the three diamond bond pairings");
    auto t = parse_rational_list(t_str);
    if (t.size() != 3) throw std::invalid_argument("--t needs three rationals");
    return diamond_flux_from_t(t[0], t[1], t[2]);
  }
  return FluxSpec::from_upper(m.dim, parse_rational_list(flux_str));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"momentum-space geometry of periodic wire networks"};
  app.require_subcommand(1);

  unsigned threads = worker_threads();
  app.add_option("--threads", threads, "worker threads for grid sweeps");

  auto* c_validate = app.add_subcommand("validate", "check a model file against the schema");
  std::string validate_file;
  c_validate->add_option("--model-file", validate_file, "path to a model file")->required();

  auto* c_bands = app.add_subcommand("bands", "band structure table over a momentum grid (CSV)");
  ModelSource bands_src;
  add_model_options(c_bands, bands_src);
  int bands_grid = 16;
  std::string bands_out = "-";
  double bands_budget = 2e9;
  c_bands->add_option("--grid", bands_grid, "points per momentum axis");
  c_bands->add_option("--out", bands_out, "output path (default stdout)");
  c_bands->add_option("--budget", bands_budget, "operation budget guard");

  auto* c_scan = app.add_subcommand(
      "scan", "locate band degeneracies, refine them and classify the multiplicity strata");
  ModelSource scan_src;
  add_model_options(c_scan, scan_src);
  ScanParams scan_params;
  std::string scan_out = "-";
  std::uint64_t scan_seed = 0;
  c_scan->add_option("--grid", scan_params.grid, "scan grid per axis (default 32)");
  c_scan->add_option("--coarse-tol", scan_params.coarse_tol,
                     "gap threshold for scan candidates (default: auto)");
  c_scan->add_option("--cluster-tol", scan_params.cluster_tol, "eigenvalue clustering tolerance");
  c_scan->add_option("--budget", scan_params.budget, "operation budget guard");
  c_scan->add_option("--seed", scan_seed,
                     "seed (accepted for uniformity; the scan is deterministic)");
  c_scan->add_option("--out", scan_out, "output path (default stdout)");

  auto* c_chern = app.add_subcommand(
      "chern", "per-band Chern numbers on 2-torus slices and their jumps across monopoles");
  ModelSource chern_src;
  add_model_options(c_chern, chern_src);
  int chern_axis = 2, chern_slices = 16;
  ChernParams chern_params;
  std::string chern_out = "-", chern_series;
  c_chern->add_option("--axis", chern_axis, "transverse axis (0-based)");
  c_chern->add_option("--slices", chern_slices, "number of slices (default 16)");
  c_chern->add_option("--grid", chern_params.M, "plaquette grid per slice axis (default 24)");
  c_chern->add_option("--gap-floor", chern_params.gap_floor, "slice validity gap floor");
  c_chern->add_option("--link-floor", chern_params.link_floor, "link magnitude floor");
  c_chern->add_option("--out", chern_out, "report output path");
  c_chern->add_option("--series", chern_series, "optional CSV of (s, chern_i) series");

  auto* c_charges = app.add_subcommand(
      "charges", "local monopole charges of the degenerate points from bracketing slices");
  ModelSource charges_src;
  add_model_options(c_charges, charges_src);
  int charges_axis = -1;
  ChernParams charges_params;
  ScanParams charges_scan;
  std::string charges_out = "-";
  c_charges->add_option("--axis", charges_axis, "slicing axis (default: first separating axis)");
  c_charges->add_option("--grid", charges_params.M, "plaquette grid per slice axis");
  c_charges->add_option("--scan-grid", charges_scan.grid, "degeneracy scan grid per axis");
  c_charges->add_option("--out", charges_out, "output path");

  auto* c_stability = app.add_subcommand(
      "stability", "rerun the degeneracy pipeline under a seeded edge-weight perturbation");
  ModelSource stab_src;
  add_model_options(c_stability, stab_src);
  StabilityParams stab_params;
  std::string stab_out = "-";
  bool stab_complex = false;
  c_stability->add_option("--eps", stab_params.eps, "perturbation scale (default 1% of width)");
  c_stability->add_option("--seed", stab_params.seed, "perturbation seed (default 0)");
  c_stability->add_flag("--complex", stab_complex, "draw complex edge-weight deltas");
  c_stability->add_option("--grid", stab_params.scan.grid, "scan grid per axis");
  c_stability->add_option("--chern-grid", stab_params.chern.M, "plaquette grid for charges");
  c_stability->add_option("--out", stab_out, "output path");

  auto* c_butterfly = app.add_subcommand(
      "butterfly", "spectrum versus rational flux along a fixed direction, with gap counts");
  ModelSource bf_src;
  add_model_options(c_butterfly, bf_src);
  std::string bf_direction = "1";
  long bf_maxq = 8;
  int bf_twists = -1;
  long bf_cap = 4096;
  std::string bf_out = "-", bf_format = "csv";
  std::uint64_t bf_seed = 0;
  c_butterfly->add_option("--direction", bf_direction,
                          "skew-form pattern, upper-triangle rationals (default '1')");
  c_butterfly->add_option("--max-q", bf_maxq, "largest flux denominator");
  c_butterfly->add_option("--twists", bf_twists, "twist samples per axis (default 8, 3 in 3d)");
  c_butterfly->add_option("--cap", bf_cap, "magnetic matrix dimension cap");
  c_butterfly->add_option("--seed", bf_seed,
                          "seed (accepted for uniformity; the twist grid is fixed)");
  c_butterfly->add_option("--out", bf_out, "output path");
  c_butterfly->add_option("--format", bf_format, "csv | report-text");

  auto* c_classify = app.add_subcommand(
      "nc-classify", "analytic full-vs-proper classification of the flux algebra");
  ModelSource cls_src;
  add_model_options(c_classify, cls_src);
  std::string cls_flux, cls_phi, cls_t, cls_out = "-";
  c_classify->add_option("--flux", cls_flux, "upper-triangle period fluxes, e.g. 1/3,0,0");
  c_classify->add_option("--phi", cls_phi, "honeycomb cell-flux parameter");
  c_classify->add_option("--t", cls_t, "diamond bond pairings t1,t2,t3");
  c_classify->add_option("--out", cls_out, "output path");

  auto* c_burnside = app.add_subcommand(
      "nc-burnside", "numeric rank certification of the flux algebra versus the classifier");
  ModelSource bur_src;
  add_model_options(c_burnside, bur_src);
  std::string bur_flux, bur_phi, bur_t, bur_out = "-";
  int bur_twists = 3;
  std::uint64_t bur_seed = 0;
  long bur_cap = 40000;
  c_burnside->add_option("--flux", bur_flux, "upper-triangle period fluxes");
  c_burnside->add_option("--phi", bur_phi, "honeycomb cell-flux parameter");
  c_burnside->add_option("--t", bur_t, "diamond bond pairings t1,t2,t3");
  c_burnside->add_option("--twist-seeds", bur_twists, "generic twist samples (default 3)");
  c_burnside->add_option("--seed", bur_seed, "base seed for the generic twists");
  c_burnside->add_option("--cap", bur_cap, "ambient dimension cap");
  c_burnside->add_option("--out", bur_out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  worker_threads() = threads > 0 ? threads : 1;

  try {
    if (*c_validate) {
      std::ifstream in(validate_file);
      if (!in) throw ModelError("cannot open model file '" + validate_file + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      auto m = load_model(ss.str());
      std::cout << "ok: model '" << m.name << "' with " << m.vertex_count() << " vertices, "
                << m.edge_count() << " edges, dim " << m.dim << "\n";
      return 0;
    }

    if (*c_bands) {
      auto m = require_model(bands_src);
      auto fam = make_family(m);
      auto table = band_structure(fam, bands_grid, bands_budget);
      std::ostringstream os;
      write_band_csv(table, m.dim, m.vertex_count(), os);
      write_output(bands_out, os.str());
      return 0;
    }

    if (*c_scan) {
      auto m = require_model(scan_src);
      auto fam = make_family(m);
      auto rep = scan_and_classify(fam, scan_params);
      Json j;
      j["config"] = config_block("scan", scan_src,
                                 Json{{"grid", scan_params.grid},
                                      {"coarse_tol", rep.coarse_tol},
                                      {"cluster_tol", scan_params.cluster_tol},
                                      {"seed", scan_seed}});
      j["report"] = to_json(rep);
      write_output(scan_out, dump(j));
      return 0;
    }

    if (*c_chern) {
      auto m = require_model(chern_src);
      auto fam = make_family(m);
      auto scan = slice_scan(fam, chern_axis, chern_slices, chern_params);
      Json j;
      j["config"] = config_block("chern", chern_src,
                                 Json{{"axis", chern_axis},
                                      {"slices", chern_slices},
                                      {"grid", chern_params.M},
                                      {"gap_floor", chern_params.gap_floor},
                                      {"link_floor", chern_params.link_floor}});
      j["report"] = to_json(scan);
      write_output(chern_out, dump(j));
      if (!chern_series.empty()) {
        std::ostringstream os;
        write_chern_series_csv(scan, m.vertex_count(), os);
        write_output(chern_series, os.str());
      }
      return 0;
    }

    if (*c_charges) {
      auto m = require_model(charges_src);
      auto fam = make_family(m);
      auto scan = scan_and_classify(fam, charges_scan);
      std::vector<KVec> pts;
      for (const auto& p : scan.points) {
        if (!p.converged || p.non_isolated)
          throw SlicingError("charges need an isolated, converged degenerate locus");
        pts.push_back(p.k);
      }
      if (pts.empty()) throw SlicingError("no degenerate points found to charge");
      int axis = charges_axis;
      if (axis < 0) {
        auto ax = separating_axis(pts, m.dim, 4 * 2 * M_PI / 64);
        if (!ax) throw SlicingError("no coordinate axis separates the degenerate points");
        axis = *ax;
      }
      auto rep = local_charges(fam, pts, axis, charges_params);
      Json j;
      j["config"] = config_block("charges", charges_src,
                                 Json{{"axis", axis},
                                      {"grid", charges_params.M},
                                      {"scan_grid", charges_scan.grid}});
      j["report"] = to_json(rep);
      write_output(charges_out, dump(j));
      return 0;
    }

    if (*c_stability) {
      auto m = require_model(stab_src);
      auto fam = make_family(m);
      stab_params.complex_perturbation = stab_complex;
      auto rep = stability_experiment(fam, stab_params);
      Json j;
      j["config"] = config_block("stability", stab_src,
                                 Json{{"eps", rep.eps},
                                      {"seed", stab_params.seed},
                                      {"complex", stab_complex},
                                      {"grid", stab_params.scan.grid}});
      j["report"] = to_json(rep);
      write_output(stab_out, dump(j));
      return 0;
    }

    if (*c_butterfly) {
      auto m = require_model(bf_src);
      auto g = make_gauge(m, 0);
      auto dir = parse_rational_list(bf_direction);
      auto table = butterfly(m, g, dir, bf_maxq, bf_twists, bf_cap);
      if (bf_format == "csv") {
        std::ostringstream os;
        write_butterfly_csv(table, os);
        write_output(bf_out, os.str());
      } else if (bf_format == "report-text") {
        Json j;
        j["config"] = config_block("butterfly", bf_src,
                                   Json{{"direction", bf_direction},
                                        {"max_q", bf_maxq},
                                        {"twists", bf_twists},
                                        {"seed", bf_seed}});
        j["report"] = to_json(table);
        write_output(bf_out, dump(j));
      } else {
        throw std::invalid_argument("--format must be csv or report-text");
      }
      return 0;
    }

    if (*c_classify) {
      auto m = require_model(cls_src);
      auto flux = flux_for_model(m, cls_flux, cls_phi, cls_t);
      auto v = classify_builtin(m.name, flux);
      Json fluxj = Json::array();
      for (const auto& r : flux.upper()) fluxj.push_back(r.str());
      Json j;
      j["config"] = config_block("nc-classify", cls_src, Json{{"flux", fluxj}});
      j["report"] = to_json(v);
      write_output(cls_out, dump(j));
      return 0;
    }

    if (*c_burnside) {
      auto m = require_model(bur_src);
      auto g = make_gauge(m, 0);
      auto flux = flux_for_model(m, bur_flux, bur_phi, bur_t);
      auto cert = certify_fullness(m, g, flux, bur_twists, bur_seed, bur_cap);
      Json j;
      j["config"] = config_block("nc-burnside", bur_src,
                                 Json{{"twist_seeds", bur_twists}, {"seed", bur_seed}});
      j["report"] = to_json(cert);
      write_output(bur_out, dump(j));
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
