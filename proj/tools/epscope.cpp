// Command-line driver: locate exceptional points of a matrix pencil, probe
// their loop monodromy, crossing behavior and chirality, and run ensemble
// statistics. All stochastic commands are seeded and reproduce byte-identical
// artifacts.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epscope/ep_local.hpp"
#include "epscope/ep_locator.hpp"
#include "epscope/io.hpp"
#include "epscope/matrix_model.hpp"
#include "epscope/monodromy.hpp"
#include "epscope/spectral_stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace epscope;

namespace {

struct Options {
  int dim = 0;
  std::vector<double> eps, omega, angles;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double angle_window = 0.0;
  int realization = 0;
  int realizations = 100;
  double tol = 1e-11;
  int workers = 1;
  std::string out;
  std::string config;

  int ep_index = 0;
  int turns = 1;
  int direction = 1;
  double radius_factor = 0.3;
  double offset_factor = 0.1;

  double lambda_star = 1.0;
  double center_fraction = 0.6;
  int bins = 48;
  int wedges = 0;
  std::string law = "all";
  std::vector<double> windows = {0.0, 0.05, 0.3, 3.141592653589793};
};

json resolved_config(const std::string& command, const Options& o) {
  json c;
  c["schema_version"] = 1;
  c["command"] = command;
  if (o.dim > 0) c["dim"] = o.dim;
  if (!o.eps.empty()) c["eps"] = o.eps;
  if (!o.omega.empty()) c["omega"] = o.omega;
  if (!o.angles.empty()) c["angles"] = o.angles;
  if (o.seed_given) c["seed"] = o.seed;
  c["angle-window"] = o.angle_window;
  c["realization"] = o.realization;
  c["realizations"] = o.realizations;
  c["tol"] = o.tol;
  c["workers"] = o.workers;
  c["out"] = o.out;
  c["ep-index"] = o.ep_index;
  c["turns"] = o.turns;
  c["direction"] = o.direction;
  c["radius-factor"] = o.radius_factor;
  c["offset-factor"] = o.offset_factor;
  c["lambda-star"] = o.lambda_star;
  c["center-fraction"] = o.center_fraction;
  c["bins"] = o.bins;
  c["wedges"] = o.wedges;
  c["law"] = o.law;
  c["windows"] = o.windows;
  return c;
}

fs::path out_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("EPSCOPE_OUT")) return env;
  return ".";
}

void announce(const fs::path& p, std::size_t rows) {
  std::cout << "wrote " << p.string() << " (" << rows << " rows)\n";
}

void write_meta(const fs::path& artifact, const json& config) {
  fs::path p = artifact;
  p += ".meta.json";
  write_text(p, config.dump(2) + "\n");
}

MatrixPencil resolve_pencil(const Options& o) {
  if (!o.eps.empty() || !o.omega.empty() || !o.angles.empty()) {
    PencilParams params;
    params.eps = Eigen::Map<const Vec>(o.eps.data(), static_cast<Index>(o.eps.size()));
    params.omega =
        Eigen::Map<const Vec>(o.omega.data(), static_cast<Index>(o.omega.size()));
    params.angles =
        Eigen::Map<const Vec>(o.angles.data(), static_cast<Index>(o.angles.size()));
    if (o.dim > 0 && params.eps.size() != o.dim)
      throw ParameterError("--dim disagrees with the number of --eps entries");
    return build_pencil(params);
  }
  if (!o.seed_given)
    throw ParameterError("either --eps/--omega/--angles or --seed is required");
  if (o.dim < 2) throw ParameterError("--dim is required with --seed");
  return build_pencil(sample_params(o.dim, o.angle_window, o.seed,
                                    static_cast<std::uint64_t>(o.realization)));
}

void write_ep_csv(const fs::path& path, const EpList& list, const json& cfg) {
  CsvTable t({"re_lambda", "im_lambda", "re_energy", "im_energy", "residual",
              "conj_index"});
  for (const auto& ep : list.points)
    t.add_row({ep.lambda_c.real(), ep.lambda_c.imag(), ep.energy_c.real(),
               ep.energy_c.imag(), ep.residual,
               static_cast<double>(ep.conjugate_partner)});
  t.write(path);
  write_meta(path, cfg);
  announce(path, t.n_rows());
}

int cmd_pencil(const Options& o) {
  const json cfg = resolved_config("pencil", o);
  const MatrixPencil pencil = resolve_pencil(o);
  const fs::path dir = out_dir(o);
  fs::create_directories(dir);

  CsvTable tp({"k", "eps", "omega"});
  for (Index k = 0; k < pencil.dim(); ++k)
    tp.add_row({static_cast<double>(k), pencil.params.eps[k],
                pencil.params.omega[k]});
  tp.write(dir / "pencil.csv");
  write_meta(dir / "pencil.csv", cfg);
  announce(dir / "pencil.csv", tp.n_rows());

  const auto inter = unperturbed_intersections(pencil.params);
  CsvTable ti({"lambda", "i", "k"});
  for (const auto& x : inter.points)
    ti.add_row({x.lambda, static_cast<double>(x.i), static_cast<double>(x.k)});
  ti.write(dir / "intersections.csv");
  write_meta(dir / "intersections.csv", cfg);
  announce(dir / "intersections.csv", ti.n_rows());
  if (inter.parallel_skipped > 0)
    std::cout << "note: " << inter.parallel_skipped
              << " parallel line pairs skipped\n";

  CsvTable tl({"index", "slope", "intercept"});
  for (const auto& line : asymptotic_lines(pencil))
    tl.add_row({static_cast<double>(line.index), line.slope, line.intercept});
  tl.write(dir / "lines.csv");
  write_meta(dir / "lines.csv", cfg);
  announce(dir / "lines.csv", tl.n_rows());
  return 0;
}

int cmd_locate(const Options& o) {
  const json cfg = resolved_config("locate", o);
  const MatrixPencil pencil = resolve_pencil(o);
  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  const EpList list = locate_eps(pencil, o.tol, o.workers);
  write_ep_csv(dir / "eps.csv", list, cfg);
  if (list.duplicates_collapsed > 0)
    std::cout << "note: " << list.duplicates_collapsed
              << " duplicate refinements collapsed\n";
  return 0;
}

int cmd_loop(const Options& o) {
  const json cfg = resolved_config("loop", o);
  const MatrixPencil pencil = resolve_pencil(o);
  const EpList list = locate_eps(pencil, o.tol, o.workers);
  if (o.ep_index < 0 || o.ep_index >= static_cast<int>(list.points.size()))
    throw ParameterError("--ep-index out of range (located " +
                         std::to_string(list.points.size()) + " EPs)");
  const auto& ep = list.points[static_cast<std::size_t>(o.ep_index)];
  double nearest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(list.points.size()); ++i)
    if (i != o.ep_index)
      nearest = std::min(nearest,
                         std::abs(list.points[i].lambda_c - ep.lambda_c));
  const double radius = std::isfinite(nearest)
                            ? o.radius_factor * nearest
                            : o.radius_factor * std::abs(ep.lambda_c);
  const LoopReport report =
      loop_monodromy(pencil, ep, radius, o.direction, o.turns, &list.points);

  json out;
  out["config"] = cfg;
  out["ep_index"] = o.ep_index;
  out["lambda_c"] = {ep.lambda_c.real(), ep.lambda_c.imag()};
  out["radius"] = radius;
  out["permutation"] = report.permutation;
  json phases = json::array();
  for (Index i = 0; i < report.phase_factors.size(); ++i)
    phases.push_back(
        {report.phase_factors[i].real(), report.phase_factors[i].imag()});
  out["phases"] = phases;
  out["enclosed_eps"] = report.enclosed_eps;
  out["multi_ep_warning"] = report.multi_ep_warning;

  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  write_text(dir / "loop.json", out.dump(2) + "\n");
  announce(dir / "loop.json", 1);
  return 0;
}

int cmd_crossing(const Options& o) {
  const json cfg = resolved_config("crossing", o);
  const MatrixPencil pencil = resolve_pencil(o);
  const EpList list = locate_eps(pencil, o.tol, o.workers);
  if (o.ep_index < 0 || o.ep_index >= static_cast<int>(list.points.size()))
    throw ParameterError("--ep-index out of range");
  const auto& ep = list.points[static_cast<std::size_t>(o.ep_index)];
  const double offset = o.offset_factor * std::abs(ep.lambda_c.imag());
  const CrossingReport report = crossing_scan(pencil, ep, offset, &list.points);

  json out;
  out["config"] = cfg;
  out["ep_index"] = o.ep_index;
  out["lambda_c"] = {ep.lambda_c.real(), ep.lambda_c.imag()};
  out["offset"] = report.offset;
  out["span"] = report.span;
  out["above"] = {{"real_part_crosses", report.above.real_part_crosses},
                  {"imag_part_crosses", report.above.imag_part_crosses}};
  out["below"] = {{"real_part_crosses", report.below.real_part_crosses},
                  {"imag_part_crosses", report.below.imag_part_crosses}};

  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  write_text(dir / "crossing.json", out.dump(2) + "\n");
  announce(dir / "crossing.json", 1);

  CsvTable t({"leg", "re_lambda", "im_lambda", "re_diff", "im_diff"});
  for (std::size_t i = 0; i < report.lambda_above.size(); ++i)
    t.add_row({0.0, report.lambda_above[i].real(), report.lambda_above[i].imag(),
               report.diff_above[i].real(), report.diff_above[i].imag()});
  for (std::size_t i = 0; i < report.lambda_below.size(); ++i)
    t.add_row({1.0, report.lambda_below[i].real(), report.lambda_below[i].imag(),
               report.diff_below[i].real(), report.diff_below[i].imag()});
  t.write(dir / "crossing_trace.csv");
  write_meta(dir / "crossing_trace.csv", cfg);
  announce(dir / "crossing_trace.csv", t.n_rows());
  return 0;
}

int cmd_local(const Options& o) {
  const json cfg = resolved_config("local", o);
  const MatrixPencil pencil = resolve_pencil(o);
  const EpList list = locate_eps(pencil, o.tol, o.workers);
  CsvTable t({"re_lambda", "im_lambda", "re_energy", "im_energy", "residual",
              "conj_index", "self_orthogonality", "rigidity", "chirality_sign",
              "decomposition_error"});
  for (const auto& ep : list.points) {
    const EpEigenvector local = ep_local_report(pencil, ep);
    t.add_row({ep.lambda_c.real(), ep.lambda_c.imag(), ep.energy_c.real(),
               ep.energy_c.imag(), ep.residual,
               static_cast<double>(ep.conjugate_partner),
               local.self_orthogonality, phase_rigidity(local.vector),
               static_cast<double>(local.chirality_sign),
               local.decomposition_error});
  }
  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  t.write(dir / "eps_local.csv");
  write_meta(dir / "eps_local.csv", cfg);
  announce(dir / "eps_local.csv", t.n_rows());
  return 0;
}

void write_histogram(const fs::path& path, const RadialHistogram& h,
                     const json& cfg) {
  CsvTable t({"edge_lo", "edge_hi", "count", "density", "density_area"});
  for (Index b = 0; b < h.counts.size(); ++b)
    t.add_row({h.edges[b], h.edges[b + 1], static_cast<double>(h.counts[b]),
               h.density_r[b], h.density_area[b]});
  t.write(path);
  write_meta(path, cfg);
  announce(path, t.n_rows());
}

int cmd_stats(const Options& o) {
  if (!o.seed_given) throw ParameterError("stats requires --seed");
  if (o.dim < 2) throw ParameterError("stats requires --dim");
  const json cfg = resolved_config("stats", o);
  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  const EnsembleSpec spec{o.dim, o.realizations, o.angle_window, o.seed};
  json summary;
  summary["config"] = cfg;

  const bool want_all = o.law == "all";
  if (want_all || o.law == "intersections") {
    const RadialHistogram h = intersection_distribution(spec, o.bins);
    write_histogram(dir / "hist_intersections.csv", h, cfg);
    summary["intersections"] = {{"exponent", h.fitted_exponent},
                                {"stderr", h.fit_stderr},
                                {"fit_lo", h.fit_lo},
                                {"fit_hi", h.fit_hi},
                                {"n", h.n_samples}};
  }
  if (want_all || o.law == "ep-radial") {
    std::vector<ExceptionalPoint> pool;
    for (Index j = 0; j < spec.n_real; ++j) {
      const MatrixPencil pencil = build_pencil(sample_params(
          spec.dim, spec.angle_window, spec.seed, static_cast<std::uint64_t>(j)));
      const EpList located = locate_eps(pencil, o.tol, o.workers);
      pool.insert(pool.end(), located.points.begin(), located.points.end());
    }
    const RadialHistogram h = ep_radial_distribution(pool, o.bins);
    write_histogram(dir / "hist_ep_radial.csv", h, cfg);
    const AngularReport ar = angular_isotropy(pool);
    summary["ep_radial"] = {{"exponent", h.fitted_exponent},
                            {"stderr", h.fit_stderr},
                            {"fit_lo", h.fit_lo},
                            {"fit_hi", h.fit_hi},
                            {"n", h.n_samples},
                            {"isotropy_stat", ar.isotropy_stat}};
    if (o.wedges > 0) {
      json wedge_rows = json::array();
      for (int w = 0; w < o.wedges; ++w) {
        const double a0 = -3.141592653589793 + 2 * 3.141592653589793 *
                                                   static_cast<double>(w) / o.wedges;
        const double a1 = a0 + 2 * 3.141592653589793 / o.wedges;
        const RadialHistogram hw =
            ep_radial_distribution(pool, o.bins, std::make_pair(a0, a1));
        write_histogram(dir / ("hist_wedge_" + std::to_string(w) + ".csv"), hw,
                        cfg);
        wedge_rows.push_back({{"alpha_lo", a0},
                              {"alpha_hi", a1},
                              {"exponent", hw.fitted_exponent},
                              {"stderr", hw.fit_stderr}});
      }
      summary["wedges"] = wedge_rows;
    }
  }
  if (want_all || o.law == "spacings") {
    const SpacingSample sp =
        unfolded_spacings(spec, o.lambda_star, o.center_fraction);
    CsvTable t({"spacing"});
    for (double s : sp.spacings) t.add_row(std::vector<double>{s});
    t.write(dir / "spacings.csv");
    write_meta(dir / "spacings.csv", cfg);
    announce(dir / "spacings.csv", t.n_rows());
    const SpacingVerdict v = fit_spacing_law(sp);
    summary["spacings"] = {{"n", sp.spacings.size()},
                           {"raw_mean", sp.raw_mean},
                           {"ks_wigner", v.ks_wigner},
                           {"ks_poisson", v.ks_poisson},
                           {"verdict", to_string(v.verdict)}};
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  announce(dir / "summary.json", 1);
  return 0;
}

int cmd_sweep(const Options& o) {
  if (!o.seed_given) throw ParameterError("sweep requires --seed");
  if (o.dim < 2) throw ParameterError("sweep requires --dim");
  const json cfg = resolved_config("sweep", o);
  const auto rows =
      fan_out_sweep(o.dim, o.realizations, o.windows, o.seed, o.workers);
  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  CsvTable t({"angle_window", "isotropy_stat", "radial_exponent", "ks_wigner",
              "ks_poisson", "verdict"});
  json jrows = json::array();
  for (const auto& r : rows) {
    t.add_row({format_double(r.angle_window), format_double(r.isotropy_stat),
               format_double(r.radial_exponent), format_double(r.ks_wigner),
               format_double(r.ks_poisson), to_string(r.verdict)});
    jrows.push_back({{"angle_window", r.angle_window},
                     {"isotropy_stat", r.isotropy_stat},
                     {"radial_exponent", r.radial_exponent},
                     {"ks_wigner", r.ks_wigner},
                     {"ks_poisson", r.ks_poisson},
                     {"verdict", to_string(r.verdict)}});
  }
  t.write(dir / "sweep.csv");
  write_meta(dir / "sweep.csv", cfg);
  announce(dir / "sweep.csv", t.n_rows());
  json out;
  out["config"] = cfg;
  out["rows"] = jrows;
  write_text(dir / "sweep.json", out.dump(2) + "\n");
  announce(dir / "sweep.json", 1);
  return 0;
}

// Flags mirror config-file keys one-to-one; a flag given on the command line
// wins over the config file.
void apply_config(const std::string& path, CLI::App* sub, Options& o) {
  std::ifstream f(path);
  if (!f) throw ParameterError("cannot read config file " + path);
  json c;
  try {
    f >> c;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config parse error: ") + e.what());
  }
  const auto given = [&](const std::string& flag) {
    const CLI::Option* opt = sub->get_option_no_throw("--" + flag);
    return opt != nullptr && opt->count() > 0;
  };
  for (const auto& [key, value] : c.items()) {
    if (key == "schema_version") {
      if (!value.is_number_integer() || value.get<int>() != 1)
        throw ParameterError("unsupported config schema_version");
      continue;
    }
    if (key == "command") continue;
    if (given(key)) continue;
    if (key == "dim") o.dim = value.get<int>();
    else if (key == "eps") o.eps = value.get<std::vector<double>>();
    else if (key == "omega") o.omega = value.get<std::vector<double>>();
    else if (key == "angles") o.angles = value.get<std::vector<double>>();
    else if (key == "seed") { o.seed = value.get<std::uint64_t>(); o.seed_given = true; }
    else if (key == "angle-window") o.angle_window = value.get<double>();
    else if (key == "realization") o.realization = value.get<int>();
    else if (key == "realizations") o.realizations = value.get<int>();
    else if (key == "tol") o.tol = value.get<double>();
    else if (key == "workers") o.workers = value.get<int>();
    else if (key == "out") o.out = value.get<std::string>();
    else if (key == "ep-index") o.ep_index = value.get<int>();
    else if (key == "turns") o.turns = value.get<int>();
    else if (key == "direction") o.direction = value.get<int>();
    else if (key == "radius-factor") o.radius_factor = value.get<double>();
    else if (key == "offset-factor") o.offset_factor = value.get<double>();
    else if (key == "lambda-star") o.lambda_star = value.get<double>();
    else if (key == "center-fraction") o.center_fraction = value.get<double>();
    else if (key == "bins") o.bins = value.get<int>();
    else if (key == "wedges") o.wedges = value.get<int>();
    else if (key == "law") o.law = value.get<std::string>();
    else if (key == "windows") o.windows = value.get<std::vector<double>>();
    else throw ParameterError("unknown config field: " + key);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exceptional-point explorer for real-symmetric matrix pencils"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dim", o.dim, "pencil dimension N");
    sub->add_option("--eps", o.eps, "H0 eigenvalues")->delimiter(',');
    sub->add_option("--omega", o.omega, "H1 eigenvalues")->delimiter(',');
    sub->add_option("--angles", o.angles, "rotation angles (N(N-1)/2)")
        ->delimiter(',');
    sub->add_option("--seed", o.seed, "ensemble seed")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--angle-window", o.angle_window, "angle range half-width");
    sub->add_option("--realization", o.realization, "realization index");
    sub->add_option("--realizations", o.realizations, "ensemble size");
    sub->add_option("--tol", o.tol, "refinement tolerance");
    sub->add_option("--workers", o.workers, "worker pool size");
    sub->add_option("--out", o.out, "output directory (or EPSCOPE_OUT)");
    sub->add_option("--config", o.config, "JSON config file; flags override");
    return sub;
  };

  CLI::App* c_pencil =
      add_common(app.add_subcommand("pencil", "build a pencil, write its "
                                              "skeleton (lines, intersections)"));
  CLI::App* c_locate =
      add_common(app.add_subcommand("locate", "locate all exceptional points"));
  CLI::App* c_loop = add_common(
      app.add_subcommand("loop", "loop monodromy around a located EP"));
  c_loop->add_option("--ep-index", o.ep_index, "EP row in eps.csv order");
  c_loop->add_option("--turns", o.turns, "number of revolutions");
  c_loop->add_option("--direction", o.direction, "+1 or -1");
  c_loop->add_option("--radius-factor", o.radius_factor,
                     "loop radius over nearest-EP distance");
  CLI::App* c_crossing = add_common(app.add_subcommand(
      "crossing", "above/below-EP branch crossing dichotomy"));
  c_crossing->add_option("--ep-index", o.ep_index, "EP row in eps.csv order");
  c_crossing->add_option("--offset-factor", o.offset_factor,
                         "path offset over |Im lambda_c|");
  CLI::App* c_local = add_common(app.add_subcommand(
      "local", "per-EP wave-function report (self-orthogonality, chirality)"));
  CLI::App* c_stats = add_common(app.add_subcommand(
      "stats", "ensemble distributions and spacing statistics"));
  c_stats->add_option("--lambda-star", o.lambda_star,
                      "real coupling for spacing statistics");
  c_stats->add_option("--center-fraction", o.center_fraction,
                      "central fraction of levels kept");
  c_stats->add_option("--bins", o.bins, "histogram bins");
  c_stats->add_option("--wedges", o.wedges, "angular wedges for per-wedge fits");
  c_stats->add_option("--law", o.law,
                      "intersections | ep-radial | spacings | all")
      ->check(CLI::IsMember({"intersections", "ep-radial", "spacings", "all"}));
  CLI::App* c_sweep = add_common(app.add_subcommand(
      "sweep", "angle-window sweep: isotropy, radial law, spacing verdict"));
  c_sweep->add_option("--windows", o.windows, "ascending angle windows")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    for (auto* s : {c_pencil, c_locate, c_loop, c_crossing, c_local, c_stats,
                    c_sweep})
      if (s == sub && s->get_option("--seed")->count() > 0) o.seed_given = true;
    if (!o.config.empty()) apply_config(o.config, sub, o);

    if (sub == c_pencil) return cmd_pencil(o);
    if (sub == c_locate) return cmd_locate(o);
    if (sub == c_loop) return cmd_loop(o);
    if (sub == c_crossing) return cmd_crossing(o);
    if (sub == c_local) return cmd_local(o);
    if (sub == c_stats) return cmd_stats(o);
    if (sub == c_sweep) return cmd_sweep(o);
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
