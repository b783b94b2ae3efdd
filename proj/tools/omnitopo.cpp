#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "omnitopo/omnitopo.hpp"

namespace fs = std::filesystem;
using namespace omnitopo;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNoData = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
  const char* env = std::getenv("OMNITOPO_OUT_DIR");
  return env && *env ? env : ".";
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (!fs::is_directory(p)) throw std::runtime_error("output directory " + dir + " is not usable");
  return p;
}

Chassis load_chassis(const std::string& spec) {
  if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") return chassis_from_json(read_json(spec));
  try {
    return make_library_chassis(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::vector<DirectionSet> directions_of(const SolutionSet& s) {
  std::vector<DirectionSet> out;
  out.reserve(s.size());
  for (const auto& sol : s.solutions) out.push_back(sol.dirs);
  return out;
}

// ---- chassis ---------------------------------------------------------------

struct ChassisArgs {
  std::string id;
  std::string out;
  bool list = false;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
};

int cmd_chassis(const ChassisArgs& a) {
  if (a.list) {
    for (const auto& id : library_ids()) {
      const auto c = make_library_chassis(id);
      std::printf("%-10s N=%-3zu %s\n", id.c_str(), c.size(), std::string(to_string(c.family)).c_str());
    }
    return 0;
  }
  if (a.id.empty()) throw UsageError("chassis: give --id or --list");
  Chassis c = load_chassis(a.id);
  if (a.magnitude > 0.0) c = make_quasi_regular(c, a.magnitude, a.seed);
  const std::string out = a.out.empty() ? (prepare_dir(default_out_dir()) / (c.id + ".json")).string() : a.out;
  write_json(out, to_json(c));
  std::printf("wrote %s (%zu vertices, hash %s)\n", out.c_str(), c.size(), chassis_hash(c).c_str());
  return 0;
}

// ---- optimize --------------------------------------------------------------

struct OptimizeArgs {
  std::string chassis;
  int samples = 200;
  std::uint64_t seed = 1;
  double prune_tol = kDefaultPruneTolerance;
  std::string objective = "logvol";
  std::string out_dir;
  unsigned threads = 1;
  int max_iter = SolverConfig{}.max_iterations;
  double gtol = SolverConfig{}.gradient_tolerance;
};

int cmd_optimize(const OptimizeArgs& a) {
  const Chassis chassis = load_chassis(a.chassis);
  validate_chassis(chassis);
  SolverConfig cfg;
  cfg.objective = objective_from_string(a.objective);
  cfg.max_iterations = a.max_iter;
  cfg.gradient_tolerance = a.gtol;
  const auto dir = prepare_dir(a.out_dir.empty() ? default_out_dir() : a.out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  const auto set = global_exhaust(chassis, a.samples, a.prune_tol, a.seed, cfg, a.threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_json((dir / "solutions.json").string(), to_json(set, chassis));
  write_text((dir / "solutions.csv").string(), solutions_csv(set));
  write_text((dir / "disc.csv").string(), disc_csv(set));

  double tmax = 0.0, tsum = 0.0;
  for (const auto& s : set.solutions) {
    const double t = tangency_residual(chassis, s.dirs);
    tmax = std::max(tmax, t);
    tsum += t;
  }
  Json metrics;
  metrics["chassis_id"] = chassis.id;
  metrics["M_star"] = set.size();
  metrics["converged"] = set.converged_count;
  metrics["J_min"] = set.J_min;
  metrics["best"] = to_json(evaluate(chassis, set.solutions.front().dirs, cfg.length_ratio * chassis.circumradius, cfg.epsilon));
  metrics["max_tangency_residual"] = tmax;
  metrics["mean_tangency_residual"] = tsum / static_cast<double>(set.size());
  write_json((dir / "metrics.json").string(), metrics);

  std::printf("chassis %s  N=%zu  objective=%s\n", chassis.id.c_str(), chassis.size(), a.objective.c_str());
  std::printf("samples %d  converged %d  M*=%zu  J_min=%.10g\n", a.samples, set.converged_count, set.size(), set.J_min);
  std::printf("max tangency residual %.3e  mean %.3e\n", tmax, tsum / static_cast<double>(set.size()));
  std::printf("wall time %.3f s (%.3f ms per seed)\n", secs, 1e3 * secs / a.samples);
  std::printf("wrote %s\n", (dir / "solutions.json").string().c_str());
  return 0;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  std::string solutions;
  std::string out_dir;
  double tol_deg = 1.0;
  double match_tol_deg = 2.0;
  ClassificationThresholds thresholds;
  ClusteringOptions clustering;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const auto loaded = solutions_from_json(read_json(a.solutions));
  const auto& chassis = loaded.chassis;
  const auto& set = loaded.set;
  const auto dir = prepare_dir(a.out_dir.empty() ? default_out_dir() : a.out_dir);
  const auto sols = directions_of(set);

  const auto fits = fit_semi_ellipses(sols, chassis);
  const auto collapse = verify_tangent_collapse(fits, chassis, a.tol_deg);
  write_json((dir / "ellipses.json").string(), to_json(fits, &collapse));

  const auto table = phase_table(chassis, sols);
  ClusteringOptions copt = a.clustering;
  copt.reject_spread_deg = a.thresholds.reject_spread_deg;
  copt.one_d_threshold = a.thresholds.one_d_threshold;
  std::optional<BranchExtraction> ex;
  std::string extraction_note;
  try {
    ex = extract_branches(table.theta, copt);
  } catch (const EmptyResultError& e) {
    extraction_note = e.what();
  } catch (const InsufficientDataError& e) {
    extraction_note = e.what();
  }
  const auto cls = classify(chassis, sols, ex ? &*ex : nullptr, a.thresholds);

  std::optional<MatchReport> match;
  const int N = static_cast<int>(chassis.size());
  if (ex && chassis.family == ChassisFamily::regular_polygon && N >= 6) {
    const auto pred = star_polygon_predict(N);
    match = match_branches(ex->model, pred, a.match_tol_deg);
    annotate_q(ex->model, pred, *match);
  }
  if (ex) {
    write_json((dir / "branches.json").string(), to_json(ex->model));
    write_text((dir / "scatter.csv").string(), scatter_csv(table.theta, ex->clusters.labels));
  } else {
    write_text((dir / "scatter.csv").string(), scatter_csv(table.theta, {}));
  }
  Json cj = to_json(cls);
  if (ex) cj["noise_points"] = ex->noise;
  if (!extraction_note.empty()) cj["extraction_note"] = extraction_note;
  if (match) {
    cj["star_match_complete"] = match->complete();
    cj["star_match_max_cost_deg"] = match->max_cost_deg();
  }
  write_json((dir / "classification.json").string(), cj);

  int ok = 0;
  for (bool b : collapse) ok += b ? 1 : 0;
  std::printf("chassis %s  N=%d  M*=%zu\n", chassis.id.c_str(), N, set.size());
  std::printf("semi-ellipse fits: %d/%d rotors on their tangent circles (tol %.3g deg), mean distance %.3e\n", ok, N,
              a.tol_deg, fits.mean_distance());
  if (ex) {
    std::printf("clusters %d  noise %zu  leading variance fraction %.6f\n", ex->clusters.cluster_count, ex->noise,
                ex->check.leading_variance_fraction);
    for (std::size_t k = 0; k < ex->model.branches.size(); ++k) {
      const auto& b = ex->model.branches[k];
      std::printf("  branch %zu  n=%zu  spread %.2f deg  fit err %.3f deg%s  offsets/pi:", k + 1, b.members, b.spread_deg,
                  b.max_fit_error_deg, b.rejected ? "  REJECTED" : "");
      for (const auto& [num, den] : b.rational_offsets) std::printf(" %d/%d", num, den);
      if (b.q_match) std::printf("  q=%d", *b.q_match);
      std::printf("\n");
    }
  } else {
    std::printf("branch extraction: %s\n", extraction_note.c_str());
  }
  if (match) std::printf("star-polygon match: %s (max %.3f deg)\n", match->complete() ? "complete" : "partial", match->max_cost_deg());
  if (cls.type == LandscapeType::IV_B) {
    std::printf("classification: %s, K=%d\n", to_string(cls.type).c_str(), *cls.K);
  } else {
    std::printf("classification: %s (%s)\n", to_string(cls.type).c_str(), cls.detail.c_str());
  }
  if (chassis.family == ChassisFamily::regular_polygon && N > 10 && cls.type != LandscapeType::IV_B) {
    std::printf("conjectured K = N - 5 = %d (not extracted)\n", N - 5);
  }
  return 0;
}

// ---- predict ---------------------------------------------------------------

int cmd_predict(int N, const std::string& out) {
  const auto p = star_polygon_predict(N);
  if (p.K() == 0) {
    std::fprintf(stderr, "%s\n", p.note.c_str());
    return 1;
  }
  std::printf("N=%d  K=N-5=%d\n", N, p.K());
  for (std::size_t k = 0; k < p.branches.size(); ++k) {
    const auto& b = p.branches[k];
    std::printf("  branch %zu  q=%d  offsets (x pi/%d):", k + 1, b.q, N);
    for (int r : b.offset_numerators) std::printf(" %d", r);
    std::printf("\n");
  }
  if (!out.empty()) write_text(out, prediction_csv(p));
  return 0;
}

// ---- trajectory ------------------------------------------------------------

struct TrajectoryArgs {
  std::string chassis;
  int branch = 1;
  int steps = 64;
  std::string branches;
  bool controls = false;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_trajectory(const TrajectoryArgs& a) {
  const Chassis chassis = load_chassis(a.chassis);
  std::vector<double> offsets;
  std::vector<int> chirality;
  if (!a.branches.empty()) {
    const Json j = read_json(a.branches);
    const auto& list = j.at("branches");
    if (a.branch < 1 || a.branch > static_cast<int>(list.size())) throw UsageError("branch index out of range");
    const auto& b = list[static_cast<std::size_t>(a.branch - 1)];
    for (double o : b.at("offsets_over_pi")) offsets.push_back(o * kPi);
    chirality = b.at("chirality").get<std::vector<int>>();
  } else {
    const auto p = star_polygon_predict(static_cast<int>(chassis.size()));
    if (chassis.family != ChassisFamily::regular_polygon) throw UsageError("non-polygon chassis needs --branches");
    if (a.branch < 1 || a.branch > p.K()) {
      throw UsageError("branch " + std::to_string(a.branch) + " invalid; chassis has " + std::to_string(p.K()) +
                       " predicted branches");
    }
    offsets = p.branches[static_cast<std::size_t>(a.branch - 1)].offsets;
  }
  auto rows = sweep_branch(chassis, offsets, chirality, a.steps);
  const auto var = singular_value_variation(rows);
  double jmin = rows.front().metrics.log_volume, jmax = jmin;
  for (const auto& r : rows) {
    jmin = std::min(jmin, r.metrics.log_volume);
    jmax = std::max(jmax, r.metrics.log_volume);
  }
  if (a.controls) {
    auto dec = sweep_decoherent(chassis, a.steps, a.seed);
    auto rnd = sweep_random(chassis, a.steps, a.seed);
    rows.insert(rows.end(), dec.begin(), dec.end());
    rows.insert(rows.end(), rnd.begin(), rnd.end());
  }
  const std::string out = a.out.empty() ? (prepare_dir(default_out_dir()) / "trajectory.csv").string() : a.out;
  write_text(out, trajectory_csv(rows, chassis.size()));
  std::printf("chassis %s  branch %d  steps %d\n", chassis.id.c_str(), a.branch, a.steps);
  std::printf("max relative sigma variation %.3e  J_vol range %.3e\n", *std::max_element(var.begin(), var.end()), jmax - jmin);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

// ---- sensitivity -----------------------------------------------------------

int cmd_sensitivity(const std::string& solutions, int points, const std::string& out) {
  const auto loaded = solutions_from_json(read_json(solutions));
  const auto& best = loaded.set.solutions.at(0).dirs;
  const auto pts = sensitivity_sweep(loaded.chassis, best, log_grid(0.1, 10.0, points));
  const std::string path = out.empty() ? (prepare_dir(default_out_dir()) / "sensitivity.csv").string() : out;
  write_text(path, sensitivity_csv(pts));
  std::size_t arg = 0;
  for (std::size_t k = 1; k < pts.size(); ++k)
    if (pts[k].kappa < pts[arg].kappa) arg = k;
  std::printf("kappa minimized at L_c/R = %.4g (kappa %.6g)\n", pts[arg].ratio, pts[arg].kappa);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isotropy-optimal rotor orientation landscapes for fixed multirotor chassis"};
  app.require_subcommand(1);

  ChassisArgs ca;
  auto* sc = app.add_subcommand("chassis", "write a library chassis as JSON or list the library");
  sc->add_option("--id", ca.id, "library id or chassis JSON path");
  sc->add_option("--out", ca.out, "output file (default <out-dir>/<id>.json)");
  sc->add_flag("--list", ca.list, "list library ids");
  sc->add_option("--quasi-magnitude", ca.magnitude, "perturb into a quasi-regular variant")->check(CLI::Range(0.0, 0.4999));
  sc->add_option("--quasi-seed", ca.seed, "seed for the perturbation");

  OptimizeArgs oa;
  auto* so = app.add_subcommand("optimize", "global exhaustion: multistart + local refinement + pruning");
  so->add_option("--chassis", oa.chassis, "library id or chassis JSON path")->required();
  so->add_option("--samples", oa.samples, "number of uniform starts")->check(CLI::PositiveNumber);
  so->add_option("--seed", oa.seed, "RNG seed");
  so->add_option("--prune-tol", oa.prune_tol, "keep costs within this of J_min")->check(CLI::NonNegativeNumber);
  so->add_option("--objective", oa.objective, "logvol or kappa")->check(CLI::IsMember({"logvol", "kappa"}));
  so->add_option("--out-dir", oa.out_dir, "output directory (default $OMNITOPO_OUT_DIR or .)");
  so->add_option("--threads", oa.threads, "worker threads")->check(CLI::PositiveNumber);
  so->add_option("--max-iter", oa.max_iter, "local solver iteration cap")->check(CLI::PositiveNumber);
  so->add_option("--gtol", oa.gtol, "tangent gradient tolerance")->check(CLI::PositiveNumber);

  AnalyzeArgs aa;
  auto* sa = app.add_subcommand("analyze", "semi-ellipse fits, branch extraction and classification");
  sa->add_option("--solutions", aa.solutions, "solutions.json from optimize")->required();
  sa->add_option("--out-dir", aa.out_dir, "output directory (default $OMNITOPO_OUT_DIR or .)");
  sa->add_option("--tol-deg", aa.tol_deg, "tangent-collapse tolerance in degrees")->check(CLI::PositiveNumber);
  sa->add_option("--match-tol-deg", aa.match_tol_deg, "star-polygon matching tolerance in degrees");
  sa->add_option("--eps-deg", aa.clustering.eps_deg, "density clustering radius per coordinate");
  sa->add_option("--min-points", aa.clustering.min_points, "density clustering core size");
  sa->add_option("--reject-spread-deg", aa.thresholds.reject_spread_deg, "branch spread quality gate");
  sa->add_option("--one-d-threshold", aa.thresholds.one_d_threshold, "leading variance fraction for a 1D manifold");
  sa->add_option("--discrete-max-clusters", aa.thresholds.discrete_max_clusters, "Type I cluster ceiling");
  sa->add_option("--tangency-tol", aa.thresholds.tangency_tol, "tangency residual counted as on the torus");

  int predict_n = 0;
  std::string predict_out;
  auto* sp = app.add_subcommand("predict", "star-polygon branch prediction for a regular N-gon");
  sp->add_option("-N,--rotors", predict_n, "number of rotors")->required();
  sp->add_option("--out", predict_out, "CSV output path");

  TrajectoryArgs ta;
  auto* st = app.add_subcommand("trajectory", "sweep lambda along one branch and export metrics");
  st->add_option("--chassis", ta.chassis, "library id or chassis JSON path")->required();
  st->add_option("--branch", ta.branch, "1-based branch index");
  st->add_option("--steps", ta.steps, "number of lambda steps over [0, pi)")->check(CLI::PositiveNumber);
  st->add_option("--branches", ta.branches, "branches.json from analyze (required off polygons)");
  st->add_flag("--controls", ta.controls, "append decoherent and random control rows");
  st->add_option("--seed", ta.seed, "seed for the control rows");
  st->add_option("--out", ta.out, "CSV output path");

  std::string sens_solutions, sens_out;
  int sens_points = 41;
  auto* ss = app.add_subcommand("sensitivity", "kappa and sigma_min against L_c / R for the best solution");
  ss->add_option("--solutions", sens_solutions, "solutions.json from optimize")->required();
  ss->add_option("--points", sens_points, "log-grid points over [0.1, 10]")->check(CLI::PositiveNumber);
  ss->add_option("--out", sens_out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sc->parsed()) return cmd_chassis(ca);
    if (so->parsed()) return cmd_optimize(oa);
    if (sa->parsed()) return cmd_analyze(aa);
    if (sp->parsed()) return cmd_predict(predict_n, predict_out);
    if (st->parsed()) return cmd_trajectory(ta);
    if (ss->parsed()) return cmd_sensitivity(sens_solutions, sens_points, sens_out);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const EmptyResultError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNoData;
  } catch (const InsufficientDataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNoData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
