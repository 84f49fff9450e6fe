// blobrd: batch front end for the blob reaction-diffusion experiments.
//
//   blobrd run <experiment> [--config FILE] [--out DIR] [key=value ...]
//
// Exit codes: 0 success, 2 configuration error, 3 solver did not converge,
// 4 unphysical result (mean concentration <= 0).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blobrd/experiments.hpp"
#include "blobrd/io.hpp"
#include "blobrd/solvers.hpp"

namespace fs = std::filesystem;
using namespace blobrd;

namespace
{

enum ExitCode
{
  kOk = 0,
  kConfig = 2,
  kNoConvergence = 3,
  kUnphysical = 4
};

struct RunOutput
{
  RunOutput() = default;
  explicit RunOutput(ExperimentResult r) : result(std::move(r)) {}

  ExperimentResult result;
  std::vector<SolveReport> reports;
  std::optional<ScalarField> field;
  std::optional<ExperimentResult> profile;
  std::string metric_name;
  double metric = 0.0;
};

struct Common
{
  KernelKind kernel;
  double chi;
  double h;
  SolverOptions solver;
  std::string precond_name;
};

KernelKind read_kernel(const RunConfig &cfg)
{
  try
  {
    return kernel_from_width(cfg.get_int("kernel", 4));
  }
  catch (const ConfigError &e)
  {
    throw ConfigError(cfg.context("kernel") + ": " + e.what());
  }
}

Common read_common(const RunConfig &cfg)
{
  Common c{read_kernel(cfg), cfg.get_double("chi", 1.0),
           cfg.get_double("h", 1.0), study_defaults(), cfg.get_string("precond", "schur")};
  if (c.precond_name == "schur")
  {
    c.solver.precond = SaddlePrecond::ApproxSchur;
  }
  else if (c.precond_name == "diagonal")
  {
    c.solver.precond = SaddlePrecond::Diagonal;
  }
  else
  {
    throw ConfigError(cfg.context("precond") + ": expected schur or diagonal");
  }
  c.solver.m = cfg.get_int("m", 5);
  c.solver.n = cfg.get_int("n", 1);
  c.solver.restart = cfg.get_int("restart", 30);
  c.solver.rtol = cfg.get_double("rtol", 1e-9);
  c.solver.cycle_budget = cfg.get_int("cycles", 2000);
  for (const char *key : {"chi", "h"})
  {
    if (!(cfg.get_double(key, 1.0) > 0.0))
    {
      throw ConfigError(cfg.context(key) + ": must be positive");
    }
  }
  for (const char *key : {"m", "n", "restart"})
  {
    if (cfg.get_int(key, 1) < 1)
    {
      throw ConfigError(cfg.context(key) + ": must be at least 1");
    }
  }
  return c;
}

SolveReport report_of(const std::string &experiment, int L, std::size_t n, const Common &c,
                      const SolveStats &s)
{
  return {experiment, L, n, c.precond_name, c.solver.m, c.solver.n, s.iterations, s.cycles,
          s.relative_residual};
}

RunOutput run_calibrate_radius(const RunConfig &cfg, const Common &c)
{
  const auto sizes = cfg.get_int_list("L", {32, 48, 64});
  std::vector<Vec3> offsets{Vec3{0, 0, 0}};
  if (cfg.get_bool("displacements", false))
  {
    for (const Vec3 &d : displacement_samples())
    {
      offsets.push_back(d);
    }
  }
  RadiusCalibration cal = calibrate_radius(c.kernel, offsets, sizes, c.h, c.chi, c.solver);
  RunOutput out{cal.table};
  out.metric_name = "a_over_h";
  out.metric = cal.fitted.front();
  if (offsets.size() > 1)
  {
    const auto [lo, hi] = std::minmax_element(cal.fitted.begin(), cal.fitted.end());
    out.result.metadata["displacement_variation"] = format_double((*hi - *lo) / cal.fitted.front());
  }
  return out;
}

RunOutput run_cubic_beta0(const RunConfig &cfg, const Common &c)
{
  const auto phis = cfg.get_list("phi", {0.02, 0.05, 0.1});
  const double a = cfg.get_double("a", calibrated_radius(c.kernel));
  RunOutput out{cubic_beta0(c.kernel, phis, a, c.h, c.chi, c.solver)};
  out.metric_name = "max_relative_error";
  for (const auto &row : out.result.rows)
  {
    out.metric = std::max(out.metric, std::abs(row.back()));
  }
  return out;
}

RunOutput run_random_beta0(const RunConfig &cfg, const Common &c)
{
  const auto phis = cfg.get_list("phi", {0.05, 0.1, 0.2, 0.3});
  const int L = cfg.get_int("L", 64);
  const double a = cfg.get_double("a", calibrated_radius(c.kernel)) * c.h;
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const int attempts = cfg.get_int("attempts", 200000);
  const std::string packing_prefix = cfg.get_string("packing", "");

  RunOutput out;
  out.result.name = "random-beta0";
  // beta0_cubic_fit is the ordered-array fit at the same phi, for comparison only
  out.result.columns = {"phi_target", "phi", "N", "cbar", "beta0", "beta0_cubic_fit"};
  out.result.metadata["seed"] = std::to_string(seed);
  const GridSpec g = GridSpec::cube(3, L, c.h);
  for (std::size_t i = 0; i < phis.size(); ++i)
  {
    const double box = L * c.h;
    const Packing p = generate_packing(phis[i], a, {box, box, box}, seed + i, attempts);
    if (!packing_prefix.empty())
    {
      std::ofstream pf(packing_prefix + std::to_string(i) + ".txt");
      write_blob_file(pf, 3, c.h, c.kernel, p.centers,
                      std::vector<double>(p.centers.size(), kDiffusionLimited));
    }
    const Beta0Measurement m = measure_beta0_random(p, g, c.kernel, c.chi, c.solver);
    out.result.absorb(m.stats);
    out.result.unphysical = out.result.unphysical || m.unphysical;
    out.result.add_row(
      {phis[i], m.phi, double(p.centers.size()), m.cbar, m.beta0, cubic_beta0_fit(m.phi)});
    out.reports.push_back(report_of("random-beta0", L, p.centers.size(), c, m.stats));
  }
  out.metric_name = "beta0_last";
  out.metric = out.result.rows.back()[4];
  return out;
}

RunOutput run_finite_p(const RunConfig &cfg, const Common &c)
{
  const int L = cfg.get_int("L", 64);
  const double a = cfg.get_double("a", calibrated_radius(c.kernel));
  const auto ps = cfg.get_list("P", {0.01, 0.1, 1.0, 10.0});
  OmegaStudy st = measure_omega(L, c.kernel, a, ps, c.h, c.chi, c.solver);
  RunOutput out{st.table};
  out.metric_name = "slope";
  out.metric = st.slope;
  out.result.metadata["beta0"] = format_double(st.beta0);
  out.result.metadata["phi"] = format_double(st.phi);
  out.result.metadata["slope"] = format_double(st.slope);
  out.result.metadata["intercept"] = format_double(st.intercept);
  return out;
}

RunOutput run_decay_profile(const RunConfig &cfg, const Common &c)
{
  const int L = cfg.get_int("L", 64);
  const double a = cfg.get_double("a", 1.255);
  const double cinf = cfg.get_double("c_inf", 1.0);
  DecayProfile d = decay_profile(L, c.kernel, cinf, a, c.h, c.chi, c.solver);
  RunOutput out{d.table};
  out.profile = d.table;
  if (cfg.get_bool("field", false))
  {
    out.field = d.field;
  }
  out.metric_name = "max_relative_deviation";
  for (const auto &row : d.table.rows)
  {
    if (row[1] >= 3.0 && row[1] <= 0.25 * L)
    {
      out.metric = std::max(out.metric, std::abs(row[2] / row[3] - 1.0));
    }
  }
  return out;
}

RunOutput run_precond_bench(const RunConfig &cfg, const Common &c)
{
  const int L = cfg.get_int("L", 16);
  const int dim = cfg.get_int("d", 3);
  const int spacing = cfg.get_int("spacing", 4);
  const bool steady = cfg.get_bool("steady", false);
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  SaddleSolution sol = precond_bench(L, dim, spacing, steady, c.solver, c.chi, c.h, seed);
  RunOutput out;
  out.result.name = "precond-bench";
  out.result.metadata["seed"] = std::to_string(seed);
  out.result.columns = {"L", "N", "outer_iters", "total_cycles", "final_residual"};
  out.result.absorb(sol.stats);
  out.result.add_row({double(L), double(sol.lambda.size()), double(sol.stats.iterations),
                      double(sol.stats.cycles), sol.stats.relative_residual});
  out.reports.push_back(report_of("precond-bench", L, sol.lambda.size(), c, sol.stats));
  out.metric_name = "total_cycles";
  out.metric = double(sol.stats.cycles);
  if (cfg.get_bool("field", false))
  {
    out.field = sol.c;
  }
  return out;
}

RunOutput run_solve(const RunConfig &cfg, const Common &c)
{
  const std::string path = cfg.get_string("blobs", "");
  if (path.empty())
  {
    throw ConfigError("solve needs blobs=<blob file>");
  }
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError(cfg.context("blobs") + ": cannot open '" + path + "'");
  }
  const BlobFile bf = read_blob_file(in, path);
  const int L = cfg.get_int("L", 32);
  const std::string bc_name = cfg.get_string("bc", "periodic");
  Boundary bc = Boundary::periodic();
  if (bc_name == "dirichlet")
  {
    bc = Boundary::dirichlet(cfg.get_double("c_b", 1.0));
  }
  else if (bc_name != "periodic")
  {
    throw ConfigError(cfg.context("bc") + ": expected periodic or dirichlet");
  }
  const GridSpec g = GridSpec::cube(bf.dim, L, bf.h, bc);
  const double beta = cfg.get_double("beta", 0.0);
  const double s_default = bc.kind == BoundaryKind::Periodic ? 1.0 / g.domain_volume() : 0.0;
  const double s = cfg.get_double("s", s_default);
  BlobSet blobs = bf.to_blobs(g);
  ReactionSystem sys(blobs, c.chi, beta, ScalarField(g, s));

  RunOutput out;
  out.result.name = "solve";
  out.result.columns = {"blob", "x", "y", "z", "Jc", "lambda"};
  if (blobs.diffusion_limited())
  {
    SaddleSolution sol = solve_saddle(sys, c.solver);
    out.result.absorb(sol.stats);
    const BlobVector jc = interpolate(blobs, sol.c);
    for (std::size_t i = 0; i < blobs.size(); ++i)
    {
      const Vec3 &q = blobs.positions()[i];
      out.result.add_row({double(i), q[0], q[1], q[2], jc[i], sol.lambda[i]});
    }
    out.reports.push_back(report_of("solve", L, blobs.size(), c, sol.stats));
    out.field = sol.c;
  }
  else
  {
    ReactionSolution sol = solve_reaction(sys, ScalarField(g, s), c.solver);
    out.result.absorb(sol.stats);
    const BlobVector jc = interpolate(blobs, sol.c);
    for (std::size_t i = 0; i < blobs.size(); ++i)
    {
      const Vec3 &q = blobs.positions()[i];
      out.result.add_row({double(i), q[0], q[1], q[2], jc[i], blobs.kappa()[i] * jc[i]});
    }
    out.reports.push_back(report_of("solve", L, blobs.size(), c, sol.stats));
    out.field = sol.c;
  }
  if (!cfg.get_bool("field", true))
  {
    out.field.reset();
  }
  out.metric_name = "mean_c";
  out.metric = mean(*out.field);
  return out;
}

const std::map<std::string, std::function<RunOutput(const RunConfig &, const Common &)>> &
experiments()
{
  static const std::map<std::string, std::function<RunOutput(const RunConfig &, const Common &)>>
    table{{"calibrate-radius", run_calibrate_radius}, {"cubic-beta0", run_cubic_beta0},
          {"random-beta0", run_random_beta0},         {"finite-p", run_finite_p},
          {"decay-profile", run_decay_profile},       {"precond-bench", run_precond_bench},
          {"solve", run_solve}};
  return table;
}

std::set<std::string> allowed_keys(const std::string &experiment)
{
  std::set<std::string> keys{"kernel", "chi", "h", "precond", "m", "n", "restart", "rtol", "cycles"};
  static const std::map<std::string, std::vector<std::string>> extra{
    {"calibrate-radius", {"L", "displacements"}},
    {"cubic-beta0", {"phi", "a"}},
    {"random-beta0", {"phi", "L", "a", "seed", "attempts", "packing"}},
    {"finite-p", {"L", "a", "P"}},
    {"decay-profile", {"L", "a", "c_inf", "field"}},
    {"precond-bench", {"L", "d", "spacing", "steady", "seed", "field"}},
    {"solve", {"blobs", "L", "bc", "c_b", "beta", "s", "field"}}};
  for (const auto &k : extra.at(experiment))
  {
    keys.insert(k);
  }
  return keys;
}

template <typename F>
void write_file(const fs::path &p, F &&body)
{
  std::ofstream os(p);
  if (!os)
  {
    throw ConfigError("cannot write '" + p.string() + "'");
  }
  body(os);
}

int run(const std::string &experiment, const std::string &config_path, const std::string &out_dir,
        const std::vector<std::string> &assignments)
{
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  if (!config_path.empty())
  {
    cfg.load_file(config_path);
  }
  for (std::size_t i = 0; i < assignments.size(); ++i)
  {
    cfg.set_from(assignments[i], "argument " + std::to_string(i + 1));
  }
  const auto it = experiments().find(experiment);
  if (it == experiments().end())
  {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  cfg.require_known(allowed_keys(experiment));
  const Common common = read_common(cfg);
  RunOutput out = it->second(cfg, common);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  out.result.metadata["experiment"] = experiment;
  out.result.metadata["kernel"] = std::to_string(support_width(common.kernel));
  for (const auto &[k, v] : cfg.snapshot())
  {
    out.result.metadata["config." + k] = v;
  }
  write_file(dir / "results.csv", [&](std::ostream &os) { write_table_csv(os, out.result); });
  write_file(dir / "convergence.csv", [&](std::ostream &os) { out.result.history.write_csv(os); });
  write_file(dir / "metadata.csv",
             [&](std::ostream &os) { write_metadata_csv(os, out.result.metadata); });
  if (!out.reports.empty())
  {
    write_file(dir / "report.csv", [&](std::ostream &os) { write_solve_report(os, out.reports); });
  }
  if (out.profile)
  {
    write_file(dir / "profile.csv", [&](std::ostream &os) { write_table_csv(os, *out.profile); });
  }
  if (out.field)
  {
    write_file(dir / "field.csv", [&](std::ostream &os) { write_field_csv(os, *out.field); });
  }

  const double wall =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("experiment=%s %s=%.6g cycles=%lld wall=%.2fs%s%s\n", experiment.c_str(),
              out.metric_name.c_str(), out.metric, static_cast<long long>(out.result.total_cycles),
              wall, out.result.converged ? "" : " NOT-CONVERGED",
              out.result.unphysical ? " UNPHYSICAL" : "");
  if (!out.result.converged)
  {
    return kNoConvergence;
  }
  if (out.result.unphysical)
  {
    return kUnphysical;
  }
  return kOk;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Reaction-diffusion with minimally resolved reactive blobs"};
  app.require_subcommand(1);
  CLI::App *run_cmd = app.add_subcommand("run", "Run an experiment and write CSV outputs");
  std::string experiment;
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> assignments;
  std::string names;
  for (const auto &[k, v] : experiments())
  {
    names += (names.empty() ? "" : ", ") + k;
  }
  run_cmd->add_option("experiment", experiment, "One of: " + names)->required();
  run_cmd->add_option("assignments", assignments, "key=value overrides (win over --config)");
  run_cmd->add_option("--config", config_path, "Flat key=value configuration file");
  run_cmd->add_option("--out", out_dir, "Output directory");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }

  try
  {
    return run(experiment, config_path, out_dir, assignments);
  }
  catch (const ConfigError &e)
  {
    std::fprintf(stderr, "blobrd: configuration error: %s\n", e.what());
    return kConfig;
  }
  catch (const SolvabilityError &e)
  {
    std::fprintf(stderr, "blobrd: %s\n", e.what());
    return kConfig;
  }
}
