#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "msl/eval.hpp"
#include "msl/experiment.hpp"
#include "msl/io.hpp"
#include "msl/model.hpp"

namespace msl::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kZeroTol = 1e-10;

fs::path prepare_out_dir(const RunConfig& cfg) {
  const fs::path dir = cfg.out_dir();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory " + dir.string());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write " + path.string());
  return f;
}

void write_echo(const RunConfig& cfg, const fs::path& dir) {
  auto f = open_out(dir / "resolved_config.cfg");
  cfg.write(f);
}

struct SupportSummary {
  int nonzero_rows = 0;
  std::vector<int> per_row;
  int rank = 0;
};

SupportSummary summarize(const Matrix& b) {
  SupportSummary s;
  for (Index j = 0; j < b.rows(); ++j) {
    const int nz = static_cast<int>((b.row(j).array().abs() > kZeroTol).count());
    s.per_row.push_back(nz);
    if (nz > 0) ++s.nonzero_rows;
  }
  if (b.size() > 0) {
    const Vector sv = Eigen::JacobiSVD<Matrix>(b).singularValues();
    const double cut = kZeroTol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    s.rank = static_cast<int>((sv.array() > cut).count());
  }
  return s;
}

PenaltySpec configured_penalty(const RunConfig& cfg, PenaltyFamily family,
                               const Matrix& features, Index num_classes) {
  return formula_penalty(family, features, num_classes, cfg.weights(),
                         cfg.get_double("penalty.lambda_scale"));
}

}  // namespace

int cmd_fit(const RunConfig& cfg, std::ostream& out) {
  const std::string path = cfg.get_string("data.path");
  if (path.empty()) throw InvalidInput("fit needs a dataset path");
  std::optional<int> num_classes;
  if (cfg.raw("data.L") != "auto") num_classes = cfg.get_int("data.L");
  const Dataset data = read_dataset_csv(path, num_classes);
  const PenaltyFamily family = cfg.penalty_family();
  const PenaltySpec pen = configured_penalty(cfg, family, data.features(), data.num_classes());
  const SolverConfig solver = cfg.solver();
  const fs::path dir = prepare_out_dir(cfg);
  write_echo(cfg, dir);

  const FitResult f = fit(data, pen, solver);

  CoefficientMetadata meta;
  meta.d = f.coefficients.d();
  meta.num_classes = f.coefficients.num_classes();
  meta.centered = f.coefficients.centered();
  meta.penalty = to_string(family);
  meta.objective = f.objective;
  meta.iterations = f.iterations;
  meta.converged = f.converged;
  write_coefficients(dir / "coefficients.csv", f.coefficients, meta);

  const SupportSummary s = summarize(f.coefficients.values());
  std::ostringstream per_row;
  for (std::size_t j = 0; j < s.per_row.size(); ++j) per_row << (j ? " " : "") << s.per_row[j];

  auto summary = open_out(dir / "fit_summary.csv");
  summary << "penalty,n,d,L,objective,iterations,converged,fixed_point_residual,nonzero_rows,"
             "rank,row_nonzeros\n"
          << to_string(family) << ',' << data.n() << ',' << data.d() << ','
          << data.num_classes() << ',' << format_double(f.objective) << ',' << f.iterations
          << ',' << (f.converged ? "true" : "false") << ','
          << format_double(f.fixed_point_residual) << ',' << s.nonzero_rows << ',' << s.rank
          << ',' << per_row.str() << '\n';

  out << "penalty: " << to_string(family) << "\n"
      << "objective: " << format_double(f.objective) << "\n"
      << "iterations: " << f.iterations << "\n"
      << "converged: " << (f.converged ? "true" : "false") << "\n"
      << "nonzero rows: " << s.nonzero_rows << "\n"
      << "row nonzeros: " << per_row.str() << "\n"
      << "rank: " << s.rank << "\n";
  return f.converged ? kExitOk : kExitNotConverged;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const SyntheticSpec spec = cfg.synthetic();
  const PenaltyFamily family = cfg.penalty_family();
  const SolverConfig solver = cfg.solver();
  const int test_size = cfg.get_int("eval.test_size");
  const int mc_samples = cfg.get_int("eval.mc_samples");
  if (test_size < 1 || mc_samples < 1) {
    throw InvalidInput("eval.test_size and eval.mc_samples must be >= 1");
  }
  cfg.weights();
  const fs::path dir = prepare_out_dir(cfg);
  write_echo(cfg, dir);

  const GeneratedData g = generate(spec);
  const PenaltySpec pen = configured_penalty(cfg, family, g.data.features(), spec.num_classes);
  const FitResult f = fit(g.data, pen, solver);
  const RiskReport r = risk_report(f.coefficients, g.truth, spec, test_size, mc_samples, &g.data);

  {
    auto csv = open_out(dir / "risk_report.csv");
    csv << "penalty,n,d,L,structure,d0_or_r0,seed,train_err,test_err,bayes_risk,bayes_stderr,"
           "excess_risk,excess_stderr,kl_risk,objective,iterations,converged\n"
        << to_string(family) << ',' << spec.n << ',' << spec.d << ',' << spec.num_classes << ','
        << structure_name(spec.structure) << ',' << structure_size(spec.structure) << ','
        << spec.seed << ',' << format_double(r.train_error) << ','
        << format_double(r.test_error) << ',' << format_double(r.bayes_risk) << ','
        << format_double(r.bayes_stderr) << ',' << format_double(r.excess_risk) << ','
        << format_double(r.excess_stderr) << ',' << format_double(r.kl_risk) << ','
        << format_double(f.objective) << ',' << f.iterations << ','
        << (f.converged ? "true" : "false") << '\n';
  }
  {
    auto csv = open_out(dir / "margin_cdf.csv");
    csv << "h,cdf\n";
    for (const auto& [h, p] : r.margin_cdf) csv << format_double(h) << ',' << format_double(p) << '\n';
  }
  CoefficientMetadata meta{f.coefficients.d(), f.coefficients.num_classes(),
                           f.coefficients.centered(), to_string(family), f.objective,
                           f.iterations, f.converged};
  write_coefficients(dir / "coefficients.csv", f.coefficients, meta);

  out << "test error: " << format_double(r.test_error) << "\n"
      << "bayes risk: " << format_double(r.bayes_risk) << " +- "
      << format_double(r.bayes_stderr) << "\n"
      << "excess risk: " << format_double(r.excess_risk) << " +- "
      << format_double(r.excess_stderr) << "\n"
      << "kl risk: " << format_double(r.kl_risk) << "\n"
      << "iterations: " << f.iterations << (f.converged ? "" : " (not converged)") << "\n";
  return f.converged ? kExitOk : kExitNotConverged;
}

int cmd_scaling(const RunConfig& cfg, std::ostream& out) {
  const SyntheticSpec base = cfg.synthetic();
  std::vector<SyntheticSpec> grid;
  const auto ns = cfg.get_list("grid.n");
  if (ns.empty()) {
    grid.push_back(base);
  } else {
    RunConfig probe = cfg;
    for (const auto& n : ns) {
      probe.set("synthetic.n", n);
      grid.push_back(probe.synthetic());
    }
  }

  std::vector<PenaltyRecipe> recipes;
  const WeightConfig w = cfg.weights();
  const double scale = cfg.get_double("penalty.lambda_scale");
  for (const auto fam : cfg.penalty_families()) recipes.push_back({fam, w, scale});

  ExperimentOptions opt;
  opt.replicates = cfg.get_int("run.replicates");
  opt.master_seed = cfg.get_u64("run.seed");
  opt.threads = cfg.get_int("run.threads");
  opt.solver = cfg.solver();
  opt.test_size = cfg.get_int("eval.test_size");
  opt.mc_samples = cfg.get_int("eval.mc_samples");
  opt.record_timing = cfg.get_bool("eval.record_timing");
  if (opt.threads < 1) throw InvalidInput("run.threads must be >= 1");
  if (opt.test_size < 1 || opt.mc_samples < 1) {
    throw InvalidInput("eval.test_size and eval.mc_samples must be >= 1");
  }

  const fs::path dir = prepare_out_dir(cfg);
  write_echo(cfg, dir);
  const ExperimentTable table = scaling_experiment(grid, recipes, opt);
  {
    auto f = open_out(dir / "runs.csv");
    write_experiment_csv(table, f);
  }
  {
    auto f = open_out(dir / "aggregate.csv");
    write_aggregate_csv(table, f);
  }
  {
    auto f = open_out(dir / "plot_data.csv");
    write_plot_data_csv(table, f);
  }

  std::size_t failed = 0;
  for (const auto& r : table.rows) failed += r.error.empty() ? 0 : 1;
  out << "rows: " << table.rows.size() << "\n";
  out << "converged fraction: " << format_double(table.converged_fraction()) << "\n";
  if (failed > 0) out << "failed rows: " << failed << "\n";
  for (const auto& s : table.slopes) {
    out << "slope " << s.penalty << ": " << format_double(s.slope) << "\n";
  }
  return table.converged_fraction() >= 0.95 ? kExitOk : kExitNotConverged;
}

int cmd_rademacher(const RunConfig& cfg, std::ostream& out) {
  const SyntheticSpec spec = cfg.synthetic();
  const PenaltyFamily family = cfg.penalty_family();
  const int draws = cfg.get_int("rademacher.draws");
  if (draws < 1) throw InvalidInput("rademacher.draws must be >= 1");
  cfg.weights();
  const fs::path dir = prepare_out_dir(cfg);
  write_echo(cfg, dir);

  RandomStream rng = rng_stream(spec.seed, kFeatureStream);
  const Matrix x = draw_features(spec, spec.n, rng);
  const PenaltySpec pen = configured_penalty(cfg, family, x, spec.num_classes);
  const RademacherEstimate est = rademacher_mc(pen, x, spec.num_classes, draws, spec.seed);
  const double reference = 7.0 / 720.0 * std::sqrt(static_cast<double>(spec.n));

  {
    auto f = open_out(dir / "rademacher.csv");
    f << "penalty,n,d,L,draws,estimate,std_error,reference,ratio\n"
      << to_string(family) << ',' << spec.n << ',' << spec.d << ',' << spec.num_classes << ','
      << draws << ',' << format_double(est.estimate) << ',' << format_double(est.std_error)
      << ',' << format_double(reference) << ',' << format_double(est.estimate / reference)
      << '\n';
  }
  {
    auto f = open_out(dir / "rademacher_draws.csv");
    f << "draw,value\n";
    for (std::size_t i = 0; i < est.draws.size(); ++i) {
      f << i << ',' << format_double(est.draws[i]) << '\n';
    }
  }
  out << "estimate: " << format_double(est.estimate) << " +- " << format_double(est.std_error)
      << "\n"
      << "reference (7/720) sqrt(n): " << format_double(reference) << "\n"
      << "ratio: " << format_double(est.estimate / reference) << "\n";
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiclass sparse linear classifiers: fits, simulations and scaling sweeps"};
  app.require_subcommand(1);

  struct Flags {
    std::string config, positional, seed, threads, out_dir, penalty, c0, c1, c2, c_nuclear,
        lambda_scale;
    std::vector<std::string> sets;
  };
  Flags fl;

  auto add_common = [&](CLI::App* sub, bool threads) {
    sub->add_option("--seed", fl.seed, "Master seed (run.seed)");
    sub->add_option("--out-dir", fl.out_dir, "Output directory (output.dir)");
    sub->add_option("--penalty", fl.penalty,
                    "group-slope, sparse-group-slope, nuclear, group-lasso or sparse-group-lasso");
    sub->add_option("--c0", fl.c0, "Group Slope weight constant");
    sub->add_option("--c1", fl.c1, "Sparse group Slope row constant");
    sub->add_option("--c2", fl.c2, "Sparse group Slope within-row constant");
    sub->add_option("--c-nuclear", fl.c_nuclear, "Nuclear weight constant");
    sub->add_option("--lambda-scale", fl.lambda_scale, "Global multiplier on every weight");
    sub->add_option("--set", fl.sets, "Override any config key: --set key=value");
    if (threads) sub->add_option("--threads", fl.threads, "Worker threads (run.threads)");
  };

  auto* fit_cmd = app.add_subcommand("fit", "Fit a penalized model to a CSV dataset");
  fit_cmd->add_option("dataset", fl.positional, "Dataset CSV (y,x1..xd)");
  fit_cmd->add_option("--config", fl.config, "Config file");
  add_common(fit_cmd, false);

  auto* sim_cmd = app.add_subcommand("simulate", "One generate, fit, risk cycle");
  sim_cmd->add_option("config", fl.config, "Config file");
  add_common(sim_cmd, false);

  auto* scl_cmd = app.add_subcommand("scaling", "Seeded sweep over an n grid");
  scl_cmd->add_option("config", fl.config, "Config file");
  add_common(scl_cmd, true);

  auto* rad_cmd = app.add_subcommand("rademacher", "Monte-Carlo Rademacher complexity");
  rad_cmd->add_option("config", fl.config, "Config file");
  add_common(rad_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "mslc: " << e.what() << "\n";
    return kExitInvalidInput;
  }

  try {
    Command command = Command::kFit;
    if (sim_cmd->parsed()) command = Command::kSimulate;
    if (scl_cmd->parsed()) command = Command::kScaling;
    if (rad_cmd->parsed()) command = Command::kRademacher;

    RunConfig cfg(command);
    if (!fl.config.empty()) cfg.load_file(fl.config);
    if (!fl.positional.empty()) cfg.set("data.path", fl.positional);
    const std::pair<const std::string*, const char*> flag_keys[] = {
        {&fl.seed, "run.seed"},          {&fl.threads, "run.threads"},
        {&fl.out_dir, "output.dir"},     {&fl.penalty, "penalty.family"},
        {&fl.c0, "penalty.c0"},          {&fl.c1, "penalty.c1"},
        {&fl.c2, "penalty.c2"},          {&fl.c_nuclear, "penalty.c_nuclear"},
        {&fl.lambda_scale, "penalty.lambda_scale"},
    };
    for (const auto& [value, key] : flag_keys) {
      if (!value->empty()) cfg.set(key, *value);
    }
    for (const auto& kv : fl.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidInput("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }

    switch (command) {
      case Command::kFit:
        return cmd_fit(cfg, out);
      case Command::kSimulate:
        return cmd_simulate(cfg, out);
      case Command::kScaling:
        return cmd_scaling(cfg, out);
      case Command::kRademacher:
        return cmd_rademacher(cfg, out);
    }
  } catch (const InvalidInput& e) {
    err << "mslc: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const ConvergenceError& e) {
    err << "mslc: " << e.what() << " (residual " << format_double(e.residual()) << ")\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "mslc: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitOk;
}

}  // namespace msl::cli
