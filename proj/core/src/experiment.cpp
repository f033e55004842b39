#include "msl/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <thread>

#include "msl/eval.hpp"
#include "msl/io.hpp"
#include "msl/rng.hpp"

namespace msl {

namespace {

void run_cell(const SyntheticSpec& base, int grid_id, int replicate,
              const std::vector<PenaltyRecipe>& penalties, const ExperimentOptions& opt,
              ExperimentRow* out) {
  SyntheticSpec spec = base;
  spec.seed = cell_seed(opt.master_seed, grid_id, replicate);

  for (std::size_t p = 0; p < penalties.size(); ++p) {
    ExperimentRow& row = out[p];
    row.grid_id = grid_id;
    row.replicate = replicate;
    row.seed = spec.seed;
    row.penalty = to_string(penalties[p].family);
    row.n = spec.n;
    row.d = spec.d;
    row.num_classes = spec.num_classes;
    row.structure = structure_name(spec.structure);
    row.structure_size = structure_size(spec.structure);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.train_err = row.test_err = row.bayes_risk = row.excess_risk = row.kl_risk = nan;
  }

  try {
    const GeneratedData g = generate(spec);
    for (std::size_t p = 0; p < penalties.size(); ++p) {
      ExperimentRow& row = out[p];
      try {
        const auto& recipe = penalties[p];
        const PenaltySpec pen = formula_penalty(recipe.family, g.data.features(),
                                                spec.num_classes, recipe.weights,
                                                recipe.lambda_scale);
        const auto t0 = std::chrono::steady_clock::now();
        const FitResult f = fit(g.data, pen, opt.solver);
        const auto t1 = std::chrono::steady_clock::now();
        const RiskReport r =
            risk_report(f.coefficients, g.truth, spec, opt.test_size, opt.mc_samples, &g.data);
        row.train_err = r.train_error;
        row.test_err = r.test_error;
        row.bayes_risk = r.bayes_risk;
        row.excess_risk = r.excess_risk;
        row.kl_risk = r.kl_risk;
        row.iterations = f.iterations;
        row.converged = f.converged;
        if (opt.record_timing) {
          row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  } catch (const std::exception& e) {
    for (std::size_t p = 0; p < penalties.size(); ++p) out[p].error = e.what();
  }
}

struct Moments {
  int count = 0;
  double sum = 0, sum_sq = 0;
  void add(double v) {
    if (!std::isfinite(v)) return;
    ++count;
    sum += v;
    sum_sq += v * v;
  }
  double mean() const { return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN(); }
  double se() const {
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - count * m * m) / (count - 1));
    return std::sqrt(var / count);
  }
};

}  // namespace

double ExperimentTable::converged_fraction() const {
  if (rows.empty()) return 1.0;
  std::size_t ok = 0;
  for (const auto& r : rows) ok += r.converged ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(rows.size());
}

std::uint64_t cell_seed(std::uint64_t master_seed, int grid_id, int replicate) {
  const std::uint64_t key =
      (static_cast<std::uint64_t>(grid_id) << 32) | static_cast<std::uint32_t>(replicate);
  return rng_stream(master_seed, key).next();
}

ExperimentTable scaling_experiment(const std::vector<SyntheticSpec>& grid,
                                   const std::vector<PenaltyRecipe>& penalties,
                                   const ExperimentOptions& opt) {
  if (grid.empty()) throw InvalidInput("scaling experiment needs a nonempty grid");
  if (opt.replicates < 1) throw InvalidInput("replicates must be >= 1");
  opt.solver.validate();
  for (const auto& s : grid) s.validate();
  for (const auto& p : penalties) p.weights.validate();

  ExperimentTable table;
  if (penalties.empty()) return table;

  const std::size_t cells = grid.size() * static_cast<std::size_t>(opt.replicates);
  const std::size_t per_cell = penalties.size();
  table.rows.resize(cells * per_cell);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= cells) return;
      const int grid_id = static_cast<int>(c / static_cast<std::size_t>(opt.replicates));
      const int rep = static_cast<int>(c % static_cast<std::size_t>(opt.replicates));
      run_cell(grid[static_cast<std::size_t>(grid_id)], grid_id, rep, penalties, opt,
               table.rows.data() + c * per_cell);
    }
  };
  const int threads = std::max(1, std::min<int>(opt.threads, static_cast<int>(cells)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Aggregate by (grid_id, penalty index) in key order.
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t p = 0; p < per_cell; ++p) {
      Moments test, excess, kl, bayes;
      AggregateRow a;
      a.grid_id = static_cast<int>(g);
      a.penalty = to_string(penalties[p].family);
      a.n = grid[g].n;
      a.d = grid[g].d;
      a.num_classes = grid[g].num_classes;
      for (int r = 0; r < opt.replicates; ++r) {
        const auto& row =
            table.rows[(g * static_cast<std::size_t>(opt.replicates) + static_cast<std::size_t>(r)) *
                           per_cell +
                       p];
        ++a.count;
        a.converged += row.converged ? 1 : 0;
        test.add(row.test_err);
        excess.add(row.excess_risk);
        kl.add(row.kl_risk);
        bayes.add(row.bayes_risk);
      }
      a.mean_test_err = test.mean();
      a.se_test_err = test.se();
      a.mean_bayes_risk = bayes.mean();
      a.mean_excess_risk = excess.mean();
      a.se_excess_risk = excess.se();
      a.mean_kl_risk = kl.mean();
      a.se_kl_risk = kl.se();
      table.aggregates.push_back(a);
    }
  }

  for (std::size_t p = 0; p < per_cell; ++p) {
    SlopeRow s;
    s.penalty = to_string(penalties[p].family);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& a : table.aggregates) {
      if (a.penalty != s.penalty || !(a.mean_excess_risk > 0.0)) continue;
      const double x = std::log(static_cast<double>(a.n));
      const double y = std::log(a.mean_excess_risk);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++s.points;
    }
    const double k = s.points;
    const double denom = k * sxx - sx * sx;
    if (s.points >= 2 && denom > 0.0) {
      s.slope = (k * sxy - sx * sy) / denom;
      s.intercept = (sy - s.slope * sx) / k;
    } else {
      s.slope = s.intercept = std::numeric_limits<double>::quiet_NaN();
    }
    table.slopes.push_back(s);
  }
  return table;
}

void write_experiment_csv(const ExperimentTable& table, std::ostream& out) {
  out << "grid_id,penalty,replicate,seed,n,d,L,structure,d0_or_r0,train_err,test_err,"
         "bayes_risk,excess_risk,kl_risk,iterations,converged,wall_ms\n";
  for (const auto& r : table.rows) {
    out << r.grid_id << ',' << r.penalty << ',' << r.replicate << ',' << r.seed << ',' << r.n
        << ',' << r.d << ',' << r.num_classes << ',' << r.structure << ',' << r.structure_size
        << ',' << format_double(r.train_err) << ',' << format_double(r.test_err) << ','
        << format_double(r.bayes_risk) << ',' << format_double(r.excess_risk) << ','
        << format_double(r.kl_risk) << ',' << r.iterations << ','
        << (r.converged ? "true" : "false") << ',' << format_double(r.wall_ms) << '\n';
  }
}

void write_aggregate_csv(const ExperimentTable& table, std::ostream& out) {
  out << "grid_id,penalty,n,d,L,count,converged,mean_test_err,se_test_err,mean_bayes_risk,"
         "mean_excess_risk,se_excess_risk,mean_kl_risk,se_kl_risk\n";
  for (const auto& a : table.aggregates) {
    out << a.grid_id << ',' << a.penalty << ',' << a.n << ',' << a.d << ',' << a.num_classes
        << ',' << a.count << ',' << a.converged << ',' << format_double(a.mean_test_err) << ','
        << format_double(a.se_test_err) << ',' << format_double(a.mean_bayes_risk) << ','
        << format_double(a.mean_excess_risk) << ',' << format_double(a.se_excess_risk) << ','
        << format_double(a.mean_kl_risk) << ',' << format_double(a.se_kl_risk) << '\n';
  }
}

void write_plot_data_csv(const ExperimentTable& table, std::ostream& out) {
  std::map<std::string, double> slope;
  for (const auto& s : table.slopes) slope[s.penalty] = s.slope;
  out << "penalty,grid_id,n,log_n,mean_excess_risk,log_mean_excess_risk,fitted_slope\n";
  for (const auto& a : table.aggregates) {
    const double log_n = std::log(static_cast<double>(a.n));
    const double log_e = a.mean_excess_risk > 0.0 ? std::log(a.mean_excess_risk)
                                                  : std::numeric_limits<double>::quiet_NaN();
    out << a.penalty << ',' << a.grid_id << ',' << a.n << ',' << format_double(log_n) << ','
        << format_double(a.mean_excess_risk) << ',' << format_double(log_e) << ','
        << format_double(slope[a.penalty]) << '\n';
  }
}

}  // namespace msl
