#pragma once

// Seeded scaling sweeps: generate -> fit -> risk_report over a grid of
// synthetic specs, a list of penalty recipes and replicates.
//
// Every (grid point, replicate) cell draws its data from
//     seed = rng_stream(master_seed, (grid_id << 32) | replicate).next()
// and all penalties of a cell share the same training and test data. Rows
// are stored by (grid_id, replicate, penalty) key, so the table does not
// depend on the number of worker threads.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "msl/core.hpp"
#include "msl/penalties.hpp"
#include "msl/solver.hpp"

namespace msl {

struct PenaltyRecipe {
  PenaltyFamily family = PenaltyFamily::kGroupSlope;
  WeightConfig weights;
  double lambda_scale = 1.0;
};

struct ExperimentOptions {
  int replicates = 1;
  std::uint64_t master_seed = 0;
  int threads = 1;
  SolverConfig solver;
  int test_size = 5000;
  int mc_samples = 5000;
  /// Fill wall_ms with measured fit times. Off by default because timings
  /// make otherwise identical runs differ byte-wise.
  bool record_timing = false;
};

struct ExperimentRow {
  int grid_id = 0;
  std::string penalty;
  int replicate = 0;
  std::uint64_t seed = 0;
  int n = 0, d = 0, num_classes = 0;
  std::string structure;
  int structure_size = 0;
  double train_err = 0, test_err = 0, bayes_risk = 0, excess_risk = 0, kl_risk = 0;
  int iterations = 0;
  bool converged = false;
  double wall_ms = 0;
  std::string error;  // empty unless the cell failed
};

struct AggregateRow {
  int grid_id = 0;
  std::string penalty;
  int n = 0, d = 0, num_classes = 0;
  int count = 0;
  int converged = 0;
  double mean_test_err = 0, se_test_err = 0;
  double mean_bayes_risk = 0;
  double mean_excess_risk = 0, se_excess_risk = 0;
  double mean_kl_risk = 0, se_kl_risk = 0;
};

/// Least-squares slope of log(mean excess risk) on log(n), per penalty.
struct SlopeRow {
  std::string penalty;
  int points = 0;
  double slope = 0;
  double intercept = 0;
};

struct ExperimentTable {
  std::vector<ExperimentRow> rows;
  std::vector<AggregateRow> aggregates;
  std::vector<SlopeRow> slopes;

  double converged_fraction() const;
};

/// Seed of cell (grid_id, replicate).
std::uint64_t cell_seed(std::uint64_t master_seed, int grid_id, int replicate);

/// Individual failures are recorded in their row and never abort the sweep.
ExperimentTable scaling_experiment(const std::vector<SyntheticSpec>& grid,
                                   const std::vector<PenaltyRecipe>& penalties,
                                   const ExperimentOptions& options);

void write_experiment_csv(const ExperimentTable& table, std::ostream& out);
void write_aggregate_csv(const ExperimentTable& table, std::ostream& out);
/// Columns: penalty, grid_id, n, log_n, mean_excess_risk, log_mean_excess_risk, fitted_slope.
void write_plot_data_csv(const ExperimentTable& table, std::ostream& out);

}  // namespace msl
