#pragma once

// Penalized maximum-likelihood fits.
//
// fit() minimizes nll(B) + pen(B) by FISTA with backtracking and adaptive
// restart, starting from B = 0. fit_exhaustive_complexity() enumerates row
// supports and is only meant as a ground-truth oracle for tiny d.

#include <optional>
#include <vector>

#include "msl/core.hpp"

namespace msl {

struct SolverConfig {
  int max_iter = 5000;
  double grad_map_tol = 1e-7;
  double backtrack_factor = 0.5;
  /// nullopt selects 1 / lambda_max(X'X / n) from 50 power iterations.
  std::optional<double> initial_step;
  /// Return coefficients with zero row sums. Group Slope, group Lasso and
  /// nuclear fits are solved unconstrained and centered afterwards; the
  /// other families carry the constraint inside their prox.
  bool enforce_centering = true;
  /// Tolerance of inner Dykstra loops.
  double prox_tol = 1e-9;

  void validate() const;
};

/// nll(B) + penalty_value(spec, B).
double objective(const Dataset& data, const PenaltySpec& spec, const Matrix& b);

/// 1 / lambda_max(X'X / n) estimated by 50 power iterations.
double auto_step(const Matrix& features);

/// Throws InvalidInput on bad input. Never throws on non-convergence: the
/// result then has converged == false.
FitResult fit(const Dataset& data, const PenaltySpec& spec, const SolverConfig& cfg = {});

/// Fit with every row outside `support` (sorted, 0-based feature indices)
/// fixed at zero. The penalty seen by the remaining rows is
/// spec.restricted(|support|). An empty support returns B = 0.
FitResult fit_on_support(const Dataset& data, const PenaltySpec& spec,
                         const std::vector<int>& support, const SolverConfig& cfg = {});

/// Unpenalized MLE restricted to `support` (rows outside fixed at zero).
FitResult fit_unpenalized_on_support(const Dataset& data, const std::vector<int>& support,
                                     const SolverConfig& cfg = {});

/// Pen(r) = c1 r (L - 1) + c2 r ln(d e / r), Pen(0) = 0.
double complexity_penalty(int r, Index d, int num_classes, double c1, double c2);

struct ExhaustiveResult {
  FitResult fit;
  std::vector<int> support;
  /// -loglik(B_S) + Pen(|S|) with the log-likelihood summed over samples.
  double criterion = 0.0;
  std::size_t models_evaluated = 0;
  std::size_t models_not_converged = 0;
};

inline constexpr Index kExhaustiveMaxFeatures = 15;

/// Minimizes -loglik(B_S) + Pen(|S|) over every row support S with
/// |S| <= max_support. Ties resolve to the smaller, then lexicographically
/// first, support. Refuses d > kExhaustiveMaxFeatures.
ExhaustiveResult fit_exhaustive_complexity(const Dataset& data, double c1, double c2,
                                           int max_support, const SolverConfig& cfg = {});

}  // namespace msl
