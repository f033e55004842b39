#include "msl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "msl/model.hpp"
#include "msl/penalties.hpp"

namespace msl {

namespace {

// Relative size of objective increases attributed to rounding.
constexpr double kRoundingSlack = 1e-13;

// pen(B) and prox_{t pen}(B) for the engine.
struct Composite {
  std::function<double(const Matrix&)> penalty;
  std::function<Matrix(const Matrix&, double)> prox;
};

struct EngineResult {
  Matrix b;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  double step = 0.0;
  double objective = 0.0;
};

bool small_enough(double residual, double step, double tol, double scale) {
  const double bound = tol * (1.0 + scale);
  return residual < bound && residual * step < bound;
}

double fixed_point_residual(const Dataset& data, const Composite& c, const Matrix& x,
                            double step) {
  Matrix g;
  nll_with_grad(x, data, g);
  return (x - c.prox(x - step * g, step)).norm() / step;
}

EngineResult run_fista(const Dataset& data, const Composite& c, const SolverConfig& cfg) {
  const Index d = data.d();
  const Index L = data.num_classes();
  double t = cfg.initial_step ? *cfg.initial_step : auto_step(data.features());

  EngineResult out;
  Matrix x = Matrix::Zero(d, L);
  Matrix x_prev = x;
  Matrix y = x;
  double fx = nll(x, data) + c.penalty(x);
  out.trace.push_back(fx);
  double theta = 1.0;
  bool y_is_x = true;
  Matrix gy;

  for (int k = 1; k <= cfg.max_iter; ++k) {
    out.iterations = k;
    const double fy = nll_with_grad(y, data, gy);
    const double slack = 1e-14 * (1.0 + std::abs(fy));
    Matrix z;
    double fz_smooth = 0.0;
    for (;;) {
      z = c.prox(y - t * gy, t);
      const Matrix diff = z - y;
      fz_smooth = nll(z, data);
      const double model =
          fy + (gy.array() * diff.array()).sum() + diff.squaredNorm() / (2.0 * t);
      if (fz_smooth <= model + slack) break;
      t *= cfg.backtrack_factor;
      if (t < 1e-300) throw NumericError("backtracking step underflow");
    }
    const double fz = fz_smooth + c.penalty(z);
    const double map_norm = (y - z).norm() / t;

    if (fz > fx) {
      if (!y_is_x) {
        // Momentum overshoot: restart from the last accepted point.
        y = x;
        theta = 1.0;
        y_is_x = true;
        continue;
      }
      // A plain prox-gradient step decreases the objective in exact
      // arithmetic. Near the optimum that decrease falls below the rounding
      // error of F, so such steps are still taken; a visible increase means
      // the iteration has stalled.
      if (fz > fx + kRoundingSlack * (1.0 + std::abs(fx))) {
        out.residual = fixed_point_residual(data, c, x, t);
        out.converged = small_enough(out.residual, t, cfg.grad_map_tol, x.norm());
        break;
      }
    }

    x_prev = std::move(x);
    x = std::move(z);
    fx = fz;
    out.trace.push_back(fx);

    if (map_norm < cfg.grad_map_tol * (1.0 + x.norm())) {
      out.residual = fixed_point_residual(data, c, x, t);
      if (small_enough(out.residual, t, cfg.grad_map_tol, x.norm())) {
        out.converged = true;
        break;
      }
    }

    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    y = x + ((theta - 1.0) / theta_next) * (x - x_prev);
    theta = theta_next;
    y_is_x = false;
  }
  if (!out.converged && out.residual == 0.0) out.residual = fixed_point_residual(data, c, x, t);
  out.b = std::move(x);
  out.step = t;
  out.objective = fx;
  return out;
}

FitResult to_fit_result(EngineResult e, bool centered) {
  FitResult r;
  r.max_row_mean_before_centering =
      e.b.cols() > 0 ? e.b.rowwise().mean().cwiseAbs().maxCoeff() : 0.0;
  r.coefficients = CoefficientMatrix(std::move(e.b), centered);
  r.objective_trace = std::move(e.trace);
  r.iterations = e.iterations;
  r.converged = e.converged;
  r.fixed_point_residual = e.residual;
  r.step = e.step;
  r.objective = e.objective;
  return r;
}

bool centers_after_fit(PenaltyFamily family) {
  return family == PenaltyFamily::kGroupSlope || family == PenaltyFamily::kGroupLasso ||
         family == PenaltyFamily::kNuclear;
}

Matrix embed_rows(const Matrix& sub, const std::vector<int>& support, Index d) {
  Matrix full = Matrix::Zero(d, sub.cols());
  for (std::size_t k = 0; k < support.size(); ++k) {
    full.row(support[k]) = sub.row(static_cast<Index>(k));
  }
  return full;
}

void check_support(const std::vector<int>& support, Index d) {
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k] < 0 || support[k] >= d) throw InvalidInput("support index out of range");
    if (k > 0 && support[k] <= support[k - 1]) {
      throw InvalidInput("support must be strictly increasing");
    }
  }
}

FitResult zero_fit(const Dataset& data, const PenaltySpec* spec) {
  FitResult r;
  Matrix zero = Matrix::Zero(data.d(), data.num_classes());
  r.objective = nll(zero, data) + (spec != nullptr ? penalty_value(*spec, zero) : 0.0);
  r.objective_trace = {r.objective};
  r.coefficients = CoefficientMatrix(std::move(zero), true);
  r.converged = true;
  return r;
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iter < 1) throw InvalidInput("max_iter must be positive");
  if (!(grad_map_tol > 0.0)) throw InvalidInput("grad_map_tol must be positive");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw InvalidInput("backtrack_factor must lie in (0, 1)");
  }
  if (initial_step && !(*initial_step > 0.0)) throw InvalidInput("initial_step must be positive");
  if (!(prox_tol > 0.0)) throw InvalidInput("prox_tol must be positive");
}

double objective(const Dataset& data, const PenaltySpec& spec, const Matrix& b) {
  return nll(b, data) + penalty_value(spec, b);
}

double auto_step(const Matrix& features) {
  const double n = static_cast<double>(features.rows());
  Vector v = Vector::Ones(features.cols()).normalized();
  double eig = 0.0;
  for (int it = 0; it < 50; ++it) {
    const Vector w = features.transpose() * (features * v) / n;
    eig = w.norm();
    if (eig == 0.0) break;
    v = w / eig;
  }
  if (!(eig > 0.0) || !std::isfinite(eig)) return 1.0;
  return 1.0 / eig;
}

FitResult fit(const Dataset& data, const PenaltySpec& spec, const SolverConfig& cfg) {
  cfg.validate();
  spec.check_dimensions(data.d(), data.num_classes());
  const bool post_center = cfg.enforce_centering && centers_after_fit(spec.family());
  ProxOptions popt;
  popt.tol = cfg.prox_tol;
  popt.enforce_centering = cfg.enforce_centering && !post_center;

  Composite c{[&spec](const Matrix& b) { return penalty_value(spec, b); },
              [&spec, popt](const Matrix& b, double t) { return prox(spec, b, t, popt); }};
  EngineResult e = run_fista(data, c, cfg);

  if (!post_center) {
    if (popt.enforce_centering) {
      // The constrained prox leaves row sums at rounding level; remove them.
      e.b = center_rows(e.b);
    }
    return to_fit_result(std::move(e), cfg.enforce_centering);
  }

  const double before = e.objective;
  const double row_mean = e.b.rowwise().mean().cwiseAbs().maxCoeff();
  e.b = center_rows(e.b);
  const double after = objective(data, spec, e.b);
  if (after > before + 1e-10) {
    std::ostringstream os;
    os << "row centering increased the objective from " << before << " to " << after;
    throw NumericError(os.str());
  }
  e.objective = after;
  FitResult r = to_fit_result(std::move(e), true);
  r.max_row_mean_before_centering = row_mean;
  return r;
}

FitResult fit_on_support(const Dataset& data, const PenaltySpec& spec,
                         const std::vector<int>& support, const SolverConfig& cfg) {
  spec.check_dimensions(data.d(), data.num_classes());
  check_support(support, data.d());
  if (support.empty()) return zero_fit(data, &spec);
  const Dataset sub = data.select_features(support);
  FitResult r = fit(sub, spec.restricted(static_cast<Index>(support.size())), cfg);
  r.coefficients = CoefficientMatrix(embed_rows(r.coefficients.values(), support, data.d()),
                                     r.coefficients.centered());
  return r;
}

FitResult fit_unpenalized_on_support(const Dataset& data, const std::vector<int>& support,
                                     const SolverConfig& cfg) {
  cfg.validate();
  check_support(support, data.d());
  if (support.empty()) return zero_fit(data, nullptr);
  const Dataset sub = data.select_features(support);
  Composite c{[](const Matrix&) { return 0.0; }, [](const Matrix& b, double) { return b; }};
  EngineResult e = run_fista(sub, c, cfg);
  const double row_mean = e.b.rowwise().mean().cwiseAbs().maxCoeff();
  if (cfg.enforce_centering) e.b = center_rows(e.b);
  e.b = embed_rows(e.b, support, data.d());
  FitResult r = to_fit_result(std::move(e), cfg.enforce_centering);
  r.max_row_mean_before_centering = row_mean;
  r.objective = nll(r.coefficients.values(), data);
  return r;
}

double complexity_penalty(int r, Index d, int num_classes, double c1, double c2) {
  if (r <= 0) return 0.0;
  const double rr = static_cast<double>(r);
  return c1 * rr * static_cast<double>(num_classes - 1) +
         c2 * rr * std::log(static_cast<double>(d) * std::exp(1.0) / rr);
}

ExhaustiveResult fit_exhaustive_complexity(const Dataset& data, double c1, double c2,
                                           int max_support, const SolverConfig& cfg) {
  const Index d = data.d();
  if (d > kExhaustiveMaxFeatures) {
    std::ostringstream os;
    os << "exhaustive complexity search refuses d = " << d << " > " << kExhaustiveMaxFeatures;
    throw InvalidInput(os.str());
  }
  if (max_support < 0 || max_support > d) throw InvalidInput("max_support must lie in [0, d]");
  if (c1 < 0.0 || c2 < 0.0) throw InvalidInput("complexity constants must be nonnegative");
  cfg.validate();

  const double n = static_cast<double>(data.n());
  ExhaustiveResult best;
  best.criterion = std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0, failed = 0;

  // Supports are visited by size, then lexicographically; a later support
  // replaces the incumbent only on a strict improvement.
  for (int r = 0; r <= max_support; ++r) {
    std::vector<int> support(static_cast<std::size_t>(r));
    for (int k = 0; k < r; ++k) support[static_cast<std::size_t>(k)] = k;
    for (;;) {
      FitResult f = fit_unpenalized_on_support(data, support, cfg);
      ++evaluated;
      if (!f.converged) ++failed;
      const double crit =
          n * f.objective + complexity_penalty(r, d, data.num_classes(), c1, c2);
      if (crit < best.criterion) {
        best.criterion = crit;
        best.support = support;
        best.fit = std::move(f);
      }
      // Next r-combination of {0..d-1}.
      int k = r - 1;
      while (k >= 0 && support[static_cast<std::size_t>(k)] == d - r + k) --k;
      if (k < 0) break;
      ++support[static_cast<std::size_t>(k)];
      for (int m = k + 1; m < r; ++m) {
        support[static_cast<std::size_t>(m)] = support[static_cast<std::size_t>(m - 1)] + 1;
      }
    }
  }
  best.models_evaluated = evaluated;
  best.models_not_converged = failed;
  return best;
}

}  // namespace msl
