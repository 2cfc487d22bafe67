#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace sgm::opt {

struct Bound {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

// Smooth objective to maximize over a box-constrained parameter vector.
// `value_and_grad` is optional; without it gradients come from central
// finite differences with step 1e-6 * max(1, |theta_i|).
struct Objective {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> value;
  std::function<double(std::span<const double>, std::span<double>)>
      value_and_grad;
  std::vector<Bound> bounds;  // empty means unconstrained
};

struct Options {
  std::size_t max_iters = 500;
  double tol = 1e-6;          // infinity norm of the reduced gradient
  double armijo_c = 1e-4;     // sufficient-increase coefficient
  double shrink = 0.5;        // backtracking factor
  double step_floor = 1e-12;  // line search gives up below this step
  double init_step = 1.0;
  // Stop (as non-converged) once the total gain over the last flat_window
  // accepted steps falls below flat_window * flat_gain * max(1, |f|).
  // Objectives with unbounded flat ridges (separable logistic fits)
  // otherwise burn the whole iteration budget on sub-noise progress.
  std::size_t flat_window = 10;
  double flat_gain = 1e-7;
};

struct FitResult {
  std::vector<double> theta;
  double value = 0.0;
  std::size_t n_starts = 1;
  std::size_t n_evals = 0;
  std::size_t n_iters = 0;
  std::vector<char> converged;  // one flag per start
  std::size_t best_start = 0;
  // Accepted objective values of the best start, non-decreasing.
  std::vector<double> trace;

  bool best_converged() const {
    return best_start < converged.size() && converged[best_start] != 0;
  }
};

std::vector<double> project(std::span<const double> v,
                            const std::vector<Bound>& bounds);

// Projected gradient ascent with backtracking Armijo line search.
// Throws std::invalid_argument when init is infeasible or the objective is
// non-finite at init; reports non-convergence via FitResult otherwise.
FitResult maximize(const Objective& obj, std::span<const double> init,
                   const Options& opts = {});

// maximize from init plus (n_starts - 1) Gaussian-perturbed feasible starts;
// the best result wins, ties by lowest start index. Deterministic given seed.
FitResult multistart_maximize(const Objective& obj, std::span<const double> init,
                              std::size_t n_starts, double perturb_scale,
                              std::uint64_t seed, const Options& opts = {});

// Max over coordinates of |g_fd - g_analytic| / max(1, |g_analytic|).
// Requires obj.value_and_grad.
double check_gradient(const Objective& obj, std::span<const double> point);

}  // namespace sgm::opt
