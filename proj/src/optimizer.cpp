#include "sgm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sgm/rng.hpp"

namespace sgm::opt {

namespace {

void check_objective(const Objective& obj) {
  if (obj.dim == 0 || !obj.value) {
    throw std::invalid_argument("objective: dim and value are required");
  }
  if (!obj.bounds.empty() && obj.bounds.size() != obj.dim) {
    throw std::invalid_argument("objective: bounds size must match dim");
  }
  for (const Bound& b : obj.bounds) {
    if (!(b.lo <= b.hi)) {
      throw std::invalid_argument("objective: bound with lo > hi");
    }
  }
}

bool feasible(std::span<const double> x, const std::vector<Bound>& bounds) {
  if (bounds.empty()) return true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < bounds[i].lo || x[i] > bounds[i].hi) return false;
  }
  return true;
}

class EvalCounter {
 public:
  EvalCounter(const Objective& obj, std::size_t* counter)
      : obj_(obj), counter_(counter) {}

  double value(std::span<const double> x) const {
    ++*counter_;
    return obj_.value(x);
  }

  // Fills grad; uses the analytic gradient when available.
  double value_and_grad(std::span<const double> x, std::span<double> grad) const {
    if (obj_.value_and_grad) {
      ++*counter_;
      return obj_.value_and_grad(x, grad);
    }
    double f0 = value(x);
    std::vector<double> xt(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double h = 1e-6 * std::max(1.0, std::fabs(x[i]));
      xt[i] = x[i] + h;
      double fp = value(xt);
      xt[i] = x[i] - h;
      double fm = value(xt);
      xt[i] = x[i];
      grad[i] = (fp - fm) / (2.0 * h);
    }
    return f0;
  }

 private:
  const Objective& obj_;
  std::size_t* counter_;
};

// Zero out gradient components that push against an active bound.
double reduced_grad_inf_norm(std::span<const double> x,
                             std::span<const double> grad,
                             const std::vector<Bound>& bounds) {
  double norm = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double g = grad[i];
    if (!bounds.empty()) {
      if (x[i] >= bounds[i].hi && g > 0.0) g = 0.0;
      if (x[i] <= bounds[i].lo && g < 0.0) g = 0.0;
    }
    norm = std::max(norm, std::fabs(g));
  }
  return norm;
}

}  // namespace

std::vector<double> project(std::span<const double> v,
                            const std::vector<Bound>& bounds) {
  std::vector<double> out(v.begin(), v.end());
  for (std::size_t i = 0; i < bounds.size() && i < out.size(); ++i) {
    out[i] = std::clamp(out[i], bounds[i].lo, bounds[i].hi);
  }
  return out;
}

FitResult maximize(const Objective& obj, std::span<const double> init,
                   const Options& opts) {
  check_objective(obj);
  if (init.size() != obj.dim) {
    throw std::invalid_argument("maximize: init size does not match dim");
  }
  for (double v : init) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("maximize: non-finite init");
    }
  }
  if (!feasible(init, obj.bounds)) {
    throw std::invalid_argument("maximize: infeasible init");
  }

  FitResult res;
  EvalCounter eval(obj, &res.n_evals);
  std::vector<double> x(init.begin(), init.end());
  double f = eval.value(x);
  if (!std::isfinite(f)) {
    throw std::invalid_argument("maximize: objective non-finite at init");
  }
  res.trace.push_back(f);

  std::vector<double> grad(obj.dim, 0.0);
  double step = opts.init_step;
  bool converged = false;

  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    res.n_iters = it + 1;
    eval.value_and_grad(x, grad);
    if (reduced_grad_inf_norm(x, grad, obj.bounds) <= opts.tol) {
      converged = true;
      break;
    }
    auto candidate_at = [&](double t) {
      std::vector<double> cand(obj.dim);
      for (std::size_t i = 0; i < obj.dim; ++i) cand[i] = x[i] + t * grad[i];
      return project(cand, obj.bounds);
    };
    bool accepted = false;
    for (double t = step; t >= opts.step_floor; t *= opts.shrink) {
      std::vector<double> cand = candidate_at(t);
      double ascent = 0.0;
      for (std::size_t i = 0; i < obj.dim; ++i) {
        ascent += grad[i] * (cand[i] - x[i]);
      }
      if (ascent <= 0.0) break;  // projection blocks every direction
      double f_new = eval.value(cand);
      if (std::isfinite(f_new) && f_new >= f + opts.armijo_c * ascent) {
        // Probe further backtracks and keep the best candidate; a barely
        // accepted step can zigzag across a ridge indefinitely otherwise.
        // Smaller steps keep satisfying the Armijo bound once one does.
        for (double t2 = t * opts.shrink; t2 >= opts.step_floor;
             t2 *= opts.shrink) {
          std::vector<double> cand2 = candidate_at(t2);
          double f2 = eval.value(cand2);
          if (!std::isfinite(f2) || f2 <= f_new) break;
          cand = std::move(cand2);
          f_new = f2;
          t = t2;
        }
        x = std::move(cand);
        f = f_new;
        res.trace.push_back(f);
        step = std::min(t * 2.0, 1e8);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // stationary within line-search resolution
    if (opts.flat_window > 0 && res.trace.size() > opts.flat_window) {
      double window_gain = f - res.trace[res.trace.size() - 1 - opts.flat_window];
      if (window_gain <= static_cast<double>(opts.flat_window) * opts.flat_gain *
                             std::max(1.0, std::fabs(f))) {
        break;
      }
    }
  }

  res.theta = std::move(x);
  res.value = f;
  res.converged = {static_cast<char>(converged)};
  return res;
}

FitResult multistart_maximize(const Objective& obj, std::span<const double> init,
                              std::size_t n_starts, double perturb_scale,
                              std::uint64_t seed, const Options& opts) {
  if (n_starts < 1) {
    throw std::invalid_argument("multistart_maximize: n_starts must be >= 1");
  }
  Rng rng(seed);
  FitResult best = maximize(obj, init, opts);
  best.n_starts = n_starts;
  std::size_t total_evals = best.n_evals;
  std::size_t total_iters = best.n_iters;
  std::vector<char> converged = best.converged;

  for (std::size_t s = 1; s < n_starts; ++s) {
    std::vector<double> start(init.begin(), init.end());
    for (double& v : start) v += perturb_scale * rng.normal();
    start = project(start, obj.bounds);
    FitResult r = maximize(obj, start, opts);
    total_evals += r.n_evals;
    total_iters += r.n_iters;
    converged.push_back(r.converged[0]);
    if (r.value > best.value) {
      best.theta = std::move(r.theta);
      best.value = r.value;
      best.trace = std::move(r.trace);
      best.best_start = s;
    }
  }
  best.n_evals = total_evals;
  best.n_iters = total_iters;
  best.converged = std::move(converged);
  return best;
}

double check_gradient(const Objective& obj, std::span<const double> point) {
  check_objective(obj);
  if (!obj.value_and_grad) {
    throw std::invalid_argument("check_gradient: analytic gradient required");
  }
  std::vector<double> analytic(obj.dim, 0.0);
  obj.value_and_grad(point, analytic);
  std::vector<double> xt(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < obj.dim; ++i) {
    double h = 1e-6 * std::max(1.0, std::fabs(point[i]));
    xt[i] = point[i] + h;
    double fp = obj.value(xt);
    xt[i] = point[i] - h;
    double fm = obj.value(xt);
    xt[i] = point[i];
    double fd = (fp - fm) / (2.0 * h);
    double err = std::fabs(fd - analytic[i]) / std::max(1.0, std::fabs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace sgm::opt
