#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgm/datagen.hpp"
#include "sgm/dataset.hpp"
#include "sgm/models.hpp"
#include "sgm/optimizer.hpp"

namespace sgm {

enum class EstimatorKind { supervised, weighted, pooled, joint_regression };

std::string estimator_kind_name(EstimatorKind kind);

// Maps (n_S, n_T) to the pooling weight lambda in [0, 1].
struct LambdaPolicy {
  enum class Kind { equal_weight, sqrt_target, fixed, supervised_heavy };

  Kind kind = Kind::equal_weight;
  double fixed_value = 0.8;

  double resolve(std::size_t n_s, std::size_t n_t) const;

  // "equal" | "sqrt" | "fixed:<c>" | "supheavy"
  static LambdaPolicy parse(const std::string& text);
  std::string name() const;
};

// Where per-source-row importance weights come from.
struct WeightSource {
  enum class Kind { known_synthetic, supplied, unit };

  Kind kind = Kind::unit;
  ClassScmConfig class_cfg;      // known_synthetic
  std::vector<double> weights;   // supplied
  bool self_normalize = false;   // rescale supplied weights to mean 1

  static WeightSource unit() { return {}; }
  static WeightSource known(const ClassScmConfig& cfg);
  static WeightSource supplied(std::vector<double> w, bool self_normalize = false);

  // One positive, finite weight per source row; throws otherwise.
  std::vector<double> resolve(const DomainDataset& ds) const;
};

struct FitOptions {
  opt::Options optim;
  std::size_t pooled_starts = 5;   // multi-start count for pooled objectives
  double perturb_scale = 0.5;
  std::size_t supervised_starts = 1;
};

template <class P>
struct FitOutput {
  P params;
  opt::FitResult opt;
  double lambda = 1.0;             // pooled fits only
  bool degenerate_weights = false; // WS ran with unit weights
};

// ---------------- likelihood operations ----------------

// (1/n_S) sum_i log_joint
template <class P>
double loglik_supervised(const P& p, const DomainDataset& ds) {
  if (ds.source.empty()) {
    throw std::invalid_argument("loglik_supervised: empty source sample");
  }
  double acc = 0.0;
  for (const auto& r : ds.source) acc += log_joint(p, r.x_c, r.y, r.x_e);
  return acc / static_cast<double>(ds.source.size());
}

// (1/n_S) sum_i w_i * log_joint
template <class P>
double loglik_weighted(const P& p, const DomainDataset& ds,
                       std::span<const double> weights) {
  if (ds.source.empty()) {
    throw std::invalid_argument("loglik_weighted: empty source sample");
  }
  if (weights.size() != ds.source.size()) {
    throw std::invalid_argument("loglik_weighted: weight count mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < ds.source.size(); ++i) {
    if (!(weights[i] > 0.0)) {
      throw std::invalid_argument("loglik_weighted: weights must be positive");
    }
    acc += weights[i] * log_joint(p, ds.source[i].x_c, ds.source[i].y,
                                  ds.source[i].x_e);
  }
  return acc / static_cast<double>(ds.source.size());
}

// (1/n_T) sum_j log_marginal
template <class P>
double loglik_unsupervised(const P& p, const DomainDataset& ds) {
  if (ds.target.empty()) {
    throw std::invalid_argument("loglik_unsupervised: empty target sample");
  }
  double acc = 0.0;
  for (const auto& r : ds.target) acc += log_marginal(p, r.x_c, r.x_e);
  return acc / static_cast<double>(ds.target.size());
}

// lambda * l_S + (1 - lambda) * l_T; with no target rows the pooled
// objective degenerates to l_S regardless of lambda.
template <class P>
double loglik_pooled(const P& p, const DomainDataset& ds, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("loglik_pooled: lambda must be in [0,1]");
  }
  if (ds.target.empty()) return loglik_supervised(p, ds);
  return lambda * loglik_supervised(p, ds) +
         (1.0 - lambda) * loglik_unsupervised(p, ds);
}

// ---------------- data-driven starting points ----------------

GaussClassParams initial_params(const GaussClassParams& prototype,
                                const DomainDataset& ds);
LinGaussParams initial_params(const LinGaussParams& prototype,
                              const DomainDataset& ds);
DiscreteParams initial_params(const DiscreteParams& prototype,
                              const DomainDataset& ds);

// ---------------- objective builders ----------------
// The returned objective borrows `ds` (and copies `weights`); keep the
// dataset alive while optimizing.

template <class P>
opt::Objective make_supervised_objective(const P& prototype,
                                         const DomainDataset& ds,
                                         std::vector<double> weights = {}) {
  if (!weights.empty() && weights.size() != ds.source.size()) {
    throw std::invalid_argument("weight count mismatch");
  }
  opt::Objective obj;
  obj.dim = param_dim(prototype);
  obj.bounds = param_bounds(prototype);
  obj.value = [prototype, &ds, weights](std::span<const double> v) {
    P p = params_from_vector(prototype, v);
    return weights.empty() ? loglik_supervised(p, ds)
                           : loglik_weighted(p, ds, weights);
  };
  obj.value_and_grad = [prototype, &ds, weights](std::span<const double> v,
                                                 std::span<double> grad) {
    P p = params_from_vector(prototype, v);
    std::fill(grad.begin(), grad.end(), 0.0);
    double inv = 1.0 / static_cast<double>(ds.source.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < ds.source.size(); ++i) {
      double wt = (weights.empty() ? 1.0 : weights[i]) * inv;
      const auto& r = ds.source[i];
      acc += wt * log_joint(p, r.x_c, r.y, r.x_e);
      log_joint_grad(p, r.x_c, r.y, r.x_e, wt, grad);
    }
    return acc;
  };
  return obj;
}

template <class P>
opt::Objective make_pooled_objective(const P& prototype, const DomainDataset& ds,
                                     double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("pooled objective: lambda must be in [0,1]");
  }
  opt::Objective obj;
  obj.dim = param_dim(prototype);
  obj.bounds = param_bounds(prototype);
  obj.value = [prototype, &ds, lambda](std::span<const double> v) {
    P p = params_from_vector(prototype, v);
    return loglik_pooled(p, ds, lambda);
  };
  obj.value_and_grad = [prototype, &ds, lambda](std::span<const double> v,
                                                std::span<double> grad) {
    P p = params_from_vector(prototype, v);
    std::fill(grad.begin(), grad.end(), 0.0);
    double acc = 0.0;
    if (ds.target.empty()) {
      double inv = 1.0 / static_cast<double>(ds.source.size());
      for (const auto& r : ds.source) {
        acc += inv * log_joint(p, r.x_c, r.y, r.x_e);
        log_joint_grad(p, r.x_c, r.y, r.x_e, inv, grad);
      }
      return acc;
    }
    double ws = lambda / static_cast<double>(ds.source.size());
    double wt = (1.0 - lambda) / static_cast<double>(ds.target.size());
    for (const auto& r : ds.source) {
      acc += ws * log_joint(p, r.x_c, r.y, r.x_e);
      log_joint_grad(p, r.x_c, r.y, r.x_e, ws, grad);
    }
    for (const auto& r : ds.target) {
      acc += wt * log_marginal(p, r.x_c, r.x_e);
      log_marginal_grad(p, r.x_c, r.x_e, wt, grad);
    }
    return acc;
  };
  return obj;
}

// ---------------- fits ----------------

template <class P>
FitOutput<P> fit_supervised(const P& prototype, const DomainDataset& ds,
                            const FitOptions& opts = {}, std::uint64_t seed = 0) {
  P init = initial_params(prototype, ds);
  auto obj = make_supervised_objective(prototype, ds);
  auto start = opt::project(param_vector(init), obj.bounds);
  opt::FitResult r =
      opts.supervised_starts <= 1
          ? opt::maximize(obj, start, opts.optim)
          : opt::multistart_maximize(obj, start, opts.supervised_starts,
                                     opts.perturb_scale, seed, opts.optim);
  P fitted = params_from_vector(prototype, r.theta);
  return {std::move(fitted), std::move(r), 1.0, false};
}

template <class P>
FitOutput<P> fit_weighted(const P& prototype, const DomainDataset& ds,
                          const WeightSource& source,
                          const FitOptions& opts = {}, std::uint64_t seed = 0) {
  std::vector<double> weights = source.resolve(ds);
  P init = initial_params(prototype, ds);
  auto obj = make_supervised_objective(prototype, ds, weights);
  auto start = opt::project(param_vector(init), obj.bounds);
  opt::FitResult r =
      opts.supervised_starts <= 1
          ? opt::maximize(obj, start, opts.optim)
          : opt::multistart_maximize(obj, start, opts.supervised_starts,
                                     opts.perturb_scale, seed, opts.optim);
  P fitted = params_from_vector(prototype, r.theta);
  return {std::move(fitted), std::move(r), 1.0,
          source.kind == WeightSource::Kind::unit};
}

// Supervised solution seeds the pooled maximization. With n_T = 0 the pooled
// objective equals l_S, so the supervised fit is returned as-is.
template <class P>
FitOutput<P> fit_pooled(const P& prototype, const DomainDataset& ds,
                        const LambdaPolicy& policy, const FitOptions& opts = {},
                        std::uint64_t seed = 0) {
  FitOutput<P> sup = fit_supervised(prototype, ds, opts, seed);
  double lambda = policy.resolve(ds.n_source(), ds.n_target());
  if (ds.target.empty()) {
    sup.lambda = lambda;
    return sup;
  }
  auto obj = make_pooled_objective(prototype, ds, lambda);
  opt::FitResult r = opt::multistart_maximize(
      obj, param_vector(sup.params), std::max<std::size_t>(1, opts.pooled_starts),
      opts.perturb_scale, seed, opts.optim);
  P fitted = params_from_vector(prototype, r.theta);
  return {std::move(fitted), std::move(r), lambda, false};
}

template <class P>
FitOutput<P> fit(const P& prototype, const DomainDataset& ds,
                 EstimatorKind kind, const LambdaPolicy& policy,
                 const WeightSource& weight_source, const FitOptions& opts,
                 std::uint64_t seed) {
  switch (kind) {
    case EstimatorKind::supervised:
      return fit_supervised(prototype, ds, opts, seed);
    case EstimatorKind::weighted:
      return fit_weighted(prototype, ds, weight_source, opts, seed);
    case EstimatorKind::pooled:
      return fit_pooled(prototype, ds, policy, opts, seed);
    case EstimatorKind::joint_regression:
      break;
  }
  throw std::invalid_argument(
      "fit: the joint-feature baseline is fit via fit_joint_regression");
}

// ---------------- joint-feature baseline (theta_LR) ----------------

// Linear (OLS with ridge jitter 1e-10) or logistic regression of y on
// (1, x_C, x_E), ignoring the causal structure.
struct JointLinearModel {
  Task task = Task::regression;
  std::vector<double> beta;  // bias, x_C..., x_E...
  bool ill_conditioned = false;
  bool converged = true;

  double linear_score(std::span<const double> x_c,
                      std::span<const double> x_e) const;
  double predict_value(std::span<const double> x_c,
                       std::span<const double> x_e) const;
  int predict_label(std::span<const double> x_c,
                    std::span<const double> x_e) const;
  double predict_proba(std::span<const double> x_c,
                       std::span<const double> x_e) const;

  std::string serialize() const;
  static JointLinearModel parse(const std::string& text);
};

JointLinearModel fit_joint_regression(const DomainDataset& ds,
                                      const opt::Options& opts = {});

}  // namespace sgm
