#pragma once

#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sgm/optimizer.hpp"

namespace sgm {

// theta = (m, mu_0, mu_1): logistic P(Y=1|x_C) = sigmoid(x_C - m) and
// X_E | Y=y ~ N(mu_y, 1). Noise std is fixed at 1.
struct GaussClassParams {
  double m = 0.0;
  double mu_0 = 0.0;
  double mu_1 = 0.0;
};

// Y | x_C ~ N(a + b*x_C, sigma_Y^2), X_E | y ~ N(c + d*y, sigma_E^2).
// Noise scales are kept on the log scale so they stay positive; `restricted`
// constrains the fitted lines to non-positive slopes (b <= 0, d <= 0).
struct LinGaussParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double log_sigma_y = 0.0;
  double log_sigma_e = 0.0;
  bool restricted = false;

  double sigma_y() const { return std::exp(log_sigma_y); }
  double sigma_e() const { return std::exp(log_sigma_e); }
};

// Binary features: logistic P(Y=1|x_C) with bias, effects conditionally
// independent Bernoulli given Y with logit_p[2j + y] = logit p(X_Ej=1|Y=y).
struct DiscreteParams {
  std::size_t n_causes = 0;
  std::size_t n_effects = 0;
  std::vector<double> w;        // n_causes + 1, bias first
  std::vector<double> logit_p;  // 2 * n_effects

  static DiscreteParams zeros(std::size_t n_causes, std::size_t n_effects);
};

// --- log P(y, x_E | x_C, theta) = log P(y|x_C) + log P(x_E|y) ---
double log_joint(const GaussClassParams& p, std::span<const double> x_c,
                 double y, std::span<const double> x_e);
double log_joint(const LinGaussParams& p, std::span<const double> x_c, double y,
                 std::span<const double> x_e);
double log_joint(const DiscreteParams& p, std::span<const double> x_c, double y,
                 std::span<const double> x_e);

// --- log P(x_E | x_C, theta), label summed or integrated out ---
double log_marginal(const GaussClassParams& p, std::span<const double> x_c,
                    std::span<const double> x_e);
double log_marginal(const LinGaussParams& p, std::span<const double> x_c,
                    std::span<const double> x_e);
double log_marginal(const DiscreteParams& p, std::span<const double> x_c,
                    std::span<const double> x_e);

// --- prediction through the domain-invariant conditional ---
// Classification: 1 iff log_joint(.,1,.) >= log_joint(.,0,.) (ties go to 1).
int predict(const GaussClassParams& p, std::span<const double> x_c,
            std::span<const double> x_e);
int predict(const DiscreteParams& p, std::span<const double> x_c,
            std::span<const double> x_e);
// Regression: the conditional-mode formula in its division-free form,
// safe at d = 0.
double predict(const LinGaussParams& p, std::span<const double> x_c,
               std::span<const double> x_e);

// P(Y=1 | x_C, x_E, theta); classification models only.
double predict_proba(const GaussClassParams& p, std::span<const double> x_c,
                     std::span<const double> x_e);
double predict_proba(const DiscreteParams& p, std::span<const double> x_c,
                     std::span<const double> x_e);

// --- gradient accumulation (grad += weight * d/dtheta), layout matches
// param_vector ---
void log_joint_grad(const GaussClassParams& p, std::span<const double> x_c,
                    double y, std::span<const double> x_e, double weight,
                    std::span<double> grad);
void log_joint_grad(const LinGaussParams& p, std::span<const double> x_c,
                    double y, std::span<const double> x_e, double weight,
                    std::span<double> grad);
void log_joint_grad(const DiscreteParams& p, std::span<const double> x_c,
                    double y, std::span<const double> x_e, double weight,
                    std::span<double> grad);

void log_marginal_grad(const GaussClassParams& p, std::span<const double> x_c,
                       std::span<const double> x_e, double weight,
                       std::span<double> grad);
void log_marginal_grad(const LinGaussParams& p, std::span<const double> x_c,
                       std::span<const double> x_e, double weight,
                       std::span<double> grad);
void log_marginal_grad(const DiscreteParams& p, std::span<const double> x_c,
                       std::span<const double> x_e, double weight,
                       std::span<double> grad);

// --- flat vector round trip for the optimizer ---
// GaussClass: [m, mu_0, mu_1]
// LinGauss:   [a, b, c, d, log_sigma_y, log_sigma_e]
// Discrete:   [w..., logit_p...]
std::size_t param_dim(const GaussClassParams& p);
std::size_t param_dim(const LinGaussParams& p);
std::size_t param_dim(const DiscreteParams& p);

std::vector<double> param_vector(const GaussClassParams& p);
std::vector<double> param_vector(const LinGaussParams& p);
std::vector<double> param_vector(const DiscreteParams& p);

GaussClassParams params_from_vector(const GaussClassParams& prototype,
                                    std::span<const double> v);
LinGaussParams params_from_vector(const LinGaussParams& prototype,
                                  std::span<const double> v);
DiscreteParams params_from_vector(const DiscreteParams& prototype,
                                  std::span<const double> v);

// Sign-constraint metadata: LinGauss with `restricted` bounds b and d above
// by zero; everything else is unconstrained.
std::vector<opt::Bound> param_bounds(const GaussClassParams& p);
std::vector<opt::Bound> param_bounds(const LinGaussParams& p);
std::vector<opt::Bound> param_bounds(const DiscreteParams& p);

// --- key=value serialization, 17 significant digits ---
std::string serialize_params(const GaussClassParams& p);
std::string serialize_params(const LinGaussParams& p);
std::string serialize_params(const DiscreteParams& p);

using AnyParams = std::variant<GaussClassParams, LinGaussParams, DiscreteParams>;
AnyParams parse_params_text(const std::string& text);

}  // namespace sgm
