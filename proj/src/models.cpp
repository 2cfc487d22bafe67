#include "sgm/models.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sgm/dataset.hpp"
#include "sgm/mathutil.hpp"

namespace sgm {

namespace {

void require_dim(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string("dimension mismatch: ") + what);
  }
}

void require_binary(double v, const char* what) {
  if (v != 0.0 && v != 1.0) {
    throw std::invalid_argument(std::string(what) + " must be 0 or 1");
  }
}

}  // namespace

DiscreteParams DiscreteParams::zeros(std::size_t n_causes, std::size_t n_effects) {
  DiscreteParams p;
  p.n_causes = n_causes;
  p.n_effects = n_effects;
  p.w.assign(n_causes + 1, 0.0);
  p.logit_p.assign(2 * n_effects, 0.0);
  return p;
}

// ---------------- GaussClass ----------------

double log_joint(const GaussClassParams& p, std::span<const double> x_c,
                 double y, std::span<const double> x_e) {
  require_dim(x_c, 1, "GaussClass x_c");
  require_dim(x_e, 1, "GaussClass x_e");
  require_binary(y, "GaussClass y");
  double z = x_c[0] - p.m;
  double log_py = y == 1.0 ? log_sigmoid(z) : log_sigmoid(-z);
  double mu = y == 1.0 ? p.mu_1 : p.mu_0;
  return log_py + log_normal_pdf(x_e[0], mu, 1.0);
}

double log_marginal(const GaussClassParams& p, std::span<const double> x_c,
                    std::span<const double> x_e) {
  return log_sum_exp(log_joint(p, x_c, 0.0, x_e), log_joint(p, x_c, 1.0, x_e));
}

int predict(const GaussClassParams& p, std::span<const double> x_c,
            std::span<const double> x_e) {
  return log_joint(p, x_c, 1.0, x_e) >= log_joint(p, x_c, 0.0, x_e) ? 1 : 0;
}

double predict_proba(const GaussClassParams& p, std::span<const double> x_c,
                     std::span<const double> x_e) {
  double l1 = log_joint(p, x_c, 1.0, x_e);
  return std::exp(l1 - log_sum_exp(log_joint(p, x_c, 0.0, x_e), l1));
}

void log_joint_grad(const GaussClassParams& p, std::span<const double> x_c,
                    double y, std::span<const double> x_e, double weight,
                    std::span<double> grad) {
  require_dim(grad, 3, "GaussClass grad");
  double s = sigmoid(x_c[0] - p.m);
  grad[0] += weight * (s - y);
  if (y == 1.0) {
    grad[2] += weight * (x_e[0] - p.mu_1);
  } else {
    grad[1] += weight * (x_e[0] - p.mu_0);
  }
}

void log_marginal_grad(const GaussClassParams& p, std::span<const double> x_c,
                       std::span<const double> x_e, double weight,
                       std::span<double> grad) {
  require_dim(grad, 3, "GaussClass grad");
  double p1 = predict_proba(p, x_c, x_e);
  double s = sigmoid(x_c[0] - p.m);
  grad[0] += weight * (s - p1);
  grad[1] += weight * (1.0 - p1) * (x_e[0] - p.mu_0);
  grad[2] += weight * p1 * (x_e[0] - p.mu_1);
}

// ---------------- LinGauss ----------------

double log_joint(const LinGaussParams& p, std::span<const double> x_c, double y,
                 std::span<const double> x_e) {
  require_dim(x_c, 1, "LinGauss x_c");
  require_dim(x_e, 1, "LinGauss x_e");
  return log_normal_pdf(y, p.a + p.b * x_c[0], p.sigma_y()) +
         log_normal_pdf(x_e[0], p.c + p.d * y, p.sigma_e());
}

double log_marginal(const LinGaussParams& p, std::span<const double> x_c,
                    std::span<const double> x_e) {
  require_dim(x_c, 1, "LinGauss x_c");
  require_dim(x_e, 1, "LinGauss x_e");
  double vy = p.sigma_y() * p.sigma_y();
  double ve = p.sigma_e() * p.sigma_e();
  double mean = p.c + p.a * p.d + p.b * p.d * x_c[0];
  double var = p.d * p.d * vy + ve;
  return log_normal_pdf(x_e[0], mean, std::sqrt(var));
}

double predict(const LinGaussParams& p, std::span<const double> x_c,
               std::span<const double> x_e) {
  require_dim(x_c, 1, "LinGauss x_c");
  require_dim(x_e, 1, "LinGauss x_e");
  double vy = p.sigma_y() * p.sigma_y();
  double ve = p.sigma_e() * p.sigma_e();
  return (ve * (p.a + p.b * x_c[0]) + p.d * vy * (x_e[0] - p.c)) /
         (ve + p.d * p.d * vy);
}

void log_joint_grad(const LinGaussParams& p, std::span<const double> x_c,
                    double y, std::span<const double> x_e, double weight,
                    std::span<double> grad) {
  require_dim(grad, 6, "LinGauss grad");
  double vy = p.sigma_y() * p.sigma_y();
  double ve = p.sigma_e() * p.sigma_e();
  double ry = y - (p.a + p.b * x_c[0]);
  double re = x_e[0] - (p.c + p.d * y);
  grad[0] += weight * ry / vy;
  grad[1] += weight * x_c[0] * ry / vy;
  grad[2] += weight * re / ve;
  grad[3] += weight * y * re / ve;
  grad[4] += weight * (ry * ry / vy - 1.0);
  grad[5] += weight * (re * re / ve - 1.0);
}

void log_marginal_grad(const LinGaussParams& p, std::span<const double> x_c,
                       std::span<const double> x_e, double weight,
                       std::span<double> grad) {
  require_dim(grad, 6, "LinGauss grad");
  double vy = p.sigma_y() * p.sigma_y();
  double ve = p.sigma_e() * p.sigma_e();
  double var = p.d * p.d * vy + ve;
  double r = x_e[0] - (p.c + p.a * p.d + p.b * p.d * x_c[0]);
  double dmean = r / var;                              // d logpdf / d mean
  double dvar = 0.5 * (r * r / var - 1.0) / var;       // d logpdf / d var
  grad[0] += weight * dmean * p.d;
  grad[1] += weight * dmean * p.d * x_c[0];
  grad[2] += weight * dmean;
  grad[3] += weight * (dmean * (p.a + p.b * x_c[0]) + dvar * 2.0 * p.d * vy);
  grad[4] += weight * dvar * 2.0 * p.d * p.d * vy;
  grad[5] += weight * dvar * 2.0 * ve;
}

// ---------------- Discrete ----------------

namespace {

double discrete_label_logit(const DiscreteParams& p, std::span<const double> x_c) {
  require_dim(x_c, p.n_causes, "Discrete x_c");
  double z = p.w[0];
  for (std::size_t i = 0; i < p.n_causes; ++i) z += p.w[i + 1] * x_c[i];
  return z;
}

double discrete_effects_loglik(const DiscreteParams& p, int y,
                               std::span<const double> x_e) {
  require_dim(x_e, p.n_effects, "Discrete x_e");
  double acc = 0.0;
  for (std::size_t j = 0; j < p.n_effects; ++j) {
    require_binary(x_e[j], "Discrete x_e entry");
    double q = p.logit_p[2 * j + y];
    acc += x_e[j] == 1.0 ? log_sigmoid(q) : log_sigmoid(-q);
  }
  return acc;
}

}  // namespace

double log_joint(const DiscreteParams& p, std::span<const double> x_c, double y,
                 std::span<const double> x_e) {
  require_binary(y, "Discrete y");
  double z = discrete_label_logit(p, x_c);
  double log_py = y == 1.0 ? log_sigmoid(z) : log_sigmoid(-z);
  return log_py + discrete_effects_loglik(p, y == 1.0 ? 1 : 0, x_e);
}

double log_marginal(const DiscreteParams& p, std::span<const double> x_c,
                    std::span<const double> x_e) {
  return log_sum_exp(log_joint(p, x_c, 0.0, x_e), log_joint(p, x_c, 1.0, x_e));
}

int predict(const DiscreteParams& p, std::span<const double> x_c,
            std::span<const double> x_e) {
  return log_joint(p, x_c, 1.0, x_e) >= log_joint(p, x_c, 0.0, x_e) ? 1 : 0;
}

double predict_proba(const DiscreteParams& p, std::span<const double> x_c,
                     std::span<const double> x_e) {
  double l1 = log_joint(p, x_c, 1.0, x_e);
  return std::exp(l1 - log_sum_exp(log_joint(p, x_c, 0.0, x_e), l1));
}

void log_joint_grad(const DiscreteParams& p, std::span<const double> x_c,
                    double y, std::span<const double> x_e, double weight,
                    std::span<double> grad) {
  require_dim(grad, param_dim(p), "Discrete grad");
  require_binary(y, "Discrete y");
  double s = sigmoid(discrete_label_logit(p, x_c));
  grad[0] += weight * (y - s);
  for (std::size_t i = 0; i < p.n_causes; ++i) {
    grad[i + 1] += weight * (y - s) * x_c[i];
  }
  int yi = y == 1.0 ? 1 : 0;
  std::size_t base = p.n_causes + 1;
  for (std::size_t j = 0; j < p.n_effects; ++j) {
    double q = p.logit_p[2 * j + yi];
    grad[base + 2 * j + yi] += weight * (x_e[j] - sigmoid(q));
  }
}

void log_marginal_grad(const DiscreteParams& p, std::span<const double> x_c,
                       std::span<const double> x_e, double weight,
                       std::span<double> grad) {
  require_dim(grad, param_dim(p), "Discrete grad");
  double p1 = predict_proba(p, x_c, x_e);
  double s = sigmoid(discrete_label_logit(p, x_c));
  grad[0] += weight * (p1 - s);
  for (std::size_t i = 0; i < p.n_causes; ++i) {
    grad[i + 1] += weight * (p1 - s) * x_c[i];
  }
  std::size_t base = p.n_causes + 1;
  for (std::size_t j = 0; j < p.n_effects; ++j) {
    grad[base + 2 * j + 0] +=
        weight * (1.0 - p1) * (x_e[j] - sigmoid(p.logit_p[2 * j + 0]));
    grad[base + 2 * j + 1] +=
        weight * p1 * (x_e[j] - sigmoid(p.logit_p[2 * j + 1]));
  }
}

// ---------------- vector round trip ----------------

std::size_t param_dim(const GaussClassParams&) { return 3; }
std::size_t param_dim(const LinGaussParams&) { return 6; }
std::size_t param_dim(const DiscreteParams& p) {
  return p.n_causes + 1 + 2 * p.n_effects;
}

std::vector<double> param_vector(const GaussClassParams& p) {
  return {p.m, p.mu_0, p.mu_1};
}

std::vector<double> param_vector(const LinGaussParams& p) {
  return {p.a, p.b, p.c, p.d, p.log_sigma_y, p.log_sigma_e};
}

std::vector<double> param_vector(const DiscreteParams& p) {
  std::vector<double> v = p.w;
  v.insert(v.end(), p.logit_p.begin(), p.logit_p.end());
  return v;
}

namespace {

void require_len(std::span<const double> v, std::size_t n) {
  if (v.size() != n) {
    throw std::invalid_argument("params_from_vector: length mismatch");
  }
}

}  // namespace

GaussClassParams params_from_vector(const GaussClassParams&,
                                    std::span<const double> v) {
  require_len(v, 3);
  return {v[0], v[1], v[2]};
}

LinGaussParams params_from_vector(const LinGaussParams& prototype,
                                  std::span<const double> v) {
  require_len(v, 6);
  LinGaussParams p = prototype;
  p.a = v[0];
  p.b = v[1];
  p.c = v[2];
  p.d = v[3];
  p.log_sigma_y = v[4];
  p.log_sigma_e = v[5];
  return p;
}

DiscreteParams params_from_vector(const DiscreteParams& prototype,
                                  std::span<const double> v) {
  require_len(v, param_dim(prototype));
  DiscreteParams p = prototype;
  p.w.assign(v.begin(), v.begin() + p.n_causes + 1);
  p.logit_p.assign(v.begin() + p.n_causes + 1, v.end());
  return p;
}

std::vector<opt::Bound> param_bounds(const GaussClassParams&) {
  return std::vector<opt::Bound>(3);
}

std::vector<opt::Bound> param_bounds(const LinGaussParams& p) {
  std::vector<opt::Bound> bounds(6);
  if (p.restricted) {
    bounds[1].hi = 0.0;  // b
    bounds[3].hi = 0.0;  // d
  }
  return bounds;
}

std::vector<opt::Bound> param_bounds(const DiscreteParams& p) {
  return std::vector<opt::Bound>(param_dim(p));
}

// ---------------- serialization ----------------

namespace {

void emit(std::string& out, const std::string& key, double v) {
  out += key;
  out += '=';
  out += format_double(v);
  out += '\n';
}

}  // namespace

std::string serialize_params(const GaussClassParams& p) {
  std::string out = "model=gauss_class\n";
  emit(out, "m", p.m);
  emit(out, "mu_0", p.mu_0);
  emit(out, "mu_1", p.mu_1);
  return out;
}

std::string serialize_params(const LinGaussParams& p) {
  std::string out = "model=lin_gauss\n";
  emit(out, "a", p.a);
  emit(out, "b", p.b);
  emit(out, "c", p.c);
  emit(out, "d", p.d);
  emit(out, "log_sigma_y", p.log_sigma_y);
  emit(out, "log_sigma_e", p.log_sigma_e);
  out += "restricted=";
  out += p.restricted ? '1' : '0';
  out += '\n';
  return out;
}

std::string serialize_params(const DiscreteParams& p) {
  std::string out = "model=discrete\n";
  out += "n_causes=" + std::to_string(p.n_causes) + "\n";
  out += "n_effects=" + std::to_string(p.n_effects) + "\n";
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    emit(out, "w_" + std::to_string(i), p.w[i]);
  }
  for (std::size_t j = 0; j < p.n_effects; ++j) {
    emit(out, "logit_p_" + std::to_string(j) + "_0", p.logit_p[2 * j]);
    emit(out, "logit_p_" + std::to_string(j) + "_1", p.logit_p[2 * j + 1]);
  }
  return out;
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("params: malformed line '" + line + "'");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

double fetch(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    throw std::invalid_argument("params: missing key '" + key + "'");
  }
  return parse_double(it->second);
}

}  // namespace

AnyParams parse_params_text(const std::string& text) {
  auto kv = parse_kv(text);
  auto model_it = kv.find("model");
  if (model_it == kv.end()) {
    throw std::invalid_argument("params: missing 'model' key");
  }
  const std::string& model = model_it->second;
  if (model == "gauss_class") {
    return GaussClassParams{fetch(kv, "m"), fetch(kv, "mu_0"), fetch(kv, "mu_1")};
  }
  if (model == "lin_gauss") {
    LinGaussParams p;
    p.a = fetch(kv, "a");
    p.b = fetch(kv, "b");
    p.c = fetch(kv, "c");
    p.d = fetch(kv, "d");
    p.log_sigma_y = fetch(kv, "log_sigma_y");
    p.log_sigma_e = fetch(kv, "log_sigma_e");
    p.restricted = kv.count("restricted") && kv.at("restricted") == "1";
    return p;
  }
  if (model == "discrete") {
    DiscreteParams p;
    p.n_causes = static_cast<std::size_t>(fetch(kv, "n_causes"));
    p.n_effects = static_cast<std::size_t>(fetch(kv, "n_effects"));
    for (std::size_t i = 0; i <= p.n_causes; ++i) {
      p.w.push_back(fetch(kv, "w_" + std::to_string(i)));
    }
    for (std::size_t j = 0; j < p.n_effects; ++j) {
      p.logit_p.push_back(fetch(kv, "logit_p_" + std::to_string(j) + "_0"));
      p.logit_p.push_back(fetch(kv, "logit_p_" + std::to_string(j) + "_1"));
    }
    return p;
  }
  throw std::invalid_argument("params: unknown model '" + model + "'");
}

}  // namespace sgm
