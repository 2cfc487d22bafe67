#include "sgm/estimators.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "sgm/mathutil.hpp"

namespace sgm {

std::string estimator_kind_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::supervised: return "S";
    case EstimatorKind::weighted: return "WS";
    case EstimatorKind::pooled: return "P";
    case EstimatorKind::joint_regression: return "LR";
  }
  return "?";
}

double LambdaPolicy::resolve(std::size_t n_s, std::size_t n_t) const {
  if (n_s < 1) {
    throw std::invalid_argument("LambdaPolicy: n_S must be >= 1");
  }
  double ns = static_cast<double>(n_s);
  double nt = static_cast<double>(n_t);
  double lambda = 1.0;
  switch (kind) {
    case Kind::equal_weight:
      lambda = ns / (ns + nt);
      break;
    case Kind::sqrt_target:
      lambda = ns / (ns + std::sqrt(nt));
      break;
    case Kind::fixed:
      lambda = fixed_value;
      break;
    case Kind::supervised_heavy:
      lambda = 1.0 - 1.0 / ns;
      break;
  }
  return std::clamp(lambda, 0.0, 1.0);
}

LambdaPolicy LambdaPolicy::parse(const std::string& text) {
  LambdaPolicy p;
  if (text == "equal") {
    p.kind = Kind::equal_weight;
  } else if (text == "sqrt") {
    p.kind = Kind::sqrt_target;
  } else if (text == "supheavy") {
    p.kind = Kind::supervised_heavy;
  } else if (text.rfind("fixed:", 0) == 0) {
    p.kind = Kind::fixed;
    p.fixed_value = parse_double(text.substr(6));
    if (!(p.fixed_value >= 0.0 && p.fixed_value <= 1.0)) {
      throw std::invalid_argument("lambda policy: fixed value must be in [0,1]");
    }
  } else {
    throw std::invalid_argument("lambda policy: expected equal|sqrt|fixed:<c>|supheavy, got '" +
                                text + "'");
  }
  return p;
}

std::string LambdaPolicy::name() const {
  switch (kind) {
    case Kind::equal_weight: return "equal";
    case Kind::sqrt_target: return "sqrt";
    case Kind::fixed: return "fixed:" + format_double(fixed_value);
    case Kind::supervised_heavy: return "supheavy";
  }
  return "?";
}

WeightSource WeightSource::known(const ClassScmConfig& cfg) {
  WeightSource ws;
  ws.kind = Kind::known_synthetic;
  ws.class_cfg = cfg;
  return ws;
}

WeightSource WeightSource::supplied(std::vector<double> w, bool self_normalize) {
  WeightSource ws;
  ws.kind = Kind::supplied;
  ws.weights = std::move(w);
  ws.self_normalize = self_normalize;
  return ws;
}

std::vector<double> WeightSource::resolve(const DomainDataset& ds) const {
  std::vector<double> out;
  switch (kind) {
    case Kind::unit:
      out.assign(ds.source.size(), 1.0);
      break;
    case Kind::known_synthetic: {
      if (ds.dim_c() != 1) {
        throw std::invalid_argument(
            "known synthetic weights require one-dimensional x_C");
      }
      for (const auto& r : ds.source) {
        out.push_back(known_importance_weight(class_cfg, r.x_c[0]));
      }
      break;
    }
    case Kind::supplied:
      out = weights;
      if (self_normalize && !out.empty()) {
        double total = 0.0;
        for (double w : out) total += w;
        double scale = static_cast<double>(out.size()) / total;
        for (double& w : out) w *= scale;
      }
      break;
  }
  if (out.size() != ds.source.size()) {
    throw std::invalid_argument("weights: count does not match source rows");
  }
  for (double w : out) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("weights: must be positive and finite");
    }
  }
  return out;
}

// ---------------- starting points ----------------

namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - m.mean) * (x - m.mean);
  m.sd = std::sqrt(acc / static_cast<double>(v.size()));
  return m;
}

}  // namespace

GaussClassParams initial_params(const GaussClassParams&, const DomainDataset& ds) {
  std::vector<double> e0, e1, all;
  for (const auto& r : ds.source) {
    all.push_back(r.x_e[0]);
    (r.y == 1.0 ? e1 : e0).push_back(r.x_e[0]);
  }
  double overall = moments(all).mean;
  GaussClassParams p;
  p.m = 0.0;
  p.mu_0 = e0.empty() ? overall : moments(e0).mean;
  p.mu_1 = e1.empty() ? overall : moments(e1).mean;
  // A class absent from the source sample leaves its effect mean
  // unidentified; starting it on top of the other class makes the pooled
  // ascent resurrect the dead mixture component with swapped labels.
  // Mirror the missing mean across the unlabelled effect mass instead.
  if ((e0.empty() || e1.empty()) && !ds.target.empty()) {
    std::vector<double> unlabelled;
    for (const auto& r : ds.target) unlabelled.push_back(r.x_e[0]);
    double mirror = 2.0 * moments(unlabelled).mean - overall;
    (e0.empty() ? p.mu_0 : p.mu_1) = mirror;
  }
  return p;
}

LinGaussParams initial_params(const LinGaussParams& prototype,
                              const DomainDataset& ds) {
  std::vector<double> ys, es;
  for (const auto& r : ds.source) {
    ys.push_back(r.y);
    es.push_back(r.x_e[0]);
  }
  Moments my = moments(ys);
  Moments me = moments(es);
  LinGaussParams p = prototype;
  p.a = my.mean;
  p.b = 0.0;
  p.c = me.mean;
  p.d = 0.0;
  p.log_sigma_y = std::log(std::max(my.sd, 0.1));
  p.log_sigma_e = std::log(std::max(me.sd, 0.1));
  return p;
}

DiscreteParams initial_params(const DiscreteParams& prototype,
                              const DomainDataset& ds) {
  DiscreteParams p = DiscreteParams::zeros(prototype.n_causes, prototype.n_effects);
  bool has_class[2] = {false, false};
  for (const auto& r : ds.source) has_class[r.y == 1.0 ? 1 : 0] = true;
  // Smoothed empirical effect frequencies per class keep the logits finite.
  for (std::size_t j = 0; j < p.n_effects; ++j) {
    double freq[2];
    for (int y = 0; y <= 1; ++y) {
      double ones = 0.5;
      double total = 1.0;
      for (const auto& r : ds.source) {
        if (static_cast<int>(r.y) != y) continue;
        total += 1.0;
        ones += r.x_e[j];
      }
      freq[y] = ones / total;
    }
    // Same label-swap hazard as the Gaussian model: reflect a missing
    // class's frequency across the unlabelled marginal.
    if ((!has_class[0] || !has_class[1]) && !ds.target.empty()) {
      double ones = 0.5;
      double total = 1.0;
      for (const auto& r : ds.target) {
        total += 1.0;
        ones += r.x_e[j];
      }
      double marginal = ones / total;
      int missing = has_class[0] ? 1 : 0;
      freq[missing] =
          std::clamp(2.0 * marginal - freq[1 - missing], 0.05, 0.95);
    }
    for (int y = 0; y <= 1; ++y) {
      p.logit_p[2 * j + y] = std::log(freq[y] / (1.0 - freq[y]));
    }
  }
  return p;
}

// ---------------- joint-feature baseline ----------------

double JointLinearModel::linear_score(std::span<const double> x_c,
                                      std::span<const double> x_e) const {
  if (x_c.size() + x_e.size() + 1 != beta.size()) {
    throw std::invalid_argument("JointLinearModel: dimension mismatch");
  }
  double z = beta[0];
  std::size_t k = 1;
  for (double v : x_c) z += beta[k++] * v;
  for (double v : x_e) z += beta[k++] * v;
  return z;
}

double JointLinearModel::predict_value(std::span<const double> x_c,
                                       std::span<const double> x_e) const {
  return linear_score(x_c, x_e);
}

int JointLinearModel::predict_label(std::span<const double> x_c,
                                    std::span<const double> x_e) const {
  return linear_score(x_c, x_e) >= 0.0 ? 1 : 0;
}

double JointLinearModel::predict_proba(std::span<const double> x_c,
                                       std::span<const double> x_e) const {
  return sigmoid(linear_score(x_c, x_e));
}

std::string JointLinearModel::serialize() const {
  std::string out = "model=joint_linear\n";
  out += "task=";
  out += (task == Task::classification ? "classification" : "regression");
  out += '\n';
  for (std::size_t i = 0; i < beta.size(); ++i) {
    out += "beta_" + std::to_string(i) + "=" + format_double(beta[i]) + "\n";
  }
  return out;
}

JointLinearModel JointLinearModel::parse(const std::string& text) {
  JointLinearModel m;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> kv;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!kv.count("model") || kv["model"] != "joint_linear") {
    throw std::invalid_argument("JointLinearModel: bad model tag");
  }
  m.task = kv["task"] == "classification" ? Task::classification
                                          : Task::regression;
  for (std::size_t i = 0; kv.count("beta_" + std::to_string(i)); ++i) {
    m.beta.push_back(parse_double(kv["beta_" + std::to_string(i)]));
  }
  if (m.beta.empty()) {
    throw std::invalid_argument("JointLinearModel: no coefficients");
  }
  return m;
}

namespace {

// Solve A x = b in place by Gaussian elimination with partial pivoting.
// Returns false when a pivot is tiny relative to the matrix scale.
bool solve_linear_system(std::vector<std::vector<double>>& a,
                         std::vector<double>& b) {
  const std::size_t n = b.size();
  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::fabs(v));
  }
  bool ok = true;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (std::fabs(a[col][col]) < 1e-8 * std::max(scale, 1.0)) ok = false;
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t k = col + 1; k < n; ++k) b[col] -= a[col][k] * b[k];
    b[col] /= a[col][col];
  }
  return ok;
}

std::vector<double> joint_features(const LabelledRow& r) {
  std::vector<double> x;
  x.reserve(1 + r.x_c.size() + r.x_e.size());
  x.push_back(1.0);
  x.insert(x.end(), r.x_c.begin(), r.x_c.end());
  x.insert(x.end(), r.x_e.begin(), r.x_e.end());
  return x;
}

}  // namespace

JointLinearModel fit_joint_regression(const DomainDataset& ds,
                                      const opt::Options& opts) {
  ds.validate();
  const std::size_t k = 1 + ds.dim_c() + ds.dim_e();
  JointLinearModel model;
  model.task = ds.task;

  if (ds.task == Task::regression) {
    // Normal equations with ridge jitter on the diagonal.
    std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
    std::vector<double> xty(k, 0.0);
    for (const auto& r : ds.source) {
      auto x = joint_features(r);
      for (std::size_t i = 0; i < k; ++i) {
        xty[i] += x[i] * r.y;
        for (std::size_t j = 0; j < k; ++j) xtx[i][j] += x[i] * x[j];
      }
    }
    for (std::size_t i = 0; i < k; ++i) xtx[i][i] += 1e-10;
    model.ill_conditioned = !solve_linear_system(xtx, xty);
    model.beta = std::move(xty);
    return model;
  }

  // Logistic MLE via the shared optimizer; separable data is capped by
  // max_iters rather than regularized.
  opt::Objective obj;
  obj.dim = k;
  obj.value = [&ds](std::span<const double> beta) {
    double acc = 0.0;
    for (const auto& r : ds.source) {
      auto x = joint_features(r);
      double z = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) z += beta[i] * x[i];
      acc += r.y == 1.0 ? log_sigmoid(z) : log_sigmoid(-z);
    }
    return acc / static_cast<double>(ds.source.size());
  };
  obj.value_and_grad = [&ds](std::span<const double> beta,
                             std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double acc = 0.0;
    double inv = 1.0 / static_cast<double>(ds.source.size());
    for (const auto& r : ds.source) {
      auto x = joint_features(r);
      double z = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) z += beta[i] * x[i];
      acc += inv * (r.y == 1.0 ? log_sigmoid(z) : log_sigmoid(-z));
      double resid = inv * (r.y - sigmoid(z));
      for (std::size_t i = 0; i < x.size(); ++i) grad[i] += resid * x[i];
    }
    return acc;
  };
  std::vector<double> init(k, 0.0);
  opt::FitResult r = opt::maximize(obj, init, opts);
  model.beta = std::move(r.theta);
  model.converged = r.best_converged();
  return model;
}

}  // namespace sgm
