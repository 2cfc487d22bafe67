#include "sgm/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sgm/mathutil.hpp"
#include "sgm/rng.hpp"

namespace sgm {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string("non-finite config value: ") + name);
  }
}

}  // namespace

void ClassScmConfig::validate() const {
  require_finite(mu_c, "mu_c");
  require_finite(m, "m");
  require_finite(mu_0, "mu_0");
  require_finite(mu_1, "mu_1");
  if (mu_0 == mu_1 && !allow_uninformative_effects) {
    throw std::invalid_argument(
        "ClassScmConfig: mu_0 == mu_1 leaves X_E uninformative; set "
        "allow_uninformative_effects to permit it");
  }
}

void RegrScmConfig::validate() const {
  require_finite(a, "a");
  require_finite(b, "b");
  require_finite(c, "c");
  require_finite(d, "d");
  require_finite(sigma_y, "sigma_y");
  require_finite(sigma_e, "sigma_e");
  require_finite(cause_source.mean, "cause_source.mean");
  require_finite(cause_source.sd, "cause_source.sd");
  require_finite(cause_target.mean, "cause_target.mean");
  require_finite(cause_target.sd, "cause_target.sd");
  if (sigma_y <= 0.0 || sigma_e <= 0.0) {
    throw std::invalid_argument("RegrScmConfig: sigma_y and sigma_e must be > 0");
  }
  if (cause_source.sd < 0.0 || cause_target.sd < 0.0) {
    throw std::invalid_argument("RegrScmConfig: cause sd must be >= 0");
  }
}

namespace {

LabelledRow draw_class_row(const ClassScmConfig& cfg, int domain, Rng& rng) {
  double mu = domain == 0 ? cfg.mu_c : -cfg.mu_c;
  double x_c = mu + rng.normal();
  double y = rng.uniform() <= sigmoid(x_c - cfg.m) ? 1.0 : 0.0;
  double x_e = (y == 1.0 ? cfg.mu_1 : cfg.mu_0) + rng.normal();
  return {{x_c}, y, {x_e}};
}

LabelledRow draw_regr_row(const RegrScmConfig& cfg, int domain, Rng& rng) {
  const GaussianSpec& cd = domain == 0 ? cfg.cause_source : cfg.cause_target;
  double x_c = cd.mean + cd.sd * rng.normal();
  double y = cfg.a + cfg.b * x_c + cfg.sigma_y * rng.normal();
  double x_e = cfg.c + cfg.d * y + cfg.sigma_e * rng.normal();
  return {{x_c}, y, {x_e}};
}

void check_sizes(std::size_t n_s, std::size_t n_test) {
  if (n_s < 1) {
    throw std::invalid_argument("generator: n_S must be >= 1");
  }
  if (n_test < 1) {
    throw std::invalid_argument("generator: n_test must be >= 1");
  }
}

}  // namespace

std::pair<DomainDataset, TestSet> gen_classification(const ClassScmConfig& cfg,
                                                     std::size_t n_s,
                                                     std::size_t n_t,
                                                     std::size_t n_test,
                                                     std::uint64_t seed) {
  cfg.validate();
  check_sizes(n_s, n_test);
  Rng rng(seed);
  DomainDataset ds;
  ds.task = Task::classification;
  for (std::size_t i = 0; i < n_s; ++i) {
    ds.source.push_back(draw_class_row(cfg, 0, rng));
  }
  for (std::size_t i = 0; i < n_t; ++i) {
    auto row = draw_class_row(cfg, 1, rng);
    ds.target.push_back({std::move(row.x_c), std::move(row.x_e)});
  }
  TestSet test;
  for (std::size_t i = 0; i < n_test; ++i) {
    test.push_back(draw_class_row(cfg, 1, rng));
  }
  return {std::move(ds), std::move(test)};
}

std::pair<DomainDataset, TestSet> gen_regression(const RegrScmConfig& cfg,
                                                 std::size_t n_s,
                                                 std::size_t n_t,
                                                 std::size_t n_test,
                                                 std::uint64_t seed) {
  cfg.validate();
  check_sizes(n_s, n_test);
  Rng rng(seed);
  DomainDataset ds;
  ds.task = Task::regression;
  for (std::size_t i = 0; i < n_s; ++i) {
    ds.source.push_back(draw_regr_row(cfg, 0, rng));
  }
  for (std::size_t i = 0; i < n_t; ++i) {
    auto row = draw_regr_row(cfg, 1, rng);
    ds.target.push_back({std::move(row.x_c), std::move(row.x_e)});
  }
  TestSet test;
  for (std::size_t i = 0; i < n_test; ++i) {
    test.push_back(draw_regr_row(cfg, 1, rng));
  }
  return {std::move(ds), std::move(test)};
}

double known_importance_weight(const ClassScmConfig& cfg, double x_c) {
  if (!std::isfinite(x_c)) {
    throw std::invalid_argument("known_importance_weight: non-finite x_c");
  }
  // phi(x|-mu,1)/phi(x|mu,1) = exp(((x-mu)^2 - (x+mu)^2)/2) = exp(-2*mu*x)
  return std::exp(-2.0 * cfg.mu_c * x_c);
}

NodeRole parse_node_role(const std::string& text) {
  if (text == "cause") return NodeRole::cause;
  if (text == "label") return NodeRole::label;
  if (text == "effect") return NodeRole::effect;
  if (text == "domain") return NodeRole::domain;
  throw std::invalid_argument("bayes net: unknown role '" + text + "'");
}

std::string node_role_name(NodeRole role) {
  switch (role) {
    case NodeRole::cause: return "cause";
    case NodeRole::label: return "label";
    case NodeRole::effect: return "effect";
    case NodeRole::domain: return "domain";
  }
  return "?";
}

void BayesNetConfig::validate() {
  cause_indices.clear();
  effect_indices.clear();
  topo_order.clear();
  std::size_t labels = 0;
  std::size_t domains = 0;
  std::set<std::string> names;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& node = nodes[i];
    if (!names.insert(node.name).second) {
      throw std::invalid_argument("bayes net: duplicate node '" + node.name + "'");
    }
    switch (node.role) {
      case NodeRole::label:
        ++labels;
        label_index = i;
        break;
      case NodeRole::domain:
        ++domains;
        domain_index = i;
        break;
      case NodeRole::cause:
        cause_indices.push_back(i);
        break;
      case NodeRole::effect:
        effect_indices.push_back(i);
        break;
    }
    std::size_t expected = std::size_t{1} << node.parents.size();
    if (node.role != NodeRole::domain && node.cpt.size() != expected) {
      throw std::invalid_argument("bayes net: node '" + node.name +
                                  "' is missing CPT entries");
    }
    for (double p : node.cpt) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("bayes net: probability outside [0,1] for '" +
                                    node.name + "'");
      }
    }
    for (std::size_t parent : node.parents) {
      if (parent >= nodes.size()) {
        throw std::invalid_argument("bayes net: bad parent index");
      }
    }
  }
  if (labels != 1 || domains != 1) {
    throw std::invalid_argument(
        "bayes net: exactly one label node and one domain node required");
  }
  for (const Node& node : nodes) {
    if (node.role != NodeRole::effect) continue;
    for (std::size_t parent : node.parents) {
      if (parent == domain_index) {
        throw std::invalid_argument(
            "bayes net: edge from domain node into effect node '" + node.name +
            "' is not allowed");
      }
    }
  }
  // Kahn topological sort; leftover nodes mean a cycle.
  std::vector<std::size_t> in_degree(nodes.size(), 0);
  std::vector<std::vector<std::size_t>> children(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    in_degree[i] = nodes[i].parents.size();
    for (std::size_t parent : nodes[i].parents) children[parent].push_back(i);
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (in_degree[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    std::size_t i = ready.front();
    ready.erase(ready.begin());
    topo_order.push_back(i);
    for (std::size_t child : children[i]) {
      if (--in_degree[child] == 0) ready.push_back(child);
    }
  }
  if (topo_order.size() != nodes.size()) {
    throw std::invalid_argument("bayes net: graph has a cycle");
  }
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  return parts;
}

struct RawCptRow {
  std::string node;
  std::vector<std::pair<std::string, int>> assignment;
  double p = 0.0;
  std::size_t line_no = 0;
};

}  // namespace

BayesNetConfig parse_bayesnet_config(std::istream& in) {
  BayesNetConfig cfg;
  std::map<std::string, std::size_t> index_of;
  std::vector<RawCptRow> raw_rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("role ", 0) == 0) {
      auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("bayes net: malformed role line " +
                                    std::to_string(line_no));
      }
      std::string name = trim(line.substr(5, eq - 5));
      NodeRole role = parse_node_role(trim(line.substr(eq + 1)));
      if (name.empty()) {
        throw std::invalid_argument("bayes net: empty node name at line " +
                                    std::to_string(line_no));
      }
      if (index_of.count(name)) {
        throw std::invalid_argument("bayes net: duplicate role for '" + name + "'");
      }
      index_of[name] = cfg.nodes.size();
      cfg.nodes.push_back({name, role, {}, {}});
      continue;
    }
    auto fields = split(line, '|');
    if (fields.size() != 3) {
      throw std::invalid_argument("bayes net: malformed CPT line " +
                                  std::to_string(line_no));
    }
    RawCptRow row;
    row.node = trim(fields[0]);
    row.line_no = line_no;
    std::string assignment = trim(fields[1]);
    if (!assignment.empty()) {
      for (const std::string& part : split(assignment, ',')) {
        auto eq = part.find('=');
        if (eq == std::string::npos) {
          throw std::invalid_argument("bayes net: malformed assignment at line " +
                                      std::to_string(line_no));
        }
        std::string pname = trim(part.substr(0, eq));
        std::string pval = trim(part.substr(eq + 1));
        if (pval != "0" && pval != "1") {
          throw std::invalid_argument("bayes net: parent value must be 0 or 1 at line " +
                                      std::to_string(line_no));
        }
        row.assignment.emplace_back(pname, pval == "1" ? 1 : 0);
      }
    }
    row.p = parse_double(trim(fields[2]));
    raw_rows.push_back(std::move(row));
  }

  for (const RawCptRow& row : raw_rows) {
    auto it = index_of.find(row.node);
    if (it == index_of.end()) {
      throw std::invalid_argument("bayes net: CPT row for unknown node '" +
                                  row.node + "' (missing role line)");
    }
    BayesNetConfig::Node& node = cfg.nodes[it->second];
    std::vector<std::size_t> parents;
    for (const auto& [pname, pval] : row.assignment) {
      auto pit = index_of.find(pname);
      if (pit == index_of.end()) {
        throw std::invalid_argument("bayes net: unknown parent '" + pname +
                                    "' at line " + std::to_string(row.line_no));
      }
      parents.push_back(pit->second);
    }
    // Canonical parent order: node declaration order.
    std::vector<std::size_t> sorted = parents;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("bayes net: duplicate parent at line " +
                                  std::to_string(row.line_no));
    }
    if (node.cpt.empty() && node.parents.empty()) {
      node.parents = sorted;
      node.cpt.assign(std::size_t{1} << sorted.size(), -1.0);
    } else if (node.parents != sorted) {
      throw std::invalid_argument("bayes net: inconsistent parent set for '" +
                                  row.node + "' at line " +
                                  std::to_string(row.line_no));
    }
    std::size_t idx = 0;
    for (const auto& [pname, pval] : row.assignment) {
      std::size_t parent = index_of.at(pname);
      std::size_t bit =
          std::find(node.parents.begin(), node.parents.end(), parent) -
          node.parents.begin();
      if (pval) idx |= std::size_t{1} << bit;
    }
    if (node.cpt[idx] >= 0.0) {
      throw std::invalid_argument("bayes net: duplicate CPT entry for '" +
                                  row.node + "' at line " +
                                  std::to_string(row.line_no));
    }
    node.cpt[idx] = row.p;
  }
  for (BayesNetConfig::Node& node : cfg.nodes) {
    if (node.role == NodeRole::domain && node.cpt.empty()) {
      continue;  // clamped during sampling; CPT optional
    }
    for (double p : node.cpt) {
      if (p < 0.0) {
        throw std::invalid_argument("bayes net: node '" + node.name +
                                    "' is missing a CPT entry");
      }
    }
    if (node.cpt.empty()) {
      throw std::invalid_argument("bayes net: node '" + node.name +
                                  "' has no CPT rows");
    }
  }
  cfg.validate();
  return cfg;
}

BayesNetConfig load_bayesnet_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  return parse_bayesnet_config(in);
}

std::vector<LabelledRow> gen_bayesnet(const BayesNetConfig& cfg,
                                      int domain_value, std::size_t n,
                                      std::uint64_t seed) {
  if (cfg.topo_order.size() != cfg.nodes.size()) {
    throw std::invalid_argument("bayes net: config not validated");
  }
  if (domain_value != 0 && domain_value != 1) {
    throw std::invalid_argument("bayes net: domain_value must be 0 or 1");
  }
  Rng rng(seed);
  std::vector<LabelledRow> rows;
  rows.reserve(n);
  std::vector<int> values(cfg.nodes.size(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i : cfg.topo_order) {
      if (i == cfg.domain_index) {
        values[i] = domain_value;
        continue;
      }
      const auto& node = cfg.nodes[i];
      std::size_t idx = 0;
      for (std::size_t bit = 0; bit < node.parents.size(); ++bit) {
        if (values[node.parents[bit]]) idx |= std::size_t{1} << bit;
      }
      values[i] = rng.bernoulli(node.cpt[idx]) ? 1 : 0;
    }
    LabelledRow row;
    for (std::size_t i : cfg.cause_indices) row.x_c.push_back(values[i]);
    row.y = values[cfg.label_index];
    for (std::size_t i : cfg.effect_indices) row.x_e.push_back(values[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::pair<DomainDataset, TestSet> gen_bayesnet_dataset(const BayesNetConfig& cfg,
                                                       std::size_t n_s,
                                                       std::size_t n_t,
                                                       std::size_t n_test,
                                                       std::uint64_t seed) {
  check_sizes(n_s, n_test);
  DomainDataset ds;
  ds.task = Task::classification;
  ds.source = gen_bayesnet(cfg, 0, n_s, Rng::derive(seed, {0}));
  auto target = gen_bayesnet(cfg, 1, n_t, Rng::derive(seed, {1}));
  for (auto& row : target) {
    ds.target.push_back({std::move(row.x_c), std::move(row.x_e)});
  }
  TestSet test = gen_bayesnet(cfg, 1, n_test, Rng::derive(seed, {2}));
  return {std::move(ds), std::move(test)};
}

}  // namespace sgm
