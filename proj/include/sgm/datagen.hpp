#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "sgm/dataset.hpp"

namespace sgm {

// Two-domain binary classification SCM: X_C = +/-mu_c + noise depending on
// the domain, Y ~ Bernoulli(sigmoid(X_C - m)), X_E ~ N(mu_y, 1).
struct ClassScmConfig {
  double mu_c = -1.0;
  double m = 0.0;
  double mu_0 = -0.5;
  double mu_1 = 0.5;
  // mu_0 == mu_1 makes X_E carry no label information; allowed only when set.
  bool allow_uninformative_effects = false;

  void validate() const;
};

struct GaussianSpec {
  double mean = 0.0;
  double sd = 1.0;
};

// Linear-Gaussian regression SCM: Y = a + b*X_C + noise,
// X_E = c + d*Y + noise, with per-domain Gaussian cause distributions.
struct RegrScmConfig {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double sigma_y = 1.0;
  double sigma_e = 1.0;
  GaussianSpec cause_source{0.0, 1.0};
  GaussianSpec cause_target{0.0, 1.0};

  void validate() const;
};

enum class NodeRole { cause, label, effect, domain };

NodeRole parse_node_role(const std::string& text);
std::string node_role_name(NodeRole role);

// Binary Bayes net over named nodes with a role map. CPTs give p(node=1)
// per parent assignment, indexed by parent bits (parents[k] -> bit k).
struct BayesNetConfig {
  struct Node {
    std::string name;
    NodeRole role = NodeRole::cause;
    std::vector<std::size_t> parents;  // indices into nodes
    std::vector<double> cpt;           // size 2^|parents|
  };

  std::vector<Node> nodes;  // declaration order of the role map
  std::size_t label_index = 0;
  std::size_t domain_index = 0;
  std::vector<std::size_t> cause_indices;
  std::vector<std::size_t> effect_indices;
  std::vector<std::size_t> topo_order;

  // Checks roles, CPT coverage, probability bounds, acyclicity, and the
  // structural constraint that the domain node has no edge into an effect.
  // Fills topo_order and the role index lists.
  void validate();
};

// Text format: `role <node> = cause|label|effect|domain` lines plus one line
// per CPT row: `node | parent1=0,parent2=1 | 0.35` (empty middle field for
// root nodes). '#' starts a comment.
BayesNetConfig parse_bayesnet_config(std::istream& in);
BayesNetConfig load_bayesnet_config(const std::filesystem::path& path);

std::pair<DomainDataset, TestSet> gen_classification(const ClassScmConfig& cfg,
                                                     std::size_t n_s,
                                                     std::size_t n_t,
                                                     std::size_t n_test,
                                                     std::uint64_t seed);

std::pair<DomainDataset, TestSet> gen_regression(const RegrScmConfig& cfg,
                                                 std::size_t n_s,
                                                 std::size_t n_t,
                                                 std::size_t n_test,
                                                 std::uint64_t seed);

// Ancestral sampling with the domain node clamped to domain_value.
// Rows are (x_C, y, x_E) with bit vectors ordered by role declaration order.
std::vector<LabelledRow> gen_bayesnet(const BayesNetConfig& cfg,
                                      int domain_value, std::size_t n,
                                      std::uint64_t seed);

std::pair<DomainDataset, TestSet> gen_bayesnet_dataset(const BayesNetConfig& cfg,
                                                       std::size_t n_s,
                                                       std::size_t n_t,
                                                       std::size_t n_test,
                                                       std::uint64_t seed);

// Exact density ratio phi(x | -mu_c, 1) / phi(x | mu_c, 1) for the
// classification SCM's cause shift; equals exp(-2 * mu_c * x).
double known_importance_weight(const ClassScmConfig& cfg, double x_c);

}  // namespace sgm
