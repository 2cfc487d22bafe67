#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "sgm/datagen.hpp"
#include "sgm/estimators.hpp"
#include "sgm/rng.hpp"

using namespace sgm;

namespace {

DomainDataset two_row_dataset() {
  DomainDataset ds;
  ds.task = Task::classification;
  ds.source = {{{0.0}, 1.0, {1.0}}, {{0.0}, 0.0, {-1.0}}};
  return ds;
}

DomainDataset class_dataset(std::size_t n_s, std::size_t n_t, std::uint64_t seed) {
  ClassScmConfig cfg{-1.0, 0.0, -0.5, 0.5};
  return gen_classification(cfg, n_s, n_t, 1, seed).first;
}

}  // namespace

TEST_CASE("supervised log-likelihood: hand value, averaging, duplication") {
  GaussClassParams p{0.0, -1.0, 1.0};
  DomainDataset ds = two_row_dataset();
  double value = loglik_supervised(p, ds);
  CHECK(value == doctest::Approx(-1.612085713764618).epsilon(1e-12));

  DomainDataset single;
  single.task = Task::classification;
  single.source = {ds.source[0]};
  CHECK(loglik_supervised(p, single) ==
        doctest::Approx(log_joint(p, ds.source[0].x_c, 1.0, ds.source[0].x_e))
            .epsilon(1e-15));

  DomainDataset doubled = ds;
  doubled.source.insert(doubled.source.end(), ds.source.begin(), ds.source.end());
  CHECK(loglik_supervised(p, doubled) == doctest::Approx(value).epsilon(1e-15));

  DomainDataset empty;
  empty.task = Task::classification;
  CHECK_THROWS_AS((void)loglik_supervised(p, empty), std::invalid_argument);
}

TEST_CASE("weighted log-likelihood endpoints") {
  GaussClassParams p{0.3, -0.7, 0.9};
  DomainDataset ds = class_dataset(10, 0, 41);

  std::vector<double> unit(ds.source.size(), 1.0);
  CHECK(loglik_weighted(p, ds, unit) == loglik_supervised(p, ds));

  DomainDataset two = two_row_dataset();
  std::vector<double> skew{2.0, 1e-12};
  double almost_first = loglik_weighted(p, two, skew);
  double first_only = log_joint(p, two.source[0].x_c, 1.0, two.source[0].x_e);
  CHECK(almost_first == doctest::Approx(first_only).epsilon(1e-6));

  std::vector<double> wrong_count{1.0};
  CHECK_THROWS_AS((void)loglik_weighted(p, two, wrong_count),
                  std::invalid_argument);
  std::vector<double> nonpositive{1.0, 0.0};
  CHECK_THROWS_AS((void)loglik_weighted(p, two, nonpositive),
                  std::invalid_argument);
}

TEST_CASE("known synthetic weights are unit at the symmetry point") {
  GaussClassParams p{0.0, -1.0, 1.0};
  DomainDataset ds = two_row_dataset();  // both rows at x_C = 0
  ClassScmConfig cfg{-1.0, 0.0, -0.5, 0.5};
  auto ws = WeightSource::known(cfg);
  auto weights = ws.resolve(ds);
  CHECK(weights[0] == 1.0);
  CHECK(weights[1] == 1.0);
  CHECK(loglik_weighted(p, ds, weights) == loglik_supervised(p, ds));
}

TEST_CASE("unsupervised log-likelihood basics") {
  GaussClassParams p{0.1, -0.4, 1.2};
  DomainDataset ds = class_dataset(2, 12, 42);
  double value = loglik_unsupervised(p, ds);

  DomainDataset shuffled = ds;
  std::reverse(shuffled.target.begin(), shuffled.target.end());
  CHECK(loglik_unsupervised(p, shuffled) == doctest::Approx(value).epsilon(1e-15));

  DomainDataset single = ds;
  single.target.resize(1);
  CHECK(loglik_unsupervised(p, single) ==
        doctest::Approx(log_marginal(p, ds.target[0].x_c, ds.target[0].x_e))
            .epsilon(1e-15));

  DomainDataset no_target = ds;
  no_target.target.clear();
  CHECK_THROWS_AS((void)loglik_unsupervised(p, no_target), std::invalid_argument);
}

TEST_CASE("pooled endpoints are exact identities") {
  GaussClassParams p{0.2, -1.1, 0.6};
  DomainDataset ds = class_dataset(6, 9, 43);
  CHECK(loglik_pooled(p, ds, 1.0) == loglik_supervised(p, ds));
  CHECK(loglik_pooled(p, ds, 0.0) == loglik_unsupervised(p, ds));
  double mid = loglik_pooled(p, ds, 0.5);
  CHECK(mid == doctest::Approx(0.5 * loglik_supervised(p, ds) +
                               0.5 * loglik_unsupervised(p, ds))
                   .epsilon(1e-15));

  DomainDataset no_target = ds;
  no_target.target.clear();
  CHECK(loglik_pooled(p, no_target, 0.25) == loglik_supervised(p, no_target));

  CHECK_THROWS_AS((void)loglik_pooled(p, ds, 1.5), std::invalid_argument);
}

TEST_CASE("lambda policies evaluate exactly") {
  LambdaPolicy equal{LambdaPolicy::Kind::equal_weight};
  CHECK(equal.resolve(8, 8) == 0.5);
  CHECK(equal.resolve(8, 0) == 1.0);
  LambdaPolicy sqrt_pol{LambdaPolicy::Kind::sqrt_target};
  CHECK(sqrt_pol.resolve(8, 16) == doctest::Approx(8.0 / 12.0).epsilon(1e-15));
  LambdaPolicy heavy{LambdaPolicy::Kind::supervised_heavy};
  CHECK(heavy.resolve(1, 100) == 0.0);
  CHECK(heavy.resolve(4, 100) == 0.75);
  LambdaPolicy fixed = LambdaPolicy::parse("fixed:0.8");
  CHECK(fixed.resolve(3, 999) == 0.8);
  CHECK(LambdaPolicy::parse("equal").kind == LambdaPolicy::Kind::equal_weight);
  CHECK(LambdaPolicy::parse("sqrt").kind == LambdaPolicy::Kind::sqrt_target);
  CHECK(LambdaPolicy::parse("supheavy").kind ==
        LambdaPolicy::Kind::supervised_heavy);
  CHECK_THROWS_AS(LambdaPolicy::parse("fixed:1.5"), std::invalid_argument);
  CHECK_THROWS_AS(LambdaPolicy::parse("nonsense"), std::invalid_argument);
}

TEST_CASE("pooled fit with no target rows returns the supervised fit") {
  DomainDataset ds = class_dataset(12, 0, 44);
  auto sup = fit_supervised(GaussClassParams{}, ds, {}, 7);
  auto pooled = fit_pooled(GaussClassParams{}, ds,
                           LambdaPolicy{LambdaPolicy::Kind::equal_weight}, {}, 7);
  CHECK(pooled.params.m == sup.params.m);
  CHECK(pooled.params.mu_0 == sup.params.mu_0);
  CHECK(pooled.params.mu_1 == sup.params.mu_1);
}

TEST_CASE("pooled fit with lambda = 1 matches supervised within tolerance") {
  DomainDataset ds = class_dataset(12, 40, 45);
  auto sup = fit_supervised(GaussClassParams{}, ds, {}, 7);
  auto pooled =
      fit_pooled(GaussClassParams{}, ds, LambdaPolicy::parse("fixed:1"), {}, 7);
  CHECK(std::fabs(pooled.params.m - sup.params.m) < 1e-3);
  CHECK(std::fabs(pooled.params.mu_0 - sup.params.mu_0) < 1e-3);
  CHECK(std::fabs(pooled.params.mu_1 - sup.params.mu_1) < 1e-3);
}

TEST_CASE("pooled fit never loses to its supervised start") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    DomainDataset ds = class_dataset(8, 64, 46 + seed);
    LambdaPolicy pol{LambdaPolicy::Kind::equal_weight};
    auto sup = fit_supervised(GaussClassParams{}, ds, {}, seed);
    auto pooled = fit_pooled(GaussClassParams{}, ds, pol, {}, seed);
    double lambda = pol.resolve(ds.n_source(), ds.n_target());
    CHECK(pooled.opt.value >=
          loglik_pooled(sup.params, ds, lambda) - 1e-12);
  }
}

TEST_CASE("restricted regression fits keep both slopes non-positive") {
  RegrScmConfig cfg;
  cfg.a = 1.0;
  cfg.b = -0.8;
  cfg.c = -0.5;
  cfg.d = -1.2;
  cfg.sigma_y = 0.4;
  cfg.sigma_e = 0.4;
  cfg.cause_target = {1.5, 1.0};
  LinGaussParams proto;
  proto.restricted = true;
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    auto [ds, test] = gen_regression(cfg, 4, 32, 1, seed);
    auto sup = fit_supervised(proto, ds, {}, seed);
    CHECK(sup.params.b <= 0.0);
    CHECK(sup.params.d <= 0.0);
    auto pooled = fit_pooled(proto, ds, LambdaPolicy::parse("fixed:0.8"), {}, seed);
    CHECK(pooled.params.b <= 0.0);
    CHECK(pooled.params.d <= 0.0);
  }
}

TEST_CASE("weighted fit flags unit weights as degenerate") {
  DomainDataset ds = class_dataset(10, 0, 48);
  auto ws = fit_weighted(GaussClassParams{}, ds, WeightSource::unit());
  CHECK(ws.degenerate_weights);
  auto known = fit_weighted(GaussClassParams{}, ds,
                            WeightSource::known(ClassScmConfig{-1.0, 0.0, -0.5, 0.5}));
  CHECK_FALSE(known.degenerate_weights);
}

TEST_CASE("supplied weights can be self-normalized") {
  DomainDataset ds = class_dataset(4, 0, 49);
  auto ws = WeightSource::supplied({2.0, 2.0, 2.0, 2.0}, true);
  auto w = ws.resolve(ds);
  for (double v : w) CHECK(v == 1.0);
  auto raw = WeightSource::supplied({2.0, 2.0, 2.0, 2.0}, false);
  for (double v : raw.resolve(ds)) CHECK(v == 2.0);
}

TEST_CASE("discrete analytic gradients agree with finite differences") {
  std::istringstream net_text(R"(
role d = domain
role c1 = cause
role c2 = cause
role y = label
role e1 = effect
role e2 = effect
d | | 0.5
c1 | d=0 | 0.3
c1 | d=1 | 0.75
c2 | | 0.2
y | c1=0,c2=0 | 0.1
y | c1=1,c2=0 | 0.6
y | c1=0,c2=1 | 0.55
y | c1=1,c2=1 | 0.9
e1 | y=0 | 0.2
e1 | y=1 | 0.8
e2 | y=0 | 0.25
e2 | y=1 | 0.75
)");
  BayesNetConfig net = parse_bayesnet_config(net_text);
  auto [ds, test] = gen_bayesnet_dataset(net, 24, 40, 1, 50);
  DiscreteParams proto = DiscreteParams::zeros(2, 2);
  Rng rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    DiscreteParams p = proto;
    for (double& v : p.w) v = rng.uniform(-1.5, 1.5);
    for (double& v : p.logit_p) v = rng.uniform(-1.5, 1.5);
    auto sup = make_supervised_objective(p, ds);
    CHECK(opt::check_gradient(sup, param_vector(p)) < 1e-5);
    auto pooled = make_pooled_objective(p, ds, 0.4);
    CHECK(opt::check_gradient(pooled, param_vector(p)) < 1e-5);
  }
}

TEST_CASE("joint regression recovers exact linear data") {
  DomainDataset ds;
  ds.task = Task::regression;
  Rng rng(52);
  for (int i = 0; i < 12; ++i) {
    double xc = rng.uniform(-2.0, 2.0);
    double xe = rng.uniform(-2.0, 2.0);
    ds.source.push_back({{xc}, 2.0 + 3.0 * xc - xe, {xe}});
  }
  auto model = fit_joint_regression(ds);
  REQUIRE(model.beta.size() == 3);
  CHECK(model.beta[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(model.beta[1] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(model.beta[2] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK_FALSE(model.ill_conditioned);
}

TEST_CASE("joint logistic separates separable training data") {
  DomainDataset ds;
  ds.task = Task::classification;
  ds.source = {{{-2.0}, 0.0, {-1.5}},
               {{-1.0}, 0.0, {-0.5}},
               {{1.0}, 1.0, {0.5}},
               {{2.0}, 1.0, {1.5}}};
  auto model = fit_joint_regression(ds);
  for (const auto& r : ds.source) {
    CHECK(model.predict_label(r.x_c, r.x_e) == static_cast<int>(r.y));
  }
  for (double b : model.beta) CHECK(std::isfinite(b));
}

TEST_CASE("constant feature column is handled by the jitter") {
  DomainDataset ds;
  ds.task = Task::regression;
  Rng rng(53);
  for (int i = 0; i < 10; ++i) {
    double xc = rng.uniform(-1.0, 1.0);
    ds.source.push_back({{xc}, 1.0 + xc, {2.5}});  // x_E constant
  }
  auto model = fit_joint_regression(ds);
  for (double b : model.beta) CHECK(std::isfinite(b));
  CHECK(model.ill_conditioned);
}

TEST_CASE("joint linear model serializes and parses") {
  JointLinearModel m;
  m.task = Task::classification;
  m.beta = {0.25, -1.5, 2.0};
  auto back = JointLinearModel::parse(m.serialize());
  CHECK(back.task == Task::classification);
  CHECK(back.beta == m.beta);
}

TEST_CASE("fit dispatcher rejects the LR kind") {
  DomainDataset ds = class_dataset(4, 0, 54);
  CHECK_THROWS_AS((void)fit(GaussClassParams{}, ds,
                            EstimatorKind::joint_regression, LambdaPolicy{},
                            WeightSource::unit(), FitOptions{}, 0),
                  std::invalid_argument);
}
