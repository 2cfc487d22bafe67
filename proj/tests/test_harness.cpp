#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "sgm/harness.hpp"
#include "sgm/mathutil.hpp"
#include "sgm/rng.hpp"

using namespace sgm;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "sgm_harness_tests";
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small two-domain table; target rows have xc shifted. One non-positive xe
// row and one foreign domain row exercise the load counters.
fs::path write_real_fixture() {
  auto path = temp_dir() / "real_fixture.csv";
  std::ofstream out(path);
  out << "cond,xc,yy,xe\n";
  Rng rng(1234);
  for (int i = 0; i < 40; ++i) {
    double xc = std::exp(rng.normal(0.0, 0.4));
    double yy = std::exp(rng.normal(0.3, 0.4));
    double xe = std::exp(rng.normal(-0.2, 0.4));
    out << "obs," << format_double(xc) << ',' << format_double(yy) << ','
        << format_double(xe) << '\n';
  }
  for (int i = 0; i < 30; ++i) {
    double xc = std::exp(rng.normal(1.0, 0.4));
    double yy = std::exp(rng.normal(0.8, 0.4));
    double xe = std::exp(rng.normal(0.1, 0.4));
    out << "intv," << format_double(xc) << ',' << format_double(yy) << ','
        << format_double(xe) << '\n';
  }
  out << "intv,1.0,2.0,-0.5\n";   // dropped under log transform
  out << "washout,1.0,1.0,1.0\n"; // foreign domain value
  return path;
}

RealDataSource fixture_source() {
  RealDataSource src;
  src.csv_path = write_real_fixture();
  src.cause_columns = {"xc"};
  src.target_column = "yy";
  src.effect_columns = {"xe"};
  src.domain_column = "cond";
  src.source_value = "obs";
  src.target_value = "intv";
  src.log_transform = true;
  src.n_test_reserved = 10;
  return src;
}

ExperimentGrid small_class_grid(std::uint64_t seed) {
  ExperimentGrid grid;
  grid.source = ClassScmConfig{-1.0, 0.0, -0.5, 0.5};
  grid.n_s_list = {8};
  grid.n_t_list = {0, 8};
  grid.replicates = 6;
  grid.n_test = 50;
  grid.master_seed = seed;
  grid.estimators = {parse_estimator_spec("S", Task::classification),
                     parse_estimator_spec("P", Task::classification)};
  return grid;
}

}  // namespace

TEST_CASE("estimator spec parsing") {
  auto s = parse_estimator_spec("S", Task::classification);
  CHECK(s.kind == EstimatorKind::supervised);
  CHECK(s.tag == "S");
  auto p_class = parse_estimator_spec("P", Task::classification);
  CHECK(p_class.lambda.kind == LambdaPolicy::Kind::equal_weight);
  auto p_regr = parse_estimator_spec("P", Task::regression);
  CHECK(p_regr.lambda.kind == LambdaPolicy::Kind::fixed);
  CHECK(p_regr.lambda.fixed_value == 0.8);
  auto p_fixed = parse_estimator_spec("P:fixed:0.3", Task::classification);
  CHECK(p_fixed.lambda.fixed_value == 0.3);
  CHECK(p_fixed.tag == "P:fixed:0.3");
  auto lr = parse_estimator_spec("LR", Task::regression);
  CHECK(lr.kind == EstimatorKind::joint_regression);
  CHECK_THROWS_AS(parse_estimator_spec("Q", Task::classification),
                  std::invalid_argument);
}

TEST_CASE("grid validation") {
  ExperimentGrid grid = small_class_grid(1);
  grid.n_t_list = {8, 0};
  CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
  grid = small_class_grid(1);
  grid.estimators.push_back(parse_estimator_spec("S", Task::classification));
  CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
  grid = small_class_grid(1);
  grid.replicates = 0;
  CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
}

TEST_CASE("S and P agree replicate-by-replicate when n_T = 0") {
  GridResult result = run_grid(small_class_grid(7), 2);
  std::size_t checked = 0;
  for (const auto& r : result.records) {
    if (r.n_t != 0 || r.estimator != "S") continue;
    for (const auto& q : result.records) {
      if (q.n_t == 0 && q.estimator == "P" && q.replicate == r.replicate &&
          q.metric == r.metric) {
        CHECK(q.value == r.value);
        ++checked;
      }
    }
  }
  CHECK(checked == 12);  // 6 replicates x 2 metrics
}

TEST_CASE("grid output is byte-identical across runs and thread counts") {
  auto dir = temp_dir();
  GridResult a = run_grid(small_class_grid(21), 1);
  GridResult b = run_grid(small_class_grid(21), 4);
  write_records_csv(dir / "rec_a.csv", a.records);
  write_records_csv(dir / "rec_b.csv", b.records);
  CHECK(file_bytes(dir / "rec_a.csv") == file_bytes(dir / "rec_b.csv"));
  write_aggregate_csv(dir / "agg_a.csv", a.aggregate_rows);
  write_aggregate_csv(dir / "agg_b.csv", b.aggregate_rows);
  CHECK(file_bytes(dir / "agg_a.csv") == file_bytes(dir / "agg_b.csv"));

  GridResult c = run_grid(small_class_grid(21), 3);
  write_records_csv(dir / "rec_c.csv", c.records);
  CHECK(file_bytes(dir / "rec_a.csv") == file_bytes(dir / "rec_c.csv"));
}

TEST_CASE("every grid cell yields exactly one record per metric") {
  ExperimentGrid grid = small_class_grid(3);
  grid.estimators.push_back(parse_estimator_spec("LR", Task::classification));
  GridResult result = run_grid(grid, 2);
  // S and P emit error_rate + nll, LR emits error_rate only
  CHECK(result.records.size() == 2 * 6 * (2 + 2 + 1));
  std::set<std::string> keys;
  for (const auto& r : result.records) {
    std::string key = std::to_string(r.n_s) + "/" + std::to_string(r.n_t) + "/" +
                      std::to_string(r.replicate) + "/" + r.estimator + "/" +
                      r.metric;
    CHECK(keys.insert(key).second);
    CHECK(std::isfinite(r.value));
  }
}

TEST_CASE("records CSV round trip") {
  auto dir = temp_dir();
  GridResult result = run_grid(small_class_grid(5), 2);
  write_records_csv(dir / "roundtrip.csv", result.records);
  auto back = read_records_csv(dir / "roundtrip.csv");
  REQUIRE(back.size() == result.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].value == result.records[i].value);
    CHECK(back[i].estimator == result.records[i].estimator);
    CHECK(back[i].replicate == result.records[i].replicate);
  }
}

TEST_CASE("compare pairs replicates and delegates to the t-test") {
  GridResult result = run_grid(small_class_grid(9), 2);
  auto self = compare(result.records, "S", "S", "error_rate", 8, 8);
  CHECK(self.p_two_sided == 1.0);
  auto sp = compare(result.records, "S", "P", "error_rate", 8, 8);
  CHECK(sp.dof == 5);
  CHECK_THROWS_AS((void)compare(result.records, "S", "WS", "error_rate", 8, 8),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)compare(result.records, "S", "P", "error_rate", 8, 999),
                  std::invalid_argument);

  // a single replicate cannot feed the t-test
  ExperimentGrid tiny = small_class_grid(13);
  tiny.replicates = 1;
  GridResult one = run_grid(tiny, 1);
  CHECK_THROWS_AS((void)compare(one.records, "S", "P", "error_rate", 8, 8),
                  std::invalid_argument);
}

TEST_CASE("real loader: log transform, determinism, disjoint splits") {
  RealDataSource src = fixture_source();
  LoadReport report;
  auto [ds, test] = load_real(src, 12, 5, 77, &report);
  CHECK(report.dropped_nonpositive == 1);
  CHECK(report.ignored_domain == 1);
  CHECK(ds.source.size() == 12);
  CHECK(ds.target.size() == 5);
  CHECK(test.size() == 10);

  // identical seed picks identical rows
  auto [ds2, test2] = load_real(src, 12, 5, 77, nullptr);
  for (std::size_t i = 0; i < ds.source.size(); ++i) {
    CHECK(ds.source[i].x_c == ds2.source[i].x_c);
    CHECK(ds.source[i].y == ds2.source[i].y);
  }
  for (std::size_t i = 0; i < test.size(); ++i) {
    CHECK(test[i].x_c == test2[i].x_c);
  }

  // reserved test rows and unlabelled rows never overlap
  std::set<std::pair<double, double>> seen;
  for (const auto& r : test) seen.insert({r.x_c[0], r.x_e[0]});
  for (const auto& r : ds.target) {
    CHECK_FALSE(seen.count({r.x_c[0], r.x_e[0]}));
  }
}

TEST_CASE("real loader: ln 1 = 0 and boundary requests") {
  auto path = temp_dir() / "tiny_real.csv";
  std::ofstream(path) << "cond,xc,yy,xe\n"
                      << "obs,1.0,1.0,1.0\n"
                      << "obs,2.0,2.0,2.0\n"
                      << "intv,1.0,1.0,1.0\n"
                      << "intv,2.0,2.0,2.0\n"
                      << "intv,3.0,3.0,3.0\n";
  RealDataSource src;
  src.csv_path = path;
  src.cause_columns = {"xc"};
  src.target_column = "yy";
  src.effect_columns = {"xe"};
  src.domain_column = "cond";
  src.source_value = "obs";
  src.target_value = "intv";
  src.log_transform = true;
  src.n_test_reserved = 2;

  auto [ds, test] = load_real(src, 1, 1, 5);
  bool found_zero = false;
  for (const auto& r : test) {
    if (r.x_c[0] == 0.0 && r.y == 0.0) found_zero = true;
  }
  if (!found_zero) {
    found_zero = ds.target.size() == 1 && ds.target[0].x_c[0] == 0.0;
  }
  CHECK(ds.source.size() == 1);
  // n_T equal to the remaining rows succeeds, one more fails
  CHECK_NOTHROW((void)load_real(src, 2, 1, 5));
  CHECK_THROWS_AS((void)load_real(src, 2, 2, 5), std::invalid_argument);
  CHECK_THROWS_AS((void)load_real(src, 3, 0, 5), std::invalid_argument);

  RealDataSource missing = src;
  missing.target_column = "nope";
  CHECK_THROWS_AS((void)load_real(missing, 1, 1, 5), std::invalid_argument);
}

TEST_CASE("real-data grid runs end to end") {
  RealDataSource src = fixture_source();
  src.n_test_reserved = 8;
  ExperimentGrid grid;
  grid.source = src;
  grid.n_s_list = {6};
  grid.n_t_list = {0, 8};
  grid.replicates = 4;
  grid.master_seed = 11;
  grid.estimators = {parse_estimator_spec("S", Task::regression),
                     parse_estimator_spec("P", Task::regression),
                     parse_estimator_spec("LR", Task::regression)};
  GridResult result = run_grid(grid, 2);
  CHECK(result.records.size() == 2 * 4 * (2 + 2 + 1));
  for (const auto& r : result.records) CHECK(std::isfinite(r.value));
}

TEST_CASE("bayes error: quadrature oracle when effects are uninformative") {
  ClassScmConfig cfg;
  cfg.mu_c = -1.0;
  cfg.m = 0.0;
  cfg.mu_0 = cfg.mu_1 = 0.0;
  cfg.allow_uninformative_effects = true;
  // target causes are N(1, 1); error of the true-parameter rule is
  // E[min(sigma(x), 1 - sigma(x))]
  auto integrand = [](double x) {
    double s = sigmoid(x);
    return normal_pdf(x, 1.0, 1.0) * std::min(s, 1.0 - s);
  };
  double expected = oracle::adaptive_simpson(integrand, -11.0, 13.0, 1e-12);
  double estimate = bayes_error(cfg, 400000, 2718);
  CHECK(std::fabs(estimate - expected) < 0.005);
}

TEST_CASE("bayes error: widely separated classes are nearly deterministic") {
  ClassScmConfig cfg;
  cfg.mu_c = -1.0;
  cfg.m = -30.0;  // labels almost surely 1
  cfg.mu_0 = -10.0;
  cfg.mu_1 = 10.0;
  CHECK(bayes_error(cfg, 200000, 3) < 0.001);
}
