#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sgm/evalstats.hpp"
#include "sgm/rng.hpp"

using namespace sgm;

TEST_CASE("error rate counts mismatches") {
  std::vector<int> a{1, 0, 1, 1}, b{1, 1, 1, 0};
  CHECK(error_rate(a, b) == 0.5);
  CHECK(error_rate(a, a) == 0.0);
  std::vector<int> flipped{0, 1, 0, 0};
  CHECK(error_rate(a, flipped) == 1.0);
  std::vector<int> shorter{1};
  CHECK_THROWS_AS((void)error_rate(a, shorter), std::invalid_argument);
  std::vector<int> empty;
  CHECK_THROWS_AS((void)error_rate(empty, empty), std::invalid_argument);
}

TEST_CASE("rmse arithmetic and shift invariance") {
  std::vector<double> p{0.0, 0.0}, t{3.0, 4.0};
  CHECK(rmse(p, t) == doctest::Approx(3.5355339059327378).epsilon(1e-15));
  CHECK(rmse(t, t) == 0.0);
  std::vector<double> ps{10.0, 10.0}, ts{13.0, 14.0};
  CHECK(rmse(ps, ts) == doctest::Approx(rmse(p, t)).epsilon(1e-15));
}

TEST_CASE("semi-generative NLL is the negated mean joint log-density") {
  GaussClassParams params{0.0, -1.0, 1.0};
  TestSet rows = {{{0.0}, 1.0, {1.0}}, {{0.0}, 0.0, {-1.0}}};
  CHECK(semi_generative_nll(params, rows) ==
        doctest::Approx(1.612085713764618).epsilon(1e-12));
  TestSet single = {rows[0]};
  CHECK(semi_generative_nll(params, single) ==
        doctest::Approx(-log_joint(params, rows[0].x_c, 1.0, rows[0].x_e))
            .epsilon(1e-15));
}

TEST_CASE("incomplete beta matches closed forms") {
  // I_x(2,3) = x^2 (6 - 8x + 3x^2)
  for (double x : {0.1, 0.35, 0.7, 0.95}) {
    double expected = x * x * (6.0 - 8.0 * x + 3.0 * x * x);
    CHECK(regularized_incomplete_beta(2.0, 3.0, x) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(regularized_incomplete_beta(4.5, 0.5, 0.3) ==
        doctest::Approx(0.001322950584267495).epsilon(1e-10));
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  CHECK_THROWS_AS((void)regularized_incomplete_beta(-1.0, 1.0, 0.5),
                  std::invalid_argument);
}

TEST_CASE("student t CDF identities") {
  CHECK(student_t_cdf(0.0, 9.0) == 0.5);
  for (double t : {0.17, 1.0, 2.5, 7.0}) {
    for (double dof : {1.0, 4.0, 9.0, 33.0}) {
      CHECK(student_t_cdf(t, dof) + student_t_cdf(-t, dof) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  // dof -> infinity approaches the standard normal
  for (double t : {-2.0, -0.5, 0.3, 1.5}) {
    CHECK(std::fabs(student_t_cdf(t, 10000.0) - oracle::normal_cdf(t)) < 1e-4);
  }
}

TEST_CASE("paired t-test on the classic 5% quantile of dof 9") {
  // differences with sample sd s; shift gives t = 2.262 exactly
  std::vector<double> spread;
  for (double e = -4.5; e <= 4.5; e += 1.0) spread.push_back(e);
  double ss = 0.0;
  for (double e : spread) ss += e * e;
  double sd = std::sqrt(ss / 9.0);
  double shift = 2.262 * sd / std::sqrt(10.0);
  std::vector<double> a, b;
  for (double e : spread) {
    a.push_back(shift + e);
    b.push_back(0.0);
  }
  auto res = paired_t_test(a, b);
  CHECK(res.dof == 9);
  CHECK(res.t_stat == doctest::Approx(2.262).epsilon(1e-9));
  CHECK(std::fabs(res.p_two_sided - 0.050) < 0.001);

  // numeric integration of the t density as an independent oracle
  double dof = 9.0;
  double norm = std::exp(std::lgamma(0.5 * (dof + 1.0)) -
                         std::lgamma(0.5 * dof)) /
                std::sqrt(dof * std::acos(-1.0));
  auto density = [&](double y) {
    return norm * std::pow(1.0 + y * y / dof, -0.5 * (dof + 1.0));
  };
  double tail = oracle::adaptive_simpson(density, 2.262, 300.0, 1e-12);
  CHECK(res.p_two_sided == doctest::Approx(2.0 * tail).epsilon(1e-7));
}

TEST_CASE("paired t-test degenerate rules and antisymmetry") {
  std::vector<double> a{1.0, 2.0, 3.0}, same{1.0, 2.0, 3.0};
  auto equal_res = paired_t_test(a, same);
  CHECK(equal_res.t_stat == 0.0);
  CHECK(equal_res.p_two_sided == 1.0);

  std::vector<double> ones{1.0, 1.0, 1.0, 1.0, 1.0}, zeros(5, 0.0);
  auto shifted = paired_t_test(ones, zeros);
  CHECK(shifted.p_two_sided == 0.0);
  CHECK(std::isinf(shifted.t_stat));
  CHECK(shifted.t_stat > 0.0);

  std::vector<double> x{0.3, -0.2, 0.9, 0.1}, y{0.1, 0.2, 0.4, -0.3};
  auto xy = paired_t_test(x, y);
  auto yx = paired_t_test(y, x);
  CHECK(xy.t_stat == -yx.t_stat);
  CHECK(xy.p_two_sided == yx.p_two_sided);
  CHECK(one_sided_p(xy) == doctest::Approx(0.5 * xy.p_two_sided).epsilon(1e-15));

  std::vector<double> one{1.0};
  CHECK_THROWS_AS((void)paired_t_test(one, one), std::invalid_argument);
  std::vector<double> mismatched{1.0, 2.0};
  CHECK_THROWS_AS((void)paired_t_test(mismatched, one), std::invalid_argument);
}

TEST_CASE("aggregate basics") {
  std::vector<MetricRecord> records = {
      {0, 8, 4, "S", "error_rate", 1.0},
      {1, 8, 4, "S", "error_rate", 2.0},
      {2, 8, 4, "S", "error_rate", 3.0},
      {0, 8, 4, "P", "error_rate", 0.25},
  };
  auto rows = aggregate(records);
  REQUIRE(rows.size() == 2);
  // sorted by (n_S, n_T, estimator, metric): P before S
  CHECK(rows[0].estimator == "P");
  CHECK(rows[0].mean == 0.25);
  CHECK(rows[0].std_dev == 0.0);
  CHECK(rows[0].count == 1);
  CHECK(rows[1].mean == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rows[1].std_dev == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rows[1].count == 3);

  std::reverse(records.begin(), records.end());
  auto rows2 = aggregate(records);
  CHECK(rows2[1].mean == rows[1].mean);
  CHECK(rows2[1].std_dev == rows[1].std_dev);

  CHECK_THROWS_AS((void)aggregate(std::vector<MetricRecord>{}),
                  std::invalid_argument);
}

TEST_CASE("running stats match a two-pass reference on a million values") {
  sgm::Rng rng(8675309);
  std::vector<double> values;
  values.reserve(1000000);
  RunningStat rs;
  for (int i = 0; i < 1000000; ++i) {
    double v = rng.normal(3.0, 2.5);
    values.push_back(v);
    rs.add(v);
  }
  auto ref = oracle::two_pass_stats(values);
  CHECK(std::fabs(rs.mean - ref.mean) <= 1e-12 * std::fabs(ref.mean));
  CHECK(std::fabs(rs.sample_std() - ref.sample_std) <=
        1e-12 * ref.sample_std);
}

TEST_CASE("running stat merge is associative enough for parallel partials") {
  sgm::Rng rng(99);
  std::vector<double> values;
  for (int i = 0; i < 3000; ++i) values.push_back(rng.uniform(-5.0, 5.0));
  RunningStat whole;
  for (double v : values) whole.add(v);
  RunningStat left, mid, right;
  for (int i = 0; i < 1000; ++i) left.add(values[i]);
  for (int i = 1000; i < 1700; ++i) mid.add(values[i]);
  for (int i = 1700; i < 3000; ++i) right.add(values[i]);
  RunningStat merged = left;
  merged.merge(mid);
  merged.merge(right);
  CHECK(merged.count == whole.count);
  CHECK(merged.mean == doctest::Approx(whole.mean).epsilon(1e-12));
  CHECK(merged.sample_std() == doctest::Approx(whole.sample_std()).epsilon(1e-12));
}

TEST_CASE("aggregate CSV round trip") {
  auto dir = std::filesystem::temp_directory_path() / "sgm_tests";
  std::filesystem::create_directories(dir);
  auto path = dir / "aggregate.csv";
  std::vector<AggregateRow> rows = {
      {8, 0, "S", "error_rate", 0.25, 0.03125, 500},
      {8, 256, "P", "nll", 1.532, 0.144, 500},
  };
  write_aggregate_csv(path, rows);
  auto back = read_aggregate_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].mean == 0.25);
  CHECK(back[1].estimator == "P");
  CHECK(back[1].std_dev == 0.144);
  CHECK(back[1].count == 500);
}
