#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sgm/dataset.hpp"
#include "sgm/models.hpp"

namespace sgm {

struct MetricRecord {
  std::size_t replicate = 0;
  std::size_t n_s = 0;
  std::size_t n_t = 0;
  std::string estimator;
  std::string metric;  // error_rate | nll | rmse
  double value = 0.0;
};

struct PairedTestResult {
  double t_stat = 0.0;
  std::size_t dof = 0;
  double p_two_sided = 1.0;
  double mean_diff = 0.0;
};

double error_rate(std::span<const int> predictions, std::span<const int> labels);
double rmse(std::span<const double> predictions, std::span<const double> targets);

// Mean of -log_joint over labelled test rows.
template <class P>
double semi_generative_nll(const P& params, const TestSet& rows) {
  if (rows.empty()) {
    throw std::invalid_argument("semi_generative_nll: no rows");
  }
  double acc = 0.0;
  for (const auto& r : rows) acc += log_joint(params, r.x_c, r.y, r.x_e);
  return -acc / static_cast<double>(rows.size());
}

// Regularized incomplete beta I_x(a,b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double dof);

// Sample-sd paired t-test on a - b. Zero-variance differences follow the
// documented rule: p = 1 when the mean difference is 0, else p = 0.
PairedTestResult paired_t_test(std::span<const double> a,
                               std::span<const double> b);

// One-sided p-value for the alternative mean(a - b) > 0.
double one_sided_p(const PairedTestResult& r);

// Single-pass mean/variance accumulator with associative merge.
struct RunningStat {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const RunningStat& other);
  // Sample standard deviation (n-1); zero when count < 2.
  double sample_std() const;
};

struct AggregateRow {
  std::size_t n_s = 0;
  std::size_t n_t = 0;
  std::string estimator;
  std::string metric;
  double mean = 0.0;
  double std_dev = 0.0;
  std::size_t count = 0;
};

// Per-(n_S, n_T, estimator, metric) mean/std/count, rows sorted by that key.
std::vector<AggregateRow> aggregate(std::span<const MetricRecord> records);

// CSV: `n_S,n_T,estimator,metric,mean,std,count`
void write_aggregate_csv(const std::filesystem::path& path,
                         std::span<const AggregateRow> rows);
std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path);

}  // namespace sgm
