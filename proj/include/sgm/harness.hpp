#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sgm/datagen.hpp"
#include "sgm/dataset.hpp"
#include "sgm/estimators.hpp"
#include "sgm/evalstats.hpp"

namespace sgm {

// Two-domain CSV with named columns; rows are split by the value of the
// domain column and subsampled without replacement per replicate.
struct RealDataSource {
  std::filesystem::path csv_path;
  std::vector<std::string> cause_columns;
  std::string target_column;
  std::vector<std::string> effect_columns;
  std::string domain_column;
  std::string source_value = "0";
  std::string target_value = "1";
  bool log_transform = false;
  std::size_t n_test_reserved = 200;
  Task task = Task::regression;
};

struct LoadReport {
  std::size_t dropped_nonpositive = 0;  // log transform on values <= 0
  std::size_t ignored_domain = 0;       // rows matching neither domain value
};

// Samples n_S source rows, reserves n_test_reserved target rows as the test
// set, then draws n_T unlabelled rows from the remaining target rows. The
// three index sets are pairwise disjoint; identical seeds pick identical
// rows.
std::pair<DomainDataset, TestSet> load_real(const RealDataSource& source,
                                            std::size_t n_s, std::size_t n_t,
                                            std::uint64_t seed,
                                            LoadReport* report = nullptr);

// One estimator column in the grid: the tag is the CLI spelling and is used
// verbatim in metric records ("S", "WS", "P", "P:fixed:0.8", "LR", ...).
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::supervised;
  LambdaPolicy lambda;
  std::string tag;
};

// "S" | "WS" | "P" | "P:<lambda-policy>" | "LR"; bare P defaults to the
// equal-weight policy for classification and fixed 0.8 for regression.
EstimatorSpec parse_estimator_spec(const std::string& text, Task task);

struct ExperimentGrid {
  std::variant<ClassScmConfig, RegrScmConfig, BayesNetConfig, RealDataSource>
      source;
  std::vector<std::size_t> n_s_list;
  std::vector<std::size_t> n_t_list;  // must be sorted ascending
  std::size_t replicates = 500;
  std::size_t n_test = 1000;          // synthetic sources only
  std::vector<EstimatorSpec> estimators;
  bool restricted = false;            // LinGauss sign constraints
  std::uint64_t master_seed = 0;
  FitOptions fit_options;

  Task task() const;
  void validate() const;
};

struct GridResult {
  std::vector<MetricRecord> records;
  std::vector<AggregateRow> aggregate_rows;
};

// Runs every (n_S, n_T, replicate) cell: one drawn dataset shared by all
// estimators, metrics evaluated on a fresh target-domain test set. Output is
// sorted by (n_S, n_T, replicate, estimator position, metric) and is
// byte-identical for any worker count. threads = 0 uses the hardware count.
GridResult run_grid(const ExperimentGrid& grid, unsigned threads = 0);

// Pairs per-replicate values of two estimators and runs the paired t-test.
PairedTestResult compare(std::span<const MetricRecord> records,
                         const std::string& estimator_a,
                         const std::string& estimator_b,
                         const std::string& metric, std::size_t n_s,
                         std::size_t n_t);

// Monte Carlo error of the true-parameter classifier on target-domain draws.
double bayes_error(const ClassScmConfig& cfg, std::size_t n_mc,
                   std::uint64_t seed);

// CSV: `replicate,n_S,n_T,estimator,metric,value`
void write_records_csv(const std::filesystem::path& path,
                       std::span<const MetricRecord> records);
std::vector<MetricRecord> read_records_csv(const std::filesystem::path& path);

}  // namespace sgm
