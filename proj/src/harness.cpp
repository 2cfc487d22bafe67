#include "sgm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

#include "sgm/rng.hpp"

namespace sgm {

// ---------------- real-data loader ----------------

std::pair<DomainDataset, TestSet> load_real(const RealDataSource& source,
                                            std::size_t n_s, std::size_t n_t,
                                            std::uint64_t seed,
                                            LoadReport* report) {
  if (source.cause_columns.empty() || source.effect_columns.empty() ||
      source.target_column.empty() || source.domain_column.empty()) {
    throw std::invalid_argument("load_real: column names are required");
  }
  CsvTable table = read_csv_table(source.csv_path);
  std::vector<std::size_t> cause_idx, effect_idx;
  for (const auto& name : source.cause_columns) {
    cause_idx.push_back(table.column_index(name));
  }
  for (const auto& name : source.effect_columns) {
    effect_idx.push_back(table.column_index(name));
  }
  std::size_t target_idx = table.column_index(source.target_column);
  std::size_t domain_idx = table.column_index(source.domain_column);

  LoadReport local;
  std::vector<LabelledRow> source_rows, target_rows;
  for (const auto& fields : table.rows) {
    const std::string& dom = fields[domain_idx];
    bool is_source = dom == source.source_value;
    bool is_target = dom == source.target_value;
    if (!is_source && !is_target) {
      ++local.ignored_domain;
      continue;
    }
    LabelledRow row;
    for (std::size_t i : cause_idx) row.x_c.push_back(parse_double(fields[i]));
    row.y = parse_double(fields[target_idx]);
    for (std::size_t i : effect_idx) row.x_e.push_back(parse_double(fields[i]));
    if (source.log_transform) {
      bool ok = row.y > 0.0;
      for (double v : row.x_c) ok = ok && v > 0.0;
      for (double v : row.x_e) ok = ok && v > 0.0;
      if (!ok) {
        ++local.dropped_nonpositive;
        continue;
      }
      for (double& v : row.x_c) v = std::log(v);
      row.y = std::log(row.y);
      for (double& v : row.x_e) v = std::log(v);
    }
    if (source.task == Task::classification && row.y != 0.0 && row.y != 1.0) {
      throw std::invalid_argument("load_real: non-binary label in classification data");
    }
    (is_source ? source_rows : target_rows).push_back(std::move(row));
  }
  if (report != nullptr) *report = local;

  if (n_s < 1 || n_s > source_rows.size()) {
    throw std::invalid_argument(
        "load_real: requested n_S=" + std::to_string(n_s) + " but only " +
        std::to_string(source_rows.size()) + " source rows are available");
  }
  if (source.n_test_reserved > target_rows.size()) {
    throw std::invalid_argument("load_real: fewer target rows than the reserved test count");
  }
  if (n_t > target_rows.size() - source.n_test_reserved) {
    throw std::invalid_argument(
        "load_real: requested n_T=" + std::to_string(n_t) + " but only " +
        std::to_string(target_rows.size() - source.n_test_reserved) +
        " target rows remain after the test reservation");
  }

  Rng rng(seed);
  DomainDataset ds;
  ds.task = source.task;
  for (std::size_t i : rng.sample_without_replacement(source_rows.size(), n_s)) {
    ds.source.push_back(source_rows[i]);
  }
  auto target_pick = rng.sample_without_replacement(
      target_rows.size(), source.n_test_reserved + n_t);
  TestSet test;
  for (std::size_t k = 0; k < target_pick.size(); ++k) {
    const LabelledRow& row = target_rows[target_pick[k]];
    if (k < source.n_test_reserved) {
      test.push_back(row);
    } else {
      ds.target.push_back({row.x_c, row.x_e});
    }
  }
  ds.validate();
  return {std::move(ds), std::move(test)};
}

// ---------------- grid plumbing ----------------

EstimatorSpec parse_estimator_spec(const std::string& text, Task task) {
  EstimatorSpec spec;
  spec.tag = text;
  if (text == "S") {
    spec.kind = EstimatorKind::supervised;
  } else if (text == "WS") {
    spec.kind = EstimatorKind::weighted;
  } else if (text == "LR") {
    spec.kind = EstimatorKind::joint_regression;
  } else if (text == "P" || text.rfind("P:", 0) == 0) {
    spec.kind = EstimatorKind::pooled;
    if (text == "P") {
      spec.lambda = task == Task::classification
                        ? LambdaPolicy{LambdaPolicy::Kind::equal_weight}
                        : LambdaPolicy{LambdaPolicy::Kind::fixed, 0.8};
    } else {
      spec.lambda = LambdaPolicy::parse(text.substr(2));
    }
  } else {
    throw std::invalid_argument("unknown estimator '" + text +
                                "' (expected S, WS, P[:policy], or LR)");
  }
  return spec;
}

Task ExperimentGrid::task() const {
  if (std::holds_alternative<RegrScmConfig>(source)) return Task::regression;
  if (const auto* real = std::get_if<RealDataSource>(&source)) return real->task;
  return Task::classification;
}

void ExperimentGrid::validate() const {
  if (n_s_list.empty() || n_t_list.empty()) {
    throw std::invalid_argument("grid: n_S and n_T lists must be non-empty");
  }
  for (std::size_t n : n_s_list) {
    if (n < 1) throw std::invalid_argument("grid: n_S values must be >= 1");
  }
  if (!std::is_sorted(n_t_list.begin(), n_t_list.end())) {
    throw std::invalid_argument("grid: n_T list must be sorted ascending");
  }
  if (replicates < 1) {
    throw std::invalid_argument("grid: replicates must be >= 1");
  }
  if (estimators.empty()) {
    throw std::invalid_argument("grid: at least one estimator required");
  }
  std::set<std::string> tags;
  for (const auto& e : estimators) {
    if (!tags.insert(e.tag).second) {
      throw std::invalid_argument("grid: duplicate estimator tag '" + e.tag + "'");
    }
  }
}

namespace {

std::vector<std::string> metric_names(Task task, EstimatorKind kind) {
  std::string headline = task == Task::classification ? "error_rate" : "rmse";
  if (kind == EstimatorKind::joint_regression) return {headline};
  return {headline, "nll"};
}

// Metrics of a fitted semi-generative model on a labelled test set.
template <class P>
void emit_model_metrics(const P& params, Task task, const TestSet& test,
                        std::size_t n_s, std::size_t n_t, std::size_t rep,
                        const std::string& tag,
                        std::vector<MetricRecord>& out) {
  if (task == Task::classification) {
    std::vector<int> preds, labels;
    preds.reserve(test.size());
    labels.reserve(test.size());
    for (const auto& r : test) {
      if constexpr (std::is_same_v<P, LinGaussParams>) {
        (void)r;
        throw std::logic_error("regression model on classification task");
      } else {
        preds.push_back(predict(params, r.x_c, r.x_e));
        labels.push_back(static_cast<int>(r.y));
      }
    }
    out.push_back({rep, n_s, n_t, tag, "error_rate", error_rate(preds, labels)});
  } else {
    std::vector<double> preds, targets;
    preds.reserve(test.size());
    targets.reserve(test.size());
    for (const auto& r : test) {
      if constexpr (std::is_same_v<P, LinGaussParams>) {
        preds.push_back(predict(params, r.x_c, r.x_e));
        targets.push_back(r.y);
      } else {
        throw std::logic_error("classification model on regression task");
      }
    }
    out.push_back({rep, n_s, n_t, tag, "rmse", rmse(preds, targets)});
  }
  out.push_back({rep, n_s, n_t, tag, "nll", semi_generative_nll(params, test)});
}

void emit_baseline_metrics(const JointLinearModel& model, Task task,
                           const TestSet& test, std::size_t n_s, std::size_t n_t,
                           std::size_t rep, const std::string& tag,
                           std::vector<MetricRecord>& out) {
  if (task == Task::classification) {
    std::vector<int> preds, labels;
    for (const auto& r : test) {
      preds.push_back(model.predict_label(r.x_c, r.x_e));
      labels.push_back(static_cast<int>(r.y));
    }
    out.push_back({rep, n_s, n_t, tag, "error_rate", error_rate(preds, labels)});
  } else {
    std::vector<double> preds, targets;
    for (const auto& r : test) {
      preds.push_back(model.predict_value(r.x_c, r.x_e));
      targets.push_back(r.y);
    }
    out.push_back({rep, n_s, n_t, tag, "rmse", rmse(preds, targets)});
  }
}

using DrawFn = std::function<std::pair<DomainDataset, TestSet>(
    std::size_t, std::size_t, std::uint64_t)>;

template <class P>
std::vector<MetricRecord> run_one_replicate(const ExperimentGrid& grid,
                                            const P& prototype,
                                            const DrawFn& draw,
                                            const WeightSource& weight_source,
                                            std::size_t n_s, std::size_t n_t,
                                            std::size_t rep) {
  std::vector<MetricRecord> out;
  std::uint64_t job_seed = Rng::derive(grid.master_seed, {n_s, n_t, rep});
  auto [ds, test] = draw(n_s, n_t, Rng::derive(job_seed, {0}));
  Task task = grid.task();
  for (std::size_t e = 0; e < grid.estimators.size(); ++e) {
    const EstimatorSpec& spec = grid.estimators[e];
    std::uint64_t fit_seed = Rng::derive(job_seed, {e + 1});
    if (spec.kind == EstimatorKind::joint_regression) {
      JointLinearModel lr = fit_joint_regression(ds, grid.fit_options.optim);
      emit_baseline_metrics(lr, task, test, n_s, n_t, rep, spec.tag, out);
    } else {
      FitOutput<P> fo = fit(prototype, ds, spec.kind, spec.lambda,
                            weight_source, grid.fit_options, fit_seed);
      emit_model_metrics(fo.params, task, test, n_s, n_t, rep, spec.tag, out);
    }
  }
  return out;
}

using JobFn =
    std::function<std::vector<MetricRecord>(std::size_t, std::size_t, std::size_t)>;

JobFn make_job_fn(const ExperimentGrid& grid) {
  if (const auto* cfg = std::get_if<ClassScmConfig>(&grid.source)) {
    ClassScmConfig c = *cfg;
    WeightSource ws = WeightSource::known(c);
    return [&grid, c, ws](std::size_t n_s, std::size_t n_t, std::size_t rep) {
      DrawFn draw = [c, &grid](std::size_t ns, std::size_t nt, std::uint64_t seed) {
        return gen_classification(c, ns, nt, grid.n_test, seed);
      };
      return run_one_replicate(grid, GaussClassParams{}, draw, ws, n_s, n_t, rep);
    };
  }
  if (const auto* cfg = std::get_if<RegrScmConfig>(&grid.source)) {
    RegrScmConfig c = *cfg;
    LinGaussParams proto;
    proto.restricted = grid.restricted;
    return [&grid, c, proto](std::size_t n_s, std::size_t n_t, std::size_t rep) {
      DrawFn draw = [c, &grid](std::size_t ns, std::size_t nt, std::uint64_t seed) {
        return gen_regression(c, ns, nt, grid.n_test, seed);
      };
      return run_one_replicate(grid, proto, draw, WeightSource::unit(), n_s, n_t,
                               rep);
    };
  }
  if (const auto* cfg = std::get_if<BayesNetConfig>(&grid.source)) {
    BayesNetConfig c = *cfg;
    DiscreteParams proto =
        DiscreteParams::zeros(c.cause_indices.size(), c.effect_indices.size());
    return [&grid, c, proto](std::size_t n_s, std::size_t n_t, std::size_t rep) {
      DrawFn draw = [c, &grid](std::size_t ns, std::size_t nt, std::uint64_t seed) {
        return gen_bayesnet_dataset(c, ns, nt, grid.n_test, seed);
      };
      return run_one_replicate(grid, proto, draw, WeightSource::unit(), n_s, n_t,
                               rep);
    };
  }
  const auto& real = std::get<RealDataSource>(grid.source);
  DrawFn draw = [real](std::size_t ns, std::size_t nt, std::uint64_t seed) {
    return load_real(real, ns, nt, seed);
  };
  if (real.task == Task::regression) {
    LinGaussParams proto;
    proto.restricted = grid.restricted;
    return [&grid, draw, proto](std::size_t n_s, std::size_t n_t, std::size_t rep) {
      return run_one_replicate(grid, proto, draw, WeightSource::unit(), n_s, n_t,
                               rep);
    };
  }
  return [&grid, draw](std::size_t n_s, std::size_t n_t, std::size_t rep) {
    return run_one_replicate(grid, GaussClassParams{}, draw, WeightSource::unit(),
                             n_s, n_t, rep);
  };
}

struct Job {
  std::size_t n_s, n_t, rep;
};

}  // namespace

GridResult run_grid(const ExperimentGrid& grid, unsigned threads) {
  grid.validate();
  const Task task = grid.task();

  bool weighted_without_known =
      !std::holds_alternative<ClassScmConfig>(grid.source) &&
      std::any_of(grid.estimators.begin(), grid.estimators.end(),
                  [](const EstimatorSpec& e) {
                    return e.kind == EstimatorKind::weighted;
                  });
  if (weighted_without_known) {
    std::cerr << "warning: WS has no known weights for this data source; "
                 "running with unit weights (degenerates to S)\n";
  }

  std::vector<Job> jobs;
  for (std::size_t n_s : grid.n_s_list) {
    for (std::size_t n_t : grid.n_t_list) {
      for (std::size_t rep = 0; rep < grid.replicates; ++rep) {
        jobs.push_back({n_s, n_t, rep});
      }
    }
  }

  JobFn job_fn = make_job_fn(grid);
  std::vector<std::vector<MetricRecord>> slots(jobs.size());
  std::vector<std::string> failures(jobs.size());

  auto run_job = [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      slots[i] = job_fn(job.n_s, job.n_t, job.rep);
    } catch (const std::exception& ex) {
      failures[i] = ex.what();
      slots[i].clear();
      for (const auto& spec : grid.estimators) {
        for (const auto& metric : metric_names(task, spec.kind)) {
          slots[i].push_back({job.rep, job.n_s, job.n_t, spec.tag, metric,
                              std::numeric_limits<double>::quiet_NaN()});
        }
      }
    }
  };

  unsigned n_workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  n_workers = std::max(1u, std::min<unsigned>(n_workers, jobs.size()));
  if (n_workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= jobs.size()) return;
          run_job(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!failures[i].empty()) {
      std::cerr << "replicate failure (n_S=" << jobs[i].n_s
                << ", n_T=" << jobs[i].n_t << ", replicate=" << jobs[i].rep
                << "): " << failures[i] << "\n";
    }
  }

  GridResult result;
  for (auto& slot : slots) {
    result.records.insert(result.records.end(), slot.begin(), slot.end());
  }
  std::map<std::string, std::size_t> estimator_pos;
  for (std::size_t e = 0; e < grid.estimators.size(); ++e) {
    estimator_pos[grid.estimators[e].tag] = e;
  }
  std::sort(result.records.begin(), result.records.end(),
            [&estimator_pos](const MetricRecord& a, const MetricRecord& b) {
              return std::tuple(a.n_s, a.n_t, a.replicate,
                                estimator_pos.at(a.estimator), a.metric) <
                     std::tuple(b.n_s, b.n_t, b.replicate,
                                estimator_pos.at(b.estimator), b.metric);
            });
  result.aggregate_rows = aggregate(result.records);
  return result;
}

PairedTestResult compare(std::span<const MetricRecord> records,
                         const std::string& estimator_a,
                         const std::string& estimator_b,
                         const std::string& metric, std::size_t n_s,
                         std::size_t n_t) {
  std::map<std::size_t, double> a_vals, b_vals;
  for (const auto& r : records) {
    if (r.n_s != n_s || r.n_t != n_t || r.metric != metric) continue;
    if (r.estimator == estimator_a) a_vals[r.replicate] = r.value;
    if (r.estimator == estimator_b) b_vals[r.replicate] = r.value;
  }
  if (a_vals.empty() || b_vals.empty()) {
    throw std::invalid_argument("compare: no records for the requested cell");
  }
  std::vector<double> a, b;
  for (const auto& [rep, va] : a_vals) {
    auto it = b_vals.find(rep);
    if (it == b_vals.end()) {
      throw std::invalid_argument("compare: replicate indices do not match");
    }
    a.push_back(va);
    b.push_back(it->second);
  }
  if (a.size() != b_vals.size()) {
    throw std::invalid_argument("compare: replicate indices do not match");
  }
  return paired_t_test(a, b);
}

double bayes_error(const ClassScmConfig& cfg, std::size_t n_mc,
                   std::uint64_t seed) {
  if (n_mc < 1) {
    throw std::invalid_argument("bayes_error: n_mc must be >= 1");
  }
  GaussClassParams truth{cfg.m, cfg.mu_0, cfg.mu_1};
  auto [ds, test] = gen_classification(cfg, 1, 0, n_mc, seed);
  std::size_t wrong = 0;
  for (const auto& r : test) {
    if (predict(truth, r.x_c, r.x_e) != static_cast<int>(r.y)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(n_mc);
}

void write_records_csv(const std::filesystem::path& path,
                       std::span<const MetricRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << "replicate,n_S,n_T,estimator,metric,value\n";
  for (const auto& r : records) {
    out << r.replicate << ',' << r.n_s << ',' << r.n_t << ',' << r.estimator
        << ',' << r.metric << ',' << format_double(r.value) << '\n';
  }
}

std::vector<MetricRecord> read_records_csv(const std::filesystem::path& path) {
  CsvTable table = read_csv_table(path);
  const std::vector<std::string> expected = {"replicate", "n_S",    "n_T",
                                             "estimator", "metric", "value"};
  if (table.header != expected) {
    throw std::invalid_argument("records CSV: unexpected header");
  }
  std::vector<MetricRecord> records;
  for (const auto& f : table.rows) {
    MetricRecord r;
    r.replicate = static_cast<std::size_t>(std::stoull(f[0]));
    r.n_s = static_cast<std::size_t>(std::stoull(f[1]));
    r.n_t = static_cast<std::size_t>(std::stoull(f[2]));
    r.estimator = f[3];
    r.metric = f[4];
    r.value = parse_double(f[5]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace sgm
