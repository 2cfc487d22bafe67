// Command-line front end: generate two-domain datasets, fit the estimators,
// predict, run experiment grids, and test estimator differences.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgm/datagen.hpp"
#include "sgm/dataset.hpp"
#include "sgm/estimators.hpp"
#include "sgm/evalstats.hpp"
#include "sgm/harness.hpp"
#include "sgm/models.hpp"

namespace {

namespace fs = std::filesystem;

struct GlobalOpts {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out_dir = ".";
};

// Flat key=value config file support: keys are the long option names
// without the leading dashes; values given on the command line win.
class ConfigMap {
 public:
  void bind(CLI::Option* opt, std::function<void(const std::string&)> set) {
    std::string key = opt->get_name();
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    entries_[key] = {opt, std::move(set)};
  }

  void apply_file(const std::string& path) const {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
        line.pop_back();
      }
      std::size_t start = line.find_first_not_of(" \t");
      if (start == std::string::npos) continue;
      line = line.substr(start);
      auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": expected key=value");
      }
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        throw std::runtime_error("config: unknown key '" + key + "'");
      }
      if (it->second.opt->count() > 0) continue;  // command line overrides
      it->second.set(value);
    }
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::function<void(const std::string&)> set;
  };
  std::map<std::string, Entry> entries_;
};

void bind_double(ConfigMap& cfg, CLI::Option* opt, double* target) {
  cfg.bind(opt, [target](const std::string& v) { *target = sgm::parse_double(v); });
}

void bind_size(ConfigMap& cfg, CLI::Option* opt, std::size_t* target) {
  cfg.bind(opt, [target](const std::string& v) {
    *target = static_cast<std::size_t>(std::stoull(v));
  });
}

void bind_string(ConfigMap& cfg, CLI::Option* opt, std::string* target) {
  cfg.bind(opt, [target](const std::string& v) { *target = v; });
}

void bind_bool(ConfigMap& cfg, CLI::Option* opt, bool* target) {
  cfg.bind(opt, [target](const std::string& v) {
    if (v == "1" || v == "true") {
      *target = true;
    } else if (v == "0" || v == "false") {
      *target = false;
    } else {
      throw std::runtime_error("config: expected a boolean, got '" + v + "'");
    }
  });
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

void bind_size_list(ConfigMap& cfg, CLI::Option* opt,
                    std::vector<std::size_t>* target) {
  cfg.bind(opt, [target](const std::string& v) {
    target->clear();
    for (const auto& part : split_list(v)) {
      target->push_back(static_cast<std::size_t>(std::stoull(part)));
    }
  });
}

void bind_string_list(ConfigMap& cfg, CLI::Option* opt,
                      std::vector<std::string>* target) {
  cfg.bind(opt, [target](const std::string& v) { *target = split_list(v); });
}

std::uint64_t resolve_seed(const GlobalOpts& g) {
  std::uint64_t seed;
  if (g.seed) {
    seed = *g.seed;
  } else {
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  std::cout << "resolved seed: " << seed << "\n";
  return seed;
}

fs::path out_path(const GlobalOpts& g, const std::string& name) {
  fs::path dir(g.out_dir);
  if (!dir.empty()) fs::create_directories(dir);
  return dir / name;
}

struct ClassFlags {
  double mu_c = -1.0;
  double m = 0.0;
  double mu0 = -0.5;
  double mu1 = 0.5;
  bool allow_equal_means = false;

  sgm::ClassScmConfig config() const {
    return {mu_c, m, mu0, mu1, allow_equal_means};
  }

  void attach(CLI::App* cmd, ConfigMap* cfg = nullptr) {
    auto* o1 = cmd->add_option("--mu-c", mu_c, "cause-location magnitude");
    auto* o2 = cmd->add_option("--m", m, "label threshold");
    auto* o3 = cmd->add_option("--mu0", mu0, "effect mean for Y=0");
    auto* o4 = cmd->add_option("--mu1", mu1, "effect mean for Y=1");
    auto* o5 = cmd->add_flag("--allow-equal-means", allow_equal_means,
                             "permit mu0 == mu1 (uninformative effects)");
    if (cfg != nullptr) {
      bind_double(*cfg, o1, &mu_c);
      bind_double(*cfg, o2, &m);
      bind_double(*cfg, o3, &mu0);
      bind_double(*cfg, o4, &mu1);
      bind_bool(*cfg, o5, &allow_equal_means);
    }
  }
};

struct RegrFlags {
  sgm::RegrScmConfig cfg;

  void attach(CLI::App* cmd, ConfigMap* map = nullptr) {
    auto* o1 = cmd->add_option("--a", cfg.a, "intercept of Y|X_C");
    auto* o2 = cmd->add_option("--b", cfg.b, "slope of Y|X_C");
    auto* o3 = cmd->add_option("--c", cfg.c, "intercept of X_E|Y");
    auto* o4 = cmd->add_option("--d", cfg.d, "slope of X_E|Y");
    auto* o5 = cmd->add_option("--sigma-y", cfg.sigma_y, "noise std of Y");
    auto* o6 = cmd->add_option("--sigma-e", cfg.sigma_e, "noise std of X_E");
    auto* o7 =
        cmd->add_option("--source-mean", cfg.cause_source.mean, "source cause mean");
    auto* o8 = cmd->add_option("--source-sd", cfg.cause_source.sd, "source cause sd");
    auto* o9 =
        cmd->add_option("--target-mean", cfg.cause_target.mean, "target cause mean");
    auto* o10 = cmd->add_option("--target-sd", cfg.cause_target.sd, "target cause sd");
    if (map != nullptr) {
      bind_double(*map, o1, &cfg.a);
      bind_double(*map, o2, &cfg.b);
      bind_double(*map, o3, &cfg.c);
      bind_double(*map, o4, &cfg.d);
      bind_double(*map, o5, &cfg.sigma_y);
      bind_double(*map, o6, &cfg.sigma_e);
      bind_double(*map, o7, &cfg.cause_source.mean);
      bind_double(*map, o8, &cfg.cause_source.sd);
      bind_double(*map, o9, &cfg.cause_target.mean);
      bind_double(*map, o10, &cfg.cause_target.sd);
    }
  }
};

struct RealFlags {
  std::string data_csv;
  std::vector<std::string> cause_cols;
  std::vector<std::string> effect_cols;
  std::string target_col;
  std::string domain_col;
  std::string source_val = "0";
  std::string target_val = "1";
  bool log_transform = false;
  std::size_t n_test_reserved = 200;

  sgm::RealDataSource source(sgm::Task task) const {
    sgm::RealDataSource s;
    s.csv_path = data_csv;
    s.cause_columns = cause_cols;
    s.effect_columns = effect_cols;
    s.target_column = target_col;
    s.domain_column = domain_col;
    s.source_value = source_val;
    s.target_value = target_val;
    s.log_transform = log_transform;
    s.n_test_reserved = n_test_reserved;
    s.task = task;
    return s;
  }

  void attach(CLI::App* cmd, ConfigMap* cfg = nullptr) {
    auto* o1 =
        cmd->add_option("--data-csv", data_csv, "two-domain CSV with named columns");
    auto* o2 = cmd->add_option("--cause-cols", cause_cols, "cause column names")
                   ->delimiter(',');
    auto* o3 = cmd->add_option("--effect-cols", effect_cols, "effect column names")
                   ->delimiter(',');
    auto* o4 = cmd->add_option("--target-col", target_col, "label/target column name");
    auto* o5 = cmd->add_option("--domain-col", domain_col, "domain column name");
    auto* o6 =
        cmd->add_option("--source-val", source_val, "domain value marking source rows");
    auto* o7 =
        cmd->add_option("--target-val", target_val, "domain value marking target rows");
    auto* o8 = cmd->add_flag("--log-transform", log_transform,
                             "natural-log transform; non-positive rows are dropped");
    auto* o9 = cmd->add_option("--n-test-reserved", n_test_reserved,
                               "target rows reserved as test set");
    if (cfg != nullptr) {
      bind_string(*cfg, o1, &data_csv);
      bind_string_list(*cfg, o2, &cause_cols);
      bind_string_list(*cfg, o3, &effect_cols);
      bind_string(*cfg, o4, &target_col);
      bind_string(*cfg, o5, &domain_col);
      bind_string(*cfg, o6, &source_val);
      bind_string(*cfg, o7, &target_val);
      bind_bool(*cfg, o8, &log_transform);
      bind_size(*cfg, o9, &n_test_reserved);
    }
  }
};

struct OptimFlags {
  sgm::FitOptions fit;

  void attach(CLI::App* cmd, ConfigMap* cfg = nullptr) {
    auto* o1 =
        cmd->add_option("--max-iters", fit.optim.max_iters, "iteration cap per start");
    auto* o2 = cmd->add_option("--tol", fit.optim.tol, "gradient infinity-norm tolerance");
    auto* o3 = cmd->add_option("--starts", fit.pooled_starts, "multi-starts for pooled fits");
    auto* o4 =
        cmd->add_option("--perturb", fit.perturb_scale, "multi-start perturbation scale");
    if (cfg != nullptr) {
      bind_size(*cfg, o1, &fit.optim.max_iters);
      bind_double(*cfg, o2, &fit.optim.tol);
      bind_size(*cfg, o3, &fit.pooled_starts);
      bind_double(*cfg, o4, &fit.perturb_scale);
    }
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------- gen ----------------

struct GenArgs {
  std::string task = "class";
  ClassFlags cls;
  RegrFlags regr;
  std::string net_file;
  std::size_t n_s = 8;
  std::size_t n_t = 0;
  std::size_t n_test = 1000;
  std::string out = "data.csv";
  std::string out_test = "test.csv";
};

void run_gen(const GenArgs& a, const GlobalOpts& g) {
  std::uint64_t seed = resolve_seed(g);
  std::pair<sgm::DomainDataset, sgm::TestSet> drawn;
  if (a.task == "class") {
    drawn = sgm::gen_classification(a.cls.config(), a.n_s, a.n_t, a.n_test, seed);
  } else if (a.task == "regr") {
    drawn = sgm::gen_regression(a.regr.cfg, a.n_s, a.n_t, a.n_test, seed);
  } else if (a.task == "net") {
    auto net = sgm::load_bayesnet_config(a.net_file);
    drawn = sgm::gen_bayesnet_dataset(net, a.n_s, a.n_t, a.n_test, seed);
  } else {
    throw CLI::ValidationError("--task", "expected class|regr|net");
  }
  sgm::write_dataset_csv(out_path(g, a.out), drawn.first);
  sgm::write_labelled_csv(out_path(g, a.out_test), drawn.second);
  std::cout << "wrote " << out_path(g, a.out).string() << " (" << a.n_s
            << " source + " << a.n_t << " target rows) and "
            << out_path(g, a.out_test).string() << " (" << a.n_test
            << " labelled test rows)\n";
}

// ---------------- fit ----------------

struct FitArgs {
  std::string data;
  std::string model = "gauss";
  std::string estimator = "S";
  std::string lambda;
  std::string weights = "unit";
  double known_mu_c = -1.0;
  bool self_normalize = false;
  bool restricted = false;
  std::string out = "params.txt";
  OptimFlags optim;
};

template <class P>
void fit_and_write(const P& prototype, const sgm::DomainDataset& ds,
                   const FitArgs& a, const GlobalOpts& g, std::uint64_t seed) {
  bool pooled = a.estimator == "P" || a.estimator.rfind("P:", 0) == 0;
  sgm::EstimatorSpec spec = sgm::parse_estimator_spec(
      pooled && !a.lambda.empty() ? a.estimator + ":" + a.lambda : a.estimator,
      ds.task);
  sgm::WeightSource ws = sgm::WeightSource::unit();
  if (a.weights == "known") {
    sgm::ClassScmConfig cfg;
    cfg.mu_c = a.known_mu_c;
    cfg.allow_uninformative_effects = true;
    ws = sgm::WeightSource::known(cfg);
  } else if (a.weights.rfind("file:", 0) == 0) {
    std::vector<double> w;
    std::ifstream in(a.weights.substr(5));
    if (!in) throw std::runtime_error("cannot open weights file");
    double v;
    while (in >> v) w.push_back(v);
    ws = sgm::WeightSource::supplied(std::move(w), a.self_normalize);
  } else if (a.weights != "unit") {
    throw CLI::ValidationError("--weights", "expected unit|known|file:<path>");
  }
  auto fo = sgm::fit(prototype, ds, spec.kind, spec.lambda, ws, a.optim.fit, seed);
  write_text(out_path(g, a.out), sgm::serialize_params(fo.params));
  std::cout << "estimator " << spec.tag << ": objective "
            << sgm::format_double(fo.opt.value) << ", "
            << (fo.opt.best_converged() ? "converged" : "not converged") << " ("
            << fo.opt.n_evals << " evaluations";
  if (spec.kind == sgm::EstimatorKind::pooled) {
    std::cout << ", lambda " << sgm::format_double(fo.lambda);
  }
  std::cout << ")\n";
  if (fo.degenerate_weights) {
    std::cout << "note: WS ran with unit weights (degenerates to S)\n";
  }
  std::cout << "wrote " << out_path(g, a.out).string() << "\n";
}

void run_fit(const FitArgs& a, const GlobalOpts& g) {
  std::uint64_t seed = resolve_seed(g);
  if (a.estimator == "LR") {
    sgm::Task task = a.model == "lingauss" ? sgm::Task::regression
                                           : sgm::Task::classification;
    auto ds = sgm::read_dataset_csv(a.data, task);
    auto lr = sgm::fit_joint_regression(ds, a.optim.fit.optim);
    write_text(out_path(g, a.out), lr.serialize());
    std::cout << "estimator LR: " << (lr.converged ? "converged" : "not converged")
              << (lr.ill_conditioned ? ", ill-conditioned (jitter applied)" : "")
              << "\nwrote " << out_path(g, a.out).string() << "\n";
    return;
  }
  if (a.model == "gauss") {
    auto ds = sgm::read_dataset_csv(a.data, sgm::Task::classification);
    fit_and_write(sgm::GaussClassParams{}, ds, a, g, seed);
  } else if (a.model == "lingauss") {
    auto ds = sgm::read_dataset_csv(a.data, sgm::Task::regression);
    sgm::LinGaussParams proto;
    proto.restricted = a.restricted;
    fit_and_write(proto, ds, a, g, seed);
  } else if (a.model == "discrete") {
    auto ds = sgm::read_dataset_csv(a.data, sgm::Task::classification);
    fit_and_write(sgm::DiscreteParams::zeros(ds.dim_c(), ds.dim_e()), ds, a, g,
                  seed);
  } else {
    throw CLI::ValidationError("--model", "expected gauss|lingauss|discrete");
  }
}

// ---------------- predict ----------------

struct PredictArgs {
  std::string params;
  std::string data;
  std::string out = "predictions.csv";
};

void run_predict(const PredictArgs& a, const GlobalOpts& g) {
  std::string text = read_text(a.params);
  auto rows = sgm::read_feature_rows(a.data);
  std::string out;
  bool joint_linear = text.find("model=joint_linear") != std::string::npos;
  if (joint_linear) {
    auto model = sgm::JointLinearModel::parse(text);
    if (model.task == sgm::Task::classification) {
      out = "pred,p1\n";
      for (const auto& r : rows) {
        out += std::to_string(model.predict_label(r.x_c, r.x_e)) + "," +
               sgm::format_double(model.predict_proba(r.x_c, r.x_e)) + "\n";
      }
    } else {
      out = "pred\n";
      for (const auto& r : rows) {
        out += sgm::format_double(model.predict_value(r.x_c, r.x_e)) + "\n";
      }
    }
  } else {
    sgm::AnyParams params = sgm::parse_params_text(text);
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, sgm::LinGaussParams>) {
            out = "pred\n";
            for (const auto& r : rows) {
              out += sgm::format_double(sgm::predict(p, r.x_c, r.x_e)) + "\n";
            }
          } else {
            out = "pred,p1\n";
            for (const auto& r : rows) {
              out += std::to_string(sgm::predict(p, r.x_c, r.x_e)) + "," +
                     sgm::format_double(sgm::predict_proba(p, r.x_c, r.x_e)) +
                     "\n";
            }
          }
        },
        params);
  }
  write_text(out_path(g, a.out), out);
  std::cout << "wrote " << out_path(g, a.out).string() << " (" << rows.size()
            << " rows)\n";
}

// ---------------- curve ----------------

struct CurveArgs {
  std::string config_file;
  std::string task = "class";
  ClassFlags cls;
  RegrFlags regr;
  std::string net_file;
  RealFlags real;
  std::vector<std::size_t> n_s_list{8};
  std::vector<std::size_t> n_t_list{0, 4, 16, 64, 256};
  std::size_t replicates = 0;  // 0 = task default (500 class / 200 regr)
  std::size_t n_test = 1000;
  std::vector<std::string> estimators{"S", "P"};
  bool restricted = false;
  std::string records_name = "records.csv";
  std::string aggregate_name = "aggregate.csv";
  OptimFlags optim;
  ConfigMap config_map;
};

void run_curve(CurveArgs& a, const GlobalOpts& g) {
  if (!a.config_file.empty()) a.config_map.apply_file(a.config_file);
  std::uint64_t seed = resolve_seed(g);
  sgm::ExperimentGrid grid;
  if (a.task == "class") {
    grid.source = a.cls.config();
  } else if (a.task == "regr") {
    grid.source = a.regr.cfg;
  } else if (a.task == "net") {
    grid.source = sgm::load_bayesnet_config(a.net_file);
  } else if (a.task == "real") {
    grid.source = a.real.source(sgm::Task::regression);
  } else {
    throw CLI::ValidationError("--task", "expected class|regr|net|real");
  }
  grid.n_s_list = a.n_s_list;
  grid.n_t_list = a.n_t_list;
  grid.replicates = a.replicates != 0 ? a.replicates
                    : grid.task() == sgm::Task::classification ? 500
                                                               : 200;
  grid.n_test = a.n_test;
  grid.restricted = a.restricted;
  grid.master_seed = seed;
  grid.fit_options = a.optim.fit;
  for (const auto& e : a.estimators) {
    grid.estimators.push_back(sgm::parse_estimator_spec(e, grid.task()));
  }
  sgm::GridResult result = sgm::run_grid(grid, g.threads);
  auto records_path = out_path(g, a.records_name);
  auto aggregate_path = out_path(g, a.aggregate_name);
  sgm::write_records_csv(records_path, result.records);
  sgm::write_aggregate_csv(aggregate_path, result.aggregate_rows);
  std::cout << "wrote " << records_path.string() << " (" << result.records.size()
            << " records) and " << aggregate_path.string() << " ("
            << result.aggregate_rows.size() << " rows)\n";
}

// ---------------- ttest ----------------

struct TtestArgs {
  std::string records;
  std::string a = "S";
  std::string b = "P";
  std::string metric = "error_rate";
  std::size_t n_s = 8;
  std::size_t n_t = 256;
  bool one_sided = false;
};

void run_ttest(const TtestArgs& a) {
  auto records = sgm::read_records_csv(a.records);
  auto res = sgm::compare(records, a.a, a.b, a.metric, a.n_s, a.n_t);
  std::cout << "paired t-test of " << a.a << " vs " << a.b << " on " << a.metric
            << " at n_S=" << a.n_s << ", n_T=" << a.n_t << ":\n"
            << "  mean diff (" << a.a << " - " << a.b
            << "): " << sgm::format_double(res.mean_diff) << "\n"
            << "  t = " << sgm::format_double(res.t_stat) << ", dof = " << res.dof
            << "\n";
  if (a.one_sided) {
    std::cout << "  one-sided p (" << a.a << " > " << a.b
              << "): " << sgm::format_double(sgm::one_sided_p(res)) << "\n";
  } else {
    std::cout << "  two-sided p = " << sgm::format_double(res.p_two_sided) << "\n";
  }
}

// ---------------- bayes-error ----------------

struct BayesArgs {
  ClassFlags cls;
  std::size_t n_mc = 1000000;
};

void run_bayes_error(const BayesArgs& a, const GlobalOpts& g) {
  std::uint64_t seed = resolve_seed(g);
  double err = sgm::bayes_error(a.cls.config(), a.n_mc, seed);
  std::cout << "bayes error estimate: " << sgm::format_double(err) << " ("
            << a.n_mc << " draws)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-generative modelling for covariate-shift domain adaptation"};
  app.require_subcommand(1);

  GlobalOpts global;
  app.add_option("--seed", global.seed, "master seed (random when omitted)");
  app.add_option("--threads", global.threads, "worker threads (0 = hardware)");
  app.add_option("--out-dir", global.out_dir, "directory for output files");

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "draw a two-domain dataset and test set");
  gen->add_option("--task", gen_args.task, "class|regr|net");
  gen_args.cls.attach(gen);
  gen_args.regr.attach(gen);
  gen->add_option("--net", gen_args.net_file, "bayes-net config file");
  gen->add_option("--n-s", gen_args.n_s, "labelled source rows");
  gen->add_option("--n-t", gen_args.n_t, "unlabelled target rows");
  gen->add_option("--n-test", gen_args.n_test, "labelled target test rows");
  gen->add_option("--out", gen_args.out, "dataset CSV filename");
  gen->add_option("--out-test", gen_args.out_test, "test CSV filename");

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "fit one estimator on a dataset file");
  fit->add_option("--data", fit_args.data, "dataset CSV")->required();
  fit->add_option("--model", fit_args.model, "gauss|lingauss|discrete");
  fit->add_option("--estimator", fit_args.estimator, "S|WS|P|LR");
  fit->add_option("--lambda", fit_args.lambda,
                  "pooled policy: equal|sqrt|fixed:<c>|supheavy");
  fit->add_option("--weights", fit_args.weights, "unit|known|file:<path>");
  fit->add_option("--known-mu-c", fit_args.known_mu_c,
                  "mu_C for known synthetic weights");
  fit->add_flag("--self-normalize", fit_args.self_normalize,
                "rescale supplied weights to mean 1");
  fit->add_flag("--restricted", fit_args.restricted,
                "constrain lingauss slopes b, d <= 0");
  fit->add_option("--out", fit_args.out, "parameter file");
  fit_args.optim.attach(fit);

  PredictArgs predict_args;
  CLI::App* predict = app.add_subcommand("predict", "predict from a parameter file");
  predict->add_option("--params", predict_args.params, "parameter file")->required();
  predict->add_option("--data", predict_args.data, "feature CSV")->required();
  predict->add_option("--out", predict_args.out, "prediction CSV");

  CurveArgs curve_args;
  CLI::App* curve = app.add_subcommand("curve", "run an (n_S, n_T, replicate) grid");
  ConfigMap& cmap = curve_args.config_map;
  curve->add_option("--config", curve_args.config_file,
                    "flat key=value grid config file (flags override)");
  auto* c_task = curve->add_option("--task", curve_args.task, "class|regr|net|real");
  bind_string(cmap, c_task, &curve_args.task);
  curve_args.cls.attach(curve, &cmap);
  curve_args.regr.attach(curve, &cmap);
  auto* c_net = curve->add_option("--net", curve_args.net_file, "bayes-net config file");
  bind_string(cmap, c_net, &curve_args.net_file);
  curve_args.real.attach(curve, &cmap);
  auto* c_ns = curve->add_option("--n-s", curve_args.n_s_list, "n_S values")
                   ->delimiter(',');
  bind_size_list(cmap, c_ns, &curve_args.n_s_list);
  auto* c_nt = curve->add_option("--n-t", curve_args.n_t_list, "n_T values, ascending")
                   ->delimiter(',');
  bind_size_list(cmap, c_nt, &curve_args.n_t_list);
  auto* c_reps = curve->add_option("--replicates", curve_args.replicates,
                                   "replicates per cell (0 = task default)");
  bind_size(cmap, c_reps, &curve_args.replicates);
  auto* c_ntest =
      curve->add_option("--n-test", curve_args.n_test, "test rows per replicate");
  bind_size(cmap, c_ntest, &curve_args.n_test);
  auto* c_est = curve->add_option("--estimators", curve_args.estimators,
                                  "estimator tags, e.g. S,WS,P,P:fixed:0.8,LR")
                    ->delimiter(',');
  bind_string_list(cmap, c_est, &curve_args.estimators);
  auto* c_restr = curve->add_flag("--restricted", curve_args.restricted,
                                  "constrain lingauss slopes b, d <= 0");
  bind_bool(cmap, c_restr, &curve_args.restricted);
  auto* c_rec =
      curve->add_option("--records", curve_args.records_name, "records CSV filename");
  bind_string(cmap, c_rec, &curve_args.records_name);
  auto* c_agg = curve->add_option("--aggregate", curve_args.aggregate_name,
                                  "aggregate CSV filename");
  bind_string(cmap, c_agg, &curve_args.aggregate_name);
  curve_args.optim.attach(curve, &cmap);

  TtestArgs ttest_args;
  CLI::App* ttest = app.add_subcommand("ttest", "paired t-test from a records CSV");
  ttest->add_option("--records", ttest_args.records, "records CSV")->required();
  ttest->add_option("--a", ttest_args.a, "first estimator tag");
  ttest->add_option("--b", ttest_args.b, "second estimator tag");
  ttest->add_option("--metric", ttest_args.metric, "error_rate|nll|rmse");
  ttest->add_option("--n-s", ttest_args.n_s, "cell n_S");
  ttest->add_option("--n-t", ttest_args.n_t, "cell n_T");
  ttest->add_flag("--one-sided", ttest_args.one_sided, "report one-sided p (a > b)");

  BayesArgs bayes_args;
  CLI::App* bayes = app.add_subcommand(
      "bayes-error", "Monte Carlo Bayes error of the classification SCM");
  bayes_args.cls.attach(bayes);
  bayes->add_option("--n-mc", bayes_args.n_mc, "Monte Carlo draws");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) run_gen(gen_args, global);
    if (fit->parsed()) run_fit(fit_args, global);
    if (predict->parsed()) run_predict(predict_args, global);
    if (curve->parsed()) run_curve(curve_args, global);
    if (ttest->parsed()) run_ttest(ttest_args);
    if (bayes->parsed()) run_bayes_error(bayes_args, global);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
