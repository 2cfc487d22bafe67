#include "sgm/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

namespace sgm {

double error_rate(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("error_rate: length mismatch");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("error_rate: empty input");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(predictions.size());
}

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) {
    throw std::invalid_argument("rmse: length mismatch");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("rmse: empty input");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double d = predictions[i] - targets[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(predictions.size()));
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("regularized_incomplete_beta: a, b must be > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = a * std::log(x) + b * std::log1p(-x) -
                    (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * beta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) {
    throw std::invalid_argument("student_t_cdf: dof must be > 0");
  }
  if (t == 0.0) return 0.5;
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  double p_two = regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
  return t > 0.0 ? 1.0 - 0.5 * p_two : 0.5 * p_two;
}

PairedTestResult paired_t_test(std::span<const double> a,
                               std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("paired_t_test: length mismatch");
  }
  const std::size_t n = a.size();
  if (n < 2) {
    throw std::invalid_argument("paired_t_test: need at least 2 pairs");
  }
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(n - 1));

  PairedTestResult res;
  res.dof = n - 1;
  res.mean_diff = mean;
  if (sd == 0.0) {
    // All differences identical to machine precision.
    if (mean == 0.0) {
      res.t_stat = 0.0;
      res.p_two_sided = 1.0;
    } else {
      res.t_stat = std::copysign(std::numeric_limits<double>::infinity(), mean);
      res.p_two_sided = 0.0;
    }
    return res;
  }
  res.t_stat = mean / (sd / std::sqrt(static_cast<double>(n)));
  res.p_two_sided = regularized_incomplete_beta(
      0.5 * static_cast<double>(res.dof), 0.5,
      static_cast<double>(res.dof) /
          (static_cast<double>(res.dof) + res.t_stat * res.t_stat));
  return res;
}

double one_sided_p(const PairedTestResult& r) {
  if (r.t_stat >= 0.0) return 0.5 * r.p_two_sided;
  return 1.0 - 0.5 * r.p_two_sided;
}

void RunningStat::add(double x) {
  ++count;
  double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void RunningStat::merge(const RunningStat& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  double na = static_cast<double>(count);
  double nb = static_cast<double>(other.count);
  double delta = other.mean - mean;
  double total = na + nb;
  mean += delta * nb / total;
  m2 += other.m2 + delta * delta * na * nb / total;
  count += other.count;
}

double RunningStat::sample_std() const {
  if (count < 2) return 0.0;
  return std::sqrt(m2 / static_cast<double>(count - 1));
}

std::vector<AggregateRow> aggregate(std::span<const MetricRecord> records) {
  if (records.empty()) {
    throw std::invalid_argument("aggregate: no records");
  }
  using Key = std::tuple<std::size_t, std::size_t, std::string, std::string>;
  std::map<Key, RunningStat> stats;
  for (const auto& r : records) {
    stats[{r.n_s, r.n_t, r.estimator, r.metric}].add(r.value);
  }
  std::vector<AggregateRow> rows;
  rows.reserve(stats.size());
  for (const auto& [key, st] : stats) {
    rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                    std::get<3>(key), st.mean, st.sample_std(), st.count});
  }
  return rows;
}

void write_aggregate_csv(const std::filesystem::path& path,
                         std::span<const AggregateRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << "n_S,n_T,estimator,metric,mean,std,count\n";
  for (const auto& r : rows) {
    out << r.n_s << ',' << r.n_t << ',' << r.estimator << ',' << r.metric << ','
        << format_double(r.mean) << ',' << format_double(r.std_dev) << ','
        << r.count << '\n';
  }
}

std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path) {
  CsvTable table = read_csv_table(path);
  const std::vector<std::string> expected = {"n_S",    "n_T", "estimator",
                                             "metric", "mean", "std",
                                             "count"};
  if (table.header != expected) {
    throw std::invalid_argument("aggregate CSV: unexpected header");
  }
  std::vector<AggregateRow> rows;
  for (const auto& f : table.rows) {
    AggregateRow r;
    r.n_s = static_cast<std::size_t>(std::stoull(f[0]));
    r.n_t = static_cast<std::size_t>(std::stoull(f[1]));
    r.estimator = f[2];
    r.metric = f[3];
    r.mean = parse_double(f[4]);
    r.std_dev = parse_double(f[5]);
    r.count = static_cast<std::size_t>(std::stoull(f[6]));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace sgm
