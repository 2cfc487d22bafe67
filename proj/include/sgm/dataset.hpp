#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sgm {

enum class Task { classification, regression };

std::string task_name(Task task);

struct LabelledRow {
  std::vector<double> x_c;
  double y = 0.0;
  std::vector<double> x_e;
};

struct UnlabelledRow {
  std::vector<double> x_c;
  std::vector<double> x_e;
};

using TestSet = std::vector<LabelledRow>;

// Labelled source rows plus unlabelled target rows over (x_C, y, x_E).
struct DomainDataset {
  Task task = Task::classification;
  std::vector<LabelledRow> source;
  std::vector<UnlabelledRow> target;

  std::size_t n_source() const { return source.size(); }
  std::size_t n_target() const { return target.size(); }
  std::size_t dim_c() const;
  std::size_t dim_e() const;

  // Throws std::invalid_argument on an empty source sample, inconsistent
  // feature dimensions, non-finite values, or non-binary labels in a
  // classification dataset.
  void validate() const;
};

// 17-significant-digit decimal text; round-trips doubles exactly.
std::string format_double(double v);
double parse_double(std::string_view text);

// Dataset CSV: header `domain,xc_0,..,y,xe_0,..`; source rows carry
// domain=0 and a label, target rows carry domain=1 and an empty y field.
void write_dataset_csv(const std::filesystem::path& path,
                       const DomainDataset& ds);
DomainDataset read_dataset_csv(const std::filesystem::path& path, Task task);

// Same column layout with domain=1 and labels filled in (test sets).
void write_labelled_csv(const std::filesystem::path& path, const TestSet& rows);
TestSet read_labelled_csv(const std::filesystem::path& path, Task task);

// Feature rows for prediction: any dataset-layout CSV, labels ignored.
std::vector<UnlabelledRow> read_feature_rows(const std::filesystem::path& path);

// Generic CSV table, used by the real-data loader.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const;  // throws if absent
};

CsvTable read_csv_table(const std::filesystem::path& path);

}  // namespace sgm
