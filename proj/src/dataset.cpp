#include "sgm/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sgm {

std::string task_name(Task task) {
  return task == Task::classification ? "classification" : "regression";
}

std::size_t DomainDataset::dim_c() const {
  if (!source.empty()) return source.front().x_c.size();
  if (!target.empty()) return target.front().x_c.size();
  return 0;
}

std::size_t DomainDataset::dim_e() const {
  if (!source.empty()) return source.front().x_e.size();
  if (!target.empty()) return target.front().x_e.size();
  return 0;
}

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void DomainDataset::validate() const {
  if (source.empty()) {
    throw std::invalid_argument("dataset: source sample is empty");
  }
  const std::size_t dc = dim_c();
  const std::size_t de = dim_e();
  for (const auto& r : source) {
    if (r.x_c.size() != dc || r.x_e.size() != de) {
      throw std::invalid_argument("dataset: inconsistent feature dimensions");
    }
    if (!all_finite(r.x_c) || !all_finite(r.x_e) || !std::isfinite(r.y)) {
      throw std::invalid_argument("dataset: non-finite value in source row");
    }
    if (task == Task::classification && r.y != 0.0 && r.y != 1.0) {
      throw std::invalid_argument("dataset: classification label must be 0 or 1");
    }
  }
  for (const auto& r : target) {
    if (r.x_c.size() != dc || r.x_e.size() != de) {
      throw std::invalid_argument("dataset: inconsistent feature dimensions");
    }
    if (!all_finite(r.x_c) || !all_finite(r.x_e)) {
      throw std::invalid_argument("dataset: non-finite value in target row");
    }
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("non-numeric cell: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string dataset_header(std::size_t dc, std::size_t de) {
  std::string h = "domain";
  for (std::size_t i = 0; i < dc; ++i) h += ",xc_" + std::to_string(i);
  h += ",y";
  for (std::size_t i = 0; i < de; ++i) h += ",xe_" + std::to_string(i);
  return h;
}

// Returns (dim_c, dim_e) or throws when the header is not the dataset layout.
std::pair<std::size_t, std::size_t> parse_dataset_header(
    const std::vector<std::string>& fields) {
  std::size_t dc = 0;
  std::size_t i = 1;
  if (fields.empty() || fields[0] != "domain") {
    throw std::invalid_argument("dataset CSV: header must start with 'domain'");
  }
  while (i < fields.size() && fields[i] == "xc_" + std::to_string(dc)) {
    ++dc;
    ++i;
  }
  if (i >= fields.size() || fields[i] != "y") {
    throw std::invalid_argument("dataset CSV: expected 'y' column after causes");
  }
  ++i;
  std::size_t de = 0;
  while (i < fields.size() && fields[i] == "xe_" + std::to_string(de)) {
    ++de;
    ++i;
  }
  if (i != fields.size() || dc == 0 || de == 0) {
    throw std::invalid_argument("dataset CSV: malformed header");
  }
  return {dc, de};
}

void append_row(std::string& out, int domain, const std::vector<double>& x_c,
                const double* y, const std::vector<double>& x_e) {
  out += std::to_string(domain);
  for (double v : x_c) {
    out += ',';
    out += format_double(v);
  }
  out += ',';
  if (y != nullptr) out += format_double(*y);
  for (double v : x_e) {
    out += ',';
    out += format_double(v);
  }
  out += '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << text;
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace

void write_dataset_csv(const std::filesystem::path& path,
                       const DomainDataset& ds) {
  std::string text = dataset_header(ds.dim_c(), ds.dim_e()) + "\n";
  for (const auto& r : ds.source) append_row(text, 0, r.x_c, &r.y, r.x_e);
  for (const auto& r : ds.target) append_row(text, 1, r.x_c, nullptr, r.x_e);
  write_text_file(path, text);
}

void write_labelled_csv(const std::filesystem::path& path, const TestSet& rows) {
  if (rows.empty()) {
    throw std::invalid_argument("write_labelled_csv: no rows");
  }
  std::string text =
      dataset_header(rows.front().x_c.size(), rows.front().x_e.size()) + "\n";
  for (const auto& r : rows) append_row(text, 1, r.x_c, &r.y, r.x_e);
  write_text_file(path, text);
}

namespace {

struct ParsedDatasetRow {
  int domain = 0;
  bool has_y = false;
  LabelledRow row;
};

ParsedDatasetRow parse_dataset_row(const std::vector<std::string>& fields,
                                   std::size_t dc, std::size_t de,
                                   std::size_t line_no) {
  if (fields.size() != 2 + dc + de) {
    throw std::invalid_argument("dataset CSV: wrong field count at line " +
                                std::to_string(line_no));
  }
  ParsedDatasetRow out;
  if (fields[0] == "0") {
    out.domain = 0;
  } else if (fields[0] == "1") {
    out.domain = 1;
  } else {
    throw std::invalid_argument("dataset CSV: domain must be 0 or 1 at line " +
                                std::to_string(line_no));
  }
  for (std::size_t i = 0; i < dc; ++i) {
    out.row.x_c.push_back(parse_double(fields[1 + i]));
  }
  const std::string& y_field = fields[1 + dc];
  if (!y_field.empty()) {
    out.has_y = true;
    out.row.y = parse_double(y_field);
  }
  for (std::size_t i = 0; i < de; ++i) {
    out.row.x_e.push_back(parse_double(fields[2 + dc + i]));
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

DomainDataset read_dataset_csv(const std::filesystem::path& path, Task task) {
  auto lines = read_lines(path);
  if (lines.empty()) {
    throw std::invalid_argument("dataset CSV: empty file " + path.string());
  }
  auto [dc, de] = parse_dataset_header(split_csv_line(lines[0]));
  DomainDataset ds;
  ds.task = task;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    auto parsed = parse_dataset_row(split_csv_line(lines[k]), dc, de, k + 1);
    if (parsed.domain == 0) {
      if (!parsed.has_y) {
        throw std::invalid_argument(
            "dataset CSV: missing y in labelled position at line " +
            std::to_string(k + 1));
      }
      ds.source.push_back(std::move(parsed.row));
    } else {
      if (parsed.has_y) {
        throw std::invalid_argument(
            "dataset CSV: target row carries a label at line " +
            std::to_string(k + 1) + "; use a labelled reader for test sets");
      }
      ds.target.push_back({std::move(parsed.row.x_c), std::move(parsed.row.x_e)});
    }
  }
  ds.validate();
  return ds;
}

TestSet read_labelled_csv(const std::filesystem::path& path, Task task) {
  auto lines = read_lines(path);
  if (lines.empty()) {
    throw std::invalid_argument("dataset CSV: empty file " + path.string());
  }
  auto [dc, de] = parse_dataset_header(split_csv_line(lines[0]));
  TestSet rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    auto parsed = parse_dataset_row(split_csv_line(lines[k]), dc, de, k + 1);
    if (!parsed.has_y) {
      throw std::invalid_argument("dataset CSV: missing y in labelled row at line " +
                                  std::to_string(k + 1));
    }
    if (task == Task::classification && parsed.row.y != 0.0 &&
        parsed.row.y != 1.0) {
      throw std::invalid_argument("dataset CSV: non-binary label at line " +
                                  std::to_string(k + 1));
    }
    rows.push_back(std::move(parsed.row));
  }
  return rows;
}

std::vector<UnlabelledRow> read_feature_rows(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  if (lines.empty()) {
    throw std::invalid_argument("dataset CSV: empty file " + path.string());
  }
  auto [dc, de] = parse_dataset_header(split_csv_line(lines[0]));
  std::vector<UnlabelledRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    auto parsed = parse_dataset_row(split_csv_line(lines[k]), dc, de, k + 1);
    rows.push_back({std::move(parsed.row.x_c), std::move(parsed.row.x_e)});
  }
  return rows;
}

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::invalid_argument("CSV: missing column '" + name + "'");
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  if (lines.empty()) {
    throw std::invalid_argument("CSV: empty file " + path.string());
  }
  CsvTable table;
  table.header = split_csv_line(lines[0]);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    auto fields = split_csv_line(lines[k]);
    if (fields.size() != table.header.size()) {
      throw std::invalid_argument("CSV: wrong field count at line " +
                                  std::to_string(k + 1));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

}  // namespace sgm
