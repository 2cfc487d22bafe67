#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sgm/dataset.hpp"

using namespace sgm;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "sgm_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

DomainDataset small_dataset() {
  DomainDataset ds;
  ds.task = Task::classification;
  ds.source = {{{0.25}, 1.0, {1.5}}, {{-1.0}, 0.0, {-0.125}}};
  ds.target = {{{2.0}, {0.5}}, {{0.0625}, {-3.0}}};
  return ds;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 12345.6789, 2.2250738585072014e-308}) {
    CHECK(parse_double(format_double(v)) == v);
  }
}

TEST_CASE("parse_double rejects trailing garbage") {
  CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
}

TEST_CASE("dataset CSV round trip is exact") {
  auto path = temp_file("roundtrip.csv");
  DomainDataset ds = small_dataset();
  write_dataset_csv(path, ds);
  DomainDataset back = read_dataset_csv(path, Task::classification);
  REQUIRE(back.source.size() == 2);
  REQUIRE(back.target.size() == 2);
  CHECK(back.source[0].x_c[0] == 0.25);
  CHECK(back.source[0].y == 1.0);
  CHECK(back.source[1].x_e[0] == -0.125);
  CHECK(back.target[1].x_c[0] == 0.0625);
}

TEST_CASE("labelled CSV round trip") {
  auto path = temp_file("labelled.csv");
  TestSet rows = {{{1.0}, 0.0, {2.0}}, {{-1.0}, 1.0, {0.5}}};
  write_labelled_csv(path, rows);
  TestSet back = read_labelled_csv(path, Task::classification);
  REQUIRE(back.size() == 2);
  CHECK(back[1].y == 1.0);
}

TEST_CASE("source rows must carry a label") {
  auto path = temp_file("missing_y.csv");
  std::ofstream(path) << "domain,xc_0,y,xe_0\n0,1.0,,2.0\n";
  CHECK_THROWS_WITH_AS(read_dataset_csv(path, Task::classification),
                       doctest::Contains("missing y in labelled position"),
                       std::invalid_argument);
}

TEST_CASE("labelled target rows are rejected by the training reader") {
  auto path = temp_file("labelled_target.csv");
  std::ofstream(path) << "domain,xc_0,y,xe_0\n0,1.0,1,2.0\n1,0.5,1,0.1\n";
  CHECK_THROWS_AS(read_dataset_csv(path, Task::classification),
                  std::invalid_argument);
}

TEST_CASE("classification labels must be binary") {
  DomainDataset ds = small_dataset();
  ds.source[0].y = 0.5;
  CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
  ds.task = Task::regression;
  ds.source[0].y = 0.5;
  CHECK_NOTHROW(ds.validate());
}

TEST_CASE("validate rejects empty source and ragged dims") {
  DomainDataset ds;
  CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
  ds = small_dataset();
  ds.source[1].x_c.push_back(0.0);
  CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
}

TEST_CASE("feature reader accepts labelled and unlabelled rows") {
  auto path = temp_file("features.csv");
  std::ofstream(path) << "domain,xc_0,y,xe_0\n0,1.0,1,2.0\n1,0.5,,0.1\n";
  auto rows = read_feature_rows(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].x_c[0] == 1.0);
  CHECK(rows[1].x_e[0] == 0.1);
}

TEST_CASE("csv table reader finds columns and rejects ragged rows") {
  auto path = temp_file("table.csv");
  std::ofstream(path) << "a,b,c\n1,2,3\n4,5,6\n";
  CsvTable t = read_csv_table(path);
  CHECK(t.column_index("b") == 1);
  CHECK_THROWS_AS(t.column_index("zz"), std::invalid_argument);
  std::ofstream(path) << "a,b\n1\n";
  CHECK_THROWS_AS(read_csv_table(path), std::invalid_argument);
}
