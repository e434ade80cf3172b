#include <fstream>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "support.hpp"

#include "lagspec/errors.hpp"
#include "lagspec/io.hpp"

using namespace lagspec;

TEST_CASE("shortest round-trip doubles") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5) == "-2.5");
  Rng rng(83);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, 20.0 * rng.uniform() - 10.0);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("CSV tables") {
  CsvTable t{"demo", {"re_z", "im_z"}, {}};
  t.add_row({cell(1.5), cell(-2.0)});
  t.add_row({cell(3), cell(true)});
  CHECK(t.render() == "re_z,im_z\n1.5,-2\n3,1\n");
  CHECK_THROWS_AS(t.add_row({"1"}), DomainError);
}

TEST_CASE("matrix text format round trip") {
  Rng rng(89);
  const ComplexMatrix m = testing::random_matrix(3, 4, rng);
  std::stringstream ss;
  write_matrix(ss, m);
  CHECK(ss.str().rfind("lagspec-matrix v1\n3 4\n", 0) == 0);
  const ComplexMatrix back = read_matrix(ss);
  CHECK(back == m);

  std::stringstream bad("not-a-matrix\n1 1\n0 0\n");
  CHECK_THROWS_AS(read_matrix(bad), IoError);
  std::stringstream truncated("lagspec-matrix v1\n2 2\n1 0 2 0\n");
  CHECK_THROWS_AS(read_matrix(truncated), IoError);
}

TEST_CASE("atomic writes create directories") {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("lagspec-io-" + std::to_string(::getpid())) / "nested";
  std::filesystem::remove_all(dir.parent_path());
  CsvTable t{"x", {"a"}, {{"1"}}};
  const auto path = write_csv(dir, t);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == "a\n1\n");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir.parent_path());
}
