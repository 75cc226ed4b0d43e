#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>

#include "qwire/io.hpp"

using namespace qwire;

TEST_CASE("scientific formatting is fixed at nine significant digits") {
  CHECK(format_sci(1.0) == "1.00000000e+00");
  CHECK(format_sci(0.0) == "0.00000000e+00");
  CHECK(format_sci(-0.0) == "0.00000000e+00");  // normalized
  CHECK(format_sci(0.1378) == "1.37800000e-01");
  CHECK(format_sci(-2.35456455e+12) == "-2.35456455e+12");
  CHECK(format_sci(7.93e-3) == "7.93000000e-03");
}

TEST_CASE("roundtrip formatting parses back to the identical double") {
  for (double v : {0.0541, -3.14159265358979, 26.685216369620667, 1e-300}) {
    const std::string s = format_roundtrip(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("csv writer") {
  const auto dir = std::filesystem::temp_directory_path() / "qwire_io_test";
  std::filesystem::create_directories(dir);
  std::vector<double> a{1.0, 2.0}, b{0.5, -0.25};
  write_csv_two(dir / "t.csv", "t_fs", a, "j_nm_per_fs", b);
  std::ifstream in(dir / "t.csv");
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  CHECK(l1 == "t_fs,j_nm_per_fs");
  CHECK(l2 == "1.00000000e+00,5.00000000e-01");
  CHECK(l3 == "2.00000000e+00,-2.50000000e-01");
  CHECK_FALSE(std::filesystem::exists(dir / "t.csv.tmp"));

  SECTION("ragged columns rejected") {
    std::vector<double> c{1.0};
    const CsvColumn cols[2] = {{"a", &a}, {"c", &c}};
    CHECK_THROWS_AS(write_csv(dir / "bad.csv", cols), std::invalid_argument);
  }
}

TEST_CASE("checkpoint record round-trips") {
  const auto dir = std::filesystem::temp_directory_path() / "qwire_io_test";
  std::filesystem::create_directories(dir);
  std::vector<cdouble> delta{{1.5, -2.5}, {0.0, 1e-17}, {-3.25, 0.75}};
  write_checkpoint(dir / "c.bin", delta, 12.375);
  auto [back, t] = read_checkpoint(dir / "c.bin");
  CHECK(t == 12.375);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == delta[i]);

  // Exact layout: 8-byte count, 8-byte time, interleaved pairs.
  CHECK(std::filesystem::file_size(dir / "c.bin") == 16 + 3 * 16);

  SECTION("truncated files are rejected") {
    atomic_write_file(dir / "short.bin", "abcd");
    CHECK_THROWS(read_checkpoint(dir / "short.bin"));
  }
}
