#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "support.hpp"

using namespace rtetr;
using namespace rtetr::testing;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rtetr_field_io";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<char> bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("field round trip and header") {
  const auto g = box(5, 8);
  const Field f = random_field(g, 4);
  const fs::path p = scratch("f.bin");
  write_field(p, f);
  CHECK(read_field(p) == f);

  const auto raw = bytes(p);
  REQUIRE(raw.size() == 16 + 8 * f.size());
  CHECK(std::string(raw.begin(), raw.begin() + 4) == "RTEF");
  std::uint32_t n_cells = 0, n_theta = 0;
  std::memcpy(&n_cells, raw.data() + 4, 4);
  std::memcpy(&n_theta, raw.data() + 8, 4);
  CHECK(n_cells == 25);
  CHECK(n_theta == 8);
  double first = 0.0;
  std::memcpy(&first, raw.data() + 16, 8);
  CHECK(first == f(0, 0));
}

TEST_CASE("trace round trip") {
  const auto g = box(4, 8);
  const BoundaryTrace h = random_trace(g, TracePart::Outflow, 6, 0.0625, 9);
  const fs::path p = scratch("h.bin");
  write_trace(p, h);
  const BoundaryTrace back = read_trace(p);
  CHECK(back.part() == TracePart::Outflow);
  CHECK(back.dt() == h.dt());
  CHECK(back.n_times() == 6);
  CHECK(std::ranges::equal(back.values(), h.values()));
  CHECK(bytes(p).size() == 4 + 4 * 4 + 8 + 8 * h.values().size());
}

TEST_CASE("corrupt files are rejected") {
  const auto g = box(3, 4);
  const fs::path p = scratch("bad.bin");
  write_field(p, random_field(g, 1));
  auto raw = bytes(p);
  raw[0] = 'X';
  std::ofstream(p, std::ios::binary).write(raw.data(), static_cast<std::streamsize>(raw.size()));
  CHECK_THROWS_AS(read_field(p), InvalidArgument);

  write_field(p, random_field(g, 1));
  raw = bytes(p);
  std::ofstream(p, std::ios::binary).write(raw.data(), static_cast<std::streamsize>(raw.size() - 3));
  CHECK_THROWS_AS(read_field(p), InvalidArgument);
  CHECK_THROWS_AS(read_field(scratch("missing.bin")), InvalidArgument);
  CHECK_THROWS_AS(read_trace(p), InvalidArgument);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, std::numbers::pi, 1e-300, 6.02214076e23,
                   std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max()}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("csv writer") {
  const fs::path p = scratch("out.csv");
  write_csv(p, {"t", "norm"}, {{0.0, 0.5}, {1.0, 0.25}});
  std::ifstream is(p);
  const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  CHECK(text == "t,norm\n0,1\n0.5,0.25\n");
  CHECK_THROWS_AS(write_csv(p, {"a"}, {{1.0}, {2.0}}), InvalidArgument);
  CHECK_THROWS_AS(write_csv(p, {"a", "b"}, {{1.0}, {2.0, 3.0}}), InvalidArgument);
}

TEST_CASE("kernel tables from file") {
  const auto g = box(3, 8);
  const Kernel hg = Kernel::henyey_greenstein(g, 0.4);
  Field table(8, 8);
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = 0; b < 8; ++b) table(a, b) = hg(0, a, b);
  const fs::path p = scratch("kernel.bin");
  write_field(p, table);
  const Kernel k = read_kernel_tables(p, g);
  for (std::size_t c = 0; c < g.n_cells(); ++c)
    for (std::size_t a = 0; a < 8; ++a)
      for (std::size_t b = 0; b < 8; ++b) CHECK(k(c, a, b) == hg(c, a, b));

  write_field(p, Field(5, 8));
  CHECK_THROWS_AS(read_kernel_tables(p, g), InvalidArgument);
  write_field(p, Field(8, 4));
  CHECK_THROWS_AS(read_kernel_tables(p, g), InvalidArgument);
}

TEST_CASE("coefficient csv") {
  const fs::path p = scratch("mu.csv");
  write_text(p, "cell,value\n2,0.3\n0,0.1\n1,0.2\n");
  CHECK(read_coefficient_csv(p, 3) == std::vector<double>{0.1, 0.2, 0.3});
  write_text(p, "0,0.1\n1,0.2\n");
  CHECK_THROWS_AS(read_coefficient_csv(p, 3), InvalidArgument);
  write_text(p, "0,0.1\n0,0.2\n1,0.3\n");
  CHECK_THROWS_AS(read_coefficient_csv(p, 2), InvalidArgument);
  write_text(p, "0,0.1\n5,0.2\n");
  CHECK_THROWS_AS(read_coefficient_csv(p, 2), InvalidArgument);
  write_text(p, "0,abc\n1,0.2\n");
  CHECK_THROWS_AS(read_coefficient_csv(p, 2), InvalidArgument);
}
