#include "rtetr/field_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rtetr/error.hpp"

namespace rtetr {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary I/O assumes a little-endian host");

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw InvalidArgument(std::string(what) + " too large for the file format");
  return static_cast<std::uint32_t>(v);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  return is;
}

void read_magic(std::istream& is, const char* magic, const std::filesystem::path& path) {
  std::array<char, 4> m{};
  is.read(m.data(), 4);
  if (!is || std::memcmp(m.data(), magic, 4) != 0)
    throw InvalidArgument(path.string() + ": bad magic, expected " + magic);
}

void read_doubles(std::istream& is, std::span<double> out, const std::filesystem::path& path) {
  is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size_bytes()));
  if (!is) throw InvalidArgument(path.string() + ": truncated payload");
  if (is.peek() != std::char_traits<char>::eof())
    throw InvalidArgument(path.string() + ": trailing bytes after payload");
}

}  // namespace

void write_field(const std::filesystem::path& path, const Field& f) {
  auto os = open_out(path);
  os.write("RTEF", 4);
  put_u32(os, checked_u32(f.n_cells(), "n_cells"));
  put_u32(os, checked_u32(f.n_directions(), "n_theta"));
  put_u32(os, 0);
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.values().size_bytes()));
  if (!os) throw InvalidArgument("write failed: " + path.string());
}

Field read_field(const std::filesystem::path& path) {
  auto is = open_in(path);
  read_magic(is, "RTEF", path);
  const std::uint32_t n_cells = get_u32(is);
  const std::uint32_t n_theta = get_u32(is);
  get_u32(is);
  if (!is) throw InvalidArgument(path.string() + ": truncated header");
  Field f(n_cells, n_theta);
  read_doubles(is, f.values(), path);
  return f;
}

void write_trace(const std::filesystem::path& path, const BoundaryTrace& h) {
  auto os = open_out(path);
  os.write("RTET", 4);
  put_u32(os, checked_u32(h.n_faces(), "n_faces"));
  put_u32(os, checked_u32(h.n_directions(), "n_theta"));
  put_u32(os, checked_u32(h.n_times(), "n_times"));
  put_u32(os, static_cast<std::uint32_t>(h.part()));
  const double dt = h.dt();
  os.write(reinterpret_cast<const char*>(&dt), sizeof dt);
  os.write(reinterpret_cast<const char*>(h.values().data()),
           static_cast<std::streamsize>(h.values().size_bytes()));
  if (!os) throw InvalidArgument("write failed: " + path.string());
}

BoundaryTrace read_trace(const std::filesystem::path& path) {
  auto is = open_in(path);
  read_magic(is, "RTET", path);
  const std::uint32_t n_faces = get_u32(is);
  const std::uint32_t n_theta = get_u32(is);
  const std::uint32_t n_times = get_u32(is);
  const std::uint32_t part = get_u32(is);
  double dt = 0.0;
  is.read(reinterpret_cast<char*>(&dt), sizeof dt);
  if (!is) throw InvalidArgument(path.string() + ": truncated header");
  if (part > static_cast<std::uint32_t>(TracePart::Full))
    throw InvalidArgument(path.string() + ": unknown trace part");
  BoundaryTrace h(n_faces, n_theta, n_times, static_cast<TracePart>(part), dt);
  read_doubles(is, h.values(), path);
  return h;
}

Kernel read_kernel_tables(const std::filesystem::path& path, const PhaseSpaceGrid& grid) {
  const Field f = read_field(path);
  const std::size_t nd = grid.n_directions();
  if (f.n_directions() != nd)
    throw InvalidArgument(path.string() + ": kernel table has the wrong number of directions");
  auto vals = f.values();
  if (f.n_cells() == nd) {
    return Kernel::table(grid, {std::vector<double>(vals.begin(), vals.end())});
  }
  if (f.n_cells() == grid.n_cells() * nd) {
    std::vector<std::vector<double>> tables(grid.n_cells());
    std::vector<std::uint32_t> index(grid.n_cells());
    for (std::size_t c = 0; c < grid.n_cells(); ++c) {
      auto block = vals.subspan(c * nd * nd, nd * nd);
      tables[c].assign(block.begin(), block.end());
      index[c] = static_cast<std::uint32_t>(c);
    }
    return Kernel::table(grid, std::move(tables), std::move(index));
  }
  throw InvalidArgument(path.string() + ": kernel table size matches neither layout");
}

std::vector<double> read_coefficient_csv(const std::filesystem::path& path, std::size_t n_cells) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  std::vector<double> out(n_cells, 0.0);
  std::vector<bool> seen(n_cells, false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": expected cell,value");
    std::size_t cell = 0;
    double value = 0.0;
    std::istringstream a(line.substr(0, comma));
    std::istringstream b(line.substr(comma + 1));
    if (!(a >> cell) || !(b >> value)) {
      if (line_no == 1) continue;  // header
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    if (cell >= n_cells)
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": cell out of range");
    if (seen[cell])
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": duplicate cell");
    out[cell] = value;
    seen[cell] = true;
  }
  for (std::size_t c = 0; c < n_cells; ++c) {
    if (!seen[c]) throw InvalidArgument(path.string() + ": missing cell " + std::to_string(c));
  }
  return out;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw InvalidArgument("csv header/column count mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw InvalidArgument("csv columns differ in length");
  }
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < columns.size(); ++i)
      os << (i ? "," : "") << format_double(columns[i][r]);
    os << '\n';
  }
  if (!os) throw InvalidArgument("write failed: " + path.string());
}

}  // namespace rtetr
