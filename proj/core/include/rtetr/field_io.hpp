#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rtetr/medium.hpp"
#include "rtetr/phase_grid.hpp"

namespace rtetr {

// Binary field: "RTEF", u32 n_cells, u32 n_theta, u32 reserved, then
// n_cells * n_theta little-endian float64 in (cell, direction) order.
void write_field(const std::filesystem::path& path, const Field& f);
Field read_field(const std::filesystem::path& path);

// Binary trace: "RTET", u32 n_faces, u32 n_theta, u32 n_times, u32 part,
// f64 dt, then float64 values in (time, face, direction) order.
void write_trace(const std::filesystem::path& path, const BoundaryTrace& h);
BoundaryTrace read_trace(const std::filesystem::path& path);

/// Kernel tables stored as a field: n_cells == n_theta is one shared table,
/// n_cells == grid cells * n_theta is one table per cell.
Kernel read_kernel_tables(const std::filesystem::path& path, const PhaseSpaceGrid& grid);

/// "cell,value" rows (an optional header line is skipped); every cell must appear once.
std::vector<double> read_coefficient_csv(const std::filesystem::path& path, std::size_t n_cells);

/// Shortest decimal form that round-trips a double.
std::string format_double(double v);

/// Writes columns of equal length under a header row.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

}  // namespace rtetr
