#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rtetr {

enum class GeometryKind { Rod1D, Box2D, Disk2D };

std::string to_string(GeometryKind kind);
GeometryKind geometry_kind_from_string(const std::string& name);

/// Description of the spatial domain and its discretization.
///
/// Rod1D uses `length`, Box2D uses `width` x `height`, Disk2D uses `radius`
/// (realized as a masked Cartesian grid over the bounding square).
/// `n_cells` is the number of cells along each axis. `n_theta` is ignored
/// for Rod1D, whose sphere is {+1, -1}.
struct GeometryConfig {
  GeometryKind kind = GeometryKind::Box2D;
  double length = 1.0;
  double width = 1.0;
  double height = 1.0;
  double radius = 0.5;
  int n_cells = 16;
  int n_theta = 8;
  double speed = 1.0;
};

struct Direction {
  double x = 0.0;
  double y = 0.0;
};

/// A cell face on the boundary of the (possibly masked) domain.
struct BoundaryFace {
  std::size_t cell = 0;
  int axis = 0;         // 0 = x, 1 = y
  int side = 0;         // -1 or +1: which side of the cell the face is on
  Direction normal;     // outward unit normal
  double measure = 0.0; // face length in 2D, 1 in 1D
};

inline constexpr std::ptrdiff_t kNoNeighbor = -1;

/// Uniform Cartesian discretization of the phase space (domain x unit sphere).
///
/// Cells are numbered over active cells only; a field value is addressed by
/// (cell, direction) in cell-major order. Directions come in antipodal pairs
/// so that `opposite(k)` is an exact index permutation.
class PhaseSpaceGrid {
 public:
  explicit PhaseSpaceGrid(const GeometryConfig& config);

  const GeometryConfig& config() const noexcept { return config_; }
  GeometryKind kind() const noexcept { return config_.kind; }
  int dimension() const noexcept { return config_.kind == GeometryKind::Rod1D ? 1 : 2; }

  std::size_t n_cells() const noexcept { return cells_.size(); }
  std::size_t n_directions() const noexcept { return directions_.size(); }
  std::size_t size() const noexcept { return n_cells() * n_directions(); }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }

  double spacing(int axis) const noexcept { return axis == 0 ? dx_ : dy_; }
  double min_spacing() const noexcept;
  double cell_volume() const noexcept { return volume_; }
  Direction cell_center(std::size_t cell) const;
  std::pair<int, int> cell_index(std::size_t cell) const { return cells_[cell]; }
  /// Active cell at lattice position (i, j), or kNoNeighbor.
  std::ptrdiff_t cell_at(int i, int j) const;
  std::ptrdiff_t neighbor(std::size_t cell, int axis, int side) const;
  /// Boundary face on the given side of a cell, or kNoNeighbor.
  std::ptrdiff_t boundary_face(std::size_t cell, int axis, int side) const;

  const Direction& direction(std::size_t k) const { return directions_[k]; }
  double weight(std::size_t k) const { return weights_[k]; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t opposite(std::size_t k) const { return opposite_[k]; }
  double sphere_measure() const noexcept { return dimension() == 1 ? 2.0 : 2.0 * 3.14159265358979323846; }

  std::span<const BoundaryFace> faces() const noexcept { return faces_; }
  std::size_t n_faces() const noexcept { return faces_.size(); }
  /// nu . theta_k on a face, with |nu . theta| < 1e-12 snapped to zero.
  double flux(std::size_t face, std::size_t k) const;

  double diameter() const noexcept { return diameter_; }
  double speed() const noexcept { return config_.speed; }
  double crossing_time() const noexcept { return diameter_ / config_.speed; }

  std::size_t index(std::size_t cell, std::size_t k) const noexcept {
    return cell * directions_.size() + k;
  }

 private:
  GeometryConfig config_;
  int nx_ = 0;
  int ny_ = 1;
  double dx_ = 0.0;
  double dy_ = 1.0;
  double volume_ = 0.0;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  double diameter_ = 0.0;
  std::vector<std::pair<int, int>> cells_;
  std::vector<std::ptrdiff_t> lattice_;              // (i, j) -> active cell
  std::vector<std::ptrdiff_t> face_of_;              // (cell, axis, side) -> face
  std::vector<Direction> directions_;
  std::vector<double> weights_;
  std::vector<std::size_t> opposite_;
  std::vector<BoundaryFace> faces_;
};

PhaseSpaceGrid build_grid(const GeometryConfig& config);

/// Discrete element of V0/V1: one value per (cell, direction).
class Field {
 public:
  Field() = default;
  Field(std::size_t n_cells, std::size_t n_directions, double value = 0.0)
      : n_cells_(n_cells), n_dir_(n_directions), values_(n_cells * n_directions, value) {}
  explicit Field(const PhaseSpaceGrid& grid, double value = 0.0)
      : Field(grid.n_cells(), grid.n_directions(), value) {}

  std::size_t n_cells() const noexcept { return n_cells_; }
  std::size_t n_directions() const noexcept { return n_dir_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t cell, std::size_t k) { return values_[cell * n_dir_ + k]; }
  double operator()(std::size_t cell, std::size_t k) const { return values_[cell * n_dir_ + k]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double>& raw() noexcept { return values_; }
  const std::vector<double>& raw() const noexcept { return values_; }

  bool same_shape(const Field& other) const noexcept {
    return n_cells_ == other.n_cells_ && n_dir_ == other.n_dir_;
  }
  bool matches(const PhaseSpaceGrid& grid) const noexcept {
    return n_cells_ == grid.n_cells() && n_dir_ == grid.n_directions();
  }
  bool all_finite() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  /// this += a * x
  Field& axpy(double a, const Field& x);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  bool operator==(const Field&) const = default;

 private:
  std::size_t n_cells_ = 0;
  std::size_t n_dir_ = 0;
  std::vector<double> values_;
};

enum class TracePart { Inflow, Outflow, Full };

std::string to_string(TracePart part);

/// True when (face, k) belongs to the given part of the boundary.
bool in_part(const PhaseSpaceGrid& grid, std::size_t face, std::size_t k, TracePart part);

/// Values on boundary faces x directions x time samples.
///
/// Entries outside `part` are kept at zero (see `mask`).
class BoundaryTrace {
 public:
  BoundaryTrace() = default;
  BoundaryTrace(const PhaseSpaceGrid& grid, TracePart part, std::size_t n_times, double dt);
  BoundaryTrace(std::size_t n_faces, std::size_t n_directions, std::size_t n_times, TracePart part,
                double dt);

  std::size_t n_faces() const noexcept { return n_faces_; }
  std::size_t n_directions() const noexcept { return n_dir_; }
  std::size_t n_times() const noexcept { return n_times_; }
  std::size_t samples_size() const noexcept { return n_faces_ * n_dir_; }
  double dt() const noexcept { return dt_; }
  TracePart part() const noexcept { return part_; }
  void set_part(TracePart part) noexcept { part_ = part; }

  double& operator()(std::size_t n, std::size_t face, std::size_t k) {
    return values_[(n * n_faces_ + face) * n_dir_ + k];
  }
  double operator()(std::size_t n, std::size_t face, std::size_t k) const {
    return values_[(n * n_faces_ + face) * n_dir_ + k];
  }
  std::span<double> sample(std::size_t n) {
    return std::span<double>(values_).subspan(n * samples_size(), samples_size());
  }
  std::span<const double> sample(std::size_t n) const {
    return std::span<const double>(values_).subspan(n * samples_size(), samples_size());
  }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const BoundaryTrace& other) const noexcept {
    return n_faces_ == other.n_faces_ && n_dir_ == other.n_dir_ && n_times_ == other.n_times_;
  }
  /// Zero every entry that does not belong to `part()`.
  void mask(const PhaseSpaceGrid& grid);

  BoundaryTrace& operator+=(const BoundaryTrace& other);
  BoundaryTrace& operator-=(const BoundaryTrace& other);
  BoundaryTrace& operator*=(double s);
  friend BoundaryTrace operator-(BoundaryTrace a, const BoundaryTrace& b) { return a -= b; }
  bool operator==(const BoundaryTrace&) const = default;

 private:
  std::size_t n_faces_ = 0;
  std::size_t n_dir_ = 0;
  std::size_t n_times_ = 0;
  TracePart part_ = TracePart::Full;
  double dt_ = 0.0;
  std::vector<double> values_;
};

// V0 = L2(Omega x S)
double v0_inner(const PhaseSpaceGrid& grid, const Field& f, const Field& g);
double v0_norm(const PhaseSpaceGrid& grid, const Field& f);

/// Which way the upwind stencil points. `Against` differentiates along -theta
/// with the stencil upwinded for -theta, which is the exact transpose of the
/// `Along` operator with zero ghosts.
enum class Upwind { Along, Against };

/// Ghost values for missing upwind neighbours.
enum class Ghost {
  Zero,        // vanishing inflow
  Extrapolate, // ghost equals the boundary cell value (no jump at the boundary)
};

/// First-order upwind (s theta) . grad f per (cell, direction), s = +1 for
/// Along and -1 for Against.
Field directional_derivative(const PhaseSpaceGrid& grid, const Field& f,
                             Upwind upwind = Upwind::Along, Ghost ghost = Ghost::Zero);

/// Along-theta upwind derivative whose ghost values at inflow faces are taken
/// from `inflow` at time sample `n`.
Field directional_derivative(const PhaseSpaceGrid& grid, const Field& f,
                             const BoundaryTrace& inflow, std::size_t n);

/// Adds `scale * (theta . grad f)` into `out`; `inflow` may be null.
void accumulate_derivative(const PhaseSpaceGrid& grid, const Field& f, double scale, Field& out,
                           Upwind upwind, Ghost ghost, const BoundaryTrace* inflow,
                           std::size_t n);

/// T norm of a single time sample: sqrt(l sum |nu.theta| h^2 |face| w_k).
double trace_norm(const PhaseSpaceGrid& grid, const BoundaryTrace& h, std::size_t n = 0);
/// Inner product in L2([0, tau]; T) with rectangle weights dt per sample.
double trace_time_inner(const PhaseSpaceGrid& grid, const BoundaryTrace& a,
                        const BoundaryTrace& b);
double trace_time_norm(const PhaseSpaceGrid& grid, const BoundaryTrace& h);
/// Per-entry weight of `trace_time_inner` (without the dt factor).
double trace_weight(const PhaseSpaceGrid& grid, std::size_t face, std::size_t k);

/// Discrete gamma_{+/-}: boundary-adjacent cell values on the requested part.
BoundaryTrace restrict_trace(const PhaseSpaceGrid& grid, const Field& f, TracePart part);
void restrict_trace_into(const PhaseSpaceGrid& grid, const Field& f, BoundaryTrace& out,
                         std::size_t n);

/// Graph norm: sqrt(l^2 |theta.grad f|^2 + |f|^2 + |gamma f|_T^2), with the
/// derivative taken with extrapolated ghosts.
double v1_norm(const PhaseSpaceGrid& grid, const Field& f);

/// | <theta.grad u, v> + <theta.grad v, u> - oint (theta.nu) u v |
double green_identity_residual(const PhaseSpaceGrid& grid, const Field& u, const Field& v);

}  // namespace rtetr
