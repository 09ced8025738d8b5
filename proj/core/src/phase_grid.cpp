#include "rtetr/phase_grid.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "rtetr/error.hpp"

namespace rtetr {

namespace {

constexpr double kFluxEps = 1e-12;

std::size_t face_slot(std::size_t cell, int axis, int side) {
  return cell * 4 + static_cast<std::size_t>(axis) * 2 + (side > 0 ? 1 : 0);
}

void require_same(const Field& f, const Field& g) {
  if (!f.same_shape(g)) throw InvalidArgument("field shape mismatch");
}

void require_grid(const PhaseSpaceGrid& grid, const Field& f) {
  if (!f.matches(grid)) throw InvalidArgument("field does not match grid");
}

}  // namespace

std::string to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::Rod1D: return "rod1d";
    case GeometryKind::Box2D: return "box2d";
    case GeometryKind::Disk2D: return "disk2d";
  }
  return "unknown";
}

GeometryKind geometry_kind_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "rod1d" || s == "rod") return GeometryKind::Rod1D;
  if (s == "box2d" || s == "box") return GeometryKind::Box2D;
  if (s == "disk2d" || s == "disk") return GeometryKind::Disk2D;
  throw InvalidArgument("unknown geometry '" + name + "'");
}

std::string to_string(TracePart part) {
  switch (part) {
    case TracePart::Inflow: return "inflow";
    case TracePart::Outflow: return "outflow";
    case TracePart::Full: return "full";
  }
  return "unknown";
}

PhaseSpaceGrid::PhaseSpaceGrid(const GeometryConfig& config) : config_(config) {
  if (config.n_cells < 2) throw InvalidArgument("n_cells must be >= 2");
  if (!(config.speed > 0.0)) throw InvalidArgument("particle speed must be positive");

  const int n = config.n_cells;
  switch (config.kind) {
    case GeometryKind::Rod1D:
      if (!(config.length > 0.0)) throw InvalidArgument("rod length must be positive");
      nx_ = n;
      ny_ = 1;
      dx_ = config.length / n;
      dy_ = 1.0;
      volume_ = dx_;
      diameter_ = config.length;
      break;
    case GeometryKind::Box2D:
      if (!(config.width > 0.0) || !(config.height > 0.0))
        throw InvalidArgument("box dimensions must be positive");
      nx_ = ny_ = n;
      dx_ = config.width / n;
      dy_ = config.height / n;
      volume_ = dx_ * dy_;
      diameter_ = std::hypot(config.width, config.height);
      break;
    case GeometryKind::Disk2D:
      if (!(config.radius > 0.0)) throw InvalidArgument("disk radius must be positive");
      nx_ = ny_ = n;
      dx_ = dy_ = 2.0 * config.radius / n;
      volume_ = dx_ * dy_;
      origin_x_ = origin_y_ = -config.radius;
      diameter_ = 2.0 * config.radius;
      break;
  }

  // Directions.
  if (config.kind == GeometryKind::Rod1D) {
    directions_ = {{1.0, 0.0}, {-1.0, 0.0}};
    weights_ = {1.0, 1.0};
    opposite_ = {1, 0};
  } else {
    const int nt = config.n_theta;
    if (nt < 2 || nt % 2 != 0) throw InvalidArgument("n_theta must be even and >= 2");
    directions_.resize(nt);
    weights_.assign(nt, 2.0 * std::numbers::pi / nt);
    opposite_.resize(nt);
    for (int k = 0; k < nt; ++k) {
      const double phi = (2.0 * k + 1.0) * std::numbers::pi / nt;
      directions_[k] = {std::cos(phi), std::sin(phi)};
      opposite_[k] = static_cast<std::size_t>((k + nt / 2) % nt);
    }
  }

  // Active cells.
  lattice_.assign(static_cast<std::size_t>(nx_) * ny_, kNoNeighbor);
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      bool active = true;
      if (config.kind == GeometryKind::Disk2D) {
        const double x = origin_x_ + (i + 0.5) * dx_;
        const double y = origin_y_ + (j + 0.5) * dy_;
        active = x * x + y * y <= config.radius * config.radius;
      }
      if (active) {
        lattice_[static_cast<std::size_t>(j) * nx_ + i] = static_cast<std::ptrdiff_t>(cells_.size());
        cells_.emplace_back(i, j);
      }
    }
  }
  if (cells_.size() < 2) throw InvalidArgument("grid has fewer than two active cells");

  // Boundary faces.
  face_of_.assign(cells_.size() * 4, kNoNeighbor);
  const int n_axes = dimension();
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int axis = 0; axis < n_axes; ++axis) {
      for (int side : {-1, 1}) {
        if (neighbor(c, axis, side) != kNoNeighbor) continue;
        BoundaryFace face;
        face.cell = c;
        face.axis = axis;
        face.side = side;
        face.normal = axis == 0 ? Direction{double(side), 0.0} : Direction{0.0, double(side)};
        face.measure = dimension() == 1 ? 1.0 : (axis == 0 ? dy_ : dx_);
        face_of_[face_slot(c, axis, side)] = static_cast<std::ptrdiff_t>(faces_.size());
        faces_.push_back(face);
      }
    }
  }
}

PhaseSpaceGrid build_grid(const GeometryConfig& config) { return PhaseSpaceGrid(config); }

double PhaseSpaceGrid::min_spacing() const noexcept {
  return dimension() == 1 ? dx_ : std::min(dx_, dy_);
}

Direction PhaseSpaceGrid::cell_center(std::size_t cell) const {
  const auto [i, j] = cells_[cell];
  if (dimension() == 1) return {(i + 0.5) * dx_, 0.0};
  return {origin_x_ + (i + 0.5) * dx_, origin_y_ + (j + 0.5) * dy_};
}

std::ptrdiff_t PhaseSpaceGrid::cell_at(int i, int j) const {
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return kNoNeighbor;
  return lattice_[static_cast<std::size_t>(j) * nx_ + i];
}

std::ptrdiff_t PhaseSpaceGrid::neighbor(std::size_t cell, int axis, int side) const {
  const auto [i, j] = cells_[cell];
  return axis == 0 ? cell_at(i + side, j) : cell_at(i, j + side);
}

std::ptrdiff_t PhaseSpaceGrid::boundary_face(std::size_t cell, int axis, int side) const {
  return face_of_[face_slot(cell, axis, side)];
}

double PhaseSpaceGrid::flux(std::size_t face, std::size_t k) const {
  const auto& f = faces_[face];
  const auto& d = directions_[k];
  const double v = f.normal.x * d.x + f.normal.y * d.y;
  return std::abs(v) < kFluxEps ? 0.0 : v;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field& Field::operator+=(const Field& other) {
  require_same(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

Field& Field::axpy(double a, const Field& x) {
  require_same(*this, x);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
  return *this;
}

bool in_part(const PhaseSpaceGrid& grid, std::size_t face, std::size_t k, TracePart part) {
  const double v = grid.flux(face, k);
  switch (part) {
    case TracePart::Inflow: return v < 0.0;
    case TracePart::Outflow: return v > 0.0;
    case TracePart::Full: return true;
  }
  return false;
}

BoundaryTrace::BoundaryTrace(const PhaseSpaceGrid& grid, TracePart part, std::size_t n_times,
                             double dt)
    : BoundaryTrace(grid.n_faces(), grid.n_directions(), n_times, part, dt) {}

BoundaryTrace::BoundaryTrace(std::size_t n_faces, std::size_t n_directions, std::size_t n_times,
                             TracePart part, double dt)
    : n_faces_(n_faces),
      n_dir_(n_directions),
      n_times_(n_times),
      part_(part),
      dt_(dt),
      values_(n_faces * n_directions * n_times, 0.0) {}

void BoundaryTrace::mask(const PhaseSpaceGrid& grid) {
  if (part_ == TracePart::Full) return;
  for (std::size_t f = 0; f < n_faces_; ++f) {
    for (std::size_t k = 0; k < n_dir_; ++k) {
      if (in_part(grid, f, k, part_)) continue;
      for (std::size_t n = 0; n < n_times_; ++n) (*this)(n, f, k) = 0.0;
    }
  }
}

BoundaryTrace& BoundaryTrace::operator+=(const BoundaryTrace& other) {
  if (!same_shape(other)) throw InvalidArgument("trace shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

BoundaryTrace& BoundaryTrace::operator-=(const BoundaryTrace& other) {
  if (!same_shape(other)) throw InvalidArgument("trace shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

BoundaryTrace& BoundaryTrace::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

double v0_inner(const PhaseSpaceGrid& grid, const Field& f, const Field& g) {
  require_grid(grid, f);
  require_same(f, g);
  const std::size_t nd = grid.n_directions();
  double sum = 0.0;
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    for (std::size_t k = 0; k < nd; ++k) sum += f(c, k) * g(c, k) * grid.weight(k);
  }
  return sum * grid.cell_volume();
}

double v0_norm(const PhaseSpaceGrid& grid, const Field& f) {
  return std::sqrt(std::max(0.0, v0_inner(grid, f, f)));
}

void accumulate_derivative(const PhaseSpaceGrid& grid, const Field& f, double scale, Field& out,
                           Upwind upwind, Ghost ghost, const BoundaryTrace* inflow,
                           std::size_t n) {
  require_grid(grid, f);
  require_grid(grid, out);
  const double s = upwind == Upwind::Along ? 1.0 : -1.0;
  const std::size_t nd = grid.n_directions();
  const int n_axes = grid.dimension();
  for (int axis = 0; axis < n_axes; ++axis) {
    const double inv_h = 1.0 / grid.spacing(axis);
    for (std::size_t k = 0; k < nd; ++k) {
      const auto& d = grid.direction(k);
      const double v = s * (axis == 0 ? d.x : d.y);
      if (std::abs(v) < 1e-12) continue;
      const int up = v > 0.0 ? -1 : 1;
      const double coef = scale * std::abs(v) * inv_h;
      for (std::size_t c = 0; c < grid.n_cells(); ++c) {
        const double fc = f(c, k);
        const std::ptrdiff_t nb = grid.neighbor(c, axis, up);
        double fu;
        if (nb != kNoNeighbor) {
          fu = f(static_cast<std::size_t>(nb), k);
        } else if (ghost == Ghost::Extrapolate) {
          fu = fc;
        } else if (inflow != nullptr) {
          fu = (*inflow)(n, static_cast<std::size_t>(grid.boundary_face(c, axis, up)), k);
        } else {
          fu = 0.0;
        }
        out(c, k) += coef * (fc - fu);
      }
    }
  }
}

Field directional_derivative(const PhaseSpaceGrid& grid, const Field& f, Upwind upwind,
                             Ghost ghost) {
  Field out(grid);
  accumulate_derivative(grid, f, 1.0, out, upwind, ghost, nullptr, 0);
  return out;
}

Field directional_derivative(const PhaseSpaceGrid& grid, const Field& f,
                             const BoundaryTrace& inflow, std::size_t n) {
  if (inflow.n_faces() != grid.n_faces() || inflow.n_directions() != grid.n_directions() ||
      n >= inflow.n_times())
    throw InvalidArgument("inflow trace does not match grid");
  Field out(grid);
  accumulate_derivative(grid, f, 1.0, out, Upwind::Along, Ghost::Zero, &inflow, n);
  return out;
}

double trace_weight(const PhaseSpaceGrid& grid, std::size_t face, std::size_t k) {
  return grid.diameter() * std::abs(grid.flux(face, k)) * grid.faces()[face].measure *
         grid.weight(k);
}

double trace_norm(const PhaseSpaceGrid& grid, const BoundaryTrace& h, std::size_t n) {
  if (h.n_faces() != grid.n_faces() || h.n_directions() != grid.n_directions())
    throw InvalidArgument("trace does not match grid");
  if (n >= h.n_times()) throw InvalidArgument("trace sample out of range");
  double sum = 0.0;
  for (std::size_t f = 0; f < grid.n_faces(); ++f) {
    for (std::size_t k = 0; k < grid.n_directions(); ++k) {
      if (!in_part(grid, f, k, h.part())) continue;
      const double v = h(n, f, k);
      sum += trace_weight(grid, f, k) * v * v;
    }
  }
  return std::sqrt(sum);
}

double trace_time_inner(const PhaseSpaceGrid& grid, const BoundaryTrace& a,
                        const BoundaryTrace& b) {
  if (!a.same_shape(b) || a.n_faces() != grid.n_faces())
    throw InvalidArgument("trace shape mismatch");
  double sum = 0.0;
  for (std::size_t f = 0; f < grid.n_faces(); ++f) {
    for (std::size_t k = 0; k < grid.n_directions(); ++k) {
      const double w = trace_weight(grid, f, k);
      if (w == 0.0) continue;
      double s = 0.0;
      for (std::size_t n = 0; n < a.n_times(); ++n) s += a(n, f, k) * b(n, f, k);
      sum += w * s;
    }
  }
  return sum * a.dt();
}

double trace_time_norm(const PhaseSpaceGrid& grid, const BoundaryTrace& h) {
  return std::sqrt(std::max(0.0, trace_time_inner(grid, h, h)));
}

void restrict_trace_into(const PhaseSpaceGrid& grid, const Field& f, BoundaryTrace& out,
                         std::size_t n) {
  require_grid(grid, f);
  for (std::size_t face = 0; face < grid.n_faces(); ++face) {
    const std::size_t cell = grid.faces()[face].cell;
    for (std::size_t k = 0; k < grid.n_directions(); ++k) {
      out(n, face, k) = in_part(grid, face, k, out.part()) ? f(cell, k) : 0.0;
    }
  }
}

BoundaryTrace restrict_trace(const PhaseSpaceGrid& grid, const Field& f, TracePart part) {
  BoundaryTrace out(grid, part, 1, 0.0);
  restrict_trace_into(grid, f, out, 0);
  return out;
}

double v1_norm(const PhaseSpaceGrid& grid, const Field& f) {
  const Field df = directional_derivative(grid, f, Upwind::Along, Ghost::Extrapolate);
  const double l = grid.diameter();
  const double tn = trace_norm(grid, restrict_trace(grid, f, TracePart::Full));
  return std::sqrt(l * l * v0_inner(grid, df, df) + v0_inner(grid, f, f) + tn * tn);
}

double green_identity_residual(const PhaseSpaceGrid& grid, const Field& u, const Field& v) {
  require_same(u, v);
  const Field du = directional_derivative(grid, u, Upwind::Along, Ghost::Extrapolate);
  const Field dv = directional_derivative(grid, v, Upwind::Along, Ghost::Extrapolate);
  double boundary = 0.0;
  for (std::size_t face = 0; face < grid.n_faces(); ++face) {
    const auto& fc = grid.faces()[face];
    for (std::size_t k = 0; k < grid.n_directions(); ++k) {
      boundary += grid.flux(face, k) * u(fc.cell, k) * v(fc.cell, k) * fc.measure * grid.weight(k);
    }
  }
  return std::abs(v0_inner(grid, du, v) + v0_inner(grid, dv, u) - boundary);
}

}  // namespace rtetr
