#pragma once

// Spacelike graphs t = u(x) over the spatial torus and their induced geometry.
//
// Conventions: nu is the future unit normal, H = tr(h^{-1} K) with
// K(X, Y) = <D_X nu, Y>, so expanding slices have H > 0; v = -<nu, d/dt> >= 1.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmcflow/spacetime.hpp"

namespace cmcflow {

using Field = Eigen::VectorXd;

inline constexpr int kMaxGridDim = 3;

/// Periodic grid over the spatial torus. Axis k spans [-b_k, b_k) with N_k
/// nodes; an axis with N_k = 1 carries no variation (all differences vanish),
/// which represents surfaces independent of that coordinate exactly.
class PeriodicGrid {
 public:
  /// Single-node one-dimensional grid.
  PeriodicGrid() : PeriodicGrid({1}, {1.0}) {}
  PeriodicGrid(std::vector<int> sizes, std::vector<double> half_widths);

  /// Grid whose axes follow the model's fibers; `sizes` must have one entry per
  /// spatial dimension, or a single entry used for the first axis (remaining
  /// axes get N = 1).
  static PeriodicGrid for_model(const MultiWarpedSpacetime& model, const std::vector<int>& sizes);

  int dim() const { return static_cast<int>(sizes_.size()); }
  int size(int axis) const { return sizes_[static_cast<std::size_t>(axis)]; }
  double half_width(int axis) const { return half_widths_[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return 2.0 * half_width(axis) / size(axis); }
  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<double>& half_widths() const { return half_widths_; }

  std::size_t points() const { return points_; }
  /// Axes with N_k > 1.
  const std::vector<int>& active_axes() const { return active_; }
  /// Smallest spacing over active axes (+inf when no axis is active).
  double min_active_spacing() const;
  /// Volume of one grid cell, prod_k spacing(k).
  double cell_volume() const;

  std::array<int, kMaxGridDim> unflatten(std::size_t index) const;
  std::size_t flatten(const std::array<int, kMaxGridDim>& idx) const;
  /// Index of the node `offset` steps along `axis`, wrapping periodically.
  std::size_t shifted(std::size_t index, int axis, int offset) const;
  double coordinate(std::size_t index, int axis) const;

  bool operator==(const PeriodicGrid&) const = default;

 private:
  std::vector<int> sizes_;
  std::vector<double> half_widths_;
  std::vector<std::size_t> strides_;
  std::vector<int> active_;
  std::size_t points_ = 0;
};

struct GraphSurface {
  PeriodicGrid grid;
  Field u;

  static GraphSurface constant(PeriodicGrid grid, double height);
};

struct SurfaceGeometry {
  Field H;
  Field v;
  Field A2;
  Field sigma2;
  Field ric_nu;
  /// Upper bound on the largest eigenvalue of h^{-1} in coordinate units.
  Field hinv_max;
};

/// Pointwise geometry of the graph from height, gradient and Hessian at a node.
struct LocalGeometry {
  bool spacelike = false;
  double v = 1.0;
  double H = 0.0;
  double A2 = 0.0;
  double sigma2 = 0.0;
  double ric_nu = 0.0;
  /// Upper bound on the largest eigenvalue of h^{-1}.
  double hinv_max = 0.0;
  /// h^{-1} (only the leading dim x dim block is meaningful).
  std::array<std::array<double, kMaxGridDim>, kMaxGridDim> hinv{};
  /// sqrt(det h).
  double sqrt_det_h = 0.0;
};

/// Geometry from (u, Du, D^2u) at one point; Du and D^2u are in coordinates.
LocalGeometry local_geometry(const MultiWarpedSpacetime& model, int dim, double u,
                             const std::array<double, kMaxGridDim>& du,
                             const std::array<std::array<double, kMaxGridDim>, kMaxGridDim>& d2u);

/// Centered second-order differences at a node.
void grid_derivatives(const PeriodicGrid& grid, const Field& u, std::size_t index,
                      std::array<double, kMaxGridDim>& du,
                      std::array<std::array<double, kMaxGridDim>, kMaxGridDim>& d2u);

/// Induced geometry with H from the quasilinear graph operator
///   H = v [ sum_k (a_k'/a_k)(1 - v^2 u_k^2 / a_k^2) + h^{jk} u_jk ].
/// Throws GeometryError at the first point that is not spacelike with margin.
SurfaceGeometry induced_geometry(const MultiWarpedSpacetime& model, const GraphSurface& surface,
                                 double margin_tol = 1e-6);

/// Mean curvature as the spacetime divergence of the unit normal field
/// extended off the surface, div nu = d_mu nu^mu + Gamma^mu_{mu t} nu^t, with
/// the spatial divergence taken in flux form at half-nodes and the time
/// derivative by differencing the extension in t. Independent of the
/// quasilinear form used by induced_geometry; the two agree to O(dx^2).
Field mean_curvature_flux_form(const MultiWarpedSpacetime& model, const GraphSurface& surface);

struct SpacelikeReport {
  bool spacelike = true;
  /// Minimum over the grid of the smallest eigenvalue of h.
  double margin = 0.0;
  std::size_t worst_point = 0;
};

/// Passes iff at every node lambda_min(h) >= margin_tol * min_k a_k(u)^2 and
/// the node lies inside the model interval.
SpacelikeReport spacelike_check(const MultiWarpedSpacetime& model, const GraphSurface& surface,
                                double margin_tol = 1e-6);

/// Surface CSV: "# grid: N1,N2; periods: b1,b2" then rows "i1,i2,u".
void write_surface_csv(std::ostream& out, const PeriodicGrid& grid, const Field& values);
GraphSurface read_surface_csv(std::istream& in);
GraphSurface load_surface(const std::string& path);

}  // namespace cmcflow
