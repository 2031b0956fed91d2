#include "cmcflow/hypersurface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cmcflow/errors.hpp"

namespace cmcflow {

PeriodicGrid::PeriodicGrid(std::vector<int> sizes, std::vector<double> half_widths)
    : sizes_(std::move(sizes)), half_widths_(std::move(half_widths)) {
  if (sizes_.empty() || sizes_.size() > static_cast<std::size_t>(kMaxGridDim))
    throw ArgumentError("grid dimension must be between 1 and 3");
  if (sizes_.size() != half_widths_.size()) throw ArgumentError("grid sizes and periods differ in length");
  strides_.assign(sizes_.size(), 1);
  points_ = 1;
  for (std::size_t k = sizes_.size(); k-- > 0;) {
    if (sizes_[k] < 1) throw ArgumentError("grid resolution must be positive");
    if (!(half_widths_[k] > 0.0)) throw ArgumentError("grid periods must be positive");
    strides_[k] = points_;
    points_ *= static_cast<std::size_t>(sizes_[k]);
  }
  for (int k = 0; k < dim(); ++k)
    if (size(k) > 1) active_.push_back(k);
}

PeriodicGrid PeriodicGrid::for_model(const MultiWarpedSpacetime& model, const std::vector<int>& sizes) {
  const int d = model.dimension();
  if (d > kMaxGridDim) throw ArgumentError("graph surfaces support at most 3 spatial dimensions");
  std::vector<int> n(static_cast<std::size_t>(d), 1);
  if (sizes.size() == 1) {
    n[0] = sizes[0];
  } else if (sizes.size() == static_cast<std::size_t>(d)) {
    n = sizes;
  } else {
    throw ArgumentError("grid resolution needs 1 or " + std::to_string(d) + " entries");
  }
  std::vector<double> b;
  for (int k = 0; k < d; ++k)
    b.push_back(model.fibers()[static_cast<std::size_t>(model.axis_fiber(k))].period);
  return {std::move(n), std::move(b)};
}

double PeriodicGrid::min_active_spacing() const {
  double h = std::numeric_limits<double>::infinity();
  for (int k : active_) h = std::min(h, spacing(k));
  return h;
}

double PeriodicGrid::cell_volume() const {
  double vol = 1.0;
  for (int k = 0; k < dim(); ++k) vol *= spacing(k);
  return vol;
}

std::array<int, kMaxGridDim> PeriodicGrid::unflatten(std::size_t index) const {
  std::array<int, kMaxGridDim> idx{};
  for (int k = 0; k < dim(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    idx[ks] = static_cast<int>((index / strides_[ks]) % static_cast<std::size_t>(sizes_[ks]));
  }
  return idx;
}

std::size_t PeriodicGrid::flatten(const std::array<int, kMaxGridDim>& idx) const {
  std::size_t index = 0;
  for (int k = 0; k < dim(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const int n = sizes_[ks];
    const int i = ((idx[ks] % n) + n) % n;
    index += static_cast<std::size_t>(i) * strides_[ks];
  }
  return index;
}

std::size_t PeriodicGrid::shifted(std::size_t index, int axis, int offset) const {
  const auto ks = static_cast<std::size_t>(axis);
  const int n = sizes_[ks];
  const int i = static_cast<int>((index / strides_[ks]) % static_cast<std::size_t>(n));
  const int j = (((i + offset) % n) + n) % n;
  return index + static_cast<std::size_t>(j) * strides_[ks] - static_cast<std::size_t>(i) * strides_[ks];
}

double PeriodicGrid::coordinate(std::size_t index, int axis) const {
  const auto ks = static_cast<std::size_t>(axis);
  const int i = static_cast<int>((index / strides_[ks]) % static_cast<std::size_t>(sizes_[ks]));
  return -half_widths_[ks] + i * spacing(axis);
}

GraphSurface GraphSurface::constant(PeriodicGrid grid, double height) {
  Field u = Field::Constant(static_cast<Eigen::Index>(grid.points()), height);
  return {std::move(grid), std::move(u)};
}

namespace {

using Vec = std::array<double, kMaxGridDim>;
using Mat = std::array<Vec, kMaxGridDim>;

struct AxisState {
  double scale2 = 1.0;
  double hubble = 0.0;
  double accel = 0.0;
};

void axis_states(const MultiWarpedSpacetime& model, int dim, double t, std::array<AxisState, kMaxGridDim>& out) {
  const auto& fibers = model.fibers();
  for (int k = 0; k < dim; ++k) {
    const auto& law = fibers[static_cast<std::size_t>(model.axis_fiber(k))].warping;
    const double a = law.value(t);
    out[static_cast<std::size_t>(k)] = {a * a, law.hubble(t), law.acceleration(t)};
  }
}

// Smallest eigenvalue of a symmetric matrix of size 1..3.
double min_symmetric_eigenvalue(const Mat& m, int n) {
  if (n == 1) return m[0][0];
  if (n == 2) {
    const double mean = 0.5 * (m[0][0] + m[1][1]);
    const double half_diff = 0.5 * (m[0][0] - m[1][1]);
    return mean - std::hypot(half_diff, m[0][1]);
  }
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
  solver.computeDirect(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

// Smallest eigenvalue of h = G - Du Du^T and the threshold it is compared to.
std::pair<double, double> induced_metric_margin(const MultiWarpedSpacetime& model, int dim, double u,
                                                const Vec& du) {
  std::array<AxisState, kMaxGridDim> ax{};
  axis_states(model, dim, u, ax);
  Mat h{};
  double min_g = std::numeric_limits<double>::infinity();
  for (int j = 0; j < dim; ++j) {
    const auto js = static_cast<std::size_t>(j);
    min_g = std::min(min_g, ax[js].scale2);
    for (int k = 0; k < dim; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      h[js][ks] = (j == k ? ax[js].scale2 : 0.0) - du[js] * du[ks];
    }
  }
  return {min_symmetric_eigenvalue(h, dim), min_g};
}

void require_matching_dims(const MultiWarpedSpacetime& model, const GraphSurface& surface) {
  if (model.dimension() != surface.grid.dim())
    throw ArgumentError("surface grid dimension does not match the model");
  if (static_cast<std::size_t>(surface.u.size()) != surface.grid.points())
    throw ArgumentError("surface field size does not match its grid");
}

}  // namespace

void grid_derivatives(const PeriodicGrid& grid, const Field& u, std::size_t index, Vec& du, Mat& d2u) {
  du = {};
  d2u = {};
  const double u0 = u[static_cast<Eigen::Index>(index)];
  auto at = [&](std::size_t i) { return u[static_cast<Eigen::Index>(i)]; };
  for (int j : grid.active_axes()) {
    const auto js = static_cast<std::size_t>(j);
    const double hj = grid.spacing(j);
    const std::size_t jp = grid.shifted(index, j, 1);
    const std::size_t jm = grid.shifted(index, j, -1);
    du[js] = (at(jp) - at(jm)) / (2.0 * hj);
    d2u[js][js] = (at(jp) - 2.0 * u0 + at(jm)) / (hj * hj);
    for (int k : grid.active_axes()) {
      if (k <= j) continue;
      const auto ks = static_cast<std::size_t>(k);
      const double hk = grid.spacing(k);
      const double cross = (at(grid.shifted(jp, k, 1)) - at(grid.shifted(jp, k, -1)) -
                            at(grid.shifted(jm, k, 1)) + at(grid.shifted(jm, k, -1))) /
                           (4.0 * hj * hk);
      d2u[js][ks] = cross;
      d2u[ks][js] = cross;
    }
  }
}

LocalGeometry local_geometry(const MultiWarpedSpacetime& model, int dim, double u, const Vec& du,
                             const Mat& d2u) {
  LocalGeometry g;
  if (!model.contains(u)) return g;

  std::array<AxisState, kMaxGridDim> ax{};
  axis_states(model, dim, u, ax);

  Vec q{};  // G^{-1} Du
  double grad2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    q[ks] = du[ks] / ax[ks].scale2;
    grad2 += du[ks] * q[ks];
  }
  if (!(grad2 < 1.0)) return g;

  g.spacelike = true;
  const double v = 1.0 / std::sqrt(1.0 - grad2);
  g.v = v;

  double max_ginv = 0.0;
  double sum_hubble = 0.0;
  double r0 = 0.0;
  double sqrt_det_g = 1.0;
  for (int k = 0; k < dim; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    max_ginv = std::max(max_ginv, 1.0 / ax[ks].scale2);
    sum_hubble += ax[ks].hubble;
    r0 -= ax[ks].accel;
    sqrt_det_g *= std::sqrt(ax[ks].scale2);
  }
  double q2 = 0.0;
  for (int k = 0; k < dim; ++k) q2 += q[static_cast<std::size_t>(k)] * q[static_cast<std::size_t>(k)];
  g.hinv_max = max_ginv + v * v * q2;
  g.sqrt_det_h = sqrt_det_g / v;

  // h^{-1} = G^{-1} + v^2 (G^{-1}Du)(G^{-1}Du)^T
  // K_jk = v (u_jk + delta_jk a_k a_k' - u_j u_k (a_j'/a_j + a_k'/a_k))
  Mat K{};
  for (int j = 0; j < dim; ++j) {
    const auto js = static_cast<std::size_t>(j);
    for (int k = 0; k < dim; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      g.hinv[js][ks] = (j == k ? 1.0 / ax[js].scale2 : 0.0) + v * v * q[js] * q[ks];
      K[js][ks] = v * (d2u[js][ks] + (j == k ? ax[js].scale2 * ax[js].hubble : 0.0) -
                       du[js] * du[ks] * (ax[js].hubble + ax[ks].hubble));
    }
  }
  Mat W{};  // shape operator h^{-1} K
  double H = 0.0;
  for (int j = 0; j < dim; ++j) {
    const auto js = static_cast<std::size_t>(j);
    for (int k = 0; k < dim; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      double s = 0.0;
      for (int l = 0; l < dim; ++l) s += g.hinv[js][static_cast<std::size_t>(l)] * K[static_cast<std::size_t>(l)][ks];
      W[js][ks] = s;
    }
    H += W[js][js];
  }
  const double mean = H / dim;
  double a2 = 0.0;
  double s2 = 0.0;
  for (int j = 0; j < dim; ++j) {
    const auto js = static_cast<std::size_t>(j);
    for (int k = 0; k < dim; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      a2 += W[js][ks] * W[ks][js];
      const double bjk = W[js][ks] - (j == k ? mean : 0.0);
      const double bkj = W[ks][js] - (j == k ? mean : 0.0);
      s2 += bjk * bkj;
    }
  }
  g.H = H;
  g.A2 = a2;
  g.sigma2 = s2;

  // Ric(nu, nu) = v^2 (r_0 + sum_k r_k u_k^2 / a_k^2)
  double spatial = 0.0;
  for (int k = 0; k < dim; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const double rk = ax[ks].accel + ax[ks].hubble * (sum_hubble - ax[ks].hubble);
    spatial += rk * du[ks] * q[ks];
  }
  g.ric_nu = v * v * (r0 + spatial);
  return g;
}

SpacelikeReport spacelike_check(const MultiWarpedSpacetime& model, const GraphSurface& surface,
                                double margin_tol) {
  require_matching_dims(model, surface);
  const auto& grid = surface.grid;
  const int d = grid.dim();
  SpacelikeReport report;
  report.margin = std::numeric_limits<double>::infinity();
  Vec du{};
  Mat d2u{};
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const double u = surface.u[static_cast<Eigen::Index>(i)];
    if (!model.contains(u) || !std::isfinite(u)) {
      if (report.margin > -std::numeric_limits<double>::infinity()) {
        report.margin = -std::numeric_limits<double>::infinity();
        report.worst_point = i;
      }
      report.spacelike = false;
      continue;
    }
    grid_derivatives(grid, surface.u, i, du, d2u);
    const auto [lmin, min_g] = induced_metric_margin(model, d, u, du);
    if (lmin < report.margin) {
      report.margin = lmin;
      report.worst_point = i;
    }
    if (lmin < margin_tol * min_g) report.spacelike = false;
  }
  return report;
}

SurfaceGeometry induced_geometry(const MultiWarpedSpacetime& model, const GraphSurface& surface,
                                 double margin_tol) {
  require_matching_dims(model, surface);
  const auto& grid = surface.grid;
  const int d = grid.dim();
  const auto n = static_cast<Eigen::Index>(grid.points());
  SurfaceGeometry geom{Field(n), Field(n), Field(n), Field(n), Field(n), Field(n)};
  Vec du{};
  Mat d2u{};
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double u = surface.u[ii];
    grid_derivatives(grid, surface.u, i, du, d2u);
    const LocalGeometry g = local_geometry(model, d, u, du, d2u);
    bool ok = g.spacelike;
    if (ok) {
      const auto [lmin, min_g] = induced_metric_margin(model, d, u, du);
      ok = lmin >= margin_tol * min_g;
    }
    if (!ok) {
      std::ostringstream msg;
      msg << "surface is not spacelike at grid point " << i << " (u = " << u << ")";
      throw GeometryError(i, msg.str());
    }
    geom.H[ii] = g.H;
    geom.v[ii] = g.v;
    geom.A2[ii] = g.A2;
    geom.sigma2[ii] = g.sigma2;
    geom.ric_nu[ii] = g.ric_nu;
    geom.hinv_max[ii] = g.hinv_max;
  }
  return geom;
}

Field mean_curvature_flux_form(const MultiWarpedSpacetime& model, const GraphSurface& surface) {
  require_matching_dims(model, surface);
  const auto& grid = surface.grid;
  const int d = grid.dim();
  const auto& u = surface.u;
  auto at = [&](std::size_t i) { return u[static_cast<Eigen::Index>(i)]; };

  auto centered = [&](std::size_t i, int axis) {
    if (grid.size(axis) == 1) return 0.0;
    return (at(grid.shifted(i, axis, 1)) - at(grid.shifted(i, axis, -1))) / (2.0 * grid.spacing(axis));
  };
  // Components of the unit normal extended off the surface at fixed time t.
  auto normal_time = [&](double t, const Vec& p) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
      const double a = model.axis_scale(k, t);
      s += p[static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(k)] / (a * a);
    }
    if (!(s < 1.0)) throw GeometryError(0, "extended normal is not timelike");
    return 1.0 / std::sqrt(1.0 - s);
  };

  Field H(static_cast<Eigen::Index>(grid.points()));
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const double t = at(i);
    model.require_contains(t);

    double divergence = 0.0;
    for (int k : grid.active_axes()) {
      const auto ks = static_cast<std::size_t>(k);
      const double hk = grid.spacing(k);
      double flux[2];
      for (int side = 0; side < 2; ++side) {
        const std::size_t lo = side == 0 ? grid.shifted(i, k, -1) : i;
        const std::size_t hi = side == 0 ? i : grid.shifted(i, k, 1);
        Vec p{};
        for (int j : grid.active_axes()) {
          const auto js = static_cast<std::size_t>(j);
          p[js] = j == k ? (at(hi) - at(lo)) / hk : 0.5 * (centered(lo, j) + centered(hi, j));
        }
        const double a = model.axis_scale(k, t);
        flux[side] = normal_time(t, p) * p[ks] / (a * a);
      }
      divergence += (flux[1] - flux[0]) / hk;
    }

    Vec p{};
    for (int j : grid.active_axes()) p[static_cast<std::size_t>(j)] = centered(i, j);
    const double nu_t = normal_time(t, p);
    const double dt = 1e-5 * std::max(1.0, std::abs(t));
    const double dnu_t = (normal_time(t + dt, p) - normal_time(t - dt, p)) / (2.0 * dt);
    double trace_gamma = 0.0;  // Gamma^mu_{mu t} = d/dt log sqrt|g|
    for (int k = 0; k < d; ++k)
      trace_gamma += model.fibers()[static_cast<std::size_t>(model.axis_fiber(k))].warping.hubble(t);

    H[static_cast<Eigen::Index>(i)] = divergence + dnu_t + trace_gamma * nu_t;
  }
  return H;
}

void write_surface_csv(std::ostream& out, const PeriodicGrid& grid, const Field& values) {
  out << "# grid: ";
  for (int k = 0; k < grid.dim(); ++k) out << (k ? "," : "") << grid.size(k);
  out << "; periods: ";
  char buf[64];
  for (int k = 0; k < grid.dim(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", grid.half_width(k));
    out << (k ? "," : "") << buf;
  }
  out << "\n";
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const auto idx = grid.unflatten(i);
    for (int k = 0; k < grid.dim(); ++k) out << idx[static_cast<std::size_t>(k)] << ",";
    std::snprintf(buf, sizeof buf, "%.17g", values[static_cast<Eigen::Index>(i)]);
    out << buf << "\n";
  }
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(item);
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

GraphSurface read_surface_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# grid:", 0) != 0)
    throw ArgumentError("surface CSV must start with '# grid: ...; periods: ...'");
  const auto semi = header.find(';');
  const auto per = header.find("periods:");
  if (semi == std::string::npos || per == std::string::npos)
    throw ArgumentError("surface CSV header lacks periods");
  std::vector<int> sizes;
  std::vector<double> widths;
  try {
    for (const auto& s : split(trim(header.substr(7, semi - 7)), ',')) sizes.push_back(std::stoi(s));
    for (const auto& s : split(trim(header.substr(per + 8)), ',')) widths.push_back(std::stod(s));
  } catch (const std::exception&) {
    throw ArgumentError("surface CSV header is malformed: " + header);
  }
  PeriodicGrid grid(sizes, widths);
  Field u = Field::Constant(static_cast<Eigen::Index>(grid.points()), std::numeric_limits<double>::quiet_NaN());
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto parts = split(line, ',');
    if (parts.size() != static_cast<std::size_t>(grid.dim()) + 1)
      throw ArgumentError("surface CSV row has the wrong number of columns: " + line);
    std::array<int, kMaxGridDim> idx{};
    try {
      for (int k = 0; k < grid.dim(); ++k) {
        idx[static_cast<std::size_t>(k)] = std::stoi(parts[static_cast<std::size_t>(k)]);
        if (idx[static_cast<std::size_t>(k)] < 0 || idx[static_cast<std::size_t>(k)] >= grid.size(k))
          throw ArgumentError("index out of range");
      }
      u[static_cast<Eigen::Index>(grid.flatten(idx))] = std::stod(parts.back());
    } catch (const std::exception&) {
      throw ArgumentError("surface CSV row is malformed: " + line);
    }
    ++rows;
  }
  if (rows != grid.points() || !u.allFinite())
    throw ArgumentError("surface CSV does not cover every grid point exactly once");
  return {std::move(grid), std::move(u)};
}

GraphSurface load_surface(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open surface file " + path);
  return read_surface_csv(in);
}

}  // namespace cmcflow
