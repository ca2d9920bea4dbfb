#include "orlhom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace orlhom {

namespace {

long ipow(long base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

CubeMesh::CubeMesh(int dim, int components, int side, int resolution, BoundaryCondition bc)
    : dim_(dim), components_(components), side_(side), resolution_(resolution), bc_(std::move(bc)) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("mesh: dim must be in {1,2,3}");
  if (components < 1 || components > kMaxDim) throw ConfigError("mesh: components must be in {1,2,3}");
  if (side < 1) throw ConfigError("mesh: side must be a positive integer (field alignment)");
  if (resolution < 1) throw ConfigError("mesh: resolution must be >= 1");
  if (bc_.kind == BoundaryKind::AffineDirichlet) {
    if (bc_.sigma.rows() != components || bc_.sigma.cols() != dim)
      throw ConfigError("mesh: boundary datum must be components x dim");
  }
  m_ = side * resolution;
  cell_count_ = ipow(m_, dim_);
  h_ = 1.0 / resolution;

  // All permutations of {0..d-1}, lexicographic: the Kuhn path of simplex
  // pi visits cell corners 0, e_{pi1}, e_{pi1}+e_{pi2}, ...
  std::array<int, kMaxDim> axes{};
  std::iota(axes.begin(), axes.begin() + dim_, 0);
  do {
    perms_.push_back(axes);
  } while (std::next_permutation(axes.begin(), axes.begin() + dim_));
  simplices_per_cell_ = static_cast<int>(perms_.size());

  element_measure_ = std::pow(h_, dim_) / simplices_per_cell_;
  free_nodes_ = bc_.kind == BoundaryKind::Periodic ? ipow(m_, dim_) : ipow(m_ - 1, dim_);
}

long CubeMesh::node_count() const {
  return bc_.kind == BoundaryKind::Periodic ? ipow(m_, dim_) : ipow(m_ + 1, dim_);
}

double CubeMesh::domain_measure() const {
  return std::pow(static_cast<double>(side_), dim_);
}

DisplacementField DisplacementField::zeros(const CubeMesh& mesh) {
  return {&mesh, std::vector<double>(static_cast<std::size_t>(mesh.dof_count()), 0.0)};
}

void DisplacementField::project_mean_zero() {
  if (mesh->bc().kind != BoundaryKind::Periodic) return;
  const int N = mesh->components();
  const long nodes = mesh->free_node_count();
  if (nodes == 0) return;
  for (int c = 0; c < N; ++c) {
    double mean = 0.0;
    for (long i = 0; i < nodes; ++i) mean += values[static_cast<std::size_t>(i * N + c)];
    mean /= static_cast<double>(nodes);
    for (long i = 0; i < nodes; ++i) values[static_cast<std::size_t>(i * N + c)] -= mean;
  }
}

EnergyAssembler::EnergyAssembler(const CubeMesh& mesh, DensityView density, Mat sigma_offset,
                                 CoordMap map)
    : mesh_(&mesh), density_(density), map_(map) {
  const int d = mesh.dim();
  const int N = mesh.components();
  if (map.scale < 1) throw ConfigError("assembler: coordinate scale must be a positive integer");
  if (density_.base == nullptr) throw ConfigError("assembler: missing density");
  if (density_.base->dim() != d) throw ConfigError("assembler: field and mesh dimension disagree");

  sigma_eff_ = Mat::Zero(N, d);
  if (sigma_offset.size() != 0) {
    if (sigma_offset.rows() != N || sigma_offset.cols() != d)
      throw ConfigError("assembler: sigma offset must be components x dim");
    sigma_eff_ += sigma_offset;
  }
  if (mesh.bc().kind == BoundaryKind::AffineDirichlet) sigma_eff_ += mesh.bc().sigma;

  // Per-cell coefficients, sampled at the barycenter of the cell's first
  // simplex. Integer side/scale/offset keep every simplex barycenter of a
  // cell inside one unit field cell, so one sample per cell is exact.
  const int m = mesh.cells_per_axis();
  const double h = mesh.h();
  cells_.resize(static_cast<std::size_t>(mesh.cell_count()));
  std::array<long, kMaxDim> cell{};
  const double dp1 = d + 1.0;
  for (long cflat = 0; cflat < mesh.cell_count(); ++cflat) {
    std::array<double, kMaxDim> pt{};
    for (int i = 0; i < d; ++i) {
      double bary = (static_cast<double>(cell[i]) + (d - i) / dp1) * h;
      pt[i] = static_cast<double>(map_.scale) * bary + static_cast<double>(map_.offset[i]);
    }
    std::span<const double> x(pt.data(), static_cast<std::size_t>(d));
    LocalDensity ld = density_.base->local_density(x);
    if (density_.bump != nullptr) ld.bump = density_.bump->bump_coefficient(x);
    cells_[static_cast<std::size_t>(cflat)].density = ld;

    for (int i = d - 1; i >= 0; --i) {
      if (++cell[i] < m) break;
      cell[i] = 0;
    }
  }
}

void EnergyAssembler::fetch_node(std::span<const double> u, const std::array<long, kMaxDim>& node,
                                 double* out) const {
  const int d = mesh_->dim();
  const int N = mesh_->components();
  const long m = mesh_->cells_per_axis();
  if (mesh_->bc().kind == BoundaryKind::Periodic) {
    long flat = 0;
    for (int i = 0; i < d; ++i) flat = flat * m + (node[i] == m ? 0 : node[i]);
    const double* src = u.data() + flat * N;
    for (int c = 0; c < N; ++c) out[c] = src[c];
  } else {
    for (int i = 0; i < d; ++i) {
      if (node[i] == 0 || node[i] == m) {
        for (int c = 0; c < N; ++c) out[c] = 0.0;  // corrector vanishes on the boundary layer
        return;
      }
    }
    long flat = 0;
    for (int i = 0; i < d; ++i) flat = flat * (m - 1) + (node[i] - 1);
    const double* src = u.data() + flat * N;
    for (int c = 0; c < N; ++c) out[c] = src[c];
  }
}

template <typename Body>
void EnergyAssembler::for_each_element(std::span<const double> u, Body&& body) const {
  const int d = mesh_->dim();
  const int N = mesh_->components();
  const long m = mesh_->cells_per_axis();
  const double inv_h = 1.0 / mesh_->h();

  double sig[kMaxDim][kMaxDim];
  for (int c = 0; c < N; ++c)
    for (int a = 0; a < d; ++a) sig[c][a] = sigma_eff_(c, a);

  std::array<long, kMaxDim> cell{};
  std::array<std::array<long, kMaxDim>, kMaxDim + 1> path;
  double vals[kMaxDim + 1][kMaxDim];
  double A[kMaxDim][kMaxDim];

  for (long cflat = 0; cflat < mesh_->cell_count(); ++cflat) {
    const LocalDensity& ld = cells_[static_cast<std::size_t>(cflat)].density;
    for (const auto& perm : mesh_->permutations()) {
      path[0] = cell;
      fetch_node(u, path[0], vals[0]);
      for (int k = 1; k <= d; ++k) {
        path[k] = path[k - 1];
        ++path[k][perm[k - 1]];
        fetch_node(u, path[k], vals[k]);
      }
      for (int c = 0; c < N; ++c)
        for (int a = 0; a < d; ++a) A[c][a] = sig[c][a];
      for (int k = 1; k <= d; ++k) {
        const int axis = perm[k - 1];
        for (int c = 0; c < N; ++c) A[c][axis] += (vals[k][c] - vals[k - 1][c]) * inv_h;
      }
      body(ld, A, path, perm);
    }
    for (int i = d - 1; i >= 0; --i) {
      if (++cell[i] < m) break;
      cell[i] = 0;
    }
  }
}

double EnergyAssembler::energy(std::span<const double> u) const {
  const int d = mesh_->dim();
  const int N = mesh_->components();
  const double measure = mesh_->element_measure();
  double total = 0.0;
  for_each_element(u, [&](const LocalDensity& ld, const double (&A)[kMaxDim][kMaxDim],
                          const auto&, const auto&) {
    double s2 = 0.0;
    for (int c = 0; c < N; ++c)
      for (int a = 0; a < d; ++a) s2 += A[c][a] * A[c][a];
    double dens = ld.eval(std::sqrt(s2));
    if (ld.bump != 0.0) {
      double sn = std::sin(A[0][0]);
      dens += ld.bump * sn * sn;
    }
    total += measure * dens;
  });
  return total;
}

void EnergyAssembler::gradient(std::span<const double> u, std::span<double> grad) const {
  const int d = mesh_->dim();
  const int N = mesh_->components();
  const long m = mesh_->cells_per_axis();
  const double measure = mesh_->element_measure();
  const double inv_h = 1.0 / mesh_->h();
  const bool periodic = mesh_->bc().kind == BoundaryKind::Periodic;

  std::fill(grad.begin(), grad.end(), 0.0);

  auto free_flat = [&](const std::array<long, kMaxDim>& node) -> long {
    if (periodic) {
      long flat = 0;
      for (int i = 0; i < d; ++i) flat = flat * m + (node[i] == m ? 0 : node[i]);
      return flat;
    }
    long flat = 0;
    for (int i = 0; i < d; ++i) {
      if (node[i] == 0 || node[i] == m) return -1;
      flat = flat * (m - 1) + (node[i] - 1);
    }
    return flat;
  };

  for_each_element(u, [&](const LocalDensity& ld, const double (&A)[kMaxDim][kMaxDim],
                          const std::array<std::array<long, kMaxDim>, kMaxDim + 1>& path,
                          const std::array<int, kMaxDim>& perm) {
    double s2 = 0.0;
    for (int c = 0; c < N; ++c)
      for (int a = 0; a < d; ++a) s2 += A[c][a] * A[c][a];
    double s = std::sqrt(s2);
    double w[kMaxDim][kMaxDim];
    if (s > 0.0) {
      double r = ld.slope(s) / s;  // dg/dA = g_s(|A|) A / |A|
      for (int c = 0; c < N; ++c)
        for (int a = 0; a < d; ++a) w[c][a] = r * A[c][a];
    } else {
      for (int c = 0; c < N; ++c)
        for (int a = 0; a < d; ++a) w[c][a] = 0.0;
    }
    if (ld.bump != 0.0) w[0][0] += ld.bump * std::sin(2.0 * A[0][0]);

    for (int k = 1; k <= d; ++k) {
      const int axis = perm[k - 1];
      const long hi = free_flat(path[k]);
      const long lo = free_flat(path[k - 1]);
      for (int c = 0; c < N; ++c) {
        double delta = measure * w[c][axis] * inv_h;
        if (hi >= 0) grad[static_cast<std::size_t>(hi * N + c)] += delta;
        if (lo >= 0) grad[static_cast<std::size_t>(lo * N + c)] -= delta;
      }
    }
  });

  if (periodic) {
    // Project out the constant mode per component (mean-zero gauge).
    const long nodes = mesh_->free_node_count();
    if (nodes > 0) {
      for (int c = 0; c < N; ++c) {
        double mean = 0.0;
        for (long i = 0; i < nodes; ++i) mean += grad[static_cast<std::size_t>(i * N + c)];
        mean /= static_cast<double>(nodes);
        for (long i = 0; i < nodes; ++i) grad[static_cast<std::size_t>(i * N + c)] -= mean;
      }
    }
  }
}

void EnergyAssembler::gradient_fd(std::span<const double> u, std::span<double> grad) const {
  std::vector<double> work(u.begin(), u.end());
  double scale = 1.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  const double step = 1e-6 * scale;
  for (std::size_t i = 0; i < work.size(); ++i) {
    const double saved = work[i];
    work[i] = saved + step;
    double ep = energy(work);
    work[i] = saved - step;
    double em = energy(work);
    work[i] = saved;
    grad[i] = (ep - em) / (2.0 * step);
  }
  if (mesh_->bc().kind == BoundaryKind::Periodic) {
    const int N = mesh_->components();
    const long nodes = mesh_->free_node_count();
    for (int c = 0; c < N; ++c) {
      double mean = 0.0;
      for (long i = 0; i < nodes; ++i) mean += grad[static_cast<std::size_t>(i * N + c)];
      mean /= static_cast<double>(nodes);
      for (long i = 0; i < nodes; ++i) grad[static_cast<std::size_t>(i * N + c)] -= mean;
    }
  }
}

PiecewiseMatrixField EnergyAssembler::gradient_field(std::span<const double> u) const {
  const int d = mesh_->dim();
  const int N = mesh_->components();
  const double measure = mesh_->element_measure();
  const double h = mesh_->h();
  const double dp1 = d + 1.0;

  PiecewiseMatrixField field;
  field.pieces.reserve(static_cast<std::size_t>(mesh_->element_count()));
  for_each_element(u, [&](const LocalDensity&, const double (&A)[kMaxDim][kMaxDim],
                          const std::array<std::array<long, kMaxDim>, kMaxDim + 1>& path,
                          const std::array<int, kMaxDim>& perm) {
    PiecewiseMatrixField::Piece piece;
    piece.measure = measure;
    // barycenter of this simplex, mapped to coefficient coordinates
    for (int i = 0; i < d; ++i) piece.point[i] = 0.0;
    for (int k = 0; k <= d; ++k)
      for (int i = 0; i < d; ++i) piece.point[i] += static_cast<double>(path[k][i]);
    for (int i = 0; i < d; ++i)
      piece.point[i] = static_cast<double>(map_.scale) * (piece.point[i] / dp1) * h +
                       static_cast<double>(map_.offset[i]);
    (void)perm;
    piece.value = Mat(N, d);
    for (int c = 0; c < N; ++c)
      for (int a = 0; a < d; ++a) piece.value(c, a) = A[c][a];
    field.pieces.push_back(std::move(piece));
  });
  return field;
}

double assemble_energy(const CubeMesh& mesh, const IntegrandSpec& spec, const Mat& sigma_offset,
                       const DisplacementField& u, CoordMap map) {
  return EnergyAssembler(mesh, DensityView::of(spec), sigma_offset, map).energy(u.values);
}

double assemble_energy(const CubeMesh& mesh, const NonconvexSpec& spec, const Mat& sigma_offset,
                       const DisplacementField& u, CoordMap map) {
  return EnergyAssembler(mesh, DensityView::of(spec), sigma_offset, map).energy(u.values);
}

std::vector<double> assemble_gradient(const CubeMesh& mesh, const IntegrandSpec& spec,
                                      const Mat& sigma_offset, const DisplacementField& u,
                                      CoordMap map) {
  EnergyAssembler assembler(mesh, DensityView::of(spec), sigma_offset, map);
  std::vector<double> grad(u.values.size());
  assembler.gradient(u.values, grad);
  return grad;
}

}  // namespace orlhom
