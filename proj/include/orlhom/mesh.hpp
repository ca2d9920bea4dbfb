#pragma once

#include "orlhom/common.hpp"
#include "orlhom/integrand.hpp"

#include <array>
#include <span>
#include <vector>

namespace orlhom {

enum class BoundaryKind { Periodic, AffineDirichlet };

struct BoundaryCondition {
  BoundaryKind kind;
  Mat sigma;  // affine datum y -> Sigma y (AffineDirichlet only)

  static BoundaryCondition periodic() { return {BoundaryKind::Periodic, Mat()}; }
  static BoundaryCondition affine(Mat s) { return {BoundaryKind::AffineDirichlet, std::move(s)}; }
};

// Kuhn simplicial mesh of (0,t)^d with n elements per unit length:
// intervals (d=1), 2 triangles per square (d=2), 6 tetrahedra per cube (d=3).
// Displacements are piecewise affine with exact constant gradients per
// simplex. Free nodes: all grid nodes for Periodic (with wrap), the strict
// interior for AffineDirichlet (the outermost node layer carries the datum).
class CubeMesh {
 public:
  CubeMesh(int dim, int components, int side, int resolution, BoundaryCondition bc);

  int dim() const { return dim_; }
  int components() const { return components_; }
  int side() const { return side_; }
  int resolution() const { return resolution_; }
  const BoundaryCondition& bc() const { return bc_; }

  int cells_per_axis() const { return m_; }
  long cell_count() const { return cell_count_; }
  int simplices_per_cell() const { return simplices_per_cell_; }
  long element_count() const { return cell_count_ * simplices_per_cell_; }
  long node_count() const;
  long free_node_count() const { return free_nodes_; }
  long dof_count() const { return free_nodes_ * components_; }

  double h() const { return h_; }
  double element_measure() const { return element_measure_; }
  double domain_measure() const;

  const std::vector<std::array<int, kMaxDim>>& permutations() const { return perms_; }

 private:
  int dim_, components_, side_, resolution_;
  BoundaryCondition bc_;
  int m_;  // cells per axis
  long cell_count_;
  int simplices_per_cell_;
  long free_nodes_;
  double h_;
  double element_measure_;
  std::vector<std::array<int, kMaxDim>> perms_;
};

// Nodal values on the free nodes, component-major per node. For Periodic
// meshes the gauge is the component-wise zero mean.
struct DisplacementField {
  const CubeMesh* mesh;
  std::vector<double> values;

  static DisplacementField zeros(const CubeMesh& mesh);
  void project_mean_zero();
};

// Coefficient lookup map: fields are sampled at scale * x + offset. Integer
// scale and offset keep barycenters aligned with unit field cells, so
// one-point sampling stays exact.
struct CoordMap {
  std::array<long, kMaxDim> offset{};
  long scale = 1;
};

// Either a convex radial spec or a nonconvex bump on top of it.
struct DensityView {
  const IntegrandSpec* base = nullptr;
  const NonconvexSpec* bump = nullptr;

  static DensityView of(const IntegrandSpec& s) { return {&s, nullptr}; }
  static DensityView of(const NonconvexSpec& s) { return {&s.base, &s}; }
  bool convex() const { return bump == nullptr || bump->lambda == 0.0; }
};

// Precomputes per-cell coefficients for one (mesh, density, offset) triple
// and exposes the discrete energy and its exact gradient. Assembly uses a
// fixed element order, so results are reproducible.
class EnergyAssembler {
 public:
  EnergyAssembler(const CubeMesh& mesh, DensityView density, Mat sigma_offset, CoordMap map = {});

  double energy(std::span<const double> u) const;
  void gradient(std::span<const double> u, std::span<double> grad) const;     // analytic
  void gradient_fd(std::span<const double> u, std::span<double> grad) const;  // central differences, step 1e-6*scale

  long dof_count() const { return mesh_->dof_count(); }
  const CubeMesh& mesh() const { return *mesh_; }
  const Mat& sigma_effective() const { return sigma_eff_; }

  // Sigma_eff + Du per simplex, for modular / Luxemburg evaluation.
  PiecewiseMatrixField gradient_field(std::span<const double> u) const;

 private:
  struct CellCoeff {
    LocalDensity density;
  };

  void fetch_node(std::span<const double> u, const std::array<long, kMaxDim>& node,
                  double* out) const;
  template <typename Body>
  void for_each_element(std::span<const double> u, Body&& body) const;

  const CubeMesh* mesh_;
  DensityView density_;
  Mat sigma_eff_;
  CoordMap map_;
  std::vector<CellCoeff> cells_;
};

double assemble_energy(const CubeMesh& mesh, const IntegrandSpec& spec, const Mat& sigma_offset,
                       const DisplacementField& u, CoordMap map = {});
double assemble_energy(const CubeMesh& mesh, const NonconvexSpec& spec, const Mat& sigma_offset,
                       const DisplacementField& u, CoordMap map = {});
std::vector<double> assemble_gradient(const CubeMesh& mesh, const IntegrandSpec& spec,
                                      const Mat& sigma_offset, const DisplacementField& u,
                                      CoordMap map = {});

}  // namespace orlhom
