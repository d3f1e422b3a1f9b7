#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "modetrack/bspline.hpp"
#include "modetrack/common.hpp"
#include "modetrack/eigsolve.hpp"

namespace modetrack {

/// Raised when the morphed geometry folds over: the Jacobian determinant is
/// not positive at a quadrature point. Carries the offending (t, u, v).
struct DegenerateGeometryError : std::runtime_error {
  DegenerateGeometryError(double t_, double u_, double v_);
  double t, u, v;
};

/// Tensor-product scalar B-spline solution space on the parametric square,
/// possibly h-refined relative to the geometry, with Dirichlet
/// boundary-function elimination baked into an active-DoF index map.
class DiscreteSpace {
 public:
  DiscreteSpace(KnotVector basis_u, KnotVector basis_v, BoundaryCondition bc);

  /// Solution space over the geometry's knot vectors, dyadically refined
  /// `levels` times (the geometry itself stays at its native resolution).
  /// One extra knot is inserted into the first v-span: the resulting mild
  /// anisotropy splits symmetry-degenerate eigenvalue pairs at first order,
  /// so candidate eigenvectors at the canonical endpoint are deterministic
  /// and the derivative system stays regular. Pass symmetric = true to
  /// suppress the extra knot.
  static DiscreteSpace from_geometry(const GeometryMorph& g,
                                     BoundaryCondition bc, int levels,
                                     bool symmetric = false);

  const KnotVector& basis_u() const { return basis_u_; }
  const KnotVector& basis_v() const { return basis_v_; }
  BoundaryCondition bc() const { return bc_; }

  int num_full() const { return basis_u_.num_basis() * basis_v_.num_basis(); }
  int num_active() const { return static_cast<int>(active_.size()); }

  /// active index -> full tensor index (i + nu*j).
  const std::vector<int>& active() const { return active_; }
  /// full tensor index -> active index, -1 if eliminated.
  const std::vector<int>& full_to_active() const { return full_to_active_; }

  /// Expands an active-DoF coefficient vector to the full tensor grid,
  /// eliminated entries set to zero.
  Eigen::VectorXd expand(const Eigen::VectorXd& active_coeffs) const;

 private:
  KnotVector basis_u_;
  KnotVector basis_v_;
  BoundaryCondition bc_;
  std::vector<int> active_;
  std::vector<int> full_to_active_;
};

enum class AssemblyMode { Parallel, Serial };

/// Galerkin stiffness/mass pair on the mapped domain at morph parameter t:
///   K_ab = int (J^-T grad b)(J^-T grad a) |det J|,  M_ab = int a b |det J|
/// by Gauss-Legendre quadrature with degree+2 points per direction per span
/// (quad_pts overrides when > 0). Dirichlet rows/columns are eliminated.
///
/// The parallel path splits the span loop across threads and merges
/// per-element blocks in fixed span order, so both modes produce identical
/// matrices bit for bit.
MatrixPencil assemble_pencil(const GeometryMorph& g, double t,
                             const DiscreteSpace& space, int quad_pts = 0,
                             AssemblyMode mode = AssemblyMode::Parallel);

/// Parameter-dependent pencil source for the tracker: either the physical
/// assembly on the morphed domain, the algebraic interpolation of the cached
/// endpoint pencils, or an arbitrary callback (tests, engineered pencils).
class PencilProvider {
 public:
  virtual ~PencilProvider() = default;
  virtual MatrixPencil pencil_at(double t) const = 0;
  /// (K'(t), M'(t)).
  virtual std::pair<Eigen::MatrixXd, Eigen::MatrixXd> derivative_at(
      double t) const = 0;
  virtual int dim() const = 0;
};

class PhysicalPencilProvider final : public PencilProvider {
 public:
  PhysicalPencilProvider(GeometryMorph geometry, DiscreteSpace space,
                         int quad_pts = 0, double fd_step = 1e-6);

  MatrixPencil pencil_at(double t) const override;
  /// One-sided difference (A(t+delta) - A(t))/delta; mirrored to a backward
  /// difference at the right end of the morph interval.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> derivative_at(
      double t) const override;
  int dim() const override { return space_.num_active(); }

  const DiscreteSpace& space() const { return space_; }
  const GeometryMorph& geometry() const { return geometry_; }

 private:
  GeometryMorph geometry_;
  DiscreteSpace space_;
  int quad_pts_;
  double fd_step_;
};

class AlgebraicPencilProvider final : public PencilProvider {
 public:
  /// Assembles and caches the two endpoint pencils of the morph.
  AlgebraicPencilProvider(const GeometryMorph& geometry,
                          const DiscreteSpace& space, int quad_pts = 0);
  /// Uses explicitly given endpoint pencils (engineered test pencils).
  AlgebraicPencilProvider(MatrixPencil at_start, MatrixPencil at_end);

  MatrixPencil pencil_at(double t) const override;
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> derivative_at(
      double t) const override;
  int dim() const override { return p0_.dim(); }

 private:
  MatrixPencil p0_;
  MatrixPencil p1_;
};

class CallbackPencilProvider final : public PencilProvider {
 public:
  CallbackPencilProvider(std::function<MatrixPencil(double)> fn, int n,
                         double fd_step = 1e-6);

  MatrixPencil pencil_at(double t) const override;
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> derivative_at(
      double t) const override;
  int dim() const override { return n_; }

 private:
  std::function<MatrixPencil(double)> fn_;
  int n_;
  double fd_step_;
};

struct FieldSample {
  double x = 0.0;
  double y = 0.0;
  double magnitude = 0.0;
};

/// |u_h(G_t(u,v))| on a uniform grid_n x grid_n parametric grid, row-major
/// with u fastest. coeffs are active-DoF coefficients.
std::vector<FieldSample> eval_field(const DiscreteSpace& space,
                                    const GeometryMorph& g, double t,
                                    const Eigen::VectorXd& coeffs, int grid_n);

}  // namespace modetrack
