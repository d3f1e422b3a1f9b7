#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace modetrack {

/// Clamped (open) knot vector together with the polynomial degree of the
/// B-spline basis built on it. The first and last knot values are repeated
/// exactly degree+1 times, so the basis interpolates at both ends.
///
/// Spans are half-open [knots[i], knots[i+1]); evaluation at the right
/// endpoint clamps to the last nonempty span, which makes evaluation total
/// on the whole knot range.
class KnotVector {
 public:
  KnotVector(std::vector<double> knots, int degree);

  int degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }

  /// Number of basis functions n = |knots| - degree - 1.
  int num_basis() const {
    return static_cast<int>(knots_.size()) - degree_ - 1;
  }

  double front() const { return knots_.front(); }
  double back() const { return knots_.back(); }

  /// Knot indices i of the nonempty spans [knots[i], knots[i+1]).
  const std::vector<int>& nonempty_spans() const { return spans_; }

  /// Index i with knots[i] <= xi < knots[i+1]; xi == back() clamps to the
  /// last nonempty span. Throws std::domain_error outside the knot range.
  int find_span(double xi) const;

  /// Values of the degree+1 basis functions supported at xi, i.e.
  /// B_{s-degree,...,s} with s = find_span(xi). They are nonnegative and
  /// sum to one. out.size() must be degree+1.
  void eval_basis(double xi, std::span<double> out) const;
  std::vector<double> eval_basis(double xi) const;

  /// First derivatives of the same degree+1 functions; they sum to zero.
  void eval_basis_deriv(double xi, std::span<double> out) const;
  std::vector<double> eval_basis_deriv(double xi) const;

  /// Dyadic h-refinement: each nonempty span is split at its midpoint,
  /// `levels` times. Degree is unchanged.
  KnotVector refined(int levels) const;

  bool operator==(const KnotVector& other) const = default;

 private:
  std::vector<double> knots_;
  int degree_;
  std::vector<int> spans_;
};

/// Rectangular lattice of planar control points, stored u-fastest:
/// point (i, j) lives at index i + nu*j.
struct ControlMesh {
  int nu = 0;
  int nv = 0;
  std::vector<Eigen::Vector2d> pts;

  ControlMesh() = default;
  ControlMesh(int nu_, int nv_)
      : nu(nu_), nv(nv_), pts(static_cast<size_t>(nu_) * nv_,
                              Eigen::Vector2d::Zero()) {}

  Eigen::Vector2d& at(int i, int j) { return pts[i + static_cast<size_t>(nu) * j]; }
  const Eigen::Vector2d& at(int i, int j) const {
    return pts[i + static_cast<size_t>(nu) * j];
  }

  bool same_dims(const ControlMesh& other) const {
    return nu == other.nu && nv == other.nv;
  }
};

/// Two matched control meshes over a shared tensor-product basis.
/// morph_mesh(t) blends them; t=0 gives mesh_start, t=1 gives mesh_end.
struct GeometryMorph {
  KnotVector basis_u;
  KnotVector basis_v;
  ControlMesh mesh_start;
  ControlMesh mesh_end;

  GeometryMorph(KnotVector bu, KnotVector bv, ControlMesh start,
                ControlMesh end);
};

/// Pointwise convex combination (1-t)*mesh_start + t*mesh_end.
/// Throws std::domain_error if t is outside [0,1].
ControlMesh morph_mesh(const GeometryMorph& g, double t);

/// Evaluates a tensor-product B-spline map at parametric (u, v).
Eigen::Vector2d eval_point(const KnotVector& bu, const KnotVector& bv,
                           const ControlMesh& mesh, double u, double v);

struct JacobianResult {
  Eigen::Matrix2d J;   // columns d(x,y)/du, d(x,y)/dv
  double det = 0.0;
};

JacobianResult eval_point_jacobian(const KnotVector& bu, const KnotVector& bv,
                                   const ControlMesh& mesh, double u, double v);

/// G_t(u, v): geometry map of the morphed mesh at parameter t.
Eigen::Vector2d eval_geometry(const GeometryMorph& g, double t, double u,
                              double v);

JacobianResult eval_jacobian(const GeometryMorph& g, double t, double u,
                             double v);

}  // namespace modetrack
