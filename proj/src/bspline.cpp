#include "modetrack/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace modetrack {

namespace {

// 0/0 := 0 convention for collapsed knot spans.
double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

KnotVector::KnotVector(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {
  if (degree_ < 0) throw std::invalid_argument("KnotVector: degree must be >= 0");
  if (!std::is_sorted(knots_.begin(), knots_.end()))
    throw std::invalid_argument("KnotVector: knots must be non-decreasing");
  const int n = static_cast<int>(knots_.size()) - degree_ - 1;
  if (n < degree_ + 1)
    throw std::invalid_argument("KnotVector: too few knots for degree " +
                                std::to_string(degree_));
  // Open/clamped convention: both end values repeated exactly degree+1 times.
  for (int r = 0; r <= degree_; ++r) {
    if (knots_[r] != knots_.front() ||
        knots_[knots_.size() - 1 - r] != knots_.back())
      throw std::invalid_argument(
          "KnotVector: end knots must repeat degree+1 times (clamped)");
  }
  if (knots_[degree_ + 1] == knots_.front() ||
      knots_[knots_.size() - degree_ - 2] == knots_.back())
    throw std::invalid_argument(
        "KnotVector: end knots must repeat exactly degree+1 times");
  for (size_t i = 0; i + 1 < knots_.size(); ++i)
    if (knots_[i] < knots_[i + 1]) spans_.push_back(static_cast<int>(i));
}

int KnotVector::find_span(double xi) const {
  if (!(xi >= knots_.front() && xi <= knots_.back()))
    throw std::domain_error("find_span: xi outside knot range");
  if (xi >= knots_.back()) return spans_.back();
  // First knot strictly greater than xi; the span starts one before it.
  auto it = std::upper_bound(knots_.begin(), knots_.end(), xi);
  return static_cast<int>(it - knots_.begin()) - 1;
}

void KnotVector::eval_basis(double xi, std::span<double> out) const {
  const int p = degree_;
  if (static_cast<int>(out.size()) != p + 1)
    throw std::invalid_argument("eval_basis: output size must be degree+1");
  const int s = find_span(xi);
  // Triangular Cox-de Boor recursion on the supported functions only.
  std::vector<double> left(p + 1), right(p + 1);
  out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = xi - knots_[s + 1 - j];
    right[j] = knots_[s + j] - xi;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = safe_div(out[r], right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

std::vector<double> KnotVector::eval_basis(double xi) const {
  std::vector<double> out(degree_ + 1);
  eval_basis(xi, out);
  return out;
}

void KnotVector::eval_basis_deriv(double xi, std::span<double> out) const {
  const int p = degree_;
  if (static_cast<int>(out.size()) != p + 1)
    throw std::invalid_argument("eval_basis_deriv: output size must be degree+1");
  if (p == 0) {
    out[0] = 0.0;
    return;
  }
  const int s = find_span(xi);
  // Degree p-1 values on the same span, then the standard two-term formula
  //   B'_{i,p} = p/(x_{i+p}-x_i) B_{i,p-1} - p/(x_{i+p+1}-x_{i+1}) B_{i+1,p-1}.
  std::vector<double> lower(p, 0.0), left(p), right(p);
  lower[0] = 1.0;
  for (int j = 1; j <= p - 1; ++j) {
    left[j] = xi - knots_[s + 1 - j];
    right[j] = knots_[s + j] - xi;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = safe_div(lower[r], right[r + 1] + left[j - r]);
      lower[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    lower[j] = saved;
  }
  for (int r = 0; r <= p; ++r) {
    const int i = s - p + r;
    const double a =
        (r >= 1) ? safe_div(static_cast<double>(p), knots_[i + p] - knots_[i]) *
                       lower[r - 1]
                 : 0.0;
    const double b =
        (r <= p - 1)
            ? safe_div(static_cast<double>(p), knots_[i + p + 1] - knots_[i + 1]) *
                  lower[r]
            : 0.0;
    out[r] = a - b;
  }
}

std::vector<double> KnotVector::eval_basis_deriv(double xi) const {
  std::vector<double> out(degree_ + 1);
  eval_basis_deriv(xi, out);
  return out;
}

KnotVector KnotVector::refined(int levels) const {
  if (levels < 0) throw std::invalid_argument("refined: levels must be >= 0");
  KnotVector kv = *this;
  for (int l = 0; l < levels; ++l) {
    std::vector<double> next;
    next.reserve(kv.knots_.size() * 2);
    for (size_t i = 0; i + 1 < kv.knots_.size(); ++i) {
      next.push_back(kv.knots_[i]);
      if (kv.knots_[i] < kv.knots_[i + 1])
        next.push_back(0.5 * (kv.knots_[i] + kv.knots_[i + 1]));
    }
    next.push_back(kv.knots_.back());
    kv = KnotVector(std::move(next), degree_);
  }
  return kv;
}

GeometryMorph::GeometryMorph(KnotVector bu, KnotVector bv, ControlMesh start,
                             ControlMesh end)
    : basis_u(std::move(bu)),
      basis_v(std::move(bv)),
      mesh_start(std::move(start)),
      mesh_end(std::move(end)) {
  if (!mesh_start.same_dims(mesh_end))
    throw std::invalid_argument("GeometryMorph: control meshes must match");
  if (mesh_start.nu != basis_u.num_basis() ||
      mesh_start.nv != basis_v.num_basis())
    throw std::invalid_argument(
        "GeometryMorph: mesh dims inconsistent with basis sizes");
}

ControlMesh morph_mesh(const GeometryMorph& g, double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::domain_error("morph_mesh: t outside [0,1]");
  ControlMesh out(g.mesh_start.nu, g.mesh_start.nv);
  for (size_t a = 0; a < out.pts.size(); ++a)
    out.pts[a] = (1.0 - t) * g.mesh_start.pts[a] + t * g.mesh_end.pts[a];
  return out;
}

Eigen::Vector2d eval_point(const KnotVector& bu, const KnotVector& bv,
                           const ControlMesh& mesh, double u, double v) {
  const int pu = bu.degree(), pv = bv.degree();
  const int su = bu.find_span(u), sv = bv.find_span(v);
  std::vector<double> nu(pu + 1), nv(pv + 1);
  bu.eval_basis(u, nu);
  bv.eval_basis(v, nv);
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  for (int b = 0; b <= pv; ++b)
    for (int a = 0; a <= pu; ++a)
      x += mesh.at(su - pu + a, sv - pv + b) * (nu[a] * nv[b]);
  return x;
}

JacobianResult eval_point_jacobian(const KnotVector& bu, const KnotVector& bv,
                                   const ControlMesh& mesh, double u,
                                   double v) {
  const int pu = bu.degree(), pv = bv.degree();
  const int su = bu.find_span(u), sv = bv.find_span(v);
  std::vector<double> nu(pu + 1), nv(pv + 1), du(pu + 1), dv(pv + 1);
  bu.eval_basis(u, nu);
  bv.eval_basis(v, nv);
  bu.eval_basis_deriv(u, du);
  bv.eval_basis_deriv(v, dv);
  JacobianResult r;
  r.J.setZero();
  for (int b = 0; b <= pv; ++b)
    for (int a = 0; a <= pu; ++a) {
      const Eigen::Vector2d& p = mesh.at(su - pu + a, sv - pv + b);
      r.J.col(0) += p * (du[a] * nv[b]);
      r.J.col(1) += p * (nu[a] * dv[b]);
    }
  r.det = r.J(0, 0) * r.J(1, 1) - r.J(0, 1) * r.J(1, 0);
  return r;
}

Eigen::Vector2d eval_geometry(const GeometryMorph& g, double t, double u,
                              double v) {
  return eval_point(g.basis_u, g.basis_v, morph_mesh(g, t), u, v);
}

JacobianResult eval_jacobian(const GeometryMorph& g, double t, double u,
                             double v) {
  return eval_point_jacobian(g.basis_u, g.basis_v, morph_mesh(g, t), u, v);
}

}  // namespace modetrack
