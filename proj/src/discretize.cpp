#include "modetrack/discretize.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace modetrack {

namespace {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre nodes by Newton iteration on P_n; deterministic to
// machine precision for the small n used here.
GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// Per-direction tables at the quadrature nodes of every nonempty span of the
// solution basis: solution values/derivatives plus geometry span bookkeeping.
struct DirectionTable {
  int num_spans = 0;
  int nq = 0;
  std::vector<double> coord;      // span*nq + q -> parametric coordinate
  std::vector<double> jac_weight; // quadrature weight * span half-width
  std::vector<double> val;        // (span*nq + q)*(p+1) + a
  std::vector<double> der;
  std::vector<int> first_dof;     // span -> first supported solution DoF
};

DirectionTable tabulate(const KnotVector& kv, int nq) {
  DirectionTable tab;
  const auto& spans = kv.nonempty_spans();
  const int p = kv.degree();
  tab.num_spans = static_cast<int>(spans.size());
  tab.nq = nq;
  tab.coord.resize(tab.num_spans * nq);
  tab.jac_weight.resize(tab.num_spans * nq);
  tab.val.resize(static_cast<size_t>(tab.num_spans) * nq * (p + 1));
  tab.der.resize(static_cast<size_t>(tab.num_spans) * nq * (p + 1));
  tab.first_dof.resize(tab.num_spans);
  const GaussRule rule = gauss_legendre(nq);
  for (int s = 0; s < tab.num_spans; ++s) {
    const int ks = spans[s];
    const double a = kv.knots()[ks], b = kv.knots()[ks + 1];
    tab.first_dof[s] = ks - p;
    for (int q = 0; q < nq; ++q) {
      const double xi = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
      const int idx = s * nq + q;
      tab.coord[idx] = xi;
      tab.jac_weight[idx] = 0.5 * (b - a) * rule.weights[q];
      kv.eval_basis(xi, {&tab.val[static_cast<size_t>(idx) * (p + 1)],
                         static_cast<size_t>(p + 1)});
      kv.eval_basis_deriv(xi, {&tab.der[static_cast<size_t>(idx) * (p + 1)],
                               static_cast<size_t>(p + 1)});
    }
  }
  return tab;
}

// Dense element contribution of one span pair.
struct ElementBlock {
  Eigen::MatrixXd K;
  Eigen::MatrixXd M;
  bool degenerate = false;
  double degen_u = 0.0;
  double degen_v = 0.0;
};

}  // namespace

DegenerateGeometryError::DegenerateGeometryError(double t_, double u_,
                                                 double v_)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "degenerate geometry: det J <= 0 at t=" << t_ << ", xhat=(" << u_
           << ", " << v_ << ")";
        return os.str();
      }()),
      t(t_),
      u(u_),
      v(v_) {}

DiscreteSpace::DiscreteSpace(KnotVector basis_u, KnotVector basis_v,
                             BoundaryCondition bc)
    : basis_u_(std::move(basis_u)), basis_v_(std::move(basis_v)), bc_(bc) {
  const int nu = basis_u_.num_basis(), nv = basis_v_.num_basis();
  full_to_active_.assign(static_cast<size_t>(nu) * nv, -1);
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i) {
      // Clamped bases: only the outermost functions are nonzero on the
      // boundary, so Dirichlet elimination drops exactly those.
      const bool boundary =
          (i == 0 || i == nu - 1 || j == 0 || j == nv - 1);
      if (bc_ == BoundaryCondition::Dirichlet && boundary) continue;
      full_to_active_[i + static_cast<size_t>(nu) * j] =
          static_cast<int>(active_.size());
      active_.push_back(i + nu * j);
    }
  if (active_.empty())
    throw std::invalid_argument("DiscreteSpace: no active DoFs");
}

DiscreteSpace DiscreteSpace::from_geometry(const GeometryMorph& g,
                                           BoundaryCondition bc, int levels,
                                           bool symmetric) {
  KnotVector bu = g.basis_u.refined(levels);
  KnotVector bv = g.basis_v.refined(levels);
  if (!symmetric) {
    std::vector<double> knots = bv.knots();
    const int first = bv.nonempty_spans().front();
    knots.insert(knots.begin() + first + 1,
                 0.5 * (knots[first] + knots[first + 1]));
    bv = KnotVector(std::move(knots), bv.degree());
  }
  return DiscreteSpace(std::move(bu), std::move(bv), bc);
}

Eigen::VectorXd DiscreteSpace::expand(
    const Eigen::VectorXd& active_coeffs) const {
  if (active_coeffs.size() != num_active())
    throw std::invalid_argument("expand: coefficient length mismatch");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(num_full());
  for (int a = 0; a < num_active(); ++a) full[active_[a]] = active_coeffs[a];
  return full;
}

MatrixPencil assemble_pencil(const GeometryMorph& g, double t,
                             const DiscreteSpace& space, int quad_pts,
                             AssemblyMode mode) {
  const ControlMesh mesh = morph_mesh(g, t);

  const KnotVector& su = space.basis_u();
  const KnotVector& sv = space.basis_v();
  const int pu = su.degree(), pv = sv.degree();
  const int nqu = quad_pts > 0 ? quad_pts : pu + 2;
  const int nqv = quad_pts > 0 ? quad_pts : pv + 2;

  const DirectionTable tu = tabulate(su, nqu);
  const DirectionTable tv = tabulate(sv, nqv);

  const int n_elem = tu.num_spans * tv.num_spans;
  const int n_loc_u = pu + 1, n_loc_v = pv + 1;
  const int n_loc = n_loc_u * n_loc_v;

  std::vector<ElementBlock> blocks(n_elem);

#ifdef _OPENMP
  const bool parallel = (mode == AssemblyMode::Parallel);
#else
  (void)mode;
  const bool parallel = false;
#endif

#pragma omp parallel for schedule(static) if (parallel)
  for (int e = 0; e < n_elem; ++e) {
    const int eu = e % tu.num_spans;
    const int ev = e / tu.num_spans;
    ElementBlock& blk = blocks[e];
    blk.K = Eigen::MatrixXd::Zero(n_loc, n_loc);
    blk.M = Eigen::MatrixXd::Zero(n_loc, n_loc);
    std::vector<Eigen::Vector2d> grad(n_loc);
    std::vector<double> val(n_loc);
    for (int qv = 0; qv < tv.nq && !blk.degenerate; ++qv)
      for (int qu = 0; qu < tu.nq; ++qu) {
        const int iu = eu * tu.nq + qu, iv = ev * tv.nq + qv;
        const double u = tu.coord[iu], v = tv.coord[iv];
        const JacobianResult jac =
            eval_point_jacobian(g.basis_u, g.basis_v, mesh, u, v);
        if (!(jac.det > 0.0)) {
          blk.degenerate = true;
          blk.degen_u = u;
          blk.degen_v = v;
          break;
        }
        const double w = tu.jac_weight[iu] * tv.jac_weight[iv] * jac.det;
        // J^-T * grad, with the 2x2 inverse written out.
        const double j00 = jac.J(0, 0), j01 = jac.J(0, 1);
        const double j10 = jac.J(1, 0), j11 = jac.J(1, 1);
        for (int b = 0; b < n_loc_v; ++b)
          for (int a = 0; a < n_loc_u; ++a) {
            const double bu = tu.val[static_cast<size_t>(iu) * n_loc_u + a];
            const double du = tu.der[static_cast<size_t>(iu) * n_loc_u + a];
            const double bv = tv.val[static_cast<size_t>(iv) * n_loc_v + b];
            const double dv = tv.der[static_cast<size_t>(iv) * n_loc_v + b];
            const int l = a + n_loc_u * b;
            val[l] = bu * bv;
            const double gu = du * bv, gv = bu * dv;
            grad[l] = Eigen::Vector2d((j11 * gu - j10 * gv) / jac.det,
                                      (-j01 * gu + j00 * gv) / jac.det);
          }
        for (int l2 = 0; l2 < n_loc; ++l2)
          for (int l1 = 0; l1 < n_loc; ++l1) {
            blk.K(l1, l2) += w * grad[l1].dot(grad[l2]);
            blk.M(l1, l2) += w * val[l1] * val[l2];
          }
      }
  }

  for (const ElementBlock& blk : blocks)
    if (blk.degenerate)
      throw DegenerateGeometryError(t, blk.degen_u, blk.degen_v);

  // Fixed-order merge: summation order per global entry is independent of
  // the thread count, so parallel and serial assemblies agree exactly.
  const int nu_basis = su.num_basis();
  const int n_full = space.num_full();
  Eigen::MatrixXd K_full = Eigen::MatrixXd::Zero(n_full, n_full);
  Eigen::MatrixXd M_full = Eigen::MatrixXd::Zero(n_full, n_full);
  for (int e = 0; e < n_elem; ++e) {
    const int eu = e % tu.num_spans;
    const int ev = e / tu.num_spans;
    const ElementBlock& blk = blocks[e];
    for (int b2 = 0; b2 < n_loc_v; ++b2)
      for (int a2 = 0; a2 < n_loc_u; ++a2)
        for (int b1 = 0; b1 < n_loc_v; ++b1)
          for (int a1 = 0; a1 < n_loc_u; ++a1) {
            const int g1 = tu.first_dof[eu] + a1 +
                           nu_basis * (tv.first_dof[ev] + b1);
            const int g2 = tu.first_dof[eu] + a2 +
                           nu_basis * (tv.first_dof[ev] + b2);
            K_full(g1, g2) += blk.K(a1 + n_loc_u * b1, a2 + n_loc_u * b2);
            M_full(g1, g2) += blk.M(a1 + n_loc_u * b1, a2 + n_loc_u * b2);
          }
  }

  const int n_active = space.num_active();
  MatrixPencil pencil;
  pencil.K.resize(n_active, n_active);
  pencil.M.resize(n_active, n_active);
  for (int c = 0; c < n_active; ++c)
    for (int r = 0; r < n_active; ++r) {
      pencil.K(r, c) = K_full(space.active()[r], space.active()[c]);
      pencil.M(r, c) = M_full(space.active()[r], space.active()[c]);
    }
  return pencil;
}

PhysicalPencilProvider::PhysicalPencilProvider(GeometryMorph geometry,
                                               DiscreteSpace space,
                                               int quad_pts, double fd_step)
    : geometry_(std::move(geometry)),
      space_(std::move(space)),
      quad_pts_(quad_pts),
      fd_step_(fd_step) {
  if (fd_step_ <= 0.0)
    throw std::invalid_argument("PhysicalPencilProvider: fd_step > 0");
}

MatrixPencil PhysicalPencilProvider::pencil_at(double t) const {
  return assemble_pencil(geometry_, t, space_, quad_pts_);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
PhysicalPencilProvider::derivative_at(double t) const {
  const bool forward = t + fd_step_ <= 1.0;
  const double t2 = forward ? t + fd_step_ : t - fd_step_;
  const MatrixPencil base = pencil_at(t);
  const MatrixPencil shifted = pencil_at(t2);
  const double inv = 1.0 / (t2 - t);
  return {(shifted.K - base.K) * inv, (shifted.M - base.M) * inv};
}

AlgebraicPencilProvider::AlgebraicPencilProvider(const GeometryMorph& geometry,
                                                 const DiscreteSpace& space,
                                                 int quad_pts)
    : p0_(assemble_pencil(geometry, 0.0, space, quad_pts)),
      p1_(assemble_pencil(geometry, 1.0, space, quad_pts)) {}

AlgebraicPencilProvider::AlgebraicPencilProvider(MatrixPencil at_start,
                                                 MatrixPencil at_end)
    : p0_(std::move(at_start)), p1_(std::move(at_end)) {
  if (p0_.dim() != p1_.dim() || p0_.M.rows() != p1_.M.rows())
    throw std::invalid_argument(
        "AlgebraicPencilProvider: endpoint pencil dimensions differ");
}

MatrixPencil AlgebraicPencilProvider::pencil_at(double t) const {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::domain_error("algebraic pencil: t outside [0,1]");
  MatrixPencil out;
  out.K = (1.0 - t) * p0_.K + t * p1_.K;
  out.M = (1.0 - t) * p0_.M + t * p1_.M;
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
AlgebraicPencilProvider::derivative_at(double) const {
  return {p1_.K - p0_.K, p1_.M - p0_.M};
}

CallbackPencilProvider::CallbackPencilProvider(
    std::function<MatrixPencil(double)> fn, int n, double fd_step)
    : fn_(std::move(fn)), n_(n), fd_step_(fd_step) {}

MatrixPencil CallbackPencilProvider::pencil_at(double t) const {
  return fn_(t);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
CallbackPencilProvider::derivative_at(double t) const {
  const bool forward = t + fd_step_ <= 1.0;
  const double t2 = forward ? t + fd_step_ : t - fd_step_;
  const MatrixPencil base = fn_(t);
  const MatrixPencil shifted = fn_(t2);
  const double inv = 1.0 / (t2 - t);
  return {(shifted.K - base.K) * inv, (shifted.M - base.M) * inv};
}

std::vector<FieldSample> eval_field(const DiscreteSpace& space,
                                    const GeometryMorph& g, double t,
                                    const Eigen::VectorXd& coeffs,
                                    int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("eval_field: grid_n >= 2");
  if (coeffs.size() != space.num_active())
    throw std::invalid_argument("eval_field: coefficient length mismatch");
  const Eigen::VectorXd full = space.expand(coeffs);
  const ControlMesh mesh = morph_mesh(g, t);
  const KnotVector& su = space.basis_u();
  const KnotVector& sv = space.basis_v();
  const int pu = su.degree(), pv = sv.degree();
  const int nu_basis = su.num_basis();

  std::vector<FieldSample> samples(static_cast<size_t>(grid_n) * grid_n);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < grid_n; ++j) {
    std::vector<double> bu(pu + 1), bv(pv + 1);
    const double v = static_cast<double>(j) / (grid_n - 1);
    const int spv = sv.find_span(v);
    sv.eval_basis(v, bv);
    for (int i = 0; i < grid_n; ++i) {
      const double u = static_cast<double>(i) / (grid_n - 1);
      const int spu = su.find_span(u);
      su.eval_basis(u, bu);
      double value = 0.0;
      for (int b = 0; b <= pv; ++b)
        for (int a = 0; a <= pu; ++a)
          value += full[spu - pu + a + nu_basis * (spv - pv + b)] *
                   bu[a] * bv[b];
      const Eigen::Vector2d x =
          eval_point(g.basis_u, g.basis_v, mesh, u, v);
      samples[static_cast<size_t>(j) * grid_n + i] =
          FieldSample{x.x(), x.y(), std::abs(value)};
    }
  }
  return samples;
}

}  // namespace modetrack
