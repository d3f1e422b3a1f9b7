// Generates the shipped geometry fixtures: single-patch B-spline maps of the
// unit square onto a disk resp. an ellipse, obtained by Greville-point
// interpolation of the smooth square-to-disk map
//   s = 2u-1, w = 2v-1,  (x, y) = (s sqrt(1 - w^2/2), w sqrt(1 - s^2/2)),
// which sends the square boundary exactly onto the unit circle. The map is
// degenerate only at the four parameter corners; quadrature points stay in
// the interior, where det J > 0.
//
// Prints fit diagnostics (boundary radius deviation, min det J over the
// quadrature points of a deeply refined solution space) and refuses to write
// a fixture whose Jacobian is not safely positive.

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <iostream>

#include "modetrack/bspline.hpp"
#include "modetrack/discretize.hpp"
#include "modetrack/geometry_io.hpp"

using namespace modetrack;

namespace {

Eigen::Vector2d square_to_disk(double u, double v) {
  const double s = 2.0 * u - 1.0;
  const double w = 2.0 * v - 1.0;
  return {s * std::sqrt(1.0 - 0.5 * w * w), w * std::sqrt(1.0 - 0.5 * s * s)};
}

// Tiny radial bump localized near theta = -pi/2. Exactly rotation-symmetric
// shapes leave the (m,1) eigenpairs degenerate, which makes the eigenvector
// basis at the canonical endpoint solver-arbitrary and the derivative system
// singular there. The bump splits every such pair at first order while
// moving eigenvalues by only ~3e-6 relative, far below the classification
// gaps; its symmetry axis keeps the split eigenvectors aligned with cos/sin.
Eigen::Vector2d symmetry_break(const Eigen::Vector2d& p) {
  constexpr double kDelta = 3e-6;
  constexpr double kSigma = 0.35;           // angular width [rad]
  constexpr double kTheta0 = -std::numbers::pi / 2.0;
  const double theta = std::atan2(p.y(), p.x());
  double d = theta - kTheta0;
  if (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
  if (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
  return p * (1.0 + kDelta * std::exp(-0.5 * d * d / (kSigma * kSigma)));
}

std::vector<double> greville_points(const KnotVector& kv) {
  const int p = kv.degree();
  std::vector<double> pts(kv.num_basis());
  for (int i = 0; i < kv.num_basis(); ++i) {
    double sum = 0.0;
    for (int k = 1; k <= p; ++k) sum += kv.knots()[i + k];
    pts[i] = p > 0 ? sum / p : 0.5 * (kv.knots()[i] + kv.knots()[i + 1]);
  }
  return pts;
}

// Tensor-product interpolation of F at the Greville grid.
ControlMesh interpolate_surface(const KnotVector& bu, const KnotVector& bv,
                                const std::function<Eigen::Vector2d(
                                    double, double)>& target) {
  const int nu = bu.num_basis(), nv = bv.num_basis();
  const auto gu = greville_points(bu), gv = greville_points(bv);

  auto collocation = [](const KnotVector& kv, const std::vector<double>& pts) {
    const int n = kv.num_basis(), p = kv.degree();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> vals(p + 1);
    for (int r = 0; r < n; ++r) {
      const int s = kv.find_span(pts[r]);
      kv.eval_basis(pts[r], vals);
      for (int a = 0; a <= p; ++a) A(r, s - p + a) = vals[a];
    }
    return A;
  };
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu_u(collocation(bu, gu));
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu_v(collocation(bv, gv));

  // Solve A_u C A_v^T = F for each coordinate.
  ControlMesh mesh(nu, nv);
  for (int coord = 0; coord < 2; ++coord) {
    Eigen::MatrixXd F(nu, nv);
    for (int j = 0; j < nv; ++j)
      for (int i = 0; i < nu; ++i) F(i, j) = target(gu[i], gv[j])[coord];
    Eigen::MatrixXd tmp = lu_u.solve(F);
    Eigen::MatrixXd C = lu_v.solve(tmp.transpose()).transpose();
    for (int j = 0; j < nv; ++j)
      for (int i = 0; i < nu; ++i) mesh.at(i, j)[coord] = C(i, j);
  }
  return mesh;
}

struct FitReport {
  double min_det = std::numeric_limits<double>::infinity();
};

// Min det J over near-Gauss probe points of a deeply refined span grid, at
// several morph parameters. The corner spans of the deepest refinement are
// where a folded fit would show first.
FitReport check_fit(const GeometryMorph& g) {
  FitReport rep;
  const KnotVector probe_u = g.basis_u.refined(3);
  const KnotVector probe_v = g.basis_v.refined(3);
  const double offs[3] = {0.046910, 0.5, 0.953090};
  for (double t : {0.0, 0.5, 1.0}) {
    const ControlMesh mesh = morph_mesh(g, t);
    for (int su : probe_u.nonempty_spans())
      for (int sv : probe_v.nonempty_spans())
        for (double ou : offs)
          for (double ov : offs) {
            const double u = probe_u.knots()[su] +
                             ou * (probe_u.knots()[su + 1] - probe_u.knots()[su]);
            const double v = probe_v.knots()[sv] +
                             ov * (probe_v.knots()[sv + 1] - probe_v.knots()[sv]);
            rep.min_det = std::min(
                rep.min_det,
                eval_point_jacobian(g.basis_u, g.basis_v, mesh, u, v).det);
          }
  }
  return rep;
}

double boundary_radius_dev(const KnotVector& bu, const KnotVector& bv,
                           const ControlMesh& mesh, double ax, double ay) {
  double worst = 0.0;
  for (int k = 0; k <= 800; ++k) {
    const double s = static_cast<double>(k) / 800;
    for (auto [u, v] : {std::pair{s, 0.0}, {s, 1.0}, {0.0, s}, {1.0, s}}) {
      const Eigen::Vector2d x = eval_point(bu, bv, mesh, u, v);
      const double r =
          std::sqrt((x.x() / ax) * (x.x() / ax) + (x.y() / ay) * (x.y() / ay));
      worst = std::max(worst, std::abs(r - 1.0));
    }
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path out_dir = argc > 1 ? argv[1] : "fixtures";
  std::filesystem::create_directories(out_dir);

  // Quintic geometry on 8 spans per direction: the interpolation error sits
  // far below the discretization error of every solution space the tests
  // use, so eigenvalue convergence is not floored by the geometry.
  const int degree = 5;
  const int spans = 8;
  std::vector<double> knots;
  for (int i = 0; i <= degree; ++i) knots.push_back(0.0);
  for (int i = 1; i < spans; ++i)
    knots.push_back(static_cast<double>(i) / spans);
  for (int i = 0; i <= degree; ++i) knots.push_back(1.0);
  const KnotVector basis(knots, degree);

  // Mild area-preserving eccentricity: strong enough to split the disk's
  // degenerate pairs along the morph, mild enough that the lowest branches
  // keep their frequency order between the endpoints.
  const double disk_radius = 1.0;
  const double ellipse_ax = 1.1, ellipse_ay = 1.0 / 1.1;

  const ControlMesh disk = interpolate_surface(
      basis, basis, [&](double u, double v) {
        return symmetry_break(disk_radius * square_to_disk(u, v));
      });
  const ControlMesh ellipse = interpolate_surface(
      basis, basis, [&](double u, double v) {
        const Eigen::Vector2d d = square_to_disk(u, v);
        return symmetry_break(
            Eigen::Vector2d(ellipse_ax * d.x(), ellipse_ay * d.y()));
      });

  const double dev_disk =
      boundary_radius_dev(basis, basis, disk, disk_radius, disk_radius);
  const double dev_ellipse =
      boundary_radius_dev(basis, basis, ellipse, ellipse_ax, ellipse_ay);
  std::cout << "boundary deviation: disk " << dev_disk << ", ellipse "
            << dev_ellipse << "\n";

  // rel_tol: 10x the observed relative frequency error of the fundamental
  // disk mode at the shipped refinement (1.3e-7), rounded up.
  DiskReference ref;
  ref.radius = disk_radius;
  ref.bc = BoundaryCondition::Dirichlet;
  ref.rel_tol = 2e-6;
  ref.refine_levels = 1;

  {
    GeometryMorph morph(basis, basis, disk, disk);
    const FitReport rep = check_fit(morph);
    std::cout << "unit_disk: min det J " << rep.min_det << "\n";
    if (rep.min_det <= 1e-6) {
      std::cerr << "unit_disk fit rejected: Jacobian too small\n";
      return 1;
    }
    GeometryFixture fx{std::move(morph), ref};
    save_geometry_fixture(out_dir / "unit_disk.json", fx,
                          "unit disk (R=1) at both morph endpoints; quintic "
                          "Greville interpolation of the square-to-disk map");
  }
  {
    GeometryMorph morph(basis, basis, ellipse, disk);
    const FitReport rep = check_fit(morph);
    std::cout << "ellipse_to_disk: min det J " << rep.min_det << "\n";
    if (rep.min_det <= 1e-6) {
      std::cerr << "ellipse_to_disk fit rejected: Jacobian too small\n";
      return 1;
    }
    GeometryFixture fx{std::move(morph), ref};
    save_geometry_fixture(
        out_dir / "ellipse_to_disk.json", fx,
        "ellipse (a=1.1, b=1/1.1) morphing to the unit disk; matched quintic "
        "control meshes");
  }
  {
    // Degree-1 identity square, start == end; handy for smoke tests.
    KnotVector lin({0.0, 0.0, 1.0, 1.0}, 1);
    ControlMesh square(2, 2);
    square.at(0, 0) = {0.0, 0.0};
    square.at(1, 0) = {1.0, 0.0};
    square.at(0, 1) = {0.0, 1.0};
    square.at(1, 1) = {1.0, 1.0};
    GeometryMorph morph(lin, lin, square, square);
    GeometryFixture fx{std::move(morph), std::nullopt};
    save_geometry_fixture(out_dir / "identity_square.json", fx,
                          "identity map of the unit square; degree 1");
  }

  std::cout << "fixtures written to " << out_dir << "\n";
  return 0;
}
