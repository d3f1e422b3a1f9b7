#include <cmath>
#include <random>

#include "doctest.h"
#include "modetrack/bspline.hpp"
#include "modetrack/geometry_io.hpp"

using namespace modetrack;

namespace {

// Independent oracle: the textbook two-term recursion evaluated for every
// basis function, with the 0/0 := 0 convention spelled out.
double naive_basis(const std::vector<double>& knots, int i, int p, double xi,
                   bool rightmost) {
  if (p == 0) {
    if (knots[i] <= xi && xi < knots[i + 1]) return 1.0;
    // Half-open convention everywhere except the very last nonempty span.
    if (rightmost && xi == knots[i + 1] && knots[i] < knots[i + 1]) return 1.0;
    return 0.0;
  }
  auto ratio = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
  const double a = ratio(xi - knots[i], knots[i + p] - knots[i]);
  const double b = ratio(knots[i + p + 1] - xi, knots[i + p + 1] - knots[i + 1]);
  double left = a == 0.0 ? 0.0 : a * naive_basis(knots, i, p - 1, xi, rightmost);
  double right =
      b == 0.0 ? 0.0 : b * naive_basis(knots, i + 1, p - 1, xi, rightmost);
  return left + right;
}

std::vector<double> naive_all(const KnotVector& kv, double xi) {
  const bool rightmost = xi == kv.back();
  std::vector<double> out(kv.num_basis());
  for (int i = 0; i < kv.num_basis(); ++i) {
    // The rightmost flag must only fire for the last nonempty span's
    // degree-0 function; restrict it to indices whose support can reach it.
    out[i] = naive_basis(kv.knots(), i, kv.degree(), xi, rightmost);
  }
  return out;
}

KnotVector uniform_knots(int degree, int spans) {
  std::vector<double> knots;
  for (int i = 0; i <= degree; ++i) knots.push_back(0.0);
  for (int i = 1; i < spans; ++i)
    knots.push_back(static_cast<double>(i) / spans);
  for (int i = 0; i <= degree; ++i) knots.push_back(1.0);
  return KnotVector(knots, degree);
}

GeometryMorph load_ellipse_fixture() {
  return load_geometry_fixture(
             std::string(MODETRACK_FIXTURES_DIR) + "/ellipse_to_disk.json")
      .morph;
}

}  // namespace

TEST_CASE("find_span: clamped conventions") {
  KnotVector lin({0, 0, 1, 1}, 1);
  CHECK(lin.find_span(0.3) == 1);      // [0,1)
  CHECK(lin.find_span(1.0) == 1);      // endpoint clamps to last span
  KnotVector quad({0, 0, 0, 0.5, 1, 1, 1}, 2);
  CHECK(quad.find_span(0.5) == 3);     // half-open at the interior knot
  CHECK_THROWS_AS(lin.find_span(1.5), std::domain_error);
  CHECK_THROWS_AS(lin.find_span(-0.1), std::domain_error);
}

TEST_CASE("knot vector validation") {
  CHECK_THROWS_AS(KnotVector({0, 1, 0, 1}, 1), std::invalid_argument);
  CHECK_THROWS_AS(KnotVector({0, 0, 1, 1}, 2), std::invalid_argument);
  CHECK_THROWS_AS(KnotVector({0, 1}, 1), std::invalid_argument);
}

TEST_CASE("eval_basis: pinned values") {
  KnotVector lin({0, 0, 1, 1}, 1);
  auto vals = lin.eval_basis(0.5);
  CHECK(vals[0] == doctest::Approx(0.5));
  CHECK(vals[1] == doctest::Approx(0.5));

  KnotVector constant({0, 1}, 0);
  CHECK(constant.eval_basis(0.25)[0] == doctest::Approx(1.0));

  KnotVector bern({0, 0, 0, 1, 1, 1}, 2);
  auto b = bern.eval_basis(0.5);
  CHECK(b[0] == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(b[1] == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(b[2] == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("eval_basis matches the naive recursion oracle") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const KnotVector& kv :
       {uniform_knots(2, 4), uniform_knots(3, 5),
        KnotVector({0, 0, 0, 0.2, 0.2, 0.7, 1, 1, 1}, 2)}) {
    for (int trial = 0; trial < 200; ++trial) {
      const double xi = trial == 0 ? 1.0 : unit(rng);
      const auto oracle = naive_all(kv, xi);
      const auto vals = kv.eval_basis(xi);
      const int s = kv.find_span(xi);
      for (int i = 0; i < kv.num_basis(); ++i) {
        const int local = i - (s - kv.degree());
        const double expected =
            (local >= 0 && local <= kv.degree()) ? vals[local] : 0.0;
        CHECK(oracle[i] == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("partition of unity: 1000 random points") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const KnotVector kv = uniform_knots(3, 7);
  for (int trial = 0; trial < 1000; ++trial) {
    const double xi = unit(rng);
    double sum = 0.0;
    for (double v : kv.eval_basis(xi)) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("eval_basis_deriv: pinned values and zero-sum") {
  KnotVector lin({0, 0, 1, 1}, 1);
  auto d = lin.eval_basis_deriv(0.5);
  CHECK(d[0] == doctest::Approx(-1.0));
  CHECK(d[1] == doctest::Approx(1.0));

  KnotVector bern({0, 0, 0, 1, 1, 1}, 2);
  auto db = bern.eval_basis_deriv(0.5);
  CHECK(db[0] == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(db[1] == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(db[2] == doctest::Approx(1.0).epsilon(1e-13));

  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const KnotVector kv = uniform_knots(3, 6);
  for (int trial = 0; trial < 300; ++trial) {
    double sum = 0.0;
    for (double v : kv.eval_basis_deriv(unit(rng))) sum += v;
    CHECK(std::abs(sum) <= 1e-10);
  }
}

TEST_CASE("eval_basis_deriv matches finite differences") {
  const KnotVector kv = uniform_knots(2, 5);
  const double fd = 1e-7;
  for (double xi : {0.13, 0.34, 0.55, 0.77, 0.93}) {
    const auto d = kv.eval_basis_deriv(xi);
    const auto lo = kv.eval_basis(xi - fd);
    const auto hi = kv.eval_basis(xi + fd);
    // Same span for all three points (chosen away from knots).
    for (size_t a = 0; a < d.size(); ++a)
      CHECK(d[a] == doctest::Approx((hi[a] - lo[a]) / (2 * fd)).epsilon(1e-5));
  }
}

TEST_CASE("morph_mesh: endpoints and midpoint") {
  KnotVector lin({0, 0, 1, 1}, 1);
  ControlMesh a(2, 2), b(2, 2);
  a.at(0, 0) = {0, 0};
  a.at(1, 0) = {1, 0};
  a.at(0, 1) = {0, 1};
  a.at(1, 1) = {1, 1};
  b = a;
  b.at(0, 0) = {2, 4};
  GeometryMorph g(lin, lin, a, b);

  CHECK(morph_mesh(g, 0.0).at(0, 0) == a.at(0, 0));
  CHECK(morph_mesh(g, 1.0).at(0, 0) == b.at(0, 0));
  const Eigen::Vector2d mid = morph_mesh(g, 0.5).at(0, 0);
  CHECK(mid.x() == doctest::Approx(1.0));
  CHECK(mid.y() == doctest::Approx(2.0));
  CHECK_THROWS_AS(morph_mesh(g, 1.5), std::domain_error);
  CHECK_THROWS_AS(morph_mesh(g, -0.1), std::domain_error);
}

TEST_CASE("eval_geometry: identity map and morph linearity") {
  KnotVector lin({0, 0, 1, 1}, 1);
  ControlMesh square(2, 2);
  square.at(0, 0) = {0, 0};
  square.at(1, 0) = {1, 0};
  square.at(0, 1) = {0, 1};
  square.at(1, 1) = {1, 1};
  ControlMesh shifted = square;
  for (auto& p : shifted.pts) p += Eigen::Vector2d(0.3, -0.2);
  GeometryMorph g(lin, lin, square, shifted);

  std::mt19937 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double u = unit(rng), v = unit(rng), t = unit(rng);
    const Eigen::Vector2d x0 = eval_geometry(g, 0.0, u, v);
    CHECK((x0 - Eigen::Vector2d(u, v)).norm() <= 1e-14);  // identity at t=0
    const Eigen::Vector2d xt = eval_geometry(g, t, u, v);
    const Eigen::Vector2d x1 = eval_geometry(g, 1.0, u, v);
    CHECK((xt - ((1 - t) * x0 + t * x1)).norm() <= 1e-12);
  }
}

TEST_CASE("endpoint interpolation on the ellipse fixture") {
  const GeometryMorph g = load_ellipse_fixture();
  for (double t : {0.0, 0.37, 1.0}) {
    const ControlMesh mesh = morph_mesh(g, t);
    const Eigen::Vector2d first = eval_geometry(g, t, 0.0, 0.0);
    const Eigen::Vector2d last = eval_geometry(g, t, 1.0, 1.0);
    CHECK((first - mesh.at(0, 0)).norm() <= 1e-12);
    CHECK((last - mesh.at(mesh.nu - 1, mesh.nv - 1)).norm() <= 1e-12);
  }
}

TEST_CASE("eval_jacobian: identity, scaling, finite differences") {
  KnotVector lin({0, 0, 1, 1}, 1);
  ControlMesh square(2, 2);
  square.at(0, 0) = {0, 0};
  square.at(1, 0) = {1, 0};
  square.at(0, 1) = {0, 1};
  square.at(1, 1) = {1, 1};
  GeometryMorph ident(lin, lin, square, square);
  const JacobianResult ji = eval_jacobian(ident, 0.5, 0.3, 0.8);
  CHECK((ji.J - Eigen::Matrix2d::Identity()).norm() <= 1e-14);
  CHECK(ji.det == doctest::Approx(1.0));

  const double s = 2.5;
  ControlMesh scaled = square;
  for (auto& p : scaled.pts) p *= s;
  GeometryMorph scale(lin, lin, scaled, scaled);
  const JacobianResult js = eval_jacobian(scale, 0.0, 0.4, 0.6);
  CHECK(js.J(0, 0) == doctest::Approx(s));
  CHECK(js.J(1, 1) == doctest::Approx(s));
  CHECK(js.det == doctest::Approx(s * s));

  // Central finite differences on the ellipse fixture interior.
  const GeometryMorph g = load_ellipse_fixture();
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> inner(0.15, 0.85);
  const double fd = 1e-6;
  for (int trial = 0; trial < 25; ++trial) {
    const double u = inner(rng), v = inner(rng), t = inner(rng);
    const JacobianResult jac = eval_jacobian(g, t, u, v);
    Eigen::Matrix2d approx;
    approx.col(0) =
        (eval_geometry(g, t, u + fd, v) - eval_geometry(g, t, u - fd, v)) /
        (2 * fd);
    approx.col(1) =
        (eval_geometry(g, t, u, v + fd) - eval_geometry(g, t, u, v - fd)) /
        (2 * fd);
    CHECK((jac.J - approx).norm() / jac.J.norm() <= 1e-6);
  }
}

TEST_CASE("mismatched meshes are rejected") {
  KnotVector lin({0, 0, 1, 1}, 1);
  ControlMesh a(2, 2), b(2, 3);
  CHECK_THROWS_AS(GeometryMorph(lin, lin, a, b), std::invalid_argument);
}

TEST_CASE("refined keeps degree and doubles spans") {
  const KnotVector kv = uniform_knots(2, 3);
  const KnotVector fine = kv.refined(2);
  CHECK(fine.degree() == 2);
  CHECK(fine.nonempty_spans().size() == 12);
  CHECK(fine.front() == 0.0);
  CHECK(fine.back() == 1.0);
}
