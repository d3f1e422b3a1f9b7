#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "doctest.h"
#include "modetrack/eigsolve.hpp"

using namespace modetrack;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::mt19937& rng, double scale) {
  std::normal_distribution<double> gauss(0.0, scale);
  Eigen::MatrixXd A(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) A(i, j) = gauss(rng);
  return 0.5 * (A + A.transpose().eval());
}

Eigen::MatrixXd random_spd(int n, std::mt19937& rng, double scale) {
  const Eigen::MatrixXd A = random_symmetric(n, rng, scale);
  return A * A.transpose() + n * scale * scale * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("solve_gevp: diagonal and 2x2 analytic pencils") {
  MatrixPencil diag;
  diag.K = Eigen::Vector2d(1.0, 4.0).asDiagonal();
  diag.M = Eigen::MatrixXd::Identity(2, 2);
  const auto pairs = solve_gevp(diag, 2);
  CHECK(pairs[0].lambda == doctest::Approx(1.0));
  CHECK(pairs[1].lambda == doctest::Approx(4.0));
  CHECK(pairs[0].e[0] == doctest::Approx(1.0));
  CHECK(std::abs(pairs[0].e[1]) <= 1e-14);

  MatrixPencil tri;
  tri.K.resize(2, 2);
  tri.K << 2.0, -1.0, -1.0, 2.0;
  tri.M = Eigen::MatrixXd::Identity(2, 2);
  const auto tp = solve_gevp(tri, 2);
  CHECK(tp[0].lambda == doctest::Approx(1.0));
  CHECK(tp[1].lambda == doctest::Approx(3.0));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(tp[0].e[0] == doctest::Approx(inv_sqrt2));
  CHECK(tp[0].e[1] == doctest::Approx(inv_sqrt2));
  CHECK(std::abs(tp[1].e[0]) == doctest::Approx(inv_sqrt2));
  CHECK(tp[1].e[0] * tp[1].e[1] < 0.0);
}

TEST_CASE("solve_gevp: oracle equivalence on random SPD pencils") {
  std::mt19937 rng(31415);
  for (int trial = 0; trial < 20; ++trial) {
    MatrixPencil pencil;
    pencil.K = random_spd(8, rng, 1.0);
    pencil.M = random_spd(8, rng, 0.7);
    const auto pairs = solve_gevp(pencil, 8);

    // Second algebraic route through Eigen's generalized solver.
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> oracle(
        pencil.K, pencil.M);
    REQUIRE(oracle.info() == Eigen::Success);
    for (int j = 0; j < 8; ++j) {
      const double scale = std::max(1.0, std::abs(oracle.eigenvalues()[j]));
      CHECK(std::abs(pairs[j].lambda - oracle.eigenvalues()[j]) / scale <=
            1e-10);
    }

    // Residual, normalization, orthogonality invariants.
    for (int j = 0; j < 8; ++j) {
      const Eigen::VectorXd r =
          pencil.K * pairs[j].e - pairs[j].lambda * (pencil.M * pairs[j].e);
      CHECK(r.norm() <= 1e-8 * (pencil.K * pairs[j].e).norm());
      CHECK(std::abs(m_inner(pairs[j].e, pairs[j].e, pencil.M) - 1.0) <= 1e-10);
      for (int k = 0; k < j; ++k)
        CHECK(std::abs(m_inner(pairs[j].e, pairs[k].e, pencil.M)) <= 1e-8);
      // Phase convention: largest-magnitude entry positive.
      int idx = 0;
      pairs[j].e.cwiseAbs().maxCoeff(&idx);
      CHECK(pairs[j].e[idx] > 0.0);
    }
  }
}

TEST_CASE("solve_gevp: error paths") {
  MatrixPencil pencil;
  pencil.K = Eigen::MatrixXd::Identity(3, 3);
  pencil.M = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(solve_gevp(pencil, 1), SolverError);

  pencil.M = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(solve_gevp(pencil, 0), std::invalid_argument);
  CHECK_THROWS_AS(solve_gevp(pencil, 4), std::invalid_argument);
}

TEST_CASE("eig_derivative: decoupled diagonal perturbation") {
  // K(t) = diag(1+t, 4), M = I at t=0: lambda' = 1, e' = 0.
  MatrixPencil pencil;
  pencil.K = Eigen::Vector2d(1.0, 4.0).asDiagonal();
  pencil.M = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd K_prime = Eigen::Vector2d(1.0, 0.0).asDiagonal();
  Eigen::MatrixXd M_prime = Eigen::MatrixXd::Zero(2, 2);

  Eigenpair pair;
  pair.lambda = 1.0;
  pair.e = Eigen::Vector2d(1.0, 0.0);
  const EigDerivative d =
      eig_derivative(pencil, K_prime, M_prime, pair, pair.e);
  CHECK(d.lambda_prime == doctest::Approx(1.0));
  CHECK(d.e_prime.norm() <= 1e-12);
}

TEST_CASE("eig_derivative: constant pencil gives zero derivatives") {
  std::mt19937 rng(7);
  MatrixPencil pencil;
  pencil.K = random_spd(5, rng, 1.0);
  pencil.M = random_spd(5, rng, 0.5);
  const auto pairs = solve_gevp(pencil, 3);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(5, 5);
  for (const Eigenpair& pair : pairs) {
    const EigDerivative d = eig_derivative(pencil, zero, zero, pair, pair.e);
    CHECK(std::abs(d.lambda_prime) <= 1e-12);
    CHECK(d.e_prime.norm() <= 1e-10);
  }
}

TEST_CASE("eig_derivative: matches central differences at O(step^2)") {
  std::mt19937 rng(987);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd K0 = random_spd(6, rng, 1.0);
    const Eigen::MatrixXd K1 = random_symmetric(6, rng, 0.3);
    const Eigen::MatrixXd K2 = random_symmetric(6, rng, 0.2);
    const Eigen::MatrixXd M0 = random_spd(6, rng, 0.8);
    const Eigen::MatrixXd M1 = random_symmetric(6, rng, 0.05);
    auto K_at = [&](double t) {
      return Eigen::MatrixXd(K0 + t * K1 + t * t * K2);
    };
    auto M_at = [&](double t) { return Eigen::MatrixXd(M0 + t * M1); };

    const double t0 = 0.4;
    MatrixPencil pencil{K_at(t0), M_at(t0)};
    const auto pairs = solve_gevp(pencil, 1);
    const Eigenpair& pair = pairs.front();

    const Eigen::MatrixXd K_prime = K1 + 2.0 * t0 * K2;
    const Eigen::MatrixXd& M_prime = M1;
    const EigDerivative d =
        eig_derivative(pencil, K_prime, M_prime, pair, pair.e);

    auto lambda_at = [&](double t) {
      MatrixPencil p{K_at(t), M_at(t)};
      return solve_gevp(p, 1).front().lambda;
    };
    double prev_err = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double step = 1e-2 / (1 << k);
      const double fd = (lambda_at(t0 + step) - lambda_at(t0 - step)) /
                        (2.0 * step);
      const double err = std::abs(fd - d.lambda_prime);
      if (k > 0 && prev_err > 1e-13) {
        const double order = std::log2(prev_err / err);
        CHECK(order >= 1.9);
      }
      prev_err = err;
    }
  }
}

TEST_CASE("eig_derivative: singular bordered system is reported") {
  // K = M = I: every eigenvalue is 1 and the bordered matrix loses rank.
  MatrixPencil pencil;
  pencil.K = Eigen::MatrixXd::Identity(3, 3);
  pencil.M = Eigen::MatrixXd::Identity(3, 3);
  Eigenpair pair;
  pair.lambda = 1.0;
  pair.e = Eigen::Vector3d(1.0, 0.0, 0.0);
  const Eigen::MatrixXd some = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(
      eig_derivative(pencil, some, Eigen::MatrixXd::Zero(3, 3), pair, pair.e),
      SingularDerivativeError);
}

TEST_CASE("m_inner and m_norm") {
  std::mt19937 rng(55);
  const Eigen::MatrixXd M = random_spd(4, rng, 1.0);
  const MatrixPencil pencil{random_spd(4, rng, 1.0), M};
  const auto pairs = solve_gevp(pencil, 2);
  CHECK(m_inner(pairs[0].e, pairs[0].e, M) == doctest::Approx(1.0));
  CHECK(m_norm(Eigen::VectorXd::Zero(4), M) == doctest::Approx(0.0));

  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = gauss(rng);
      b[i] = gauss(rng);
    }
    CHECK(m_inner(a, b, M) == doctest::Approx(m_inner(b, a, M)));
  }
  CHECK_THROWS_AS(m_inner(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4),
                          M),
                  std::invalid_argument);
}
