#include "modetrack/eigsolve.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

namespace modetrack {

void fix_phase(Eigen::VectorXd& v) {
  int idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v[idx] < 0.0) v = -v;
}

std::vector<Eigenpair> solve_gevp(const MatrixPencil& pencil, int count,
                                  const Medium& medium) {
  const int n = pencil.dim();
  if (pencil.M.rows() != n || pencil.M.cols() != n || pencil.K.cols() != n)
    throw std::invalid_argument("solve_gevp: K and M dimensions disagree");
  if (count < 1 || count > n)
    throw std::invalid_argument("solve_gevp: count out of range");

  // K e = lambda M e  ->  (L^-1 K L^-T) z = lambda z with M = L L^T,
  // e = L^-T z. Then z-orthonormality is exactly M-orthonormality of e.
  Eigen::LLT<Eigen::MatrixXd> llt(pencil.M);
  if (llt.info() != Eigen::Success)
    throw SolverError("solve_gevp: mass matrix is not positive definite");
  const Eigen::MatrixXd& L = llt.matrixL();

  Eigen::MatrixXd C = L.triangularView<Eigen::Lower>().solve(pencil.K);
  C = L.triangularView<Eigen::Lower>().solve(C.transpose().eval());
  C = 0.5 * (C + C.transpose().eval());  // symmetrize round-off

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success)
    throw SolverError("solve_gevp: symmetric eigendecomposition failed");

  std::vector<Eigenpair> out;
  out.reserve(count);
  for (int j = 0; j < count; ++j) {
    Eigenpair pair;
    pair.lambda = es.eigenvalues()[j];
    pair.e = L.transpose()
                 .triangularView<Eigen::Upper>()
                 .solve(es.eigenvectors().col(j).eval());
    const double nrm = m_norm(pair.e, pencil.M);
    if (nrm > 0.0) pair.e /= nrm;
    fix_phase(pair.e);
    pair.freq = frequency_from_lambda(pair.lambda, medium);
    out.push_back(std::move(pair));
  }
  return out;
}

EigDerivative eig_derivative(const MatrixPencil& pencil,
                             const Eigen::MatrixXd& K_prime,
                             const Eigen::MatrixXd& M_prime,
                             const Eigenpair& pair,
                             const Eigen::VectorXd& norm_vec) {
  const int n = pencil.dim();
  if (pair.e.size() != n || norm_vec.size() != n)
    throw std::invalid_argument("eig_derivative: vector length mismatch");

  Eigen::MatrixXd A(n + 1, n + 1);
  A.topLeftCorner(n, n) = pencil.K - pair.lambda * pencil.M;
  A.topRightCorner(n, 1) = -(pencil.M * pair.e);
  A.bottomLeftCorner(1, n) = (pencil.M * norm_vec).transpose();
  A(n, n) = 0.0;

  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = -(K_prime * pair.e) + pair.lambda * (M_prime * pair.e);
  rhs[n] = -pair.e.dot(M_prime * pair.e);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible())
    throw SingularDerivativeError(
        "eig_derivative: bordered system singular (degenerate eigenvalue?)");
  Eigen::VectorXd sol = lu.solve(rhs);

  const double scale = std::max(1.0, rhs.norm());
  if ((A * sol - rhs).norm() > 1e-8 * scale)
    throw SingularDerivativeError(
        "eig_derivative: bordered solve residual too large");

  EigDerivative d;
  d.e_prime = sol.head(n);
  d.lambda_prime = sol[n];
  return d;
}

double m_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
               const Eigen::MatrixXd& M) {
  if (a.size() != M.rows() || b.size() != M.cols())
    throw std::invalid_argument("m_inner: dimension mismatch");
  return a.dot(M * b);
}

double m_norm(const Eigen::VectorXd& a, const Eigen::MatrixXd& M) {
  return std::sqrt(std::max(0.0, m_inner(a, a, M)));
}

}  // namespace modetrack
