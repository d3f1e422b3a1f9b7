#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "modetrack/common.hpp"

namespace modetrack {

/// Symmetric stiffness/mass pair of equal dimension; M must be positive
/// definite, K positive (semi)definite after boundary elimination.
struct MatrixPencil {
  Eigen::MatrixXd K;
  Eigen::MatrixXd M;

  int dim() const { return static_cast<int>(K.rows()); }
};

/// One solution of K e = lambda M e. The eigenvector is M-normalized
/// (e' M e = 1) with the largest-magnitude entry positive, and freq is the
/// resonance frequency derived from lambda = k^2.
struct Eigenpair {
  double lambda = 0.0;
  Eigen::VectorXd e;
  double freq = 0.0;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when the bordered derivative system is singular, which signals a
/// degenerate eigenvalue; the tracker reduces the step or aborts.
struct SingularDerivativeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The `count` smallest eigenpairs of K e = lambda M e, ascending by lambda,
/// with M-orthonormal eigenvectors and deterministic sign convention.
/// Reduces to a standard symmetric problem through a Cholesky factorization
/// of M; dense, intended for desk-scale N.
std::vector<Eigenpair> solve_gevp(const MatrixPencil& pencil, int count,
                                  const Medium& medium = {});

struct EigDerivative {
  Eigen::VectorXd e_prime;
  double lambda_prime = 0.0;
};

/// Derivative of a simple eigenpair with respect to the pencil parameter,
/// from the bordered (N+1)x(N+1) system
///   [ K - lambda M   -M e      ] [ e'      ]   [ -K' e + lambda M' e ]
///   [ norm_vec' M     0        ] [ lambda' ] = [ -e' M' e            ]
/// where norm_vec is the previous step's accepted eigenvector (or the
/// current one at the first step).
EigDerivative eig_derivative(const MatrixPencil& pencil,
                             const Eigen::MatrixXd& K_prime,
                             const Eigen::MatrixXd& M_prime,
                             const Eigenpair& pair,
                             const Eigen::VectorXd& norm_vec);

/// a' M b and sqrt(a' M a).
double m_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
               const Eigen::MatrixXd& M);
double m_norm(const Eigen::VectorXd& a, const Eigen::MatrixXd& M);

/// Flips the sign so the largest-magnitude entry is positive.
void fix_phase(Eigen::VectorXd& v);

}  // namespace modetrack
