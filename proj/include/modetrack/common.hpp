#pragma once

#include <cmath>
#include <numbers>

namespace modetrack {

/// Vacuum permeability [H/m] and permittivity [F/m]; eps0 is derived from the
/// exact speed of light so that 1/sqrt(mu0*eps0) == c0 to machine precision.
inline constexpr double speed_of_light = 299792458.0;
inline constexpr double vacuum_mu = 4.0e-7 * std::numbers::pi;
inline constexpr double vacuum_eps =
    1.0 / (vacuum_mu * speed_of_light * speed_of_light);

/// Homogeneous lossless material filling the resonator.
struct Medium {
  double mu = vacuum_mu;
  double eps = vacuum_eps;

  static Medium vacuum() { return {}; }

  /// 1/sqrt(mu*eps), the phase velocity used to convert k^2 to Hz.
  double wave_speed() const { return 1.0 / std::sqrt(mu * eps); }
};

/// Converts an eigenvalue lambda = k^2 [1/m^2] to a frequency [Hz].
inline double frequency_from_lambda(double lambda, const Medium& medium = {}) {
  return medium.wave_speed() * std::sqrt(std::max(lambda, 0.0)) /
         (2.0 * std::numbers::pi);
}

enum class BoundaryCondition { Dirichlet, Neumann };

}  // namespace modetrack
