#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "modetrack/common.hpp"

namespace modetrack {

enum class ModeFamily { TM, TE };

/// Canonical pillbox mode label: family, azimuthal index m, radial index n,
/// longitudinal index p. Modes with m >= 1 are twofold degenerate; the
/// polarization slot (0 or 1) distinguishes the two members of such a pair.
struct ModeLabel {
  ModeFamily family = ModeFamily::TM;
  int m = 0;
  int n = 1;
  int p = 0;
  int polarization = 0;

  bool same_cluster(const ModeLabel& o) const {
    return family == o.family && m == o.m && n == o.n && p == o.p;
  }
  bool operator==(const ModeLabel& o) const = default;
};

std::string to_string(ModeFamily family);
std::string to_string(const ModeLabel& label);

/// Parses "TM 0 1 17", "TE,1,1,2" or compact single-digit "TM010".
/// For 2D labels also accepts "(m,n)" / "m,n" (family defaults to TM).
ModeLabel parse_mode_label(const std::string& text);

/// Cylindrical resonator dimensions and fill material.
struct PillboxSpec {
  double radius = 1.0;  // R [m]
  double length = 1.0;  // d [m]
  Medium medium;
};

struct SpectrumEntry {
  ModeLabel label;
  double freq = 0.0;    // Hz
  double lambda = 0.0;  // k^2 [1/m^2]
};

/// Entries sorted ascending by frequency, complete below f_max.
struct AnalyticSpectrum {
  std::vector<SpectrumEntry> entries;
  double f_max = 0.0;
};

/// Bessel function of the first kind J_m(x), m >= 0, x >= 0.
double bessel_j(int m, double x);

/// J'_m via the identity J'_m = (J_{m-1} - J_{m+1})/2, with J'_0 = -J_1.
double bessel_j_deriv(int m, double x);

/// nth positive root of J_m (n >= 1), bracketed on unit intervals and
/// polished to ~1e-12. Results are cached.
double bessel_root(int m, int n);

/// nth positive root of J'_m; the trivial root x = 0 (m = 0) is excluded.
double bessel_deriv_root(int m, int n);

struct PillboxFrequency {
  double freq = 0.0;
  /// false for TE p=0, which evaluates formally but is not a physical mode.
  bool physical = true;
};

/// Closed-form resonance frequency of one pillbox mode:
///   omega = 1/sqrt(mu*eps) * sqrt(x^2/R^2 + p^2 pi^2 / d^2)
/// with x = x_mn (TM) or x'_mn (TE). Throws on invalid labels.
PillboxFrequency pillbox_freq(const PillboxSpec& spec, const ModeLabel& label);

/// All admissible modes below f_max, sorted; TM has p >= 0, TE has p >= 1,
/// and every m >= 1 label appears with both polarization slots.
AnalyticSpectrum pillbox_spectrum(const PillboxSpec& spec, double f_max);

/// 2D disk cross-section spectrum: the `count` smallest eigenvalues
/// lambda = (x_mn/R)^2 (Dirichlet) or (x'_mn/R)^2 (Neumann), with
/// multiplicity 2 for m >= 1. Labels carry p = 0; Dirichlet maps to TM,
/// Neumann to TE.
AnalyticSpectrum disk_spectrum_2d(double radius, BoundaryCondition bc,
                                  int count, const Medium& medium = {});

struct Classification {
  ModeLabel label;
  double rel_err = 0.0;
  /// false when the nearest entries form a degenerate cluster, whose
  /// polarization cannot be resolved from the frequency alone.
  bool polarization_resolved = true;
};

/// Nearest reference entry by relative frequency distance. Throws
/// ClassificationError if the best distance exceeds rel_tol.
Classification classify(double freq, const AnalyticSpectrum& reference,
                        double rel_tol);

struct ClassificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Radius R* at which the analytic frequency curves of two labels coincide
/// for fixed length d. Closed form when the longitudinal terms differ;
/// bisection fallback otherwise. Throws std::invalid_argument when the
/// curves cannot cross.
double crossing_radius(double length, const ModeLabel& a, const ModeLabel& b,
                       const Medium& medium = {});

}  // namespace modetrack
