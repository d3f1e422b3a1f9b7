#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "modetrack/discretize.hpp"
#include "modetrack/eigsolve.hpp"
#include "modetrack/spectra.hpp"

namespace modetrack {

struct TrackerConfig {
  double h0 = 0.1;        // initial stepsize
  double h_min = 0.00125; // below this the best candidate is accepted + warn
  double phi_min = 0.9;   // correlation acceptance threshold
  double beta = 0.5;      // stepsize reduction factor on rejection
  double delta = 1e-6;    // finite-difference step for physical derivatives
  double t_start = 0.0;
  double t_end = 1.0;
  /// Eigenpairs solved per step; 0 picks 2*n_tracked + 6 clamped to N.
  int candidate_count = 0;
  Medium medium;

  void validate() const;
};

struct TrackRecord {
  double t = 0.0;
  double h = 0.0;  // signed step that arrived here; 0 for the first record
  double lambda = 0.0;
  double freq = 0.0;
  double phi = 1.0;  // correlation of the accepted match
  Eigen::VectorXd e;
};

struct TrackWarning {
  double t = 0.0;
  std::string message;
};

enum class TrackDirection { Forward, Backward };

struct TrackedPath {
  std::vector<TrackRecord> records;
  std::vector<TrackWarning> warnings;
  TrackDirection direction = TrackDirection::Forward;
  int mode_index = 0;          // initial candidate index at t_start (1-based)
  int final_candidate = 0;     // accepted candidate index at t_end (1-based)
  double phi_min_seen = 1.0;   // smallest accepted correlation on the path
  long eigensolve_count = 0;   // shared across modes in track_many
};

struct Prediction {
  Eigen::VectorXd e;
  double lambda = 0.0;
};

/// First-order extrapolation from the current pair: (e + h e', lambda + h l').
Prediction predict(const Eigenpair& pair, const EigDerivative& deriv,
                   double h);

/// phi = |cand' M pred| / (|cand|_M |pred|_M), in [0,1] by Cauchy-Schwarz.
/// The modulus makes the factor invariant under the solver's sign freedom.
double correlation(const Eigen::VectorXd& candidate,
                   const Eigen::VectorXd& predicted, const Eigen::MatrixXd& M);

struct MatchResult {
  int index = -1;     // 0-based candidate index of the best correlation
  double phi = 0.0;
  bool accepted = false;  // phi >= phi_min
};

/// Best-correlated candidate against one prediction; ties broken by the
/// smaller |lambda_cand - lambda_pred|.
MatchResult match(const std::vector<Eigenpair>& candidates,
                  const Prediction& prediction, const Eigen::MatrixXd& M,
                  double phi_min);

/// Tracks the eigenpair that starts as the mode_index-th (1-based) smallest
/// at t_start through the morph to t_end: per step, eigenpair derivatives,
/// first-order prediction, correlation matching over freshly solved
/// candidates, beta-halving below phi_min, and a warning record once the
/// stepsize would drop under h_min.
TrackedPath track(const TrackerConfig& config, const PencilProvider& provider,
                  int mode_index);

/// Tracks several modes at once, sharing the per-step eigensolve. Two modes
/// claiming the same candidate at a step get a collision warning on both
/// paths.
std::vector<TrackedPath> track_many(const TrackerConfig& config,
                                    const PencilProvider& provider,
                                    const std::vector<int>& mode_indices);

struct ExploreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Backward exploration: selects the candidate at t_start whose frequency is
/// nearest the analytic frequency of target_label (within rel_tol; the
/// polarization slot picks within a degenerate cluster), then tracks it to
/// t_end. Intended with t_start = 1, t_end = 0.
TrackedPath explore(const TrackerConfig& config,
                    const PencilProvider& provider,
                    const ModeLabel& target_label,
                    const AnalyticSpectrum& reference, double rel_tol);

}  // namespace modetrack
