#include "modetrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace modetrack {

namespace {

std::string format_t(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

struct ModeState {
  Eigenpair current;
  Eigen::VectorXd prev_e;  // accepted eigenvector of the step before current
  EigDerivative deriv;
  Prediction prediction;
  MatchResult matched;
};

}  // namespace

void TrackerConfig::validate() const {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("TrackerConfig: need 0 < beta < 1");
  if (!(h_min > 0.0 && h_min <= h0))
    throw std::invalid_argument("TrackerConfig: need 0 < h_min <= h0");
  if (!(phi_min > 0.0 && phi_min <= 1.0))
    throw std::invalid_argument("TrackerConfig: need 0 < phi_min <= 1");
  if (t_start == t_end)
    throw std::invalid_argument("TrackerConfig: t_start != t_end");
  if (delta <= 0.0) throw std::invalid_argument("TrackerConfig: delta > 0");
}

Prediction predict(const Eigenpair& pair, const EigDerivative& deriv,
                   double h) {
  if (h == 0.0) throw std::invalid_argument("predict: h must be nonzero");
  return Prediction{pair.e + h * deriv.e_prime,
                    pair.lambda + h * deriv.lambda_prime};
}

double correlation(const Eigen::VectorXd& candidate,
                   const Eigen::VectorXd& predicted,
                   const Eigen::MatrixXd& M) {
  const double nc = m_norm(candidate, M);
  const double np = m_norm(predicted, M);
  if (nc == 0.0 || np == 0.0)
    throw std::invalid_argument("correlation: zero vector");
  const double phi = std::abs(m_inner(candidate, predicted, M)) / (nc * np);
  return std::min(phi, 1.0);  // clip Cauchy-Schwarz round-off
}

MatchResult match(const std::vector<Eigenpair>& candidates,
                  const Prediction& prediction, const Eigen::MatrixXd& M,
                  double phi_min) {
  if (candidates.empty())
    throw std::invalid_argument("match: empty candidate list");
  MatchResult best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(candidates.size()); ++k) {
    const double phi = correlation(candidates[k].e, prediction.e, M);
    const double gap = std::abs(candidates[k].lambda - prediction.lambda);
    if (phi > best.phi || (phi == best.phi && gap < best_gap)) {
      best.index = k;
      best.phi = phi;
      best_gap = gap;
    }
  }
  best.accepted = best.phi >= phi_min;
  return best;
}

namespace {

std::vector<TrackedPath> track_core(const TrackerConfig& config,
                                    const PencilProvider& provider,
                                    const std::vector<int>& mode_indices) {
  config.validate();
  const int n_modes = static_cast<int>(mode_indices.size());
  if (n_modes == 0)
    throw std::invalid_argument("track: at least one mode index");
  for (int i = 0; i < n_modes; ++i)
    for (int j = i + 1; j < n_modes; ++j)
      if (mode_indices[i] == mode_indices[j])
        throw std::invalid_argument("track: mode indices must be distinct");

  const int dim = provider.dim();
  int cand_count = config.candidate_count > 0 ? config.candidate_count
                                              : 2 * n_modes + 6;
  cand_count = std::min(cand_count, dim);
  const int max_index =
      *std::max_element(mode_indices.begin(), mode_indices.end());
  if (max_index < 1 || max_index > cand_count)
    throw std::invalid_argument(
        "track: initial mode index outside the candidate range");

  const TrackDirection direction = config.t_end > config.t_start
                                       ? TrackDirection::Forward
                                       : TrackDirection::Backward;
  const double dir = direction == TrackDirection::Forward ? 1.0 : -1.0;

  long solves = 0;
  MatrixPencil pencil = provider.pencil_at(config.t_start);
  std::vector<Eigenpair> candidates =
      solve_gevp(pencil, cand_count, config.medium);
  ++solves;

  std::vector<TrackedPath> paths(n_modes);
  std::vector<ModeState> states(n_modes);
  for (int m = 0; m < n_modes; ++m) {
    states[m].current = candidates[mode_indices[m] - 1];
    states[m].prev_e = states[m].current.e;  // first-step constraint vector
    paths[m].direction = direction;
    paths[m].mode_index = mode_indices[m];
    paths[m].final_candidate = mode_indices[m];
    paths[m].records.push_back(TrackRecord{config.t_start, 0.0,
                                           states[m].current.lambda,
                                           states[m].current.freq, 1.0,
                                           states[m].current.e});
  }

  double t = config.t_start;
  double h = std::min(config.h0, std::abs(config.t_end - config.t_start));

  while (t != config.t_end) {
    // Derivatives at the current t; they do not depend on the stepsize, so
    // halving retries below reuse them.
    const auto [K_prime, M_prime] = provider.derivative_at(t);
    for (int m = 0; m < n_modes; ++m) {
      try {
        states[m].deriv = eig_derivative(pencil, K_prime, M_prime,
                                         states[m].current, states[m].prev_e);
      } catch (const SingularDerivativeError& err) {
        throw SingularDerivativeError(std::string(err.what()) + " at t=" +
                                      format_t(t) + ", mode j=" +
                                      std::to_string(mode_indices[m]));
      }
    }

    double t_next = 0.0;
    MatrixPencil next_pencil;
    while (true) {
      t_next = t + dir * h;
      if (dir > 0.0)
        t_next = std::min(t_next, config.t_end);
      else
        t_next = std::max(t_next, config.t_end);
      const double h_eff = t_next - t;

      for (int m = 0; m < n_modes; ++m)
        states[m].prediction = predict(states[m].current, states[m].deriv,
                                       h_eff);

      next_pencil = provider.pencil_at(t_next);
      candidates = solve_gevp(next_pencil, cand_count, config.medium);
      ++solves;

      double phi_worst = 1.0;
      for (int m = 0; m < n_modes; ++m) {
        states[m].matched = match(candidates, states[m].prediction,
                                  next_pencil.M, config.phi_min);
        phi_worst = std::min(phi_worst, states[m].matched.phi);
      }
      if (phi_worst >= config.phi_min) break;

      const double h_reduced = config.beta * h;
      if (h_reduced < config.h_min) {
        // Warn branch: keep the best candidates anyway, mark the paths,
        // and continue rather than abort.
        for (int m = 0; m < n_modes; ++m)
          if (!states[m].matched.accepted) {
            std::ostringstream os;
            os << "stepsize underflow: accepted best candidate with phi="
               << states[m].matched.phi << " < phi_min=" << config.phi_min
               << " (h=" << h << ", h_min=" << config.h_min << ")";
            paths[m].warnings.push_back(TrackWarning{t_next, os.str()});
          }
        break;
      }
      h = h_reduced;
    }

    // Collision check: two modes claiming one candidate.
    for (int a = 0; a < n_modes; ++a)
      for (int b = a + 1; b < n_modes; ++b)
        if (states[a].matched.index == states[b].matched.index) {
          std::ostringstream os;
          os << "candidate " << states[a].matched.index + 1
             << " claimed by modes " << mode_indices[a] << " and "
             << mode_indices[b];
          paths[a].warnings.push_back(TrackWarning{t_next, os.str()});
          paths[b].warnings.push_back(TrackWarning{t_next, os.str()});
        }

    const double h_eff = t_next - t;
    for (int m = 0; m < n_modes; ++m) {
      const Eigenpair& accepted = candidates[states[m].matched.index];
      states[m].prev_e = states[m].current.e;
      states[m].current = accepted;
      paths[m].final_candidate = states[m].matched.index + 1;
      paths[m].phi_min_seen =
          std::min(paths[m].phi_min_seen, states[m].matched.phi);
      paths[m].records.push_back(TrackRecord{t_next, h_eff, accepted.lambda,
                                             accepted.freq,
                                             states[m].matched.phi,
                                             accepted.e});
    }
    pencil = std::move(next_pencil);
    t = t_next;
    // Fit the stepsize to the target value.
    h = std::min(config.h0, std::abs(config.t_end - t));
  }

  for (TrackedPath& path : paths) path.eigensolve_count = solves;
  return paths;
}

}  // namespace

TrackedPath track(const TrackerConfig& config, const PencilProvider& provider,
                  int mode_index) {
  return track_core(config, provider, {mode_index}).front();
}

std::vector<TrackedPath> track_many(const TrackerConfig& config,
                                    const PencilProvider& provider,
                                    const std::vector<int>& mode_indices) {
  return track_core(config, provider, mode_indices);
}

TrackedPath explore(const TrackerConfig& config,
                    const PencilProvider& provider,
                    const ModeLabel& target_label,
                    const AnalyticSpectrum& reference, double rel_tol) {
  config.validate();

  // Rank of the target in the reference decides how many candidates the
  // initial solve must resolve.
  int rank = -1;
  double target_freq = 0.0;
  for (int i = 0; i < static_cast<int>(reference.entries.size()); ++i)
    if (reference.entries[i].label.same_cluster(target_label)) {
      rank = i;
      target_freq = reference.entries[i].freq;
      break;
    }
  if (rank < 0)
    throw ExploreError("explore: label " + to_string(target_label) +
                       " not present in the reference spectrum");

  TrackerConfig cfg = config;
  const int dim = provider.dim();
  const int auto_count = std::max(config.candidate_count, rank + 1 + 4);
  cfg.candidate_count = std::min(auto_count, dim);

  MatrixPencil pencil = provider.pencil_at(cfg.t_start);
  std::vector<Eigenpair> candidates =
      solve_gevp(pencil, cfg.candidate_count, cfg.medium);

  // Candidates within tolerance of the analytic frequency form the cluster;
  // the polarization slot picks a member deterministically (solver order).
  std::vector<int> cluster;
  for (int k = 0; k < static_cast<int>(candidates.size()); ++k)
    if (std::abs(candidates[k].freq - target_freq) / target_freq <= rel_tol)
      cluster.push_back(k);
  if (cluster.empty())
    throw ExploreError(
        "explore: no candidate within tolerance " + format_t(rel_tol) +
        " of the analytic frequency of " + to_string(target_label) +
        " (label not in resolved range)");
  const int slot = std::min<int>(target_label.polarization,
                                 static_cast<int>(cluster.size()) - 1);
  const int start_index = cluster[slot] + 1;

  return track(cfg, provider, start_index);
}

}  // namespace modetrack
