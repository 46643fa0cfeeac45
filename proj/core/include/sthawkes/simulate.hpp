#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sthawkes/intensity.hpp"
#include "sthawkes/rng.hpp"
#include "sthawkes/types.hpp"
#include "sthawkes/venue_features.hpp"

namespace sthawkes {

struct PredictedCheckin {
  int32_t user = -1;
  double t = 0.0;
  int32_t venue = -1;  // snapped discrete location
  double x = 0.0, y = 0.0;
  int32_t category = -1;
  int32_t predicted_for = -1;  // aligned test-event position, -1 when free-running
};

struct SimulationConfig {
  // Maximum look-ahead beyond the anchoring event, in hours.
  double horizon_hours = kHoursPerDefaultHorizon;
  // Proposal standard deviation; defaults to the spatial bandwidth h.
  std::optional<double> proposal_sd;
  int lookahead = 1;
  uint64_t seed = 1;
  // Recompute the dominating rate at the proposed location before drawing the
  // waiting time, instead of using the rate at the loop's current point with a
  // clamped acceptance ratio.
  bool resample_bound_at_proposal = false;
  // predict_test_window: emit a truncated prediction at the horizon instead of
  // dropping the alignment slot when thinning runs past the horizon.
  bool clamp_to_horizon = true;

  static constexpr double kHoursPerDefaultHorizon = 672.0;  // four weeks
};

// Ratio of the largest row sum of alpha * 8*pi*h^2 / eta; at or above 1 the
// process is treated as super-critical and simulation refuses to run.
double branching_proxy(const ModelParameters& params);

// One step of modified thinning over the discrete venue set: propose a
// location from a Gaussian around the current point, snap to the nearest
// venue, draw an exponential waiting time from the current total intensity,
// accept with the (clamped) intensity ratio, then draw the category from a
// multinoulli proportional to the per-category intensities at the accepted
// point. Returns nothing once the waiting time passes `horizon` (absolute).
// The history must be non-empty: its last entry anchors the proposal.
std::optional<PredictedCheckin> next_event(int32_t user, const HistoryView& history,
                                           const CategoryAssignment& assignment,
                                           const VenueFeatureTable& features,
                                           const ModelParameters& params,
                                           const std::vector<VenueInfo>& venues, double horizon,
                                           const SimulationConfig& cfg, Rng& rng);

struct PredictionRun {
  std::vector<PredictedCheckin> predictions;  // aligned with predictable test events
  std::vector<std::string> notices;           // skipped users etc.
};

// Lookahead-one prediction: for each test event, condition on the true history
// up to that event (train plus earlier test events of the same user) and emit
// one predicted next check-in. Users with no prior history are skipped with a
// notice. Latent train categories come from `train_fill` (e.g. the posterior
// mode).
PredictionRun predict_test_window(const EventLog& train, const CategoryAssignment& train_fill,
                                  const EventLog& test, const VenueFeatureTable& features,
                                  const ModelParameters& params, const SimulationConfig& cfg);

// Ground-truth generator for tests and synthetic experiments.
struct SimulationScenario {
  std::vector<std::string> categories;
  std::vector<std::string> users;
  std::vector<VenueInfo> venues;
  VenueFeatureTable features;  // per venue, aligned with `venues`
  ModelParameters params;
  double t_begin = 0.0, t_end = 0.0;
  uint64_t seed = 1;
};

// Simulates every user's trajectory with the thinning core above, recording
// all categories. Each user starts anchored at a random venue with an empty
// history; per-user RNG streams derive from the master seed, so results do not
// depend on user order. Refuses super-critical parameters.
EventLog simulate_dataset(const SimulationScenario& scenario);

}  // namespace sthawkes
