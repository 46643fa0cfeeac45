#pragma once

#include <span>
#include <vector>

#include "sthawkes/intensity.hpp"
#include "sthawkes/types.hpp"

namespace sthawkes {

struct LikelihoodBreakdown {
  double log_events = 0.0;       // sum of log lambda at event points
  double log_compensator = 0.0;  // integrated intensity over users x categories
  double log_prior = 0.0;        // sum of log p(z)
  double total = 0.0;            // log_events - log_compensator + log_prior
};

// Per-group L2 weights; the penalty is 0.5 * l2 * ||theta_group||^2.
struct RegularizationWeights {
  double w_day = 1e-2;
  double w_hour = 1e-2;
  double alpha = 1e-2;
};

struct ParameterGradient {
  std::vector<double> w_day;   // K x 7
  std::vector<double> w_hour;  // K x 4
  std::vector<double> alpha;   // K x K

  static ParameterGradient zeros_like(const ModelParameters& p);
  double max_abs() const;
};

double log_prior(const CategoryAssignment& assignment, std::span<const double> prior_p);

// Conditional log likelihood of the log given one assignment, split into its
// parts. log_events uses the observed- or latent-case intensity per event;
// log_compensator sums the compensator over all users and categories across
// the log's full window.
LikelihoodBreakdown log_likelihood(const EventLog& log, const CategoryAssignment& assignment,
                                   const VenueFeatureTable& features, const ModelParameters& params);

// Event and compensator terms restricted to events with t in [t_a, t_b), with
// history taken from the whole log. No prior term. Used for held-out scoring.
double window_loglik(const EventLog& log, const CategoryAssignment& assignment,
                     const VenueFeatureTable& features, const ModelParameters& params, double t_a,
                     double t_b);

// log p(E|z^s,theta) + log p(z^s) per sample; their spread gives the
// Monte-Carlo standard error of the EM objective.
std::vector<double> per_sample_log_joint(const EventLog& log,
                                         std::span<const CategoryAssignment> samples,
                                         const VenueFeatureTable& features,
                                         const ModelParameters& params);

// Monte-Carlo expected log joint: (1/S) * sum_s [log p(E|z^s,theta) + log p(z^s)].
double expected_log_joint(const EventLog& log, std::span<const CategoryAssignment> samples,
                          const VenueFeatureTable& features, const ModelParameters& params);

// expected_log_joint minus the L2 penalties; the M-step's objective.
double penalized_objective(const EventLog& log, std::span<const CategoryAssignment> samples,
                           const VenueFeatureTable& features, const ModelParameters& params,
                           const RegularizationWeights& l2);

// Analytic gradient of penalized_objective with respect to w_day, w_hour and
// alpha (eta and h are grid-searched hyperparameters and are not learned).
// Returned unprojected; the optimizer clamps alpha at zero after each step.
ParameterGradient gradient(const EventLog& log, std::span<const CategoryAssignment> samples,
                           const VenueFeatureTable& features, const ModelParameters& params,
                           const RegularizationWeights& l2);

}  // namespace sthawkes
