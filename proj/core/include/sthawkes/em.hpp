#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sthawkes/likelihood.hpp"
#include "sthawkes/rng.hpp"
#include "sthawkes/types.hpp"

namespace sthawkes {

struct GibbsConfig {
  int total_iters = 1000;
  int burn_in = 750;
  int thin = 3;
  uint64_t seed = 1;
  enum class Init { kRandom, kMostFrequent };
  Init init = Init::kRandom;

  void validate() const;
  int retained_count() const { return (total_iters - burn_in) / thin; }
};

struct MStepConfig {
  double learning_rate = 0.05;
  int max_steps = 50;
  int max_backtracks = 30;
  double gradient_tolerance = 1e-7;
  RegularizationWeights l2;
};

struct EmConfig {
  int max_em_iters = 20;
  double rel_tol = 1e-10;
  MStepConfig m_step;
  GibbsConfig gibbs;
};

// Retained Gibbs samples plus per-event sample-frequency histograms; the
// model's annotation output.
struct CategoryPosterior {
  std::vector<CategoryAssignment> samples;
  std::vector<std::vector<int64_t>> per_event_histogram;  // N_z x K

  int sample_count() const { return static_cast<int>(samples.size()); }
  // Per-event argmax, ties broken by lower category index.
  CategoryAssignment mode() const;
  // Recomputes histograms from the samples (invariant check / file loading).
  static std::vector<std::vector<int64_t>> histogram_of(const std::vector<CategoryAssignment>& samples,
                                                        int num_latent, int num_categories);
};

// Full conditional p(z_i | z_-i, E, theta) over the K candidate categories,
// computed from the z_i-dependent factors only: the event's own intensity,
// every later same-user event's intensity, the alpha-column compensator term
// and the prior. Normalized to sum to 1.
std::vector<double> gibbs_conditional(int32_t event_pos, const CategoryAssignment& current,
                                      const EventLog& log, const VenueFeatureTable& features,
                                      const ModelParameters& params);

// One systematic-scan sweep: every latent position in event order is resampled
// from its full conditional; every draw is accepted.
CategoryAssignment gibbs_sweep(CategoryAssignment state, const EventLog& log,
                               const VenueFeatureTable& features, const ModelParameters& params,
                               Rng& rng);

// Runs cfg.total_iters sweeps from init (or a fresh initialization per
// cfg.init) and retains every cfg.thin-th state after burn-in:
// floor((total_iters - burn_in)/thin) samples.
CategoryPosterior e_step(const EventLog& log, const VenueFeatureTable& features,
                         const ModelParameters& params, std::optional<CategoryAssignment> init,
                         const GibbsConfig& cfg);

// Projected gradient ascent (backtracking line search, alpha clamped at zero)
// on the Monte-Carlo expected log joint; the objective never decreases.
// eta, h and the prior are untouched.
ModelParameters m_step(const EventLog& log, const VenueFeatureTable& features,
                       const CategoryPosterior& posterior, const ModelParameters& init,
                       const MStepConfig& cfg);

struct EmTracePoint {
  int iteration = 0;
  double objective = 0.0;     // penalized expected log joint after the M-step
  double mc_std_error = 0.0;  // Monte-Carlo standard error of the sample mean
};

struct EmResult {
  ModelParameters params;
  CategoryPosterior posterior;
  std::vector<EmTracePoint> trace;
  bool converged = false;
};

// Alternates E and M steps until the 3-iteration moving average of the
// objective changes by less than rel_tol in relative terms, or max_em_iters.
EmResult run_em(const EventLog& log, const VenueFeatureTable& features, const EmConfig& cfg,
                const ModelParameters& init);

}  // namespace sthawkes
