#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sthawkes/types.hpp"
#include "sthawkes/venue_features.hpp"

namespace sthawkes {

// Clamp applied to every intensity before it enters a logarithm.
inline constexpr double kIntensityFloor = 1e-12;

// All learnable quantities plus the grid-searched hyperparameters.
// alpha is row-major K x K with alpha[i*K+j] the influence of category j on
// category i. eta is the temporal decay (1/hours), h the spatial bandwidth
// (degrees). prior_p is the latent-category prior, fixed uniform by default.
struct ModelParameters {
  int num_categories = 0;
  std::vector<double> w_day;    // K x 7
  std::vector<double> w_hour;   // K x 4
  std::vector<double> alpha;    // K x K
  double eta = 1.0;
  double h = 0.05;
  std::vector<double> prior_p;

  double a(int i, int j) const { return alpha[static_cast<size_t>(i) * num_categories + j]; }
  double& a(int i, int j) { return alpha[static_cast<size_t>(i) * num_categories + j]; }
  std::span<const double> wday(int c) const { return {w_day.data() + static_cast<size_t>(c) * 7, 7}; }
  std::span<const double> whour(int c) const { return {w_hour.data() + static_cast<size_t>(c) * 4, 4}; }

  void validate() const;

  // Zero-centred weights and a uniform prior; sized for K categories.
  static ModelParameters zeros(int k, double eta = 1.0, double h = 0.05);
  // Small random initialization: w ~ U(-0.1, 0.1), alpha ~ U(0, 0.1).
  static ModelParameters random_init(int k, uint64_t seed, double eta = 1.0, double h = 0.05);
};

// One past event as seen from a query point. category < 0 marks a latent slot
// to be resolved through a CategoryAssignment (latent_ordinal indexes it).
struct HistoryEntry {
  double t = 0.0, x = 0.0, y = 0.0;
  int32_t category = -1;
  int32_t latent_ordinal = -1;
};

struct HistoryView {
  int32_t user = -1;
  std::span<const HistoryEntry> entries;
};

// Per-user chronological event lists; immutable after construction.
class UserHistories {
 public:
  explicit UserHistories(const EventLog& log);

  // Entries with t_k < t (strict: simultaneous events do not excite each other).
  HistoryView before(int32_t user, double t) const;
  // Entries with t_k <= t; the simulator's view of its own trajectory.
  HistoryView through(int32_t user, double t) const;
  HistoryView all(int32_t user) const;

 private:
  std::vector<std::vector<HistoryEntry>> per_user_;
};

// exp(-eta * dt); dt must be non-negative.
double temporal_kernel(double dt, double eta);
// exp(-d / (2h)); d must be non-negative.
double spatial_kernel(double d, double h);
// Integral of the spatial kernel over the whole plane: 8*pi*h^2.
double spatial_kernel_plane_integral(double h);

double euclidean_distance(double x0, double y0, double x1, double y1);

// mu_c(v) = exp(w_day[c] . x_day_v) + exp(w_hour[c] . x_hour_v) > 0.
double base_intensity(int category, int venue, const VenueFeatureTable& features,
                      const ModelParameters& params);
// Base intensity at the dataset-average feature vector (compensator use).
double base_intensity_average_venue(int category, const VenueFeatureTable& features,
                                    const ModelParameters& params);

// lambda_c^u(t, l): base rate plus excitation from the user's own history.
// Entries of a different user's view contribute nothing; observed and latent
// history entries contribute identically once resolved (the user gate applies
// to latent-mark events as well).
double conditional_intensity(int category, int venue, int32_t user, double t, double x, double y,
                             const HistoryView& history, const CategoryAssignment& assignment,
                             const VenueFeatureTable& features, const ModelParameters& params);

// Integral of lambda_c^u over [t_a, t_b] x space. The base term integrates the
// average-venue rate over the bounded domain; each excitation term uses the
// exact temporal integral and the whole-plane spatial integral 8*pi*h^2:
//   mu_c * (t_b - t_a) * X * Y
//     + sum_k alpha[c][c_k] * 8*pi*h^2 / eta
//           * (exp(-eta*max(0, t_a - t_k)) - exp(-eta*(t_b - t_k)))
double compensator(int category, double t_a, double t_b, const HistoryView& history,
                   const CategoryAssignment& assignment, const VenueFeatureTable& features,
                   const ModelParameters& params, const DomainBounds& domain);

}  // namespace sthawkes
