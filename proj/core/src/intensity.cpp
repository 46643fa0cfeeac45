#include "sthawkes/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sthawkes/errors.hpp"
#include "sthawkes/rng.hpp"

namespace sthawkes {

void ModelParameters::validate() const {
  const size_t k = static_cast<size_t>(num_categories);
  if (w_day.size() != k * 7 || w_hour.size() != k * 4 || alpha.size() != k * k || prior_p.size() != k)
    throw InputError("ModelParameters: field sizes do not match num_categories");
  if (!(eta > 0.0)) throw InputError("ModelParameters: eta must be positive");
  if (!(h > 0.0)) throw InputError("ModelParameters: h must be positive");
  for (double a : alpha)
    if (!(a >= 0.0) || !std::isfinite(a)) throw InputError("ModelParameters: alpha entries must be >= 0");
  double psum = 0.0;
  for (double p : prior_p) {
    if (p < 0.0) throw InputError("ModelParameters: prior_p entries must be >= 0");
    psum += p;
  }
  if (k > 0 && std::abs(psum - 1.0) > 1e-9) throw InputError("ModelParameters: prior_p must sum to 1");
  for (double w : w_day)
    if (!std::isfinite(w)) throw InputError("ModelParameters: non-finite w_day");
  for (double w : w_hour)
    if (!std::isfinite(w)) throw InputError("ModelParameters: non-finite w_hour");
}

ModelParameters ModelParameters::zeros(int k, double eta, double h) {
  ModelParameters p;
  p.num_categories = k;
  p.w_day.assign(static_cast<size_t>(k) * 7, 0.0);
  p.w_hour.assign(static_cast<size_t>(k) * 4, 0.0);
  p.alpha.assign(static_cast<size_t>(k) * k, 0.0);
  p.eta = eta;
  p.h = h;
  p.prior_p.assign(static_cast<size_t>(k), k > 0 ? 1.0 / k : 0.0);
  return p;
}

ModelParameters ModelParameters::random_init(int k, uint64_t seed, double eta, double h) {
  ModelParameters p = zeros(k, eta, h);
  Rng rng(seed);
  for (auto& w : p.w_day) w = rng.uniform(-0.1, 0.1);
  for (auto& w : p.w_hour) w = rng.uniform(-0.1, 0.1);
  for (auto& a : p.alpha) a = rng.uniform(0.0, 0.1);
  return p;
}

UserHistories::UserHistories(const EventLog& log) {
  per_user_.resize(static_cast<size_t>(log.num_users()));
  for (int32_t n = 0; n < log.num_events(); ++n) {
    const CheckinEvent& e = log.events[static_cast<size_t>(n)];
    HistoryEntry h;
    h.t = e.t;
    h.x = e.x;
    h.y = e.y;
    if (e.category) {
      h.category = *e.category;
    } else {
      h.latent_ordinal = log.latent_ordinal(n);
    }
    per_user_[static_cast<size_t>(e.user)].push_back(h);
  }
}

HistoryView UserHistories::before(int32_t user, double t) const {
  const auto& v = per_user_[static_cast<size_t>(user)];
  auto it = std::partition_point(v.begin(), v.end(), [t](const HistoryEntry& e) { return e.t < t; });
  return {user, std::span<const HistoryEntry>(v.data(), static_cast<size_t>(it - v.begin()))};
}

HistoryView UserHistories::through(int32_t user, double t) const {
  const auto& v = per_user_[static_cast<size_t>(user)];
  auto it = std::partition_point(v.begin(), v.end(), [t](const HistoryEntry& e) { return e.t <= t; });
  return {user, std::span<const HistoryEntry>(v.data(), static_cast<size_t>(it - v.begin()))};
}

HistoryView UserHistories::all(int32_t user) const {
  const auto& v = per_user_[static_cast<size_t>(user)];
  return {user, std::span<const HistoryEntry>(v.data(), v.size())};
}

double temporal_kernel(double dt, double eta) {
  if (dt < 0.0) throw std::invalid_argument("temporal_kernel: dt must be >= 0");
  return std::exp(-eta * dt);
}

double spatial_kernel(double d, double h) {
  if (d < 0.0) throw std::invalid_argument("spatial_kernel: distance must be >= 0");
  return std::exp(-d / (2.0 * h));
}

double spatial_kernel_plane_integral(double h) { return 8.0 * std::numbers::pi * h * h; }

double euclidean_distance(double x0, double y0, double x1, double y1) {
  return std::hypot(x1 - x0, y1 - y0);
}

namespace {
double dot(std::span<const double> w, std::span<const double> x) {
  double s = 0.0;
  for (size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
  return s;
}

int32_t resolve_entry(const HistoryEntry& e, const CategoryAssignment& assignment) {
  if (e.category >= 0) return e.category;
  if (e.latent_ordinal < 0 || static_cast<size_t>(e.latent_ordinal) >= assignment.values.size())
    throw InputError("conditional_intensity: unresolved latent history entry");
  return assignment.at_ordinal(e.latent_ordinal);
}
}  // namespace

double base_intensity(int category, int venue, const VenueFeatureTable& features,
                      const ModelParameters& params) {
  if (venue < 0 || venue >= features.num_venues()) throw InputError("base_intensity: unknown venue");
  const auto& d = features.day[static_cast<size_t>(venue)];
  const auto& h = features.hour[static_cast<size_t>(venue)];
  return std::exp(dot(params.wday(category), d)) + std::exp(dot(params.whour(category), h));
}

double base_intensity_average_venue(int category, const VenueFeatureTable& features,
                                    const ModelParameters& params) {
  return std::exp(dot(params.wday(category), features.avg_day)) +
         std::exp(dot(params.whour(category), features.avg_hour));
}

double conditional_intensity(int category, int venue, int32_t user, double t, double x, double y,
                             const HistoryView& history, const CategoryAssignment& assignment,
                             const VenueFeatureTable& features, const ModelParameters& params) {
  double lam = base_intensity(category, venue, features, params);
  if (history.user != user) return lam;  // I(u_k = u_n) gate
  for (const HistoryEntry& e : history.entries) {
    if (!(e.t < t)) continue;
    const int32_t ck = resolve_entry(e, assignment);
    lam += params.a(category, ck) * temporal_kernel(t - e.t, params.eta) *
           spatial_kernel(euclidean_distance(x, y, e.x, e.y), params.h);
  }
  return lam;
}

double compensator(int category, double t_a, double t_b, const HistoryView& history,
                   const CategoryAssignment& assignment, const VenueFeatureTable& features,
                   const ModelParameters& params, const DomainBounds& domain) {
  if (!(t_a <= t_b)) throw InputError("compensator: t_a must be <= t_b");
  if (t_a == t_b) return 0.0;
  double total = base_intensity_average_venue(category, features, params) * (t_b - t_a) * domain.area();
  const double spatial_mass = spatial_kernel_plane_integral(params.h);
  for (const HistoryEntry& e : history.entries) {
    if (!(e.t < t_b)) continue;
    const int32_t ck = resolve_entry(e, assignment);
    const double lead = std::exp(-params.eta * std::max(0.0, t_a - e.t));
    const double tail = std::exp(-params.eta * (t_b - e.t));
    total += params.a(category, ck) * spatial_mass * (lead - tail) / params.eta;
  }
  return total;
}

}  // namespace sthawkes
