#pragma once

// Build-internal caches shared by the likelihood and EM translation units.
// Not installed; not part of the public surface.

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "sthawkes/errors.hpp"
#include "sthawkes/intensity.hpp"
#include "sthawkes/types.hpp"
#include "sthawkes/venue_features.hpp"

namespace sthawkes::detail {

// Order-insensitive accumulation for the big reductions.
struct KahanSum {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

inline double dot(std::span<const double> w, std::span<const double> x) {
  double s = 0.0;
  for (size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
  return s;
}

// Geometry shared by every likelihood evaluation at fixed (eta, h, window):
// same-user predecessor lists with kernel products, and per-event temporal
// compensator integrals. Categories do not enter here, so one cache serves
// every Gibbs sample and every optimizer trial with unchanged hyperparameters.
struct GeometryCache {
  double eta, h, t_a, t_b;
  // per event: (predecessor position, kernel product g)
  std::vector<std::vector<std::pair<int32_t, double>>> preds;
  // per event: int_{max(t_a,t_k)}^{t_b} exp(-eta (t - t_k)) dt, zero once t_k >= t_b
  std::vector<double> comp_integral;

  GeometryCache(const EventLog& log, const ModelParameters& params) {
    eta = params.eta;
    h = params.h;
    t_a = log.bounds.t_min;
    t_b = log.bounds.t_max;
    const int n = log.num_events();
    preds.resize(static_cast<size_t>(n));
    comp_integral.resize(static_cast<size_t>(n));
    std::vector<std::vector<int32_t>> by_user(static_cast<size_t>(log.num_users()));
    for (int32_t i = 0; i < n; ++i) {
      const CheckinEvent& e = log.events[static_cast<size_t>(i)];
      auto& mine = by_user[static_cast<size_t>(e.user)];
      for (int32_t k : mine) {
        const CheckinEvent& p = log.events[static_cast<size_t>(k)];
        if (!(p.t < e.t)) continue;  // strict: ties do not excite
        const double g = std::exp(-eta * (e.t - p.t)) *
                         std::exp(-euclidean_distance(e.x, e.y, p.x, p.y) / (2.0 * h));
        preds[static_cast<size_t>(i)].emplace_back(k, g);
      }
      mine.push_back(i);
      comp_integral[static_cast<size_t>(i)] =
          e.t < t_b ? (std::exp(-eta * std::max(0.0, t_a - e.t)) - std::exp(-eta * (t_b - e.t))) / eta : 0.0;
    }
  }
};

// Base intensities per venue and category plus the average-venue row.
struct MuTable {
  int k = 0;
  std::vector<double> venue_mu;   // P x K
  std::vector<double> day_term;   // P x K, exp(w_day[c] . x_day_v)
  std::vector<double> hour_term;  // P x K
  std::vector<double> avg_mu, avg_day_term, avg_hour_term;  // K

  MuTable(const EventLog& log, const VenueFeatureTable& features, const ModelParameters& params) {
    k = params.num_categories;
    const int p = log.num_venues();
    venue_mu.resize(static_cast<size_t>(p) * k);
    day_term.resize(static_cast<size_t>(p) * k);
    hour_term.resize(static_cast<size_t>(p) * k);
    avg_mu.resize(static_cast<size_t>(k));
    avg_day_term.resize(static_cast<size_t>(k));
    avg_hour_term.resize(static_cast<size_t>(k));
    for (int v = 0; v < p; ++v) {
      for (int c = 0; c < k; ++c) {
        const double dt = std::exp(dot(params.wday(c), features.day[static_cast<size_t>(v)]));
        const double ht = std::exp(dot(params.whour(c), features.hour[static_cast<size_t>(v)]));
        day_term[static_cast<size_t>(v) * k + c] = dt;
        hour_term[static_cast<size_t>(v) * k + c] = ht;
        venue_mu[static_cast<size_t>(v) * k + c] = dt + ht;
      }
    }
    for (int c = 0; c < k; ++c) {
      avg_day_term[static_cast<size_t>(c)] = std::exp(dot(params.wday(c), features.avg_day));
      avg_hour_term[static_cast<size_t>(c)] = std::exp(dot(params.whour(c), features.avg_hour));
      avg_mu[static_cast<size_t>(c)] =
          avg_day_term[static_cast<size_t>(c)] + avg_hour_term[static_cast<size_t>(c)];
    }
  }

  double mu(int venue, int c) const { return venue_mu[static_cast<size_t>(venue) * k + c]; }
};

inline void resolve_all(const EventLog& log, const CategoryAssignment& assignment,
                        std::vector<int32_t>& out) {
  out.resize(static_cast<size_t>(log.num_events()));
  for (int32_t n = 0; n < log.num_events(); ++n) {
    const auto& c = log.events[static_cast<size_t>(n)].category;
    out[static_cast<size_t>(n)] = c ? *c : -1;
  }
  if (assignment.values.size() != log.latent_index.size())
    throw InputError("assignment does not cover latent_index");
  for (size_t i = 0; i < log.latent_index.size(); ++i)
    out[static_cast<size_t>(log.latent_index[i])] = assignment.values[i];
}

}  // namespace sthawkes::detail
