#include "sthawkes/likelihood.hpp"

#include <algorithm>
#include <cmath>

#include "model_cache.hpp"
#include "sthawkes/errors.hpp"

namespace sthawkes {

using detail::GeometryCache;
using detail::KahanSum;
using detail::MuTable;

ParameterGradient ParameterGradient::zeros_like(const ModelParameters& p) {
  ParameterGradient g;
  g.w_day.assign(p.w_day.size(), 0.0);
  g.w_hour.assign(p.w_hour.size(), 0.0);
  g.alpha.assign(p.alpha.size(), 0.0);
  return g;
}

double ParameterGradient::max_abs() const {
  double m = 0.0;
  for (double v : w_day) m = std::max(m, std::abs(v));
  for (double v : w_hour) m = std::max(m, std::abs(v));
  for (double v : alpha) m = std::max(m, std::abs(v));
  return m;
}

double log_prior(const CategoryAssignment& assignment, std::span<const double> prior_p) {
  double s = 0.0;
  for (int32_t z : assignment.values)
    s += std::log(std::max(prior_p[static_cast<size_t>(z)], kIntensityFloor));
  return s;
}

namespace {

// log p(E | z, theta) for one resolved assignment, using cached geometry.
double conditional_loglik(const EventLog& log, const GeometryCache& geom, const MuTable& mu,
                          const ModelParameters& params, std::span<const int32_t> resolved,
                          double* log_events_out, double* log_comp_out) {
  const int k = params.num_categories;
  KahanSum log_events;
  std::vector<double> s(static_cast<size_t>(k));
  for (int32_t n = 0; n < log.num_events(); ++n) {
    std::fill(s.begin(), s.end(), 0.0);
    for (const auto& [kpos, g] : geom.preds[static_cast<size_t>(n)])
      s[static_cast<size_t>(resolved[static_cast<size_t>(kpos)])] += g;
    const int32_t cn = resolved[static_cast<size_t>(n)];
    double lam = mu.mu(log.events[static_cast<size_t>(n)].venue, cn);
    for (int j = 0; j < k; ++j) lam += params.a(cn, j) * s[static_cast<size_t>(j)];
    log_events.add(std::log(std::max(lam, kIntensityFloor)));
  }

  KahanSum comp;
  double mu_sum = 0.0;
  for (int c = 0; c < k; ++c) mu_sum += mu.avg_mu[static_cast<size_t>(c)];
  comp.add(static_cast<double>(log.num_users()) * mu_sum * (geom.t_b - geom.t_a) * log.bounds.area());
  const double spatial_mass = spatial_kernel_plane_integral(params.h);
  for (int32_t n = 0; n < log.num_events(); ++n) {
    const double integral = geom.comp_integral[static_cast<size_t>(n)];
    if (integral == 0.0) continue;
    double colsum = 0.0;
    const int32_t cn = resolved[static_cast<size_t>(n)];
    for (int c = 0; c < k; ++c) colsum += params.a(c, cn);
    comp.add(colsum * spatial_mass * integral);
  }

  if (log_events_out) *log_events_out = log_events.sum;
  if (log_comp_out) *log_comp_out = comp.sum;
  return log_events.sum - comp.sum;
}

double penalty(const ModelParameters& params, const RegularizationWeights& l2) {
  auto sq = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
  };
  return 0.5 * (l2.w_day * sq(params.w_day) + l2.w_hour * sq(params.w_hour) + l2.alpha * sq(params.alpha));
}

}  // namespace

LikelihoodBreakdown log_likelihood(const EventLog& log, const CategoryAssignment& assignment,
                                   const VenueFeatureTable& features, const ModelParameters& params) {
  const GeometryCache geom(log, params);
  const MuTable mu(log, features, params);
  std::vector<int32_t> resolved;
  detail::resolve_all(log, assignment, resolved);
  LikelihoodBreakdown b;
  conditional_loglik(log, geom, mu, params, resolved, &b.log_events, &b.log_compensator);
  b.log_prior = log_prior(assignment, params.prior_p);
  b.total = b.log_events - b.log_compensator + b.log_prior;
  return b;
}

double window_loglik(const EventLog& log, const CategoryAssignment& assignment,
                     const VenueFeatureTable& features, const ModelParameters& params, double t_a,
                     double t_b) {
  if (!(t_a <= t_b)) throw InputError("window_loglik: t_a must be <= t_b");
  const MuTable mu(log, features, params);
  std::vector<int32_t> resolved;
  detail::resolve_all(log, assignment, resolved);
  const int k = params.num_categories;

  KahanSum log_events;
  std::vector<std::vector<int32_t>> by_user(static_cast<size_t>(log.num_users()));
  for (int32_t n = 0; n < log.num_events(); ++n) {
    const CheckinEvent& e = log.events[static_cast<size_t>(n)];
    if (e.t >= t_a && e.t < t_b) {
      const int32_t cn = resolved[static_cast<size_t>(n)];
      double lam = mu.mu(e.venue, cn);
      for (int32_t kpos : by_user[static_cast<size_t>(e.user)]) {
        const CheckinEvent& p = log.events[static_cast<size_t>(kpos)];
        if (!(p.t < e.t)) continue;
        lam += params.a(cn, resolved[static_cast<size_t>(kpos)]) *
               temporal_kernel(e.t - p.t, params.eta) *
               spatial_kernel(euclidean_distance(e.x, e.y, p.x, p.y), params.h);
      }
      log_events.add(std::log(std::max(lam, kIntensityFloor)));
    }
    by_user[static_cast<size_t>(e.user)].push_back(n);
  }

  KahanSum comp;
  double mu_sum = 0.0;
  for (int c = 0; c < k; ++c) mu_sum += mu.avg_mu[static_cast<size_t>(c)];
  comp.add(static_cast<double>(log.num_users()) * mu_sum * (t_b - t_a) * log.bounds.area());
  const double spatial_mass = spatial_kernel_plane_integral(params.h);
  for (int32_t n = 0; n < log.num_events(); ++n) {
    const CheckinEvent& e = log.events[static_cast<size_t>(n)];
    if (!(e.t < t_b)) continue;
    const double integral =
        (std::exp(-params.eta * std::max(0.0, t_a - e.t)) - std::exp(-params.eta * (t_b - e.t))) /
        params.eta;
    double colsum = 0.0;
    for (int c = 0; c < k; ++c) colsum += params.a(c, resolved[static_cast<size_t>(n)]);
    comp.add(colsum * spatial_mass * integral);
  }
  return log_events.sum - comp.sum;
}

std::vector<double> per_sample_log_joint(const EventLog& log,
                                         std::span<const CategoryAssignment> samples,
                                         const VenueFeatureTable& features,
                                         const ModelParameters& params) {
  const GeometryCache geom(log, params);
  const MuTable mu(log, features, params);
  std::vector<int32_t> resolved;
  std::vector<double> out;
  out.reserve(samples.size());
  for (const CategoryAssignment& z : samples) {
    detail::resolve_all(log, z, resolved);
    out.push_back(conditional_loglik(log, geom, mu, params, resolved, nullptr, nullptr) +
                  log_prior(z, params.prior_p));
  }
  return out;
}

double expected_log_joint(const EventLog& log, std::span<const CategoryAssignment> samples,
                          const VenueFeatureTable& features, const ModelParameters& params) {
  if (samples.empty()) throw InputError("expected_log_joint: sample set is empty");
  KahanSum acc;
  for (double v : per_sample_log_joint(log, samples, features, params)) acc.add(v);
  return acc.sum / static_cast<double>(samples.size());
}

double penalized_objective(const EventLog& log, std::span<const CategoryAssignment> samples,
                           const VenueFeatureTable& features, const ModelParameters& params,
                           const RegularizationWeights& l2) {
  return expected_log_joint(log, samples, features, params) - penalty(params, l2);
}

ParameterGradient gradient(const EventLog& log, std::span<const CategoryAssignment> samples,
                           const VenueFeatureTable& features, const ModelParameters& params,
                           const RegularizationWeights& l2) {
  if (samples.empty()) throw InputError("gradient: sample set is empty");
  const GeometryCache geom(log, params);
  const MuTable mu(log, features, params);
  const int k = params.num_categories;
  ParameterGradient g = ParameterGradient::zeros_like(params);

  std::vector<int32_t> resolved;
  std::vector<double> s(static_cast<size_t>(k));
  const double spatial_mass = spatial_kernel_plane_integral(params.h);

  for (const CategoryAssignment& z : samples) {
    detail::resolve_all(log, z, resolved);
    for (int32_t n = 0; n < log.num_events(); ++n) {
      const CheckinEvent& e = log.events[static_cast<size_t>(n)];
      std::fill(s.begin(), s.end(), 0.0);
      for (const auto& [kpos, gv] : geom.preds[static_cast<size_t>(n)])
        s[static_cast<size_t>(resolved[static_cast<size_t>(kpos)])] += gv;
      const int32_t cn = resolved[static_cast<size_t>(n)];
      double lam = mu.mu(e.venue, cn);
      for (int j = 0; j < k; ++j) lam += params.a(cn, j) * s[static_cast<size_t>(j)];
      const double inv = 1.0 / std::max(lam, kIntensityFloor);
      const double dterm = mu.day_term[static_cast<size_t>(e.venue) * k + cn];
      const double hterm = mu.hour_term[static_cast<size_t>(e.venue) * k + cn];
      const auto& xd = features.day[static_cast<size_t>(e.venue)];
      const auto& xh = features.hour[static_cast<size_t>(e.venue)];
      for (int j = 0; j < 7; ++j)
        g.w_day[static_cast<size_t>(cn) * 7 + j] += inv * dterm * xd[static_cast<size_t>(j)];
      for (int j = 0; j < 4; ++j)
        g.w_hour[static_cast<size_t>(cn) * 4 + j] += inv * hterm * xh[static_cast<size_t>(j)];
      for (int j = 0; j < k; ++j)
        g.alpha[static_cast<size_t>(cn) * k + j] += inv * s[static_cast<size_t>(j)];
    }
    // Compensator, excitation part (assignment-dependent through the columns).
    for (int32_t n = 0; n < log.num_events(); ++n) {
      const double integral = geom.comp_integral[static_cast<size_t>(n)];
      if (integral == 0.0) continue;
      const int32_t cn = resolved[static_cast<size_t>(n)];
      for (int c = 0; c < k; ++c) g.alpha[static_cast<size_t>(c) * k + cn] -= spatial_mass * integral;
    }
  }

  const double inv_s = 1.0 / static_cast<double>(samples.size());
  for (auto& v : g.w_day) v *= inv_s;
  for (auto& v : g.w_hour) v *= inv_s;
  for (auto& v : g.alpha) v *= inv_s;

  // Base part of the compensator is the same for every sample.
  const double mtxy = static_cast<double>(log.num_users()) * (geom.t_b - geom.t_a) * log.bounds.area();
  for (int c = 0; c < k; ++c) {
    const double dterm = mu.avg_day_term[static_cast<size_t>(c)];
    const double hterm = mu.avg_hour_term[static_cast<size_t>(c)];
    for (int j = 0; j < 7; ++j)
      g.w_day[static_cast<size_t>(c) * 7 + j] -= mtxy * dterm * features.avg_day[static_cast<size_t>(j)];
    for (int j = 0; j < 4; ++j)
      g.w_hour[static_cast<size_t>(c) * 4 + j] -= mtxy * hterm * features.avg_hour[static_cast<size_t>(j)];
  }

  for (size_t i = 0; i < g.w_day.size(); ++i) g.w_day[i] -= l2.w_day * params.w_day[i];
  for (size_t i = 0; i < g.w_hour.size(); ++i) g.w_hour[i] -= l2.w_hour * params.w_hour[i];
  for (size_t i = 0; i < g.alpha.size(); ++i) g.alpha[i] -= l2.alpha * params.alpha[i];
  return g;
}

}  // namespace sthawkes
