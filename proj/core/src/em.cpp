#include "sthawkes/em.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "model_cache.hpp"
#include "sthawkes/errors.hpp"

namespace sthawkes {

void GibbsConfig::validate() const {
  if (total_iters <= 0) throw InputError("GibbsConfig: total_iters must be positive");
  if (burn_in < 0 || burn_in >= total_iters) throw InputError("GibbsConfig: burn_in must be < total_iters");
  if (thin < 1) throw InputError("GibbsConfig: thin must be >= 1");
}

CategoryAssignment CategoryPosterior::mode() const {
  CategoryAssignment out;
  out.values.reserve(per_event_histogram.size());
  for (const auto& hist : per_event_histogram) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(hist.size()); ++c)
      if (hist[static_cast<size_t>(c)] > hist[static_cast<size_t>(best)]) best = c;
    out.values.push_back(best);
  }
  return out;
}

std::vector<std::vector<int64_t>> CategoryPosterior::histogram_of(
    const std::vector<CategoryAssignment>& samples, int num_latent, int num_categories) {
  std::vector<std::vector<int64_t>> hist(static_cast<size_t>(num_latent),
                                         std::vector<int64_t>(static_cast<size_t>(num_categories), 0));
  for (const auto& s : samples)
    for (int i = 0; i < num_latent; ++i) ++hist[static_cast<size_t>(i)][static_cast<size_t>(s.values[static_cast<size_t>(i)])];
  return hist;
}

namespace {

// Mutable chain state. Keeps, per event, the per-source-category excitation
// sums S_n[j] = sum over same-user predecessors with category j of the kernel
// product, so a candidate swap touches O(successors) entries instead of
// rebuilding the whole intensity.
class SweepWorkspace {
 public:
  SweepWorkspace(const EventLog& log, const VenueFeatureTable& features, const ModelParameters& params)
      : log_(log),
        params_(params),
        k_(params.num_categories),
        geom_(log, params),
        mu_(log, features, params) {
    const int nz = log.num_latent();
    succs_.resize(static_cast<size_t>(nz));
    for (int32_t m = 0; m < log.num_events(); ++m) {
      for (const auto& [kpos, g] : geom_.preds[static_cast<size_t>(m)]) {
        const int ord = log.latent_ordinal(kpos);
        if (ord >= 0) succs_[static_cast<size_t>(ord)].emplace_back(m, g);
      }
    }
    colsum_.resize(static_cast<size_t>(k_));
    for (int j = 0; j < k_; ++j) {
      double s = 0.0;
      for (int c = 0; c < k_; ++c) s += params.a(c, j);
      colsum_[static_cast<size_t>(j)] = s;
    }
    spatial_mass_ = spatial_kernel_plane_integral(params.h);
  }

  void reset(const CategoryAssignment& state) {
    state_ = state;
    detail::resolve_all(log_, state_, resolved_);
    rebuild_sums();
  }

  const CategoryAssignment& state() const { return state_; }

  // Unnormalized-in-log, then normalized conditional over candidates for the
  // latent event at `ord`.
  std::vector<double> conditional(int ord) const {
    const int32_t pos = log_.latent_index[static_cast<size_t>(ord)];
    const CheckinEvent& ev = log_.events[static_cast<size_t>(pos)];
    std::vector<double> logw(static_cast<size_t>(k_));

    for (int c = 0; c < k_; ++c) {
      double lam = mu_.mu(ev.venue, c);
      for (int j = 0; j < k_; ++j)
        lam += params_.a(c, j) * sums_[static_cast<size_t>(pos) * k_ + j];
      logw[static_cast<size_t>(c)] = std::log(std::max(lam, kIntensityFloor)) +
                                     std::log(std::max(params_.prior_p[static_cast<size_t>(c)], kIntensityFloor));
    }

    const int32_t cur = resolved_[static_cast<size_t>(pos)];
    for (const auto& [m, g] : succs_[static_cast<size_t>(ord)]) {
      const int32_t cm = resolved_[static_cast<size_t>(m)];
      double lam_base = mu_.mu(log_.events[static_cast<size_t>(m)].venue, cm);
      for (int j = 0; j < k_; ++j)
        lam_base += params_.a(cm, j) * sums_[static_cast<size_t>(m) * k_ + j];
      lam_base -= params_.a(cm, cur) * g;  // remove this latent event's term
      for (int c = 0; c < k_; ++c)
        logw[static_cast<size_t>(c)] +=
            std::log(std::max(lam_base + params_.a(cm, c) * g, kIntensityFloor));
    }

    const double integral = geom_.comp_integral[static_cast<size_t>(pos)];
    for (int c = 0; c < k_; ++c)
      logw[static_cast<size_t>(c)] -= spatial_mass_ * integral * colsum_[static_cast<size_t>(c)];

    double mx = logw[0];
    for (double v : logw) mx = std::max(mx, v);
    double total = 0.0;
    std::vector<double> probs(static_cast<size_t>(k_));
    for (int c = 0; c < k_; ++c) {
      probs[static_cast<size_t>(c)] = std::exp(logw[static_cast<size_t>(c)] - mx);
      total += probs[static_cast<size_t>(c)];
    }
    for (auto& p : probs) p /= total;
    return probs;
  }

  void assign(int ord, int32_t category) {
    const int32_t pos = log_.latent_index[static_cast<size_t>(ord)];
    const int32_t old = resolved_[static_cast<size_t>(pos)];
    if (old == category) return;
    for (const auto& [m, g] : succs_[static_cast<size_t>(ord)]) {
      sums_[static_cast<size_t>(m) * k_ + old] -= g;
      sums_[static_cast<size_t>(m) * k_ + category] += g;
    }
    resolved_[static_cast<size_t>(pos)] = category;
    state_.values[static_cast<size_t>(ord)] = category;
  }

  void sweep(Rng& rng) {
    for (int ord = 0; ord < log_.num_latent(); ++ord) {
      const std::vector<double> probs = conditional(ord);
      assign(ord, rng.categorical(probs));
    }
  }

  // Incremental +=/-= drift repair on long chains.
  void rebuild_sums() {
    sums_.assign(static_cast<size_t>(log_.num_events()) * k_, 0.0);
    for (int32_t n = 0; n < log_.num_events(); ++n)
      for (const auto& [kpos, g] : geom_.preds[static_cast<size_t>(n)])
        sums_[static_cast<size_t>(n) * k_ + resolved_[static_cast<size_t>(kpos)]] += g;
  }

 private:
  const EventLog& log_;
  const ModelParameters& params_;
  int k_;
  detail::GeometryCache geom_;
  detail::MuTable mu_;
  std::vector<std::vector<std::pair<int32_t, double>>> succs_;  // per latent ordinal
  std::vector<double> colsum_;
  double spatial_mass_ = 0.0;
  CategoryAssignment state_;
  std::vector<int32_t> resolved_;
  std::vector<double> sums_;  // N x K
};

CategoryAssignment initial_assignment(const EventLog& log, const GibbsConfig& cfg, Rng& rng) {
  CategoryAssignment z;
  z.values.resize(static_cast<size_t>(log.num_latent()));
  if (cfg.init == GibbsConfig::Init::kMostFrequent) {
    std::vector<int64_t> counts(static_cast<size_t>(log.num_categories()), 0);
    for (const auto& e : log.events)
      if (e.category) ++counts[static_cast<size_t>(*e.category)];
    int best = 0;
    for (int c = 1; c < log.num_categories(); ++c)
      if (counts[static_cast<size_t>(c)] > counts[static_cast<size_t>(best)]) best = c;
    std::fill(z.values.begin(), z.values.end(), best);
  } else {
    for (auto& v : z.values) v = static_cast<int32_t>(rng.below(static_cast<uint64_t>(log.num_categories())));
  }
  return z;
}

}  // namespace

std::vector<double> gibbs_conditional(int32_t event_pos, const CategoryAssignment& current,
                                      const EventLog& log, const VenueFeatureTable& features,
                                      const ModelParameters& params) {
  const int ord = log.latent_ordinal(event_pos);
  if (ord < 0) throw InputError("gibbs_conditional: event " + std::to_string(event_pos) + " is not latent");
  SweepWorkspace ws(log, features, params);
  ws.reset(current);
  return ws.conditional(ord);
}

CategoryAssignment gibbs_sweep(CategoryAssignment state, const EventLog& log,
                               const VenueFeatureTable& features, const ModelParameters& params,
                               Rng& rng) {
  if (state.values.size() != log.latent_index.size())
    throw InputError("gibbs_sweep: state does not cover latent_index");
  if (log.num_latent() == 0) return state;
  SweepWorkspace ws(log, features, params);
  ws.reset(state);
  ws.sweep(rng);
  return ws.state();
}

CategoryPosterior e_step(const EventLog& log, const VenueFeatureTable& features,
                         const ModelParameters& params, std::optional<CategoryAssignment> init,
                         const GibbsConfig& cfg) {
  cfg.validate();
  CategoryPosterior posterior;
  const int nz = log.num_latent();
  posterior.per_event_histogram.assign(static_cast<size_t>(nz),
                                       std::vector<int64_t>(static_cast<size_t>(log.num_categories()), 0));
  if (nz == 0) return posterior;  // E-step is a no-op; posterior stays empty

  Rng rng(cfg.seed);
  CategoryAssignment z = init ? std::move(*init) : initial_assignment(log, cfg, rng);
  if (z.values.size() != log.latent_index.size())
    throw InputError("e_step: init does not cover latent_index");

  SweepWorkspace ws(log, features, params);
  ws.reset(z);
  for (int iter = 1; iter <= cfg.total_iters; ++iter) {
    ws.sweep(rng);
    if ((iter & 127) == 0) ws.rebuild_sums();
    if (iter > cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
      posterior.samples.push_back(ws.state());
      for (int i = 0; i < nz; ++i)
        ++posterior.per_event_histogram[static_cast<size_t>(i)]
                                       [static_cast<size_t>(ws.state().values[static_cast<size_t>(i)])];
    }
  }
  return posterior;
}

namespace {

void report_nonfinite(const ModelParameters& p, const std::string& where) {
  auto bad = [](std::span<const double> v) {
    for (double x : v)
      if (!std::isfinite(x)) return true;
    return false;
  };
  std::string group;
  if (bad(p.w_day)) group = "w_day";
  else if (bad(p.w_hour)) group = "w_hour";
  else if (bad(p.alpha)) group = "alpha";
  else group = "objective";
  throw NumericalError(where + ": non-finite " + group);
}

}  // namespace

ModelParameters m_step(const EventLog& log, const VenueFeatureTable& features,
                       const CategoryPosterior& posterior, const ModelParameters& init,
                       const MStepConfig& cfg) {
  // With no latent events the expectation collapses to the single empty
  // assignment and the M-step is a plain penalized MLE step.
  std::vector<CategoryAssignment> fallback{CategoryAssignment{}};
  std::span<const CategoryAssignment> samples =
      posterior.samples.empty() ? std::span<const CategoryAssignment>(fallback) : std::span<const CategoryAssignment>(posterior.samples);
  if (posterior.samples.empty() && log.num_latent() > 0)
    throw InputError("m_step: posterior is empty but the log has latent events");

  ModelParameters params = init;
  double obj = penalized_objective(log, samples, features, params, cfg.l2);
  if (!std::isfinite(obj)) report_nonfinite(params, "m_step");

  for (int step = 0; step < cfg.max_steps; ++step) {
    const ParameterGradient grad = gradient(log, samples, features, params, cfg.l2);
    if (grad.max_abs() < cfg.gradient_tolerance) break;

    double lr = cfg.learning_rate;
    bool accepted = false;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
      ModelParameters cand = params;
      for (size_t i = 0; i < cand.w_day.size(); ++i) cand.w_day[i] += lr * grad.w_day[i];
      for (size_t i = 0; i < cand.w_hour.size(); ++i) cand.w_hour[i] += lr * grad.w_hour[i];
      for (size_t i = 0; i < cand.alpha.size(); ++i)
        cand.alpha[i] = std::max(0.0, cand.alpha[i] + lr * grad.alpha[i]);
      const double cand_obj = penalized_objective(log, samples, features, cand, cfg.l2);
      if (std::isfinite(cand_obj) && cand_obj > obj) {
        params = std::move(cand);
        obj = cand_obj;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) break;  // no ascent direction left at this scale
  }
  if (!std::isfinite(obj)) report_nonfinite(params, "m_step");
  return params;
}

EmResult run_em(const EventLog& log, const VenueFeatureTable& features, const EmConfig& cfg,
                const ModelParameters& init) {
  EmResult result;
  result.params = init;
  result.params.validate();

  GibbsConfig gibbs = cfg.gibbs;
  if (cfg.max_em_iters == 0) {
    result.posterior = e_step(log, features, result.params, std::nullopt, gibbs);
    return result;
  }

  std::vector<CategoryAssignment> fallback{CategoryAssignment{}};
  std::vector<double> moving;
  for (int iter = 1; iter <= cfg.max_em_iters; ++iter) {
    gibbs.seed = iter == 1 ? cfg.gibbs.seed : splitmix64(cfg.gibbs.seed + static_cast<uint64_t>(iter - 1));
    std::optional<CategoryAssignment> warm;
    if (!result.posterior.samples.empty()) warm = result.posterior.samples.back();
    result.posterior = e_step(log, features, result.params, warm, gibbs);

    result.params = m_step(log, features, result.posterior, result.params, cfg.m_step);

    std::span<const CategoryAssignment> samples =
        result.posterior.samples.empty() ? std::span<const CategoryAssignment>(fallback)
                                         : std::span<const CategoryAssignment>(result.posterior.samples);
    const std::vector<double> values = per_sample_log_joint(log, samples, features, result.params);
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double se = values.size() > 1
                          ? std::sqrt(var / (static_cast<double>(values.size()) - 1.0) /
                                      static_cast<double>(values.size()))
                          : 0.0;
    const double obj = penalized_objective(log, samples, features, result.params, cfg.m_step.l2);
    result.trace.push_back({iter, obj, se});

    // Convergence on a 3-iteration moving average; single-iteration noise from
    // the Monte-Carlo E-step must not trigger an exit.
    moving.push_back(obj);
    if (moving.size() >= 4) {
      auto avg3 = [&](size_t end) {
        return (moving[end - 1] + moving[end - 2] + moving[end - 3]) / 3.0;
      };
      const double cur = avg3(moving.size());
      const double prev = avg3(moving.size() - 1);
      if (std::abs(cur - prev) / std::max(1.0, std::abs(cur)) < cfg.rel_tol) {
        result.converged = true;
        break;
      }
    }
  }
  return result;
}

}  // namespace sthawkes
