#include "sthawkes/types.hpp"

#include <algorithm>
#include <cmath>

#include "sthawkes/errors.hpp"

namespace sthawkes {

int EventLog::latent_ordinal(int32_t pos) const {
  auto it = std::lower_bound(latent_index.begin(), latent_index.end(), pos);
  if (it == latent_index.end() || *it != pos) return -1;
  return static_cast<int>(it - latent_index.begin());
}

void EventLog::validate() const {
  const int k = num_categories();
  double prev_t = -std::numeric_limits<double>::infinity();
  std::vector<int32_t> latent;
  for (int32_t n = 0; n < num_events(); ++n) {
    const CheckinEvent& e = events[static_cast<size_t>(n)];
    if (!std::isfinite(e.t) || e.t < 0.0)
      throw InputError("event " + std::to_string(n) + ": timestamp must be finite and non-negative");
    if (e.t < prev_t) throw InputError("events are not sorted by timestamp");
    prev_t = e.t;
    if (e.x < -90.0 || e.x > 90.0) throw InputError("event " + std::to_string(n) + ": latitude out of range");
    if (e.y < -180.0 || e.y > 180.0) throw InputError("event " + std::to_string(n) + ": longitude out of range");
    if (e.user < 0 || e.user >= num_users()) throw InputError("event " + std::to_string(n) + ": unknown user");
    if (e.venue < 0 || e.venue >= num_venues()) throw InputError("event " + std::to_string(n) + ": unknown venue");
    if (e.category.has_value()) {
      if (*e.category < 0 || *e.category >= k)
        throw InputError("event " + std::to_string(n) + ": category index out of range");
    } else {
      latent.push_back(n);
    }
    if (e.t < bounds.t_min || e.t > bounds.t_max || e.x < bounds.x_min || e.x > bounds.x_max ||
        e.y < bounds.y_min || e.y > bounds.y_max)
      throw InputError("event " + std::to_string(n) + ": outside domain bounds");
  }
  if (latent != latent_index) throw InputError("latent_index does not match events with absent category");
}

int32_t resolved_category(const EventLog& log, const CategoryAssignment& assignment, int32_t pos) {
  const auto& cat = log.events[static_cast<size_t>(pos)].category;
  if (cat.has_value()) return *cat;
  const int ord = log.latent_ordinal(pos);
  if (ord < 0 || static_cast<size_t>(ord) >= assignment.values.size())
    throw InputError("unresolved latent event at position " + std::to_string(pos));
  return assignment.at_ordinal(ord);
}

}  // namespace sthawkes
