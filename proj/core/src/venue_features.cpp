#include "sthawkes/venue_features.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "sthawkes/errors.hpp"

namespace sthawkes {

VenueFeatureTable build_features(const EventLog& log, std::optional<int> week_anchor) {
  double offset = log.week_offset_hours;
  if (week_anchor.has_value()) {
    if (*week_anchor < 0 || *week_anchor > 6) throw InputError("build_features: week_anchor must be in [0,6]");
    offset = *week_anchor * 24.0;
  }

  VenueFeatureTable table;
  table.day.assign(static_cast<size_t>(log.num_venues()), {});
  table.hour.assign(static_cast<size_t>(log.num_venues()), {});

  for (const auto& e : log.events) {
    const double pos = offset + e.t;  // hours into a Monday-anchored week line
    const int day = static_cast<int>(std::fmod(std::floor(pos / 24.0), 7.0));
    const double hour_of_day = pos - std::floor(pos / 24.0) * 24.0;
    int bin = static_cast<int>(hour_of_day / 6.0);
    if (bin > 3) bin = 3;  // hour_of_day == 24 after float round-off
    table.day[static_cast<size_t>(e.venue)][static_cast<size_t>(day)] += 1.0;
    table.hour[static_cast<size_t>(e.venue)][static_cast<size_t>(bin)] += 1.0;
  }

  for (size_t v = 0; v < table.day.size(); ++v) {
    double total = 0.0;
    for (double c : table.day[v]) total += c;
    if (total > 0.0) {
      for (auto& c : table.day[v]) c /= total;
      for (auto& c : table.hour[v]) c /= total;
    }
  }

  if (!table.day.empty()) {
    for (const auto& d : table.day)
      for (size_t j = 0; j < 7; ++j) table.avg_day[j] += d[j];
    for (const auto& h : table.hour)
      for (size_t j = 0; j < 4; ++j) table.avg_hour[j] += h[j];
    for (auto& x : table.avg_day) x /= static_cast<double>(table.day.size());
    for (auto& x : table.avg_hour) x /= static_cast<double>(table.hour.size());
  }
  return table;
}

void write_features_csv(const VenueFeatureTable& table, const EventLog& log, std::ostream& out) {
  out << "venue_id,d0,d1,d2,d3,d4,d5,d6,h0,h1,h2,h3\n";
  char buf[32];
  for (int v = 0; v < table.num_venues(); ++v) {
    out << log.venues[static_cast<size_t>(v)].id;
    for (double x : table.day[static_cast<size_t>(v)]) {
      std::snprintf(buf, sizeof(buf), ",%.17g", x);
      out << buf;
    }
    for (double x : table.hour[static_cast<size_t>(v)]) {
      std::snprintf(buf, sizeof(buf), ",%.17g", x);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace sthawkes
