#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sthawkes/types.hpp"

namespace sthawkes {

// Per-venue check-in timing profiles feeding the category base intensities:
// a day-of-week distribution and a coarse hour-of-day distribution with bins
// [0,6), [6,12), [12,18), [18,24). Venues with no check-ins get zero vectors.
struct VenueFeatureTable {
  std::vector<std::array<double, 7>> day;
  std::vector<std::array<double, 4>> hour;
  // Mean feature vector over all venues; the compensator evaluates its base
  // term at this synthetic "average venue".
  std::array<double, 7> avg_day{};
  std::array<double, 4> avg_hour{};

  int num_venues() const { return static_cast<int>(day.size()); }
};

// Counts check-ins per weekday and hour bin for every venue and normalizes to
// distributions. Categories play no role. week_anchor overrides the weekday of
// the dataset epoch (0 = Monday); by default the log's own week offset is used.
VenueFeatureTable build_features(const EventLog& log, std::optional<int> week_anchor = std::nullopt);

// `venue_id,d0..d6,h0..h3` dump for inspection.
void write_features_csv(const VenueFeatureTable& table, const EventLog& log, std::ostream& out);

}  // namespace sthawkes
