#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sthawkes {

// Observation window and spatial extent. The temporal bounds are the window
// the likelihood integrates over, which may extend past the last event; the
// spatial bounds are the data extent.
struct DomainBounds {
  double t_min = 0.0, t_max = 0.0;
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;

  double duration() const { return t_max - t_min; }
  double area() const { return (x_max - x_min) * (y_max - y_min); }
};

// One check-in. Time is in hours since the dataset epoch; coordinates are
// latitude/longitude degrees taken from the venue record.
struct CheckinEvent {
  int32_t user = -1;
  int32_t venue = -1;
  double t = 0.0;
  double x = 0.0;  // latitude
  double y = 0.0;  // longitude
  std::optional<int32_t> category;
};

struct VenueInfo {
  std::string id;
  double x = 0.0;
  double y = 0.0;
};

// Time-ordered event collection with observed/latent category partition.
// Immutable after construction; safe for shared read access.
struct EventLog {
  std::vector<CheckinEvent> events;       // sorted by t, stable on ties
  std::vector<std::string> categories;    // vocabulary, index order is binding
  std::vector<std::string> users;
  std::vector<VenueInfo> venues;
  std::vector<int32_t> latent_index;      // ascending positions with absent category
  DomainBounds bounds;
  // Hours from the Monday-00:00 week origin to the dataset epoch. Zero for
  // float-hour inputs; derived from the civil date for ISO timestamps.
  double week_offset_hours = 0.0;

  int num_categories() const { return static_cast<int>(categories.size()); }
  int num_users() const { return static_cast<int>(users.size()); }
  int num_venues() const { return static_cast<int>(venues.size()); }
  int num_events() const { return static_cast<int>(events.size()); }
  int num_latent() const { return static_cast<int>(latent_index.size()); }

  bool is_latent(int32_t pos) const { return !events[pos].category.has_value(); }

  // Index of an event position within latent_index, or -1 if observed.
  int latent_ordinal(int32_t pos) const;

  // Checks the structural invariants; throws InputError on violation.
  void validate() const;
};

// Category values for the latent events, aligned with EventLog.latent_index.
struct CategoryAssignment {
  std::vector<int32_t> values;

  bool empty() const { return values.empty(); }
  int32_t at_ordinal(int ord) const { return values[static_cast<size_t>(ord)]; }
};

// Category of an event, resolving latent slots through the assignment.
int32_t resolved_category(const EventLog& log, const CategoryAssignment& assignment, int32_t pos);

}  // namespace sthawkes
