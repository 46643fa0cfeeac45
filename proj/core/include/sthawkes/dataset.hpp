#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sthawkes/types.hpp"

namespace sthawkes {

inline constexpr double kHoursPerWeek = 168.0;

struct IngestReport {
  std::vector<std::string> warnings;
};

// CSV schema: header `user_id,venue_id,timestamp,lat,lon,category`.
// Timestamps are either float hours or ISO-8601; an empty category field marks
// a latent event. Vocabularies are built in first-appearance (row) order, then
// events are stable-sorted by time. A venue's first-seen coordinates win;
// later rows that disagree produce a warning.
EventLog ingest_csv(std::istream& in, const std::vector<std::string>* category_vocab = nullptr,
                    IngestReport* report = nullptr);

// Reads `path`, honouring a `<path>.vocab.json` sidecar (category order) when present.
EventLog ingest_csv_file(const std::filesystem::path& path, IngestReport* report = nullptr);

void write_dataset_csv(const EventLog& log, std::ostream& out);

// CSV plus the vocabulary sidecar, both written atomically.
void write_dataset_files(const EventLog& log, const std::filesystem::path& path);

// Parses a timestamp as either float hours or ISO-8601
// (YYYY-MM-DD[T ]HH:MM[:SS[.frac]][Z]). ISO values are absolute hours since the
// civil epoch and get re-based onto the dataset epoch by ingest.
struct ParsedTimestamp {
  double hours = 0.0;
  bool iso = false;
};
std::optional<ParsedTimestamp> parse_timestamp(const std::string& text);

// Splits at T_min + train_weeks*168h. The train log keeps [T_min, boundary),
// the test log [boundary, T_min + (train+test)*168h]; events past the window
// end are dropped. Both halves inherit the full vocabularies.
std::pair<EventLog, EventLog> temporal_split(const EventLog& log, double train_weeks, double test_weeks);

// Removes the category of round(fraction*N) uniformly chosen events and
// returns the masked log together with the ground-truth assignment for the
// masked positions. Deterministic under seed. The log must not already
// contain latent events.
std::pair<EventLog, CategoryAssignment> inject_missingness(const EventLog& log, double fraction,
                                                           uint64_t seed);

// Fills every latent event with its assigned category; inverse of masking.
EventLog apply_assignment(const EventLog& log, const CategoryAssignment& assignment);

// Drops all latent events (drop-missing baseline). Vocabularies and bounds kept.
EventLog remove_latent_events(const EventLog& log);

}  // namespace sthawkes
