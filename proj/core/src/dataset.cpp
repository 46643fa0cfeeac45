#include "sthawkes/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "sthawkes/errors.hpp"
#include "sthawkes/rng.hpp"

namespace sthawkes {
namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

// Howard Hinnant's days-from-civil algorithm (proleptic Gregorian).
int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u + static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

struct RawRow {
  int32_t user, venue;
  double t, x, y;
  int32_t category;  // -1 for latent
  int32_t order;     // input order, for stable ties
};

}  // namespace

std::optional<ParsedTimestamp> parse_timestamp(const std::string& text) {
  if (text.empty()) return std::nullopt;
  // ISO-8601 first: YYYY-MM-DD with a T or space separator.
  if (text.size() >= 10 && text[4] == '-' && text[7] == '-') {
    int y, mo, d, hh = 0, mi = 0;
    double ss = 0.0;
    char sep = 0;
    int n = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%lf", &y, &mo, &d, &sep, &hh, &mi, &ss);
    if (n < 3) return std::nullopt;
    if (n >= 4 && sep != 'T' && sep != ' ') return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || hh < 0 || hh > 23 || mi < 0 || mi > 59 || ss < 0.0 || ss >= 61.0)
      return std::nullopt;
    const double hours = static_cast<double>(days_from_civil(y, mo, d)) * 24.0 + hh + mi / 60.0 + ss / 3600.0;
    return ParsedTimestamp{hours, true};
  }
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) return std::nullopt;
  return ParsedTimestamp{v, false};
}

EventLog ingest_csv(std::istream& in, const std::vector<std::string>* category_vocab, IngestReport* report) {
  std::string line;
  if (!std::getline(in, line)) {
    // Empty stream: header is also absent; treat as the empty log.
    EventLog log;
    return log;
  }
  {
    auto header = split_csv_row(line);
    const std::vector<std::string> expected = {"user_id", "venue_id", "timestamp", "lat", "lon", "category"};
    if (header != expected) throw InputError("unexpected CSV header; want user_id,venue_id,timestamp,lat,lon,category");
  }

  EventLog log;
  std::unordered_map<std::string, int32_t> user_ix, venue_ix, cat_ix;
  if (category_vocab != nullptr) {
    for (const auto& name : *category_vocab) {
      cat_ix.emplace(name, static_cast<int32_t>(log.categories.size()));
      log.categories.push_back(name);
    }
  }

  std::vector<RawRow> rows;
  bool any_iso = false, any_float = false;
  int64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_row(line);
    if (f.size() != 6) throw InputError("line " + std::to_string(lineno) + ": expected 6 fields, got " + std::to_string(f.size()));
    auto ts = parse_timestamp(f[2]);
    if (!ts) throw InputError("line " + std::to_string(lineno) + ": unparseable timestamp '" + f[2] + "'");
    (ts->iso ? any_iso : any_float) = true;
    char* end = nullptr;
    const double lat = std::strtod(f[3].c_str(), &end);
    if (end == f[3].c_str() || *end != '\0') throw InputError("line " + std::to_string(lineno) + ": bad latitude");
    const double lon = std::strtod(f[4].c_str(), &end);
    if (end == f[4].c_str() || *end != '\0') throw InputError("line " + std::to_string(lineno) + ": bad longitude");
    if (lat < -90.0 || lat > 90.0) throw InputError("line " + std::to_string(lineno) + ": latitude out of [-90,90]");
    if (lon < -180.0 || lon > 180.0) throw InputError("line " + std::to_string(lineno) + ": longitude out of [-180,180]");

    RawRow r;
    r.order = static_cast<int32_t>(rows.size());
    r.t = ts->hours;

    auto uit = user_ix.find(f[0]);
    if (uit == user_ix.end()) {
      uit = user_ix.emplace(f[0], static_cast<int32_t>(log.users.size())).first;
      log.users.push_back(f[0]);
    }
    r.user = uit->second;

    auto vit = venue_ix.find(f[1]);
    if (vit == venue_ix.end()) {
      vit = venue_ix.emplace(f[1], static_cast<int32_t>(log.venues.size())).first;
      log.venues.push_back(VenueInfo{f[1], lat, lon});
    } else {
      const VenueInfo& v = log.venues[static_cast<size_t>(vit->second)];
      if ((v.x != lat || v.y != lon) && report != nullptr) {
        report->warnings.push_back("line " + std::to_string(lineno) + ": venue '" + f[1] +
                                   "' coordinates disagree with first occurrence; keeping first");
      }
    }
    r.venue = vit->second;
    // The venue record is the coordinate authority.
    r.x = log.venues[static_cast<size_t>(r.venue)].x;
    r.y = log.venues[static_cast<size_t>(r.venue)].y;

    if (f[5].empty()) {
      r.category = -1;
    } else {
      auto cit = cat_ix.find(f[5]);
      if (cit == cat_ix.end()) {
        if (category_vocab != nullptr)
          throw InputError("line " + std::to_string(lineno) + ": category '" + f[5] + "' not in vocabulary sidecar");
        cit = cat_ix.emplace(f[5], static_cast<int32_t>(log.categories.size())).first;
        log.categories.push_back(f[5]);
      }
      r.category = cit->second;
    }
    rows.push_back(r);
  }

  if (any_iso && any_float) throw InputError("mixed ISO-8601 and float-hour timestamps in one dataset");
  if (rows.empty()) return log;

  std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) { return a.t < b.t; });

  const double epoch = rows.front().t;
  if (any_iso) {
    // Rebase onto the earliest event, remembering where the epoch falls in a
    // Monday-anchored week (0 = Monday; 1970-01-01 was a Thursday).
    const double days = std::floor(epoch / 24.0);
    const int64_t day_count = static_cast<int64_t>(days);
    const int weekday = static_cast<int>(((day_count % 7) + 7 + 3) % 7);
    log.week_offset_hours = weekday * 24.0 + (epoch - days * 24.0);
    for (auto& r : rows) r.t -= epoch;
  } else {
    for (const auto& r : rows)
      if (r.t < 0.0) throw InputError("float-hour timestamps must be non-negative");
  }

  log.events.reserve(rows.size());
  for (int32_t n = 0; n < static_cast<int32_t>(rows.size()); ++n) {
    const RawRow& r = rows[static_cast<size_t>(n)];
    CheckinEvent e;
    e.user = r.user;
    e.venue = r.venue;
    e.t = r.t;
    e.x = r.x;
    e.y = r.y;
    if (r.category >= 0) e.category = r.category;
    else log.latent_index.push_back(n);
    log.events.push_back(e);
  }

  DomainBounds b;
  b.t_min = log.events.front().t;
  b.t_max = log.events.back().t;
  b.x_min = b.x_max = log.events.front().x;
  b.y_min = b.y_max = log.events.front().y;
  for (const auto& e : log.events) {
    b.x_min = std::min(b.x_min, e.x);
    b.x_max = std::max(b.x_max, e.x);
    b.y_min = std::min(b.y_min, e.y);
    b.y_max = std::max(b.y_max, e.y);
  }
  log.bounds = b;
  return log;
}

EventLog ingest_csv_file(const std::filesystem::path& path, IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset file: " + path.string());
  std::vector<std::string> vocab;
  const std::filesystem::path sidecar = path.string() + ".vocab.json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream vin(sidecar);
    nlohmann::json j;
    try {
      vin >> j;
      vocab = j.at("categories").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError("bad vocabulary sidecar " + sidecar.string() + ": " + e.what());
    }
    return ingest_csv(in, &vocab, report);
  }
  return ingest_csv(in, nullptr, report);
}

void write_dataset_csv(const EventLog& log, std::ostream& out) {
  out << "user_id,venue_id,timestamp,lat,lon,category\n";
  char buf[96];
  for (const auto& e : log.events) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", e.t, e.x, e.y);
    out << log.users[static_cast<size_t>(e.user)] << ',' << log.venues[static_cast<size_t>(e.venue)].id << ','
        << buf << ',' << (e.category ? log.categories[static_cast<size_t>(*e.category)] : std::string()) << '\n';
  }
}

namespace {
void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}
}  // namespace

void write_dataset_files(const EventLog& log, const std::filesystem::path& path) {
  std::ostringstream csv;
  write_dataset_csv(log, csv);
  atomic_write_text(path, csv.str());
  nlohmann::json j;
  j["categories"] = log.categories;
  atomic_write_text(path.string() + ".vocab.json", j.dump(2) + "\n");
}

std::pair<EventLog, EventLog> temporal_split(const EventLog& log, double train_weeks, double test_weeks) {
  if (train_weeks < 0 || test_weeks < 0) throw InputError("temporal_split: negative week count");
  const double span = (train_weeks + test_weeks) * kHoursPerWeek;
  if (span > log.bounds.duration() + 1e-9)
    throw InputError("temporal_split: requested window exceeds data extent");
  const double boundary = log.bounds.t_min + train_weeks * kHoursPerWeek;
  const double window_end = log.bounds.t_min + span;

  EventLog train, test;
  train.categories = test.categories = log.categories;
  train.users = test.users = log.users;
  train.venues = test.venues = log.venues;
  train.week_offset_hours = test.week_offset_hours = log.week_offset_hours;
  train.bounds = test.bounds = log.bounds;
  train.bounds.t_min = log.bounds.t_min;
  train.bounds.t_max = boundary;
  test.bounds.t_min = boundary;
  test.bounds.t_max = window_end;

  for (int32_t n = 0; n < log.num_events(); ++n) {
    const CheckinEvent& e = log.events[static_cast<size_t>(n)];
    if (e.t < boundary) {
      if (!e.category) train.latent_index.push_back(static_cast<int32_t>(train.events.size()));
      train.events.push_back(e);
    } else if (e.t <= window_end) {
      if (!e.category) test.latent_index.push_back(static_cast<int32_t>(test.events.size()));
      test.events.push_back(e);
    }
  }
  return {std::move(train), std::move(test)};
}

std::pair<EventLog, CategoryAssignment> inject_missingness(const EventLog& log, double fraction, uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("inject_missingness: fraction must be in (0,1)");
  if (!log.latent_index.empty()) throw InputError("inject_missingness: log already has latent events");
  const int n = log.num_events();
  const int n_mask = static_cast<int>(std::lround(fraction * n));

  // Partial Fisher-Yates over positions: the first n_mask entries are a
  // uniform sample without replacement.
  std::vector<int32_t> positions(static_cast<size_t>(n));
  std::iota(positions.begin(), positions.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < n_mask; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<uint64_t>(n - i)));
    std::swap(positions[static_cast<size_t>(i)], positions[static_cast<size_t>(j)]);
  }
  std::vector<int32_t> masked(positions.begin(), positions.begin() + n_mask);
  std::sort(masked.begin(), masked.end());

  EventLog out = log;
  CategoryAssignment truth;
  truth.values.reserve(masked.size());
  for (int32_t pos : masked) {
    truth.values.push_back(*out.events[static_cast<size_t>(pos)].category);
    out.events[static_cast<size_t>(pos)].category.reset();
  }
  out.latent_index = std::move(masked);
  return {std::move(out), std::move(truth)};
}

EventLog apply_assignment(const EventLog& log, const CategoryAssignment& assignment) {
  if (assignment.values.size() != log.latent_index.size())
    throw InputError("apply_assignment: assignment size does not match latent_index");
  EventLog out = log;
  for (size_t i = 0; i < out.latent_index.size(); ++i) {
    const int32_t c = assignment.values[i];
    if (c < 0 || c >= out.num_categories()) throw InputError("apply_assignment: category index out of range");
    out.events[static_cast<size_t>(out.latent_index[i])].category = c;
  }
  out.latent_index.clear();
  return out;
}

EventLog remove_latent_events(const EventLog& log) {
  EventLog out;
  out.categories = log.categories;
  out.users = log.users;
  out.venues = log.venues;
  out.bounds = log.bounds;
  out.week_offset_hours = log.week_offset_hours;
  for (const auto& e : log.events)
    if (e.category) out.events.push_back(e);
  return out;
}

}  // namespace sthawkes
