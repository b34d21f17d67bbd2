#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "shelfwise/time.hpp"

namespace shelfwise {

using ObjectId = std::string;

// One transaction. `objects` is kept sorted and duplicate-free so it behaves
// as a set; `attributes` holds every non-mandatory column verbatim.
struct Event {
  std::string id;
  std::vector<ObjectId> objects;
  std::int64_t quantity = 1;
  std::map<std::string, std::string> attributes;
  Timestamp timestamp{};

  bool has_object(std::string_view object) const;

  friend bool operator==(const Event&, const Event&) = default;
};

// Immutable object-centric event log. Construction validates that ids are
// unique, every event references at least one object and quantity >= 1.
// Events keep their source order.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::vector<Event> events);

  const std::vector<Event>& events() const noexcept { return events_; }
  const std::set<ObjectId>& objects() const noexcept { return objects_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  bool contains_object(const ObjectId& object) const { return objects_.count(object) != 0; }

  friend bool operator==(const EventLog& a, const EventLog& b) { return a.events_ == b.events_; }

 private:
  std::vector<Event> events_;
  std::set<ObjectId> objects_;
};

// Events of a single product ordered by timestamp; ties keep source order.
struct ProductSublog {
  ObjectId product;
  std::vector<Event> events;

  friend bool operator==(const ProductSublog&, const ProductSublog&) = default;
};

enum class InputFormat { Auto, Csv, JsonLines };

struct IngestionConfig {
  // Every listed column contributes one object per row (empty cells are
  // ignored). The first one is normally the product column.
  std::vector<std::string> object_columns{"product_id"};
  std::string quantity_column = "quantity";
  std::string timestamp_column = "timestamp";
  // Optional explicit event-id column; ids are "e<row>" otherwise.
  std::optional<std::string> id_column;
  // Extra columns copied into Event::attributes. When empty, every column not
  // otherwise mapped is copied.
  std::vector<std::string> attribute_columns;
  bool copy_unmapped_columns = true;
  std::string timestamp_format = "%Y-%m-%d %H:%M:%S";
  TimeUnit unit = TimeUnit::Hours;
  bool strict = true;
  InputFormat format = InputFormat::Auto;

  // Throws InvalidArgument when mapped columns collide.
  void validate() const;
};

struct RowIssue {
  std::size_t line;
  std::string reason;
};

struct ParseResult {
  EventLog log;
  std::size_t skipped = 0;
  std::vector<RowIssue> issues;  // one per skipped row (lenient mode)
};

ParseResult parse_log(std::istream& in, const IngestionConfig& config);
ParseResult parse_log(const std::filesystem::path& path, const IngestionConfig& config);

// Canonical JSON-lines form; parse_log with InputFormat::JsonLines reads it
// back losslessly.
void write_jsonl(std::ostream& out, const EventLog& log);

ProductSublog extract_sublog(const EventLog& log, const ObjectId& product);
ProductSublog extract_sublog(const ProductSublog& sublog, const ObjectId& product);

struct ProductSummary {
  ObjectId id;
  std::size_t count = 0;
  Timestamp first{};
  Timestamp last{};

  friend bool operator==(const ProductSummary&, const ProductSummary&) = default;
};

// One entry per object referenced by at least one event, sorted by id.
std::vector<ProductSummary> list_products(const EventLog& log);

// RFC-4180 record splitter used by the CSV reader. Returns false at EOF.
// `line` is advanced by the number of physical lines consumed.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line);

}  // namespace shelfwise
