#include "shelfwise/eventlog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "shelfwise/error.hpp"

namespace shelfwise {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Positive integers; integral decimals such as "3.0" are accepted too.
std::optional<std::int64_t> parse_quantity(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec == std::errc{} && p == text.data() + text.size()) return value;
  double d = 0;
  try {
    std::size_t used = 0;
    d = std::stod(std::string(text), &used);
    if (used != text.size()) return std::nullopt;
  } catch (...) {
    return std::nullopt;
  }
  if (!std::isfinite(d) || d != std::floor(d) || std::fabs(d) > 9e15) return std::nullopt;
  return static_cast<std::int64_t>(d);
}

void sort_unique(std::vector<ObjectId>& objects) {
  std::sort(objects.begin(), objects.end());
  objects.erase(std::unique(objects.begin(), objects.end()), objects.end());
}

class RowSink {
 public:
  explicit RowSink(const IngestionConfig& config) : config_(config) {}

  // Strict mode aborts on the first bad row; lenient mode records and skips it.
  void reject(std::size_t line, std::string reason) {
    if (config_.strict) throw MalformedRowError(line, reason);
    result_.skipped++;
    result_.issues.push_back({line, std::move(reason)});
  }

  void accept(std::size_t line, Event event) {
    if (event.objects.empty()) return reject(line, "event references no object");
    if (event.quantity < 1) return reject(line, "quantity must be >= 1");
    if (!ids_.insert(event.id).second) return reject(line, "duplicate event id '" + event.id + "'");
    events_.push_back(std::move(event));
  }

  ParseResult finish() {
    result_.log = EventLog(std::move(events_));
    return std::move(result_);
  }

 private:
  const IngestionConfig& config_;
  std::vector<Event> events_;
  std::unordered_set<std::string> ids_;
  ParseResult result_;
};

ParseResult parse_csv(std::istream& in, const IngestionConfig& config) {
  std::vector<std::string> header;
  std::size_t line = 0;
  if (!read_csv_record(in, header, line)) {
    throw Error(ErrorCode::MissingColumn, "input has no header row");
  }
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  for (auto& h : header) h = std::string(trim(h));

  auto index_of = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header");
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  std::vector<std::size_t> object_idx;
  for (const auto& c : config.object_columns) object_idx.push_back(index_of(c));
  const std::size_t quantity_idx = index_of(config.quantity_column);
  const std::size_t time_idx = index_of(config.timestamp_column);
  std::optional<std::size_t> id_idx;
  if (config.id_column) id_idx = index_of(*config.id_column);

  std::vector<std::size_t> attr_idx;
  if (!config.attribute_columns.empty()) {
    for (const auto& c : config.attribute_columns) attr_idx.push_back(index_of(c));
  } else if (config.copy_unmapped_columns) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      const bool mapped = i == quantity_idx || i == time_idx || (id_idx && i == *id_idx) ||
                          std::find(object_idx.begin(), object_idx.end(), i) != object_idx.end();
      if (!mapped) attr_idx.push_back(i);
    }
  }

  RowSink sink(config);
  std::vector<std::string> fields;
  std::size_t ordinal = 0;
  while (true) {
    const std::size_t row_line = line + 1;
    if (!read_csv_record(in, fields, line)) break;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    ++ordinal;
    if (fields.size() != header.size()) {
      sink.reject(row_line, "expected " + std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()));
      continue;
    }
    Event e;
    e.id = id_idx ? std::string(trim(fields[*id_idx])) : "e" + std::to_string(ordinal);
    if (e.id.empty()) {
      sink.reject(row_line, "empty event id");
      continue;
    }
    for (auto i : object_idx) {
      auto v = trim(fields[i]);
      if (!v.empty()) e.objects.emplace_back(v);
    }
    sort_unique(e.objects);
    auto q = parse_quantity(fields[quantity_idx]);
    if (!q) {
      sink.reject(row_line, "unparseable quantity '" + fields[quantity_idx] + "'");
      continue;
    }
    e.quantity = *q;
    if (!parse_timestamp(trim(fields[time_idx]), config.timestamp_format, e.timestamp)) {
      sink.reject(row_line, "unparseable timestamp '" + fields[time_idx] + "'");
      continue;
    }
    for (auto i : attr_idx) e.attributes[header[i]] = fields[i];
    sink.accept(row_line, std::move(e));
  }
  return sink.finish();
}

std::optional<std::string> scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return v.dump();
  return std::nullopt;
}

ParseResult parse_jsonl(std::istream& in, const IngestionConfig& config) {
  RowSink sink(config);
  std::string text;
  std::size_t line = 0;
  std::size_t ordinal = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    ++ordinal;
    json row;
    try {
      row = json::parse(text);
    } catch (const json::parse_error& ex) {
      sink.reject(line, std::string("invalid JSON: ") + ex.what());
      continue;
    }
    if (!row.is_object()) {
      sink.reject(line, "row is not a JSON object");
      continue;
    }
    Event e;
    if (auto it = row.find("id"); it != row.end()) {
      auto id = scalar_text(*it);
      if (!id || id->empty()) {
        sink.reject(line, "invalid id");
        continue;
      }
      e.id = *id;
    } else {
      e.id = "e" + std::to_string(ordinal);
    }

    bool bad = false;
    if (auto it = row.find("objects"); it != row.end()) {
      if (!it->is_array()) bad = true;
      for (const auto& o : *it) {
        if (!o.is_string()) {
          bad = true;
          break;
        }
        e.objects.push_back(o.get<std::string>());
      }
    } else {
      for (const auto& c : config.object_columns) {
        if (auto f = row.find(c); f != row.end()) {
          auto v = scalar_text(*f);
          if (v && !v->empty()) e.objects.push_back(*v);
        }
      }
    }
    if (bad) {
      sink.reject(line, "'objects' must be an array of strings");
      continue;
    }
    sort_unique(e.objects);

    const json* qv = nullptr;
    if (auto it = row.find("quantity"); it != row.end()) qv = &*it;
    else if (auto f = row.find(config.quantity_column); f != row.end()) qv = &*f;
    std::optional<std::int64_t> q;
    if (qv) {
      if (auto t = scalar_text(*qv)) q = parse_quantity(*t);
    }
    if (!q) {
      sink.reject(line, "missing or unparseable quantity");
      continue;
    }
    e.quantity = *q;

    const json* tv = nullptr;
    if (auto it = row.find("timestamp"); it != row.end()) tv = &*it;
    else if (auto f = row.find(config.timestamp_column); f != row.end()) tv = &*f;
    if (!tv || !tv->is_string() ||
        !(parse_iso8601(tv->get<std::string>(), e.timestamp) ||
          parse_timestamp(tv->get<std::string>(), config.timestamp_format, e.timestamp))) {
      sink.reject(line, "missing or unparseable timestamp");
      continue;
    }

    if (auto it = row.find("attrs"); it != row.end()) {
      if (!it->is_object()) {
        sink.reject(line, "'attrs' must be an object");
        continue;
      }
      for (auto& [k, v] : it->items()) {
        auto t = scalar_text(v);
        e.attributes[k] = t ? *t : v.dump();
      }
    }
    sink.accept(line, std::move(e));
  }
  return sink.finish();
}

}  // namespace

bool Event::has_object(std::string_view object) const {
  return std::binary_search(objects.begin(), objects.end(), object,
                            [](std::string_view a, std::string_view b) { return a < b; });
}

EventLog::EventLog(std::vector<Event> events) : events_(std::move(events)) {
  std::unordered_set<std::string_view> ids;
  for (auto& e : events_) {
    if (e.objects.empty()) {
      throw Error(ErrorCode::InvalidArgument, "event '" + e.id + "' references no object");
    }
    if (e.quantity < 1) {
      throw Error(ErrorCode::InvalidArgument, "event '" + e.id + "' has quantity < 1");
    }
    if (!std::is_sorted(e.objects.begin(), e.objects.end()) ||
        std::adjacent_find(e.objects.begin(), e.objects.end()) != e.objects.end()) {
      sort_unique(e.objects);
    }
    if (!ids.insert(e.id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate event id '" + e.id + "'");
    }
    objects_.insert(e.objects.begin(), e.objects.end());
  }
}

void IngestionConfig::validate() const {
  if (object_columns.empty()) {
    throw Error(ErrorCode::InvalidArgument, "at least one object column is required");
  }
  std::vector<std::string> mapped = object_columns;
  mapped.push_back(quantity_column);
  mapped.push_back(timestamp_column);
  if (id_column) mapped.push_back(*id_column);
  for (const auto& a : attribute_columns) mapped.push_back(a);
  std::sort(mapped.begin(), mapped.end());
  if (auto it = std::adjacent_find(mapped.begin(), mapped.end()); it != mapped.end()) {
    throw Error(ErrorCode::InvalidArgument, "column '" + *it + "' is mapped more than once");
  }
  if (unit_microseconds(unit) <= 0) {
    throw Error(ErrorCode::InvalidArgument, "invalid time unit");
  }
}

bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  int c = in.get();
  if (c == EOF) return false;
  ++line;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (; c != EOF; c = in.get()) {
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !was_quoted && field.empty()) {
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (ch == '\r') {
      if (in.peek() == '\n') continue;
      break;
    } else if (ch == '\n') {
      break;
    } else {
      field.push_back(ch);
    }
  }
  fields.push_back(std::move(field));
  return true;
}

ParseResult parse_log(std::istream& in, const IngestionConfig& config) {
  config.validate();
  InputFormat format = config.format;
  if (format == InputFormat::Auto) {
    in >> std::ws;
    format = in.peek() == '{' ? InputFormat::JsonLines : InputFormat::Csv;
  }
  return format == InputFormat::JsonLines ? parse_jsonl(in, config) : parse_csv(in, config);
}

ParseResult parse_log(const std::filesystem::path& path, const IngestionConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  IngestionConfig cfg = config;
  if (cfg.format == InputFormat::Auto) {
    const auto ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".ndjson") cfg.format = InputFormat::JsonLines;
  }
  return parse_log(in, cfg);
}

void write_jsonl(std::ostream& out, const EventLog& log) {
  for (const auto& e : log.events()) {
    json row;
    row["id"] = e.id;
    row["objects"] = e.objects;
    row["quantity"] = e.quantity;
    row["timestamp"] = format_iso8601(e.timestamp);
    if (!e.attributes.empty()) row["attrs"] = e.attributes;
    out << row.dump() << '\n';
  }
}

ProductSublog extract_sublog(const EventLog& log, const ObjectId& product) {
  if (!log.contains_object(product)) {
    throw Error(ErrorCode::UnknownObject, "unknown object '" + product + "'");
  }
  ProductSublog sub{product, {}};
  for (const auto& e : log.events()) {
    if (e.has_object(product)) sub.events.push_back(e);
  }
  std::stable_sort(sub.events.begin(), sub.events.end(),
                   [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  return sub;
}

ProductSublog extract_sublog(const ProductSublog& sublog, const ObjectId& product) {
  ProductSublog sub{product, {}};
  for (const auto& e : sublog.events) {
    if (e.has_object(product)) sub.events.push_back(e);
  }
  if (sub.events.empty() && !sublog.events.empty()) {
    throw Error(ErrorCode::UnknownObject, "unknown object '" + product + "'");
  }
  std::stable_sort(sub.events.begin(), sub.events.end(),
                   [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  return sub;
}

std::vector<ProductSummary> list_products(const EventLog& log) {
  std::map<ObjectId, ProductSummary> by_id;
  for (const auto& e : log.events()) {
    for (const auto& o : e.objects) {
      auto [it, fresh] = by_id.try_emplace(o);
      auto& s = it->second;
      if (fresh) {
        s.id = o;
        s.first = s.last = e.timestamp;
      }
      s.count++;
      s.first = std::min(s.first, e.timestamp);
      s.last = std::max(s.last, e.timestamp);
    }
  }
  std::vector<ProductSummary> out;
  out.reserve(by_id.size());
  for (auto& [_, s] : by_id) out.push_back(std::move(s));
  return out;
}

}  // namespace shelfwise
