#include "shelfwise/discovery.hpp"

#include <algorithm>

#include "shelfwise/error.hpp"

namespace shelfwise {

std::string_view to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::None: return "";
    case SkipReason::SingleEvent: return "single event";
    case SkipReason::AllTimestampsIdentical: return "all timestamps identical";
  }
  return "";
}

std::set<std::int64_t> quantity_classes(const ProductSublog& sublog) {
  std::set<std::int64_t> out;
  for (const auto& e : sublog.events) out.insert(e.quantity);
  return out;
}

QuantityClassStats interval_stats(const ProductSublog& sublog, std::int64_t quantity,
                                  TimeUnit unit) {
  std::vector<Timestamp> times;
  for (const auto& e : sublog.events) {
    if (e.quantity == quantity) times.push_back(e.timestamp);
  }
  if (times.empty()) {
    throw Error(ErrorCode::UnknownQuantityClass,
                "no event of product '" + sublog.product + "' has quantity " +
                    std::to_string(quantity));
  }
  std::stable_sort(times.begin(), times.end());

  QuantityClassStats stats;
  stats.quantity = quantity;
  stats.count = times.size();
  if (times.size() == 1) {
    stats.skipped = SkipReason::SingleEvent;
    return stats;
  }
  if (times.front() == times.back()) {
    stats.skipped = SkipReason::AllTimestampsIdentical;
    return stats;
  }

  stats.intervals.reserve(times.size() - 1);
  std::int64_t total = 0;  // microseconds; exact
  for (std::size_t i = 1; i < times.size(); ++i) {
    const auto gap = times[i] - times[i - 1];
    total += gap.count();
    stats.intervals.push_back(to_units(gap, unit));
  }
  const double mean = static_cast<double>(total) / static_cast<double>(times.size() - 1) /
                      static_cast<double>(unit_microseconds(unit));
  stats.mean = mean;
  stats.rate = 1.0 / mean;
  return stats;
}

std::pair<Ctmc, DiscoveryReport> discover_ctmc(const ProductSublog& sublog,
                                               std::size_t capacity,
                                               std::optional<State> initial, TimeUnit unit) {
  if (capacity < 1) throw Error(ErrorCode::InvalidArgument, "capacity must be >= 1");
  const State start = initial.value_or(capacity);
  if (start > capacity) {
    throw Error(ErrorCode::InvalidArgument, "initial state " + std::to_string(start) +
                                                " outside 0.." + std::to_string(capacity));
  }
  const auto classes = quantity_classes(sublog);
  if (!classes.empty() && static_cast<std::size_t>(*classes.rbegin()) > capacity) {
    throw Error(ErrorCode::CapacityTooSmall,
                "capacity " + std::to_string(capacity) + " is below the largest purchase (" +
                    std::to_string(*classes.rbegin()) + " units) of '" + sublog.product + "'");
  }

  DiscoveryReport report;
  report.product = sublog.product;
  report.unit = unit;
  report.capacity = capacity;
  report.initial = start;

  Ctmc chain(capacity, start, unit);
  bool any_rate = false;
  for (const auto q : classes) {
    auto stats = interval_stats(sublog, q, unit);
    if (stats.is_skipped()) {
      report.warnings.push_back("quantity " + std::to_string(q) + " skipped: " +
                                std::string(to_string(stats.skipped)));
    } else {
      const auto batch = static_cast<State>(q);
      for (State s = batch; s <= capacity; ++s) chain.add_rate(s, s - batch, *stats.rate);
      any_rate = true;
    }
    report.classes.push_back(std::move(stats));
  }
  if (!any_rate) {
    throw Error(ErrorCode::NoRates, "no quantity class of '" + sublog.product +
                                        "' has enough distinct timestamps to estimate a rate");
  }
  return {std::move(chain), std::move(report)};
}

}  // namespace shelfwise
