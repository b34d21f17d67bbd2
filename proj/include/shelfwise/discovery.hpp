#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "shelfwise/ctmc.hpp"
#include "shelfwise/eventlog.hpp"

namespace shelfwise {

enum class SkipReason { None, SingleEvent, AllTimestampsIdentical };

std::string_view to_string(SkipReason reason);

// Inter-arrival statistics of the events that bought exactly `quantity` units.
struct QuantityClassStats {
  std::int64_t quantity = 0;
  std::size_t count = 0;
  std::vector<double> intervals;  // successive gaps, in `unit`
  std::optional<double> mean;
  std::optional<double> rate;     // 1 / mean
  SkipReason skipped = SkipReason::None;

  bool is_skipped() const noexcept { return skipped != SkipReason::None; }
};

struct DiscoveryReport {
  ObjectId product;
  TimeUnit unit = TimeUnit::Hours;
  std::size_t capacity = 0;
  State initial = 0;
  std::vector<QuantityClassStats> classes;  // ascending quantity
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kDefaultCapacity = 100;

std::set<std::int64_t> quantity_classes(const ProductSublog& sublog);

// Throws UnknownQuantityClass when no event bought `quantity` units.
QuantityClassStats interval_stats(const ProductSublog& sublog, std::int64_t quantity,
                                  TimeUnit unit);

// Purchasing-behaviour chain: for every usable quantity class Q and every
// state s >= Q, q_{s,s-Q} = 1 / mean inter-arrival time of class Q.
// `initial` defaults to `capacity`.
// Throws CapacityTooSmall, NoRates, InvalidArgument.
std::pair<Ctmc, DiscoveryReport> discover_ctmc(const ProductSublog& sublog,
                                               std::size_t capacity = kDefaultCapacity,
                                               std::optional<State> initial = std::nullopt,
                                               TimeUnit unit = TimeUnit::Hours);

}  // namespace shelfwise
