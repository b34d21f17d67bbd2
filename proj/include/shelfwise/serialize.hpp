#pragma once

#include <ostream>
#include <span>

#include "json.hpp"
#include "shelfwise/analysis.hpp"
#include "shelfwise/ctmc.hpp"
#include "shelfwise/discovery.hpp"
#include "shelfwise/eventlog.hpp"
#include "shelfwise/simulate.hpp"

namespace shelfwise {

using Json = nlohmann::json;

// {capacity, unit, lambda, entries: [[i, j, rate], ...]}; diagonal implied.
Json to_json(const Ctmc& chain);
Ctmc ctmc_from_json(const Json& j);

Json to_json(const DiscoveryReport& report);
Json to_json(const IrreducibilityReport& report);
Json to_json(const WhatIfResult& result);
Json to_json(const Occupancy& occupancy);
Json to_json(const Trajectory& trajectory);
Json to_json(std::span<const ProductSummary> products);

// Text output helpers. Reals use 17 significant digits.
void write_products_csv(std::ostream& out, std::span<const ProductSummary> products);
void write_pi_csv(std::ostream& out, std::span<const double> pi);
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

// 64-bit FNV-1a over the canonical JSON-lines form, as 16 hex digits.
std::string fingerprint(const EventLog& log);

}  // namespace shelfwise
