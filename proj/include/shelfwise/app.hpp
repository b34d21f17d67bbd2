#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shelfwise/serialize.hpp"

// Request handling shared by the command line and the HTTP service, so that
// both surfaces produce byte-identical JSON for identical inputs.
namespace shelfwise::app {

struct StrategyRequest {
  ObjectId product;
  std::size_t capacity = kDefaultCapacity;
  std::optional<State> initial;
  std::size_t batch = 10;
  std::vector<double> rates;
  std::size_t threshold = 70;
  std::optional<std::size_t> max_quantity;
  TimeUnit unit = TimeUnit::Hours;
};

struct SimulateRequest {
  StrategyRequest strategy;  // at most one rate; none means purchasing only
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> burn_in;
  std::size_t max_points = 10'000;
};

// Field-level validation; throws InvalidArgument with a message naming the
// offending field. `require_rate` demands exactly one positive rate.
void validate(const StrategyRequest& req, bool require_rate);
void validate(const SimulateRequest& req, bool require_rate);

// JSON request bodies, as accepted by POST /analyze, /sweep, /simulate.
StrategyRequest parse_analyze_request(const Json& body);
StrategyRequest parse_sweep_request(const Json& body);
SimulateRequest parse_simulate_request(const Json& body);

// WhatIfResult JSON. Throws NotIrreducibleError for reducible chains.
Json run_analyze(const EventLog& log, const StrategyRequest& req);
// Array of WhatIfResult JSON; reducible entries are flagged, not thrown.
Json run_sweep(const EventLog& log, const StrategyRequest& req);

struct SimulationOutput {
  Trajectory trajectory;  // full resolution
  Occupancy occupancy;
  Json body;              // downsampled trajectory + occupancy
};
SimulationOutput run_simulate(const EventLog& log, const SimulateRequest& req);

// {report, chain}
Json run_discover(const EventLog& log, const StrategyRequest& req);

// HTTP status for an error code (400/404/409/422/500).
int http_status(ErrorCode code);
// Uniform error body {error, code, detail}.
Json error_body(const Error& e);

}  // namespace shelfwise::app
