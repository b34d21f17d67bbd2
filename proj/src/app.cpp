#include "shelfwise/app.hpp"

#include <cmath>

namespace shelfwise::app {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

template <typename T>
T field(const Json& body, const char* name, T fallback) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) return fallback;
  try {
    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
        bad(std::string("'") + name + "' must be a non-negative integer");
      }
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) bad(std::string("'") + name + "' must be a number");
    }
    return it->get<T>();
  } catch (const Json::exception&) {
    bad(std::string("'") + name + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const Json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) return std::nullopt;
  return field<T>(body, name, T{});
}

StrategyRequest parse_common(const Json& body) {
  if (!body.is_object()) bad("request body must be a JSON object");
  StrategyRequest req;
  auto product = body.find("product");
  if (product == body.end() || !product->is_string()) bad("'product' is required");
  req.product = product->get<std::string>();
  req.capacity = field<std::size_t>(body, "capacity", req.capacity);
  req.initial = optional_field<std::size_t>(body, "initial");
  req.batch = field<std::size_t>(body, "batch", req.batch);
  req.threshold = field<std::size_t>(body, "threshold", req.threshold);
  req.max_quantity = optional_field<std::size_t>(body, "maxQuantity");
  try {
    req.unit = parse_time_unit(field<std::string>(body, "unit", "hours"));
  } catch (const Error& e) {
    bad(e.what());
  }
  return req;
}

ProductSublog sublog_for(const EventLog& log, const StrategyRequest& req) {
  return extract_sublog(log, req.product);
}

std::size_t resolve_max_quantity(const StrategyRequest& req, const DiscoveryReport& report) {
  if (req.max_quantity) return *req.max_quantity;
  std::size_t m = 0;
  for (const auto& c : report.classes) m = std::max(m, static_cast<std::size_t>(c.quantity));
  return std::min(m, req.capacity);
}

}  // namespace

void validate(const StrategyRequest& req, bool require_rate) {
  if (req.product.empty()) bad("'product' must not be empty");
  if (req.capacity < 1 || req.capacity > kMaxDenseStates - 1) {
    bad("'capacity' must lie in 1.." + std::to_string(kMaxDenseStates - 1));
  }
  if (req.initial && *req.initial > req.capacity) bad("'initial' must not exceed capacity");
  if (req.batch < 1 || req.batch > req.capacity) bad("'batch' must lie in 1..capacity");
  if (req.threshold > req.capacity) bad("'threshold' must not exceed capacity");
  if (req.max_quantity && (*req.max_quantity < 1 || *req.max_quantity > req.capacity)) {
    bad("'maxQuantity' must lie in 1..capacity");
  }
  if (require_rate && req.rates.size() != 1) bad("exactly one 'rate' is required");
  for (double r : req.rates) {
    if (!(r > 0.0) || !std::isfinite(r)) bad("supply rates must be finite and > 0");
  }
}

void validate(const SimulateRequest& req, bool require_rate) {
  validate(req.strategy, require_rate);
  if (req.strategy.rates.size() > 1) bad("simulation takes at most one rate");
  if (!(req.horizon > 0.0) || !std::isfinite(req.horizon)) bad("'horizon' must be > 0");
  if (req.burn_in && (!(*req.burn_in >= 0.0) || !(*req.burn_in < req.horizon))) {
    bad("'burnIn' must satisfy 0 <= burnIn < horizon");
  }
}

StrategyRequest parse_analyze_request(const Json& body) {
  StrategyRequest req = parse_common(body);
  auto rate = body.find("rate");
  if (rate == body.end() || !rate->is_number()) bad("'rate' must be a number");
  req.rates = {rate->get<double>()};
  validate(req, true);
  return req;
}

StrategyRequest parse_sweep_request(const Json& body) {
  StrategyRequest req = parse_common(body);
  auto rates = body.find("rates");
  if (rates == body.end() || !rates->is_array() || rates->empty()) {
    bad("'rates' must be a non-empty array");
  }
  for (const auto& r : *rates) {
    if (!r.is_number()) bad("'rates' must contain numbers");
    req.rates.push_back(r.get<double>());
  }
  validate(req, false);
  return req;
}

SimulateRequest parse_simulate_request(const Json& body) {
  SimulateRequest req;
  req.strategy = parse_analyze_request(body);
  auto horizon = body.find("horizon");
  if (horizon == body.end() || !horizon->is_number()) bad("'horizon' must be a number");
  req.horizon = horizon->get<double>();
  req.seed = field<std::uint64_t>(body, "seed", 0);
  req.burn_in = optional_field<double>(body, "burnIn");
  validate(req, true);
  return req;
}

Json run_analyze(const EventLog& log, const StrategyRequest& req) {
  validate(req, true);
  const auto sublog = sublog_for(log, req);
  auto [purchasing, report] = discover_ctmc(sublog, req.capacity, req.initial, req.unit);
  const SupplyStrategy strategy{req.batch, req.rates.front()};
  auto irr = is_irreducible(enhance_with_supply(purchasing, strategy));
  if (!irr.irreducible) throw NotIrreducibleError(std::move(irr));
  return to_json(
      evaluate_strategy(purchasing, strategy, req.threshold, resolve_max_quantity(req, report)));
}

Json run_sweep(const EventLog& log, const StrategyRequest& req) {
  validate(req, false);
  if (req.rates.empty()) bad("at least one rate is required");
  SweepConfig cfg;
  cfg.capacity = req.capacity;
  cfg.initial = req.initial;
  cfg.batch = req.batch;
  cfg.rates = req.rates;
  cfg.max_quantity = req.max_quantity;
  cfg.threshold = req.threshold;
  cfg.unit = req.unit;
  Json out = Json::array();
  for (const auto& r : what_if_sweep(sublog_for(log, req), cfg)) out.push_back(to_json(r));
  return out;
}

SimulationOutput run_simulate(const EventLog& log, const SimulateRequest& req) {
  validate(req, false);
  const auto sublog = sublog_for(log, req.strategy);
  auto [chain, report] =
      discover_ctmc(sublog, req.strategy.capacity, req.strategy.initial, req.strategy.unit);
  if (!req.strategy.rates.empty()) {
    chain = enhance_with_supply(chain, {req.strategy.batch, req.strategy.rates.front()});
  }
  SimulationOutput out;
  out.trajectory = sample_trajectory(chain, req.horizon, req.seed);
  out.occupancy = empirical_occupancy(chain, req.horizon, req.seed, req.burn_in);
  const auto small = downsample(out.trajectory, req.max_points);
  Json points = Json::array();
  for (std::size_t i = 0; i < small.size(); ++i) {
    points.push_back(Json::array({small.entry_times[i], small.states[i]}));
  }
  out.body = Json{{"trajectoryDownsampled", std::move(points)},
                  {"trajectoryLength", out.trajectory.size()},
                  {"occupancy", out.occupancy.fractions},
                  {"horizon", out.occupancy.horizon},
                  {"burnIn", out.occupancy.burn_in},
                  {"seed", out.occupancy.seed},
                  {"jumps", out.occupancy.jumps},
                  {"rng", std::string(kRngName)}};
  return out;
}

Json run_discover(const EventLog& log, const StrategyRequest& req) {
  validate(req, false);
  auto [chain, report] =
      discover_ctmc(sublog_for(log, req), req.capacity, req.initial, req.unit);
  return Json{{"report", to_json(report)}, {"chain", to_json(chain)}};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::BatchExceedsCapacity:
      return 400;
    case ErrorCode::UnknownObject:
      return 404;
    case ErrorCode::NotIrreducible:
    case ErrorCode::NoRates:
    case ErrorCode::CapacityTooSmall:
    case ErrorCode::UnknownQuantityClass:
      return 422;
    default:
      return 500;
  }
}

Json error_body(const Error& e) {
  Json body{{"error", std::string(to_string(e.code()))}, {"code", http_status(e.code())},
            {"detail", e.what()}};
  if (const auto* nie = dynamic_cast<const NotIrreducibleError*>(&e)) {
    body["irreducibility"] = to_json(nie->report());
  }
  return body;
}

}  // namespace shelfwise::app
