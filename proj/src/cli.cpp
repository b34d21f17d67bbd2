#include "shelfwise/cli.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>

#include "CLI11.hpp"
#include "shelfwise/app.hpp"
#include "shelfwise/service.hpp"

namespace shelfwise {

namespace {

struct Options {
  std::string input;
  std::string input_format = "auto";
  std::string format = "auto";
  std::vector<std::string> object_cols{"product_id"};
  std::string quantity_col = "quantity";
  std::string time_col = "timestamp";
  std::string id_col;
  std::vector<std::string> attr_cols;
  std::string time_format = "%Y-%m-%d %H:%M:%S";
  std::string unit = "hours";
  std::string product;
  std::size_t capacity = kDefaultCapacity;
  std::optional<std::size_t> initial;
  std::size_t batch = 10;
  std::vector<double> rates;
  std::size_t threshold = 70;
  std::optional<std::size_t> max_quantity;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  std::optional<double> burn_in;
  std::string out;
  std::string pi_csv;
  std::string chain;
  bool strict = false;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin;
  std::size_t workers = 2;
};

std::atomic<Service*> g_running{nullptr};

extern "C" void handle_signal(int) {
  if (auto* s = g_running.load()) s->stop();
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("shelfwise", sink);
  logger->set_pattern("%l: %v");
  logger->set_level(spdlog::level::info);
  if (const char* lvl = std::getenv("SHELFWISE_LOG_LEVEL")) {
    logger->set_level(spdlog::level::from_str(lvl));
  }
  return logger;
}

IngestionConfig ingestion(const Options& o) {
  IngestionConfig cfg;
  cfg.object_columns = o.object_cols;
  cfg.quantity_column = o.quantity_col;
  cfg.timestamp_column = o.time_col;
  if (!o.id_col.empty()) cfg.id_column = o.id_col;
  cfg.attribute_columns = o.attr_cols;
  cfg.timestamp_format = o.time_format;
  cfg.unit = parse_time_unit(o.unit);
  cfg.strict = o.strict;
  if (o.input_format == "csv") cfg.format = InputFormat::Csv;
  else if (o.input_format == "jsonl") cfg.format = InputFormat::JsonLines;
  return cfg;
}

app::StrategyRequest strategy(const Options& o) {
  app::StrategyRequest req;
  req.product = o.product;
  req.capacity = o.capacity;
  req.initial = o.initial;
  req.batch = o.batch;
  req.rates = o.rates;
  req.threshold = o.threshold;
  req.max_quantity = o.max_quantity;
  req.unit = parse_time_unit(o.unit);
  return req;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  f << content;
  if (!f) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

template <typename Fn>
void write_with(const std::string& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  fn(f);
  if (!f) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::BatchExceedsCapacity:
      return kExitUsage;
    case ErrorCode::Io:
    case ErrorCode::MissingColumn:
    case ErrorCode::MalformedRow:
      return kExitInput;
    case ErrorCode::UnknownObject:
    case ErrorCode::UnknownQuantityClass:
    case ErrorCode::CapacityTooSmall:
    case ErrorCode::NoRates:
      return kExitDiscovery;
    case ErrorCode::NotIrreducible:
      return kExitReducible;
    case ErrorCode::SolverFailure:
      return kExitSolver;
  }
  return kExitSolver;
}

class Runner {
 public:
  Runner(const Options& o, std::ostream& out, std::ostream& err)
      : o_(o), out_(out), err_(err), log_(make_logger(err)) {}

  EventLog load() const {
    if (o_.input.empty()) throw Error(ErrorCode::InvalidArgument, "--input is required");
    auto result = parse_log(std::filesystem::path(o_.input), ingestion(o_));
    log_->info("parsed {} events from {}", result.log.size(), o_.input);
    if (result.skipped > 0) {
      log_->warn("skipped {} malformed rows (first at line {}: {})", result.skipped,
                 result.issues.front().line, result.issues.front().reason);
    }
    return std::move(result.log);
  }

  void require_product() const {
    if (o_.product.empty()) throw Error(ErrorCode::InvalidArgument, "--product is required");
  }

  // Emits JSON either to --out or to stdout.
  void emit(const Json& j) const {
    if (o_.out.empty()) out_ << j.dump() << '\n';
    else write_file(o_.out, j.dump() + '\n');
  }

  int products() const {
    const auto log = load();
    const auto list = list_products(log);
    if (o_.format == "json") {
      emit(to_json(list));
    } else if (o_.out.empty()) {
      write_products_csv(out_, list);
    } else {
      write_with(o_.out, [&](std::ostream& f) { write_products_csv(f, list); });
    }
    return kExitOk;
  }

  int discover() const {
    require_product();
    const auto log = load();
    const auto j = app::run_discover(log, strategy(o_));
    for (const auto& w : j["report"]["warnings"]) log_->warn("{}", w.get<std::string>());
    emit(j);
    return kExitOk;
  }

  int analyze() const {
    require_product();
    const auto log = load();
    const auto j = app::run_analyze(log, strategy(o_));
    const auto pi = j["pi"].get<std::vector<double>>();
    if (!o_.pi_csv.empty()) write_with(o_.pi_csv, [&](std::ostream& f) { write_pi_csv(f, pi); });
    if (o_.format == "csv") write_pi_csv(out_, pi);
    else emit(j);
    return kExitOk;
  }

  int sweep() const {
    require_product();
    const auto log = load();
    const auto j = app::run_sweep(log, strategy(o_));
    int code = kExitOk;
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i]["irreducible"].get<bool>()) {
        err_ << "error: chain for rate " << j[i]["rate"].dump()
             << " is not irreducible (component sizes " << j[i]["componentSizes"].dump() << ")\n";
        code = kExitReducible;
        continue;
      }
      if (!o_.pi_csv.empty()) {
        const auto pi = j[i]["pi"].get<std::vector<double>>();
        write_with(o_.pi_csv + "-" + std::to_string(i) + ".csv",
                   [&](std::ostream& f) { write_pi_csv(f, pi); });
      }
    }
    emit(j);
    return code;
  }

  int simulate() const {
    if (!(o_.horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "--horizon must be > 0");
    Trajectory trajectory;
    Occupancy occupancy;
    if (!o_.chain.empty()) {
      std::ifstream f(o_.chain);
      if (!f) throw Error(ErrorCode::Io, "cannot open '" + o_.chain + "'");
      Json j;
      try {
        j = Json::parse(f);
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::Io, std::string("invalid chain file: ") + e.what());
      }
      const Ctmc chain = ctmc_from_json(j.contains("chain") ? j["chain"] : j);
      trajectory = sample_trajectory(chain, o_.horizon, o_.seed);
      occupancy = empirical_occupancy(chain, o_.horizon, o_.seed, o_.burn_in);
    } else {
      require_product();
      const auto log = load();
      app::SimulateRequest req;
      req.strategy = strategy(o_);
      req.horizon = o_.horizon;
      req.seed = o_.seed;
      req.burn_in = o_.burn_in;
      auto result = app::run_simulate(log, req);
      trajectory = std::move(result.trajectory);
      occupancy = std::move(result.occupancy);
    }
    if (o_.out.empty()) {
      if (o_.format == "csv") write_trajectory_csv(out_, trajectory);
      else out_ << to_json(occupancy).dump() << '\n';
    } else {
      write_with(o_.out + ".trajectory.csv",
                 [&](std::ostream& f) { write_trajectory_csv(f, trajectory); });
      write_file(o_.out + ".occupancy.json", to_json(occupancy).dump() + '\n');
    }
    return kExitOk;
  }

  int serve() const {
    std::optional<EventLog> log;
    if (!o_.input.empty()) log = load();
    ServiceOptions so;
    so.host = o_.host;
    so.port = o_.port;
    so.simulation_workers = o_.workers;
    if (!o_.cors_origin.empty()) so.cors_origin = o_.cors_origin;
    Service service(std::move(log), so);
    if (!service.bind()) {
      err_ << "error: cannot bind " << o_.host << ':' << o_.port << '\n';
      return kExitInput;
    }
    log_->info("listening on http://{}:{}", o_.host, service.port());
    g_running = &service;
    auto prev_int = std::signal(SIGINT, handle_signal);
    auto prev_term = std::signal(SIGTERM, handle_signal);
    service.listen();
    g_running = nullptr;
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
    return kExitOk;
  }

 private:
  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
  std::shared_ptr<spdlog::logger> log_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App cli{"Inventory what-if analysis with continuous-time Markov chains mined from sales logs",
               "shelfwise"};
  cli.require_subcommand(1);
  cli.fallthrough();

  cli.add_option("--input", o.input, "Transaction log (CSV or JSON-lines)");
  cli.add_option("--input-format", o.input_format, "auto | csv | jsonl")
      ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
  cli.add_option("--format", o.format, "Output format: json | csv")
      ->check(CLI::IsMember({"auto", "json", "csv"}));
  cli.add_option("--object-col", o.object_cols, "Object column (repeatable); first is the product")
      ->capture_default_str();
  cli.add_option("--quantity-col", o.quantity_col)->capture_default_str();
  cli.add_option("--time-col", o.time_col)->capture_default_str();
  cli.add_option("--id-col", o.id_col, "Event id column (row order when absent)");
  cli.add_option("--attr-col", o.attr_cols, "Attribute column to keep (repeatable)");
  cli.add_option("--time-format", o.time_format)->capture_default_str();
  cli.add_option("--unit", o.unit, "Rate time unit")
      ->check(CLI::IsMember({"seconds", "minutes", "hours", "days"}))
      ->capture_default_str();
  cli.add_option("--product", o.product, "Product object id");
  cli.add_option("--capacity", o.capacity, "Shelf capacity k")->capture_default_str();
  cli.add_option("--initial", o.initial, "Initial state (defaults to capacity)");
  cli.add_option("--batch", o.batch, "Supply batch size")->capture_default_str();
  cli.add_option("--rate", o.rates, "Supply rate per time unit (repeatable)");
  cli.add_option("--threshold", o.threshold, "Surplus threshold T")->capture_default_str();
  cli.add_option("--max-quantity", o.max_quantity,
                 "Undersupply covers states below this (default: largest purchase)");
  cli.add_option("--seed", o.seed, "Simulation seed");
  cli.add_option("--horizon", o.horizon, "Simulation horizon in time units");
  cli.add_option("--burn-in", o.burn_in, "Simulation burn-in (default 1% of horizon)");
  cli.add_option("--out", o.out, "Output file (simulate: output prefix)");
  cli.add_option("--pi-csv", o.pi_csv, "Also write the stationary distribution as CSV");
  cli.add_option("--chain", o.chain, "simulate: chain JSON instead of --input/--product");
  cli.add_flag("--strict", o.strict, "Abort on the first malformed row");
  cli.add_option("--host", o.host)->capture_default_str();
  cli.add_option("--port", o.port)->capture_default_str();
  cli.add_option("--cors-origin", o.cors_origin, "Allowed browser origin");
  cli.add_option("--workers", o.workers, "Concurrent simulations in serve mode")
      ->capture_default_str();

  auto* products = cli.add_subcommand("products", "List products with event counts");
  auto* discover = cli.add_subcommand("discover", "Discover the purchasing chain of a product");
  auto* analyze = cli.add_subcommand("analyze", "Steady-state metrics for one supply rate");
  auto* sweep = cli.add_subcommand("sweep", "Steady-state metrics for several supply rates");
  auto* simulate = cli.add_subcommand("simulate", "Sample a trajectory and its occupancy");
  auto* serve = cli.add_subcommand("serve", "Run the HTTP service");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    cli.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Runner run(o, out, err);
  try {
    if (products->parsed()) return run.products();
    if (discover->parsed()) return run.discover();
    if (analyze->parsed()) return run.analyze();
    if (sweep->parsed()) return run.sweep();
    if (simulate->parsed()) return run.simulate();
    if (serve->parsed()) return run.serve();
  } catch (const NotIrreducibleError& e) {
    err << "error: " << e.what() << "\n" << app::error_body(e).dump() << '\n';
    return kExitReducible;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitUsage;
}

}  // namespace shelfwise
