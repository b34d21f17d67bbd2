#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "shelfwise/analysis.hpp"
#include "shelfwise/app.hpp"
#include "shelfwise/discovery.hpp"
#include "shelfwise/error.hpp"
#include "shelfwise/eventlog.hpp"
#include "shelfwise/serialize.hpp"
#include "shelfwise/simulate.hpp"

namespace py = pybind11;
using namespace shelfwise;

namespace {

IngestionConfig make_config(std::vector<std::string> object_cols, std::string quantity_col,
                            std::string time_col, std::string time_format, std::string unit,
                            bool strict) {
  IngestionConfig cfg;
  cfg.object_columns = std::move(object_cols);
  cfg.quantity_column = std::move(quantity_col);
  cfg.timestamp_column = std::move(time_col);
  cfg.timestamp_format = std::move(time_format);
  cfg.unit = parse_time_unit(unit);
  cfg.strict = strict;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Continuous-time Markov chain discovery and what-if analysis for shelf stock";

  static py::exception<Error> error(m, "ShelfwiseError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Event>(m, "Event")
      .def_readonly("id", &Event::id)
      .def_readonly("objects", &Event::objects)
      .def_readonly("quantity", &Event::quantity)
      .def_readonly("attributes", &Event::attributes)
      .def_property_readonly("timestamp",
                             [](const Event& e) { return format_iso8601(e.timestamp); });

  py::class_<EventLog>(m, "EventLog")
      .def_property_readonly("events", &EventLog::events)
      .def_property_readonly("objects", &EventLog::objects)
      .def("__len__", &EventLog::size)
      .def("to_jsonl", [](const EventLog& log) {
        std::ostringstream out;
        write_jsonl(out, log);
        return out.str();
      });

  py::class_<ProductSublog>(m, "ProductSublog")
      .def_readonly("product", &ProductSublog::product)
      .def_readonly("events", &ProductSublog::events)
      .def("__len__", [](const ProductSublog& s) { return s.events.size(); });

  m.def(
      "parse_log",
      [](const std::string& path, std::vector<std::string> object_cols, std::string quantity_col,
         std::string time_col, std::string time_format, std::string unit, bool strict) {
        auto r = parse_log(std::filesystem::path(path),
                           make_config(std::move(object_cols), std::move(quantity_col),
                                       std::move(time_col), std::move(time_format),
                                       std::move(unit), strict));
        return py::make_tuple(std::move(r.log), r.skipped);
      },
      py::arg("path"), py::arg("object_cols") = std::vector<std::string>{"product_id"},
      py::arg("quantity_col") = "quantity", py::arg("time_col") = "timestamp",
      py::arg("time_format") = "%Y-%m-%d %H:%M:%S", py::arg("unit") = "hours",
      py::arg("strict") = true, "Parse a CSV / JSON-lines log; returns (EventLog, skipped_rows).");

  m.def("extract_sublog", py::overload_cast<const EventLog&, const ObjectId&>(&extract_sublog),
        py::arg("log"), py::arg("product"));

  m.def("list_products", [](const EventLog& log) {
    py::list out;
    for (const auto& p : list_products(log)) {
      out.append(py::make_tuple(p.id, p.count, format_iso8601(p.first), format_iso8601(p.last)));
    }
    return out;
  });

  m.def("quantity_classes", &quantity_classes);

  py::class_<Ctmc>(m, "Ctmc")
      .def_property_readonly("capacity", &Ctmc::capacity)
      .def_property_readonly("unit", [](const Ctmc& c) { return std::string(to_string(c.unit())); })
      .def_property_readonly("lambda_", &Ctmc::lambda)
      .def("rate", &Ctmc::rate)
      .def("exit_rate", &Ctmc::exit_rate)
      .def("to_json", [](const Ctmc& c) { return to_json(c).dump(); })
      .def_static("from_json",
                  [](const std::string& text) { return ctmc_from_json(Json::parse(text)); })
      .def("__eq__", [](const Ctmc& a, const Ctmc& b) { return a == b; });

  m.def(
      "discover_ctmc",
      [](const ProductSublog& sublog, std::size_t capacity, std::optional<State> initial,
         const std::string& unit) {
        auto [chain, report] = discover_ctmc(sublog, capacity, initial, parse_time_unit(unit));
        return py::make_tuple(std::move(chain), to_json(report).dump());
      },
      py::arg("sublog"), py::arg("capacity") = kDefaultCapacity, py::arg("initial") = py::none(),
      py::arg("unit") = "hours", "Returns (Ctmc, report_json).");

  m.def(
      "enhance_with_supply",
      [](const Ctmc& chain, std::size_t batch, double rate) {
        return enhance_with_supply(chain, SupplyStrategy{batch, rate});
      },
      py::arg("chain"), py::arg("batch"), py::arg("rate"));

  m.def("is_irreducible", [](const Ctmc& chain) { return is_irreducible(chain).irreducible; });

  m.def("validate", [](const Ctmc& chain) {
    std::vector<std::string> out;
    for (const auto& v : validate(chain)) out.push_back(v.message);
    return out;
  });

  m.def("steady_state", [](const Ctmc& chain) {
    auto ss = steady_state(chain);
    return py::make_tuple(ss.pi, ss.residual);
  }, "Returns (pi, residual).");

  m.def("expected_quantity", [](const std::vector<double>& pi) { return expected_quantity(pi); });
  m.def("undersupply_probability", [](const std::vector<double>& pi, std::size_t max_quantity) {
    return undersupply_probability(pi, max_quantity);
  });
  m.def("expected_surplus", [](const std::vector<double>& pi, std::size_t threshold) {
    return expected_surplus(pi, threshold);
  });

  m.def(
      "what_if_sweep",
      [](const ProductSublog& sublog, std::vector<double> rates, std::size_t capacity,
         std::size_t batch, std::size_t threshold, std::optional<std::size_t> max_quantity,
         const std::string& unit) {
        SweepConfig cfg;
        cfg.capacity = capacity;
        cfg.batch = batch;
        cfg.rates = std::move(rates);
        cfg.threshold = threshold;
        cfg.max_quantity = max_quantity;
        cfg.unit = parse_time_unit(unit);
        Json out = Json::array();
        for (const auto& r : what_if_sweep(sublog, cfg)) out.push_back(to_json(r));
        return out.dump();
      },
      py::arg("sublog"), py::arg("rates"), py::arg("capacity") = kDefaultCapacity,
      py::arg("batch") = 10, py::arg("threshold") = 70, py::arg("max_quantity") = py::none(),
      py::arg("unit") = "hours", "Returns a JSON array of what-if results.");

  m.def(
      "sample_trajectory",
      [](const Ctmc& chain, double horizon, std::uint64_t seed) {
        auto t = sample_trajectory(chain, horizon, seed);
        return py::make_tuple(t.entry_times, t.states);
      },
      py::arg("chain"), py::arg("horizon"), py::arg("seed"), "Returns (entry_times, states).");

  m.def(
      "empirical_occupancy",
      [](const Ctmc& chain, double horizon, std::uint64_t seed, std::optional<double> burn_in) {
        return empirical_occupancy(chain, horizon, seed, burn_in).fractions;
      },
      py::arg("chain"), py::arg("horizon"), py::arg("seed"), py::arg("burn_in") = py::none());

  m.def(
      "analyze",
      [](const EventLog& log, const std::string& request_json) {
        return app::run_analyze(log, app::parse_analyze_request(Json::parse(request_json))).dump();
      },
      py::arg("log"), py::arg("request"),
      "Same JSON contract as POST /analyze; returns the response body.");
}
