#include "shelfwise/serialize.hpp"

#include <cstdio>
#include <sstream>

#include "shelfwise/error.hpp"

namespace shelfwise {

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json optional_real(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json to_json(const Ctmc& chain) {
  Json entries = Json::array();
  for (const auto& e : chain.entries()) entries.push_back(Json::array({e.from, e.to, e.rate}));
  return Json{{"capacity", chain.capacity()},
              {"unit", std::string(to_string(chain.unit()))},
              {"lambda", chain.lambda()},
              {"entries", std::move(entries)}};
}

Ctmc ctmc_from_json(const Json& j) {
  try {
    const auto capacity = j.at("capacity").get<std::size_t>();
    const auto unit = parse_time_unit(j.value("unit", std::string("hours")));
    auto lambda = j.at("lambda").get<std::vector<double>>();
    std::vector<GeneratorEntry> entries;
    for (const auto& e : j.at("entries")) {
      if (!e.is_array() || e.size() != 3) {
        throw Error(ErrorCode::InvalidArgument, "chain entry must be [from, to, rate]");
      }
      entries.push_back({e[0].get<State>(), e[1].get<State>(), e[2].get<double>()});
    }
    return Ctmc::from_entries(capacity, std::move(lambda), entries, unit);
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::InvalidArgument, std::string("invalid chain JSON: ") + ex.what());
  }
}

Json to_json(const DiscoveryReport& report) {
  Json classes = Json::array();
  for (const auto& c : report.classes) {
    classes.push_back({{"quantity", c.quantity},
                       {"count", c.count},
                       {"mean", optional_real(c.mean)},
                       {"rate", optional_real(c.rate)},
                       {"skipped", c.is_skipped() ? Json(std::string(to_string(c.skipped)))
                                                  : Json(nullptr)}});
  }
  return Json{{"product", report.product},
              {"unit", std::string(to_string(report.unit))},
              {"capacity", report.capacity},
              {"initial", report.initial},
              {"classes", std::move(classes)},
              {"warnings", report.warnings}};
}

Json to_json(const IrreducibilityReport& report) {
  Json j{{"irreducible", report.irreducible},
         {"componentCount", report.components.size()},
         {"componentSizes", report.component_sizes()}};
  if (report.witness) j["witness"] = {report.witness->first, report.witness->second};
  return j;
}

Json to_json(const WhatIfResult& r) {
  Json j{{"rate", r.strategy.rate},
         {"batch", r.strategy.batch},
         {"capacity", r.capacity},
         {"threshold", r.threshold},
         {"maxQuantity", r.max_quantity},
         {"irreducible", r.irreducible}};
  if (r.steady && r.metrics) {
    j["pi"] = r.steady->pi;
    j["expectedQuantity"] = r.metrics->expected_quantity;
    j["undersupplyProbability"] = r.metrics->undersupply_probability;
    j["expectedSurplus"] = r.metrics->expected_surplus;
    j["residual"] = r.steady->residual;
  } else {
    j["pi"] = nullptr;
    j["expectedQuantity"] = nullptr;
    j["undersupplyProbability"] = nullptr;
    j["expectedSurplus"] = nullptr;
    j["residual"] = nullptr;
    j["componentSizes"] = r.component_sizes;
  }
  return j;
}

Json to_json(const Occupancy& o) {
  return Json{{"occupancy", o.fractions}, {"horizon", o.horizon}, {"burnIn", o.burn_in},
              {"seed", o.seed},           {"jumps", o.jumps},     {"rng", std::string(kRngName)}};
}

Json to_json(const Trajectory& t) {
  Json points = Json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    points.push_back(Json::array({t.entry_times[i], t.states[i]}));
  }
  return Json{{"points", std::move(points)}, {"horizon", t.horizon}, {"seed", t.seed}};
}

Json to_json(std::span<const ProductSummary> products) {
  Json out = Json::array();
  for (const auto& p : products) {
    out.push_back({{"id", p.id},
                   {"count", p.count},
                   {"firstTs", format_iso8601(p.first)},
                   {"lastTs", format_iso8601(p.last)}});
  }
  return out;
}

void write_products_csv(std::ostream& out, std::span<const ProductSummary> products) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  };
  out << "product,count,first,last\n";
  for (const auto& p : products) {
    out << quote(p.id) << ',' << p.count << ',' << format_iso8601(p.first) << ','
        << format_iso8601(p.last) << '\n';
  }
}

void write_pi_csv(std::ostream& out, std::span<const double> pi) {
  out << "state,probability\n";
  for (std::size_t i = 0; i < pi.size(); ++i) out << i << ',' << real(pi[i]) << '\n';
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  out << "time,state\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << real(t.entry_times[i]) << ',' << t.states[i] << '\n';
  }
}

std::string fingerprint(const EventLog& log) {
  std::ostringstream canonical;
  write_jsonl(canonical, log);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace shelfwise
