#include "shelfwise/service.hpp"

#include <semaphore>
#include <shared_mutex>
#include <unordered_map>

#include "httplib.h"

namespace shelfwise {

namespace {

constexpr std::ptrdiff_t kMaxSimulationWorkers = 64;

HttpResponse json_response(int status, const Json& body) { return {status, body.dump()}; }

HttpResponse error_response(const Error& e) {
  return json_response(app::http_status(e.code()), app::error_body(e));
}

HttpResponse plain_error(int status, const std::string& error, const std::string& detail) {
  return json_response(status, Json{{"error", error}, {"code", status}, {"detail", detail}});
}

}  // namespace

struct Service::Impl {
  std::optional<EventLog> log;
  ServiceOptions options;
  std::optional<Json> products;
  std::string fingerprint;

  mutable std::shared_mutex cache_mutex;
  mutable std::unordered_map<std::string, HttpResponse> cache;
  mutable std::counting_semaphore<kMaxSimulationWorkers> simulation_slots;

  httplib::Server server;
  int bound_port = -1;

  Impl(std::optional<EventLog> l, ServiceOptions o)
      : log(std::move(l)),
        options(std::move(o)),
        simulation_slots(std::clamp<std::ptrdiff_t>(
            static_cast<std::ptrdiff_t>(options.simulation_workers), 1, kMaxSimulationWorkers)) {
    if (log) {
      products = to_json(list_products(*log));
      fingerprint = shelfwise::fingerprint(*log);
    }
  }

  std::optional<HttpResponse> cached(const std::string& key) const {
    std::shared_lock lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    return std::nullopt;
  }

  void remember(const std::string& key, const HttpResponse& r) const {
    std::unique_lock lock(cache_mutex);
    cache[key] = r;
  }

  template <typename Fn>
  HttpResponse compute(const std::string& path, const std::string& body, Fn&& fn) const {
    if (!log) return plain_error(409, "NoLogLoaded", "the service was started without --input");
    Json request;
    try {
      request = Json::parse(body);
    } catch (const Json::parse_error& e) {
      return plain_error(400, "InvalidArgument", std::string("invalid JSON body: ") + e.what());
    }
    const std::string key = path + '\n' + request.dump();
    if (auto hit = cached(key)) return *hit;
    try {
      HttpResponse r = json_response(200, fn(request));
      remember(key, r);
      return r;
    } catch (const Error& e) {
      return error_response(e);
    } catch (const std::exception& e) {
      return plain_error(500, "Internal", e.what());
    }
  }
};

Service::Service(std::optional<EventLog> log, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(log), std::move(options))) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  auto& s = impl_->server;
  s.Get("/health", route);
  s.Get("/products", route);
  s.Post("/analyze", route);
  s.Post("/sweep", route);
  s.Post("/simulate", route);
  if (impl_->options.cors_origin) {
    const std::string origin = *impl_->options.cors_origin;
    s.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }
}

Service::~Service() { stop(); }

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::string& body) const {
  const auto& im = *impl_;
  if (method == "GET" && path == "/health") {
    Json j{{"status", "ok"}};
    if (im.log) {
      j["fingerprint"] = im.fingerprint;
      j["events"] = im.log->size();
    }
    return json_response(200, j);
  }
  if (method == "GET" && path == "/products") {
    if (!im.log) return plain_error(409, "NoLogLoaded", "the service was started without --input");
    return json_response(200, *im.products);
  }
  if (method == "POST" && path == "/analyze") {
    return im.compute(path, body, [&](const Json& req) {
      return app::run_analyze(*im.log, app::parse_analyze_request(req));
    });
  }
  if (method == "POST" && path == "/sweep") {
    return im.compute(path, body, [&](const Json& req) {
      return app::run_sweep(*im.log, app::parse_sweep_request(req));
    });
  }
  if (method == "POST" && path == "/simulate") {
    return im.compute(path, body, [&](const Json& req) {
      const auto parsed = app::parse_simulate_request(req);
      im.simulation_slots.acquire();
      struct Release {
        std::counting_semaphore<kMaxSimulationWorkers>& s;
        ~Release() { s.release(); }
      } release{im.simulation_slots};
      return app::run_simulate(*im.log, parsed).body;
    });
  }
  return plain_error(404, "NotFound", method + " " + path + " is not an endpoint");
}

bool Service::bind() {
  auto& im = *impl_;
  if (im.options.port == 0) {
    im.bound_port = im.server.bind_to_any_port(im.options.host);
  } else {
    im.bound_port = im.server.bind_to_port(im.options.host, im.options.port) ? im.options.port : -1;
  }
  return im.bound_port > 0;
}

int Service::port() const { return impl_->bound_port; }

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace shelfwise
