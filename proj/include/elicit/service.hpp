#pragma once

// HTTP service over a SessionStore. Routing and error mapping live in
// Service::handle, which knows nothing about sockets; mount() wires it into
// a cpp-httplib server.
//
//   POST /sessions                         create
//   GET  /sessions                         list ids
//   POST /sessions/import                  import an exported document
//   GET  /sessions/{id}                    full session document
//   POST /sessions/{id}/bounds             {L, U}
//   POST /sessions/{id}/mean_quantiles     {mean_quantiles: [{alpha, value}], family?}
//   POST /sessions/{id}/proportion         {theta_lo, theta_hi, c?, alpha_lo?, alpha_hi?, family?}
//   POST /sessions/{id}/revise             {target: "mean" | "proportion", ...}
//   GET  /sessions/{id}/feedback           compute without recording (query: K, J, seed, levels)
//   POST /sessions/{id}/feedback           compute and record {K?, J?, seed?, ...}
//   POST /sessions/{id}/conclude           {accepted: true, note?}
//   GET  /sessions/{id}/export             exported document, byte-stable
//   GET  /health

#include <chrono>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>

#include "elicit/session_store.hpp"

namespace elicit::service {

struct Request {
  std::string method;
  std::string path;
  std::string body;
  std::map<std::string, std::string> query;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceConfig {
  int max_draws = 10000;
  int max_grid = 10000;
  int default_draws = 300;
  int default_grid = 300;
};

inline int status_for(const Error& e) {
  const std::string& code = e.code();
  if (code == "state-error") return 409;
  if (code == "not-found") return 404;
  if (code == "invalid-judgement" || code == "domain-error" || code == "fit-failure") return 422;
  return 400;  // parse-error, validation-error, invalid-transform, invalid-config
}

using json::error_json;

class Service {
 public:
  explicit Service(SessionStore& store, ServiceConfig config = {}) : store_(store), config_(config) {}

  Response handle(const Request& request) const {
    try {
      return route(request);
    } catch (const Error& e) {
      return {status_for(e), error_json(e).dump()};
    } catch (const std::exception& e) {
      return {500, Json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump()};
    }
  }

 private:
  static Response ok(const Json& body, int status = 200) { return {status, body.dump()}; }

  static Json parse_body(const std::string& body) {
    if (body.empty()) return Json::object();
    try {
      Json j = Json::parse(body);
      if (!j.is_object()) throw ParseError("request body must be a JSON object", "/");
      return j;
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), "byte " + std::to_string(e.byte));
    }
  }

  static std::vector<std::string> segments(const std::string& path) {
    std::vector<std::string> out;
    std::stringstream in(path);
    std::string part;
    while (std::getline(in, part, '/')) {
      if (!part.empty()) out.push_back(part);
    }
    return out;
  }

  static Json operation_reply(const SessionRecord& s) {
    return {{"id", s.id}, {"state", std::string(to_string(s.state))}, {"result", s.history.back().payload.at("result")}};
  }

  // theta may arrive as 0.33, 33 or "33%".
  static Json normalize_proportion(Json input) {
    for (const char* key : {"theta_lo", "theta_hi"}) {
      if (!input.contains(key)) continue;
      Json& v = input[key];
      if (v.is_string()) {
        v = parse_theta(v.get<std::string>());
      } else if (v.is_number()) {
        v = normalize_theta(v.get<double>());
      }
    }
    return input;
  }

  FeedbackConfig defaults(const SessionRecord& s) const {
    FeedbackConfig cfg;
    cfg.draws = config_.default_draws;
    cfg.grid_size = config_.default_grid;
    cfg.seed = s.seed;
    return cfg;
  }

  FeedbackConfig checked(FeedbackConfig cfg) const {
    cfg.validate();
    if (cfg.draws > config_.max_draws) {
      throw InvalidConfig("K must not exceed " + std::to_string(config_.max_draws) + " on this server");
    }
    if (cfg.grid_size > config_.max_grid) {
      throw InvalidConfig("J must not exceed " + std::to_string(config_.max_grid) + " on this server");
    }
    return cfg;
  }

  static FeedbackConfig config_from_query(const std::map<std::string, std::string>& query, FeedbackConfig cfg) {
    auto as_number = [&](const std::string& key) {
      try {
        std::size_t used = 0;
        const double v = std::stod(query.at(key), &used);
        if (used != query.at(key).size()) throw std::invalid_argument(key);
        return v;
      } catch (const std::exception&) {
        throw ParseError("query parameter '" + key + "' is not a number", "?" + key);
      }
    };
    auto as_count = [&](const std::string& key) {
      const double v = as_number(key);
      if (v != std::floor(v) || v < 0 || v > 1e15) throw ParseError("query parameter '" + key + "' must be a count", "?" + key);
      return v;
    };
    if (query.count("K")) cfg.draws = static_cast<int>(std::min(as_count("K"), 1e9));
    if (query.count("J")) cfg.grid_size = static_cast<int>(std::min(as_count("J"), 1e9));
    if (query.count("seed")) cfg.seed = static_cast<std::uint64_t>(as_count("seed"));
    if (query.count("band_level")) cfg.band_level = as_number("band_level");
    if (query.count("level")) cfg.quantile_interval_level = as_number("level");
    if (query.count("levels")) {
      cfg.quantiles.clear();
      std::stringstream in(query.at("levels"));
      std::string item;
      while (std::getline(in, item, ',')) {
        try {
          cfg.quantiles.push_back(std::stod(item));
        } catch (const std::exception&) {
          throw ParseError("levels must be a comma-separated list of numbers", "?levels");
        }
      }
    }
    return cfg;
  }

  Json feedback_json(const SessionRecord& s, const FeedbackConfig& cfg) const {
    if (at_least(s.state, SessionState::VarianceFitted)) {
      return json::population_feedback_json(s.model(), cfg, s.judgements.proportion);
    }
    if (s.state == SessionState::MeanFitted) {
      Json out = mean_feedback(s, cfg.grid_size);
      out["kind"] = "mean";
      return out;
    }
    throw StateError("feedback needs at least the mean fit (state is " + std::string(to_string(s.state)) + ")");
  }

  Response route(const Request& r) const {
    const auto parts = segments(r.path);
    const bool get = r.method == "GET";
    const bool post = r.method == "POST";
    if (parts.size() == 1 && parts[0] == "health" && get) return ok({{"status", "ok"}});
    if (parts.empty() || parts[0] != "sessions") throw NotFound("no route for " + r.method + " " + r.path);

    if (parts.size() == 1 && post) {
      const Json body = parse_body(r.body);
      Transform transform;
      if (json::has(body, "transform")) transform = parse_transform(json::text(body, "transform", ""));
      const Json context = json::has(body, "context") ? body.at("context") : Json::object();
      std::optional<std::uint64_t> seed;
      if (json::has(body, "seed")) seed = json::unsigned_integer(body, "seed", "");
      const auto s = store_.create(transform, context, seed);
      return ok(export_json(s), 201);
    }
    if (parts.size() == 1 && get) return ok({{"sessions", store_.ids()}});
    if (parts.size() == 2 && parts[1] == "import" && post) {
      const auto s = import_session(r.body);
      store_.import(s);
      return ok(export_json(s), 201);
    }
    if (parts.size() < 2) throw NotFound("no route for " + r.method + " " + r.path);

    const std::string& id = parts[1];
    if (parts.size() == 2 && get) return ok(export_json(store_.get(id)));
    if (parts.size() != 3) throw NotFound("no route for " + r.method + " " + r.path);
    const std::string& action = parts[2];

    if (get && action == "export") return {200, export_session(store_.get(id))};
    if (get && action == "feedback") {
      const auto s = store_.get(id);
      FeedbackConfig base = defaults(s);
      return ok(feedback_json(s, checked(config_from_query(r.query, base))));
    }
    if (!post) throw NotFound("no route for " + r.method + " " + r.path);

    const Json body = parse_body(r.body);
    const std::string now = store_.now();
    if (action == "bounds") {
      return ok(operation_reply(store_.update(id, [&](SessionRecord& s) {
        apply_event(s, "bounds_set", body, now);
        return s;
      })));
    }
    if (action == "mean_quantiles") {
      return ok(operation_reply(store_.update(id, [&](SessionRecord& s) {
        apply_event(s, "mean_fitted", body, now);
        return s;
      })));
    }
    if (action == "proportion") {
      const Json input = normalize_proportion(body);
      return ok(operation_reply(store_.update(id, [&](SessionRecord& s) {
        apply_event(s, "variance_fitted", input, now);
        return s;
      })));
    }
    if (action == "revise") {
      const std::string target = json::text(body, "target", "");
      Json input = body;
      input.erase("target");
      std::string event;
      if (target == "mean" || target == "MeanElicited") {
        event = "mean_revised";
      } else if (target == "proportion" || target == "ProportionElicited") {
        event = "proportion_revised";
        input = normalize_proportion(input);
      } else {
        throw ParseError("revise target must be 'mean' or 'proportion'", "/target");
      }
      return ok(operation_reply(store_.update(id, [&](SessionRecord& s) {
        apply_event(s, event, input, now);
        return s;
      })));
    }
    if (action == "feedback") {
      Json out = store_.update(id, [&](SessionRecord& s) {
        FeedbackConfig base = defaults(s);
        const FeedbackConfig cfg = checked(json::feedback_config_from_json(body, base, ""));
        apply_event(s, "feedback_shown", {{"config", json::to_json(cfg)}}, now);
        Json bundle = feedback_json(s, cfg);
        bundle["state"] = std::string(to_string(s.state));
        return bundle;
      });
      return ok(out);
    }
    if (action == "conclude") {
      return ok(operation_reply(store_.update(id, [&](SessionRecord& s) {
        apply_event(s, "concluded", body, now);
        return s;
      })));
    }
    throw NotFound("no route for " + r.method + " " + r.path);
  }

  SessionStore& store_;
  ServiceConfig config_;
};

// ---- cpp-httplib adapter

struct HttpOptions {
  std::string cors_origin = "*";
  bool log_requests = true;
  std::ostream* log = &std::clog;
};

inline void mount(httplib::Server& server, const Service& service, HttpOptions options = {}) {
  auto log_mutex = std::make_shared<std::mutex>();
  auto dispatch = [&service, options, log_mutex](const httplib::Request& req, httplib::Response& res) {
    const auto start = std::chrono::steady_clock::now();
    Request request{req.method, req.path, req.body, {}};
    for (const auto& [key, value] : req.params) request.query[key] = value;
    const Response reply = service.handle(request);
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
    if (options.log_requests && options.log) {
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      const Json line = {{"ts", utc_now()},    {"level", reply.status >= 500 ? "error" : "info"},
                         {"method", req.method}, {"path", req.path},
                         {"status", reply.status}, {"ms", std::round(ms * 1000) / 1000}};
      std::lock_guard lock(*log_mutex);
      *options.log << line.dump() << '\n';
    }
  };
  server.Get(R"(/.*)", dispatch);
  server.Post(R"(/.*)", dispatch);
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  if (!options.cors_origin.empty()) {
    server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
  }
}

}  // namespace elicit::service
