#include <gtest/gtest.h>

#include <atomic>
#include <sstream>
#include <thread>

#include "elicit/service.hpp"

using namespace elicit;
using elicit::json::Json;

namespace {

class ServerFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    service::HttpOptions options;
    options.log = &log_;
    service::mount(server_, service_, options);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }

  struct Reply {
    int status;
    Json body;
    std::string raw;
  };

  Reply post(const std::string& path, const Json& body) const { return post_raw(path, body.dump()); }

  Reply post_raw(const std::string& path, const std::string& body) const {
    auto c = client();
    auto res = c.Post(path, body, "application/json");
    EXPECT_TRUE(res);
    return {res->status, Json::parse(res->body, nullptr, false), res->body};
  }

  Reply get(const std::string& path) const {
    auto c = client();
    auto res = c.Get(path);
    EXPECT_TRUE(res);
    return {res->status, Json::parse(res->body, nullptr, false), res->body};
  }

  std::string new_session(const Json& body = Json::object()) const {
    const auto r = post("/sessions", body);
    EXPECT_EQ(r.status, 201);
    return r.body.at("id").get<std::string>();
  }

  std::string fitted_session() const {
    const std::string id = new_session({{"seed", 11}});
    EXPECT_EQ(post("/sessions/" + id + "/bounds", {{"L", 5}, {"U", 70}}).status, 200);
    EXPECT_EQ(post("/sessions/" + id + "/mean_quantiles",
                   {{"mean_quantiles", {{{"alpha", 0.05}, {"value", 30}}, {{"alpha", 0.95}, {"value", 40}}}}})
                  .status,
              200);
    EXPECT_EQ(post("/sessions/" + id + "/proportion", {{"c", 10}, {"theta_lo", 0.33}, {"theta_hi", 0.40}}).status,
              200);
    return id;
  }

  SessionStore store_;
  service::Service service_{store_};
  httplib::Server server_;
  std::ostringstream log_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(ServiceStatus, ErrorCodesMapToStatuses) {
  EXPECT_EQ(service::status_for(StateError("x")), 409);
  EXPECT_EQ(service::status_for(InvalidJudgement("x")), 422);
  EXPECT_EQ(service::status_for(DomainError("x")), 422);
  EXPECT_EQ(service::status_for(FitFailure("x", 1, 2, 3)), 422);
  EXPECT_EQ(service::status_for(ParseError("x", "/")), 400);
  EXPECT_EQ(service::status_for(ValidationError("L < U", "x")), 400);
  EXPECT_EQ(service::status_for(InvalidTransform("x")), 400);
  EXPECT_EQ(service::status_for(InvalidConfig("x")), 400);
  EXPECT_EQ(service::status_for(NotFound("x")), 404);
}

TEST(ServiceRouting, HandlesRequestsWithoutSockets) {
  SessionStore store;
  service::Service svc(store);
  const auto created = svc.handle({"POST", "/sessions", R"({"transform": "log"})", {}});
  ASSERT_EQ(created.status, 201);
  const std::string id = Json::parse(created.body).at("id");
  const auto bounds = svc.handle({"POST", "/sessions/" + id + "/bounds", R"({"L": 0, "U": 70})", {}});
  EXPECT_EQ(bounds.status, 422);
  EXPECT_EQ(Json::parse(bounds.body).at("error").at("code"), "domain-error");
  EXPECT_EQ(svc.handle({"DELETE", "/sessions/" + id, "", {}}).status, 404);
  EXPECT_EQ(svc.handle({"GET", "/nowhere", "", {}}).status, 404);
  EXPECT_EQ(svc.handle({"GET", "/health", "", {}}).status, 200);
}

TEST(ServiceRouting, ConfiguredDefaultsApplyToFeedback) {
  SessionStore store;
  service::ServiceConfig config;
  config.default_grid = 40;
  config.default_draws = 50;
  service::Service svc(store, config);
  const std::string id = Json::parse(svc.handle({"POST", "/sessions", "{}", {}}).body).at("id");
  const std::string base = "/sessions/" + id;
  svc.handle({"POST", base + "/bounds", R"({"L": 5, "U": 70})", {}});
  svc.handle({"POST", base + "/mean_quantiles",
              R"({"mean_quantiles": [{"alpha": 0.05, "value": 30}, {"alpha": 0.95, "value": 40}]})", {}});
  svc.handle({"POST", base + "/proportion", R"({"c": 10, "theta_lo": 0.33, "theta_hi": 0.40})", {}});
  const auto preview = svc.handle({"GET", base + "/feedback", "", {}});
  ASSERT_EQ(preview.status, 200);
  EXPECT_EQ(Json::parse(preview.body).at("grid").size(), 40u);
  const auto overridden = svc.handle({"GET", base + "/feedback", "", {{"J", "25"}}});
  EXPECT_EQ(Json::parse(overridden.body).at("grid").size(), 25u);
  svc.handle({"POST", base + "/feedback", "{}", {}});
  const auto doc = Json::parse(svc.handle({"GET", base, "", {}}).body);
  EXPECT_EQ(doc.at("history").back().at("payload").at("input").at("config").at("K"), 50);
}

TEST_F(ServerFixture, FullWorkflowOverHttp) {
  const std::string id = fitted_session();
  const std::string base = "/sessions/" + id;

  const auto preview = get(base + "/feedback?K=200&J=50");
  ASSERT_EQ(preview.status, 200);
  EXPECT_EQ(preview.body.at("kind"), "population");
  EXPECT_EQ(preview.body.at("grid").size(), 50u);
  EXPECT_EQ(preview.body.at("overlay_curves").size(), 2u);
  EXPECT_TRUE(preview.body.contains("proportion_shading"));
  EXPECT_EQ(get(base).body.at("state"), "VarianceFitted");

  const auto shown = post(base + "/feedback", {{"K", 300}, {"J", 300}});
  ASSERT_EQ(shown.status, 200);
  EXPECT_EQ(shown.body.at("state"), "FeedbackShown");
  const auto& intervals = shown.body.at("quantile_intervals");
  ASSERT_EQ(intervals.size(), 2u);
  EXPECT_NEAR(intervals[0].at("lower").get<double>(), 12.0, 4.0);
  EXPECT_NEAR(intervals[1].at("upper").get<double>(), 58.0, 4.0);

  const auto revised = post(base + "/revise", {{"target", "proportion"}, {"c", 10}, {"theta_lo", "30%"}, {"theta_hi", 35}});
  ASSERT_EQ(revised.status, 200) << revised.raw;
  EXPECT_EQ(revised.body.at("state"), "VarianceFitted");
  EXPECT_TRUE(revised.body.at("result").contains("previous"));

  EXPECT_EQ(post(base + "/conclude", {{"accepted", true}}).status, 409);
  EXPECT_EQ(post(base + "/feedback", Json::object()).status, 200);
  EXPECT_EQ(post(base + "/conclude", {{"accepted", true}, {"note", "fine"}}).status, 200);

  auto c = client();
  const auto exported = c.Get(base + "/export");
  ASSERT_TRUE(exported);
  EXPECT_EQ(exported->status, 200);
  const auto doc = import_session(exported->body);
  EXPECT_EQ(doc.state, SessionState::Concluded);
  EXPECT_EQ(export_session(doc), exported->body);

  // Same id is already present here.
  EXPECT_EQ(post_raw("/sessions/import", exported->body).status, 409);
  SessionStore other;
  service::Service other_service(other);
  const auto imported = other_service.handle({"POST", "/sessions/import", exported->body, {}});
  EXPECT_EQ(imported.status, 201);
  EXPECT_EQ(other_service.handle({"GET", "/sessions/" + id + "/export", "", {}}).body, exported->body);
}

TEST_F(ServerFixture, MeanOnlyFeedback) {
  const std::string id = new_session();
  EXPECT_EQ(get("/sessions/" + id + "/feedback").status, 409);
  post("/sessions/" + id + "/bounds", {{"L", 5}, {"U", 70}});
  post("/sessions/" + id + "/mean_quantiles",
       {{"mean_quantiles", {{{"alpha", 0.05}, {"value", 30}}, {{"alpha", 0.95}, {"value", 40}}}}});
  const auto r = get("/sessions/" + id + "/feedback?J=40");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body.at("kind"), "mean");
  EXPECT_EQ(r.body.at("density").size(), 40u);
  EXPECT_EQ(post("/sessions/" + id + "/feedback", Json::object()).status, 409);
}

TEST_F(ServerFixture, ErrorResponses) {
  const std::string id = new_session();
  const std::string base = "/sessions/" + id;
  EXPECT_EQ(post(base + "/bounds", {{"L", 70}, {"U", 5}}).body.at("error").at("code"), "invalid-judgement");
  EXPECT_EQ(post(base + "/bounds", {{"L", 70}, {"U", 5}}).status, 422);
  EXPECT_EQ(post(base + "/bounds", {{"L", 5}, {"U", 70}}).status, 200);
  EXPECT_EQ(post(base + "/bounds", {{"L", 5}, {"U", 70}}).status, 409);

  const auto outside = post(base + "/mean_quantiles",
                            {{"mean_quantiles", {{{"alpha", 0.05}, {"value", 30}}, {{"alpha", 0.95}, {"value", 80}}}}});
  EXPECT_EQ(outside.status, 422);

  const auto malformed = post_raw(base + "/mean_quantiles", "{\"mean_quantiles\": [");
  EXPECT_EQ(malformed.status, 400);
  EXPECT_EQ(malformed.body.at("error").at("code"), "parse-error");
  EXPECT_TRUE(malformed.body.at("error").contains("location"));

  const auto missing = post(base + "/mean_quantiles", {{"mean_quantiles", {{{"alpha", 0.05}}}}});
  EXPECT_EQ(missing.status, 400);
  EXPECT_EQ(missing.body.at("error").at("location"), "/mean_quantiles/0/value");

  EXPECT_EQ(post("/sessions", {{"transform", "sqrt"}}).body.at("error").at("code"), "invalid-transform");
  EXPECT_EQ(get("/sessions/does-not-exist").status, 404);

  const std::string fitted = fitted_session();
  const auto too_many = get("/sessions/" + fitted + "/feedback?K=20000");
  EXPECT_EQ(too_many.status, 400);
  EXPECT_EQ(too_many.body.at("error").at("code"), "invalid-config");
  EXPECT_EQ(get("/sessions/" + fitted + "/feedback?K=abc").status, 400);

  Json doc = Json::parse(client().Get("/sessions/" + fitted + "/export")->body);
  doc["id"] = "broken-copy";
  doc["judgements"]["U"] = 1;
  const auto invalid = post("/sessions/import", doc);
  EXPECT_EQ(invalid.status, 400);
  EXPECT_EQ(invalid.body.at("error").at("invariant"), "L < U");
}

TEST_F(ServerFixture, CorsAndLogging) {
  auto c = client();
  const auto res = c.Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  const auto line = Json::parse(log_.str().substr(0, log_.str().find('\n')));
  EXPECT_EQ(line.at("path"), "/health");
  EXPECT_EQ(line.at("status"), 200);
}

TEST_F(ServerFixture, ConcurrentClients) {
  constexpr int kClients = 8;
  std::atomic<int> failures{0};
  std::vector<std::string> ids(kClients);
  std::vector<std::thread> clients;
  for (int i = 0; i < kClients; ++i) {
    clients.emplace_back([&, i] {
      try {
        ids[i] = fitted_session();
        const auto r = post("/sessions/" + ids[i] + "/feedback", {{"K", 100}, {"J", 50}});
        if (r.status != 200) ++failures;
      } catch (...) {
        ++failures;
      }
    });
  }
  for (auto& t : clients) t.join();
  EXPECT_EQ(failures.load(), 0);
  // Same seed, same judgements: identical recorded intervals.
  const auto first = get("/sessions/" + ids[0]).body.at("history").back().at("payload").at("result");
  for (int i = 1; i < kClients; ++i) {
    EXPECT_EQ(get("/sessions/" + ids[i]).body.at("history").back().at("payload").at("result"), first);
  }

  // Concurrent revisions of one session serialize into a consistent history.
  const std::string shared = ids[0];
  std::vector<std::thread> revisers;
  for (int i = 0; i < kClients; ++i) {
    revisers.emplace_back([&, i] {
      const auto r = post("/sessions/" + shared + "/revise",
                          {{"target", "proportion"}, {"c", 10}, {"theta_lo", 0.30 + 0.005 * i}, {"theta_hi", 0.40}});
      if (r.status != 200) ++failures;
    });
  }
  for (auto& t : revisers) t.join();
  EXPECT_EQ(failures.load(), 0);
  EXPECT_NO_THROW(import_session(client().Get("/sessions/" + shared + "/export")->body));
}
