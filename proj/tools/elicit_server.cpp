// HTTP server for elicitation sessions. Every flag can also come from the
// environment (ELICIT_HOST, ELICIT_PORT, ...); flags win.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "elicit/service.hpp"

namespace {

httplib::Server* running = nullptr;

void stop_on_signal(int) {
  if (running) running->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serve elicitation sessions over HTTP/JSON."};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "sessions";
  int max_draws = 10000;
  int default_draws = 300;
  int default_grid = 300;
  std::string cors_origin = "*";
  int threads = 8;
  bool quiet = false;
  app.add_option("--host", host, "Address to bind")->envname("ELICIT_HOST");
  app.add_option("--port", port, "Port to bind (0 picks a free one)")->envname("ELICIT_PORT");
  app.add_option("--data-dir", data_dir, "Directory holding one JSON document per session")
      ->envname("ELICIT_DATA_DIR");
  app.add_option("--max-draws", max_draws, "Largest K a feedback request may ask for")->envname("ELICIT_MAX_DRAWS");
  app.add_option("--default-K", default_draws, "K used when a feedback request gives none")
      ->envname("ELICIT_DEFAULT_K");
  app.add_option("--default-J", default_grid, "J used when a feedback request gives none")
      ->envname("ELICIT_DEFAULT_J");
  app.add_option("--cors-origin", cors_origin, "Access-Control-Allow-Origin value; empty disables CORS")
      ->envname("ELICIT_CORS_ORIGIN");
  app.add_option("--threads", threads, "Request worker threads")->envname("ELICIT_THREADS");
  app.add_flag("--quiet", quiet, "Do not log requests")->envname("ELICIT_QUIET");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    elicit::SessionStore store(data_dir);
    elicit::service::ServiceConfig config;
    config.max_draws = max_draws;
    config.default_draws = default_draws;
    config.default_grid = default_grid;
    elicit::service::Service service(store, config);

    httplib::Server server;
    server.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
    elicit::service::HttpOptions options;
    options.cors_origin = cors_origin;
    options.log_requests = !quiet;
    elicit::service::mount(server, service, options);

    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
      std::cerr << "cannot bind " << host << ":" << port << "\n";
      return 4;
    }
    running = &server;
    std::signal(SIGINT, stop_on_signal);
    std::signal(SIGTERM, stop_on_signal);
    std::clog << elicit::json::Json{{"ts", elicit::utc_now()}, {"level", "info"}, {"event", "listening"},
                                     {"host", host}, {"port", bound}, {"data_dir", data_dir}}
                     .dump()
              << std::endl;
    server.listen_after_bind();
  } catch (const std::exception& e) {
    std::cerr << "elicit_server: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
