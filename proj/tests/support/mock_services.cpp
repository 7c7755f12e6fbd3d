#include "mock_services.hpp"

#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "depsimp/similarity.hpp"

namespace depsimp::testing {

using nlohmann::json;

MockServer::MockServer() : server_(std::make_unique<httplib::Server>()) {}

MockServer::~MockServer() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void MockServer::start() {
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("mock server: cannot bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

bool MockServer::take_failure(int& status) {
  int left = fail_remaining_.load();
  while (left > 0) {
    if (fail_remaining_.compare_exchange_weak(left, left - 1)) {
      status = fail_status_.load();
      return true;
    }
  }
  return false;
}

MockEmbeddingServer::MockEmbeddingServer(std::size_t dimension) {
  auto backend = std::make_shared<HashingBackend>(dimension);
  server_->Post("/embed", [this, backend](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    int status = 0;
    if (take_failure(status)) {
      res.status = status;
      return;
    }
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      res.status = 400;
      return;
    }
    json vectors = json::array();
    for (const auto& t : body.at("texts")) {
      const auto v = backend->embed(t.get<std::string>());
      vectors.push_back(std::vector<double>(v.values().begin(), v.values().end()));
    }
    res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
  });
  start();
}

MockTranslationServer::MockTranslationServer(Transform transform, std::string required_key) {
  server_->Post("/translate", [this, transform, required_key](const httplib::Request& req,
                                                              httplib::Response& res) {
    ++requests_;
    int status = 0;
    if (take_failure(status)) {
      res.status = status;
      return;
    }
    if (!required_key.empty() && req.get_header_value("X-API-Key") != required_key) {
      res.status = 401;
      return;
    }
    const json body = json::parse(req.body);
    std::string text = body.at("q").get<std::string>();
    if (transform) {
      text = transform(text, body.at("source").get<std::string>(),
                       body.at("target").get<std::string>());
    }
    res.set_content(json{{"translatedText", text}}.dump(), "application/json");
  });
  start();
}

}  // namespace depsimp::testing
