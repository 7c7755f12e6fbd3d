// HTTP-backed embedding and translation clients. Both share cpp-httplib, kept
// in one translation unit because the header is heavy.
#include <httplib.h>

#include <json.hpp>

#include "depsimp/backtranslate.hpp"
#include "depsimp/errors.hpp"
#include "depsimp/similarity.hpp"
#include "depsimp/text.hpp"

namespace depsimp {
namespace {

using nlohmann::json;

httplib::Result post_json(const std::string& base_url, const std::string& path,
                          std::chrono::milliseconds timeout, const json& body,
                          const httplib::Headers& headers = {}) {
  httplib::Client client(base_url);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  return client.Post(path, headers, body.dump(), "application/json");
}

void check_status(const httplib::Result& res, const std::string& what) {
  if (!res) {
    throw TransportError(what + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError(what + ": HTTP status " + std::to_string(res->status));
  }
}

}  // namespace

// --- HttpEmbeddingBackend ---------------------------------------------------

HttpEmbeddingBackend::HttpEmbeddingBackend(HttpEmbeddingConfig config, std::size_t dimension)
    : config_(std::move(config)), dimension_(dimension) {}

std::size_t HttpEmbeddingBackend::dimension() const {
  {
    std::lock_guard lock(mutex_);
    if (dimension_ != 0) return dimension_;
  }
  // Probe once to learn the dimension.
  std::vector<std::string> probe{"dimension probe"};
  return request(probe).front().dimension();
}

std::vector<EmbeddingVector> HttpEmbeddingBackend::request(
    std::span<const std::string> texts) const {
  json body;
  body["texts"] = json::array();
  for (const auto& t : texts) body["texts"].push_back(t);

  return with_retries(config_.retry, [&] {
    auto res = post_json(config_.base_url, config_.path, config_.timeout, body);
    check_status(res, "embedding service");
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(std::string("embedding service: malformed JSON: ") + e.what());
    }
    if (!reply.contains("vectors") || !reply["vectors"].is_array() ||
        reply["vectors"].size() != texts.size()) {
      throw std::runtime_error("embedding service: response lacks one vector per text");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& row : reply["vectors"]) {
      out.emplace_back(row.get<std::vector<double>>());
    }
    std::lock_guard lock(mutex_);
    for (const auto& v : out) {
      if (dimension_ == 0) dimension_ = v.dimension();
      if (v.dimension() != dimension_) {
        throw std::runtime_error("embedding service: inconsistent vector dimension");
      }
    }
    return out;
  });
}

std::vector<EmbeddingVector> HttpEmbeddingBackend::embed_batch(
    std::span<const std::string> texts) const {
  for (const auto& t : texts) {
    if (trim(t).empty()) throw std::invalid_argument("embed: empty text");
  }
  if (texts.empty()) return {};
  return request(texts);
}

EmbeddingVector HttpEmbeddingBackend::embed_text(std::string_view text) const {
  std::vector<std::string> one{std::string(text)};
  return request(one).front();
}

// --- HttpTranslationClient --------------------------------------------------

std::string HttpTranslationClient::translate(const std::string& text,
                                             const std::string& source,
                                             const std::string& target) const {
  json body{{"q", text}, {"source", source}, {"target", target}};
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace(config_.api_key_header, config_.api_key);
  auto res = post_json(config_.base_url, config_.path, config_.timeout, body, headers);
  check_status(res, "translation service");
  try {
    auto reply = json::parse(res->body);
    return reply.at("translatedText").get<std::string>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("translation service: malformed reply: ") + e.what());
  }
}

}  // namespace depsimp
