#pragma once

#include <atomic>
#include <chrono>
#include <iosfwd>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "depsimp/retry.hpp"

namespace depsimp {

// A machine translation provider. translate() may throw TransportError for
// failures worth retrying; implementations must tolerate concurrent calls.
class TranslationClient {
 public:
  virtual ~TranslationClient() = default;
  virtual std::string name() const = 0;
  virtual bool supports(std::string_view source, std::string_view target) const = 0;
  virtual std::string translate(const std::string& text, const std::string& source,
                                const std::string& target) const = 0;
};

// Returns its input unchanged for any language pair.
class IdentityClient final : public TranslationClient {
 public:
  std::string name() const override { return "identity"; }
  bool supports(std::string_view, std::string_view) const override { return true; }
  std::string translate(const std::string& text, const std::string&,
                        const std::string&) const override {
    return text;
  }
};

// Offline stand-in driven by a phrase table with rows (source, pivot, back).
// The forward leg rewrites source phrases into pivot phrases, the backward leg
// rewrites pivot phrases into back phrases. Matching is whole-token, longest
// phrase first; unmatched tokens pass through.
class DictionaryClient final : public TranslationClient {
 public:
  struct Entry {
    std::string source;
    std::string pivot;
    std::string back;
  };

  DictionaryClient(std::vector<Entry> entries, std::string source_language,
                   std::string pivot_language);

  // UTF-8 TSV with three columns; blank lines and '#' comments skipped.
  static DictionaryClient load(std::istream& in, std::string source_language,
                               std::string pivot_language);
  static DictionaryClient load_file(const std::string& path, std::string source_language,
                                    std::string pivot_language);

  std::string name() const override { return "dict"; }
  bool supports(std::string_view source, std::string_view target) const override;
  std::string translate(const std::string& text, const std::string& source,
                        const std::string& target) const override;

 private:
  std::vector<Entry> entries_;
  std::string source_language_;
  std::string pivot_language_;
};

struct HttpTranslationConfig {
  std::string base_url = "http://127.0.0.1:5000";
  std::string path = "/translate";
  std::string api_key;  // sent in `api_key_header` when non-empty
  std::string api_key_header = "X-API-Key";
  std::chrono::milliseconds timeout{30000};
};

// POST {"q": text, "source": code, "target": code} -> {"translatedText": str}.
// Connection failures and non-200 statuses raise TransportError.
class HttpTranslationClient final : public TranslationClient {
 public:
  explicit HttpTranslationClient(HttpTranslationConfig config) : config_(std::move(config)) {}
  std::string name() const override { return "http"; }
  bool supports(std::string_view source, std::string_view target) const override {
    return !source.empty() && !target.empty() && source != target;
  }
  std::string translate(const std::string& text, const std::string& source,
                        const std::string& target) const override;

 private:
  HttpTranslationConfig config_;
};

enum class SeparatorPolicy { Strip, Keep };

struct BtConfig {
  std::string source_language = "en";
  std::string pivot_language = "de";
  SeparatorPolicy separator_policy = SeparatorPolicy::Strip;
  RetryPolicy retry{};

  // German pivot for English, English pivot for Vietnamese, otherwise English.
  static BtConfig for_source(std::string source_language);

  // Throws ConfigError if pivot == source or either code is empty.
  void validate() const;
};

// Strip turns chunk separators " - " into ", "; Keep leaves text untouched.
std::string apply_separator_policy(std::string_view text, SeparatorPolicy policy);

struct BtItem {
  enum class Status { Ok, Skipped, Failed };
  Status status = Status::Ok;
  std::string text;   // paraphrase when Ok
  std::string error;  // reason when Skipped or Failed
};

// Round-trip paraphraser with a per-leg translation cache keyed by
// (text, source, target).
class BackTranslator {
 public:
  // Throws ConfigError for an invalid config or a pair the client rejects.
  BackTranslator(const TranslationClient& client, BtConfig config);

  const BtConfig& config() const noexcept { return config_; }

  // source -> pivot -> source. Throws std::invalid_argument for blank text and
  // TransportError once retries are exhausted.
  std::string round_trip(std::string_view text) const;

  // Order-preserving; failures and blank items are isolated per item.
  std::vector<BtItem> batch_round_trip(std::span<const std::string> texts) const;

  // Number of calls that reached the client (cache misses, retries included).
  std::size_t client_calls() const noexcept { return calls_.load(); }

 private:
  std::string translate_cached(const std::string& text, const std::string& source,
                               const std::string& target) const;

  const TranslationClient& client_;
  BtConfig config_;
  mutable std::mutex mutex_;
  mutable std::map<std::tuple<std::string, std::string, std::string>, std::string> cache_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace depsimp
