#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "depsimp/retry.hpp"

namespace depsimp {

// Fixed-dimension real vector with finite components.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  bool is_zero() const noexcept;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

// Text -> vector provider. Implementations must be deterministic and safe to
// call from several threads at once.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;

  // Throws std::invalid_argument when `text` is blank.
  EmbeddingVector embed(std::string_view text) const;

  // One vector per text, same order. Default loops over embed_text.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;

 protected:
  virtual EmbeddingVector embed_text(std::string_view text) const = 0;
};

// dot(u,v) / (|u| |v|). Throws DegenerateInput for a zero vector and
// std::invalid_argument for mismatched dimensions.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

// max(0, cosine); a degenerate (zero) embedding yields 0.
double clamped_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

// max(0, cos(embed(original), embed(candidate))).
double similarity_score(const EmbeddingBackend& backend, std::string_view original,
                        std::string_view candidate);

// Signed feature hashing of lowercased word unigrams and character trigrams
// (word-boundary padded) into `dimension` buckets. Offline and deterministic.
class HashingBackend final : public EmbeddingBackend {
 public:
  explicit HashingBackend(std::size_t dimension = 512);
  std::string name() const override { return "hash"; }
  std::size_t dimension() const override { return dimension_; }

 protected:
  EmbeddingVector embed_text(std::string_view text) const override;

 private:
  std::size_t dimension_;
};

// Mean of per-word vectors; out-of-vocabulary words are ignored. Lookup tries
// the exact word first, then its ASCII lowercase form.
class WordVectorBackend final : public EmbeddingBackend {
 public:
  WordVectorBackend(std::unordered_map<std::string, std::vector<double>> vectors,
                    std::size_t dimension);

  // "word v1 ... vd" per line with an optional "count dim" header line.
  static WordVectorBackend load(std::istream& in);
  static WordVectorBackend load_file(const std::string& path);

  std::string name() const override { return "wordvec"; }
  std::size_t dimension() const override { return dimension_; }
  std::size_t vocabulary_size() const noexcept { return vectors_.size(); }

 protected:
  EmbeddingVector embed_text(std::string_view text) const override;

 private:
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::size_t dimension_;
};

struct HttpEmbeddingConfig {
  std::string base_url = "http://127.0.0.1:8080";  // scheme://host[:port]
  std::string path = "/embed";
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry{};
};

// POST {"texts": [...]} -> {"vectors": [[...], ...]}. The dimension is taken
// from the first response unless given up front.
class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit HttpEmbeddingBackend(HttpEmbeddingConfig config, std::size_t dimension = 0);
  std::string name() const override { return "http"; }
  std::size_t dimension() const override;

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

 protected:
  EmbeddingVector embed_text(std::string_view text) const override;

 private:
  std::vector<EmbeddingVector> request(std::span<const std::string> texts) const;

  HttpEmbeddingConfig config_;
  mutable std::mutex mutex_;
  mutable std::size_t dimension_;
};

// Memoizes another backend by exact text. Lookups and inserts are guarded by
// a mutex; the wrapped backend is called outside the lock.
class CachingBackend final : public EmbeddingBackend {
 public:
  explicit CachingBackend(const EmbeddingBackend& inner) : inner_(inner) {}
  std::string name() const override { return inner_.name(); }
  std::size_t dimension() const override { return inner_.dimension(); }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

  std::size_t hits() const;
  std::size_t misses() const;

 protected:
  EmbeddingVector embed_text(std::string_view text) const override;

 private:
  const EmbeddingBackend& inner_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, EmbeddingVector> cache_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

}  // namespace depsimp
