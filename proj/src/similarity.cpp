#include "depsimp/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "depsimp/errors.hpp"
#include "depsimp/text.hpp"

namespace depsimp {
namespace {

void require_text(std::string_view text) {
  if (trim(text).empty()) throw std::invalid_argument("embed: empty text");
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 1469598103934665603ull) {
  std::uint64_t h = seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("embedding has a non-finite component");
  }
}

bool EmbeddingVector::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

EmbeddingVector EmbeddingBackend::embed(std::string_view text) const {
  require_text(text);
  return embed_text(text);
}

std::vector<EmbeddingVector> EmbeddingBackend::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dimension() != v.dimension()) {
    throw std::invalid_argument("cosine: dimension mismatch");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.dimension(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw DegenerateInput("cosine: zero vector");
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

double clamped_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  try {
    return std::max(0.0, cosine(u, v));
  } catch (const DegenerateInput&) {
    return 0.0;
  }
}

double similarity_score(const EmbeddingBackend& backend, std::string_view original,
                        std::string_view candidate) {
  std::vector<std::string> texts{std::string(original), std::string(candidate)};
  auto vecs = backend.embed_batch(texts);
  return clamped_similarity(vecs[0], vecs[1]);
}

// --- HashingBackend ---------------------------------------------------------

HashingBackend::HashingBackend(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw std::invalid_argument("HashingBackend: zero dimension");
}

EmbeddingVector HashingBackend::embed_text(std::string_view text) const {
  std::vector<double> v(dimension_, 0.0);
  auto add = [&](std::string_view feature, std::uint64_t seed) {
    const std::uint64_t h = fnv1a(feature, seed);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[(h >> 1) % dimension_] += sign;
  };
  for (const auto& word : split_whitespace(ascii_lower(text))) {
    add(word, 0x9e3779b97f4a7c15ull);
    const std::string padded = "<" + word + ">";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      add(std::string_view(padded).substr(i, 3), 0xcbf29ce484222325ull);
    }
  }
  return EmbeddingVector(std::move(v));
}

// --- WordVectorBackend ------------------------------------------------------

WordVectorBackend::WordVectorBackend(
    std::unordered_map<std::string, std::vector<double>> vectors, std::size_t dimension)
    : vectors_(std::move(vectors)), dimension_(dimension) {
  if (dimension_ == 0) throw std::invalid_argument("WordVectorBackend: zero dimension");
  for (const auto& [word, vec] : vectors_) {
    if (vec.size() != dimension_) {
      throw std::invalid_argument("WordVectorBackend: vector for '" + word +
                                  "' has wrong dimension");
    }
  }
}

WordVectorBackend WordVectorBackend::load(std::istream& in) {
  std::unordered_map<std::string, std::vector<double>> vectors;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2) {
      // "count dim" header
      try {
        std::size_t pos = 0;
        (void)std::stoull(fields[0], &pos);
        if (pos == fields[0].size()) {
          dim = std::stoull(fields[1]);
          continue;
        }
      } catch (const std::logic_error&) {
      }
    }
    if (fields.size() < 2) throw ParseError(line_no, "word vector line without values");
    std::vector<double> vec;
    vec.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      char* end = nullptr;
      const double x = std::strtod(fields[i].c_str(), &end);
      if (end != fields[i].c_str() + fields[i].size() || !std::isfinite(x)) {
        throw ParseError(line_no, "bad vector component '" + fields[i] + "'");
      }
      vec.push_back(x);
    }
    if (dim == 0) dim = vec.size();
    if (vec.size() != dim) {
      throw ParseError(line_no, "expected " + std::to_string(dim) + " components, got " +
                                    std::to_string(vec.size()));
    }
    vectors.emplace(fields[0], std::move(vec));
  }
  if (dim == 0 || vectors.empty()) throw ParseError(line_no, "no word vectors found");
  return WordVectorBackend(std::move(vectors), dim);
}

WordVectorBackend WordVectorBackend::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load(in);
}

EmbeddingVector WordVectorBackend::embed_text(std::string_view text) const {
  std::vector<double> sum(dimension_, 0.0);
  std::size_t found = 0;
  for (const auto& word : split_whitespace(text)) {
    auto it = vectors_.find(word);
    if (it == vectors_.end()) it = vectors_.find(ascii_lower(word));
    if (it == vectors_.end()) continue;
    for (std::size_t i = 0; i < dimension_; ++i) sum[i] += it->second[i];
    ++found;
  }
  if (found > 0) {
    for (double& x : sum) x /= static_cast<double>(found);
  }
  return EmbeddingVector(std::move(sum));
}

// --- CachingBackend ---------------------------------------------------------

EmbeddingVector CachingBackend::embed_text(std::string_view text) const {
  std::string key(text);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  EmbeddingVector v = inner_.embed(text);
  std::lock_guard lock(mutex_);
  ++misses_;
  return cache_.try_emplace(std::move(key), std::move(v)).first->second;
}

std::vector<EmbeddingVector> CachingBackend::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::string> missing;
  // Output slots waiting on each missing text; repeats in one batch share it.
  std::vector<std::vector<std::size_t>> waiting;
  std::unordered_map<std::string_view, std::size_t> pending;
  {
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (auto it = cache_.find(texts[i]); it != cache_.end()) {
        out[i] = it->second;
        ++hits_;
      } else if (auto p = pending.find(texts[i]); p != pending.end()) {
        waiting[p->second].push_back(i);
        ++hits_;
      } else {
        pending.emplace(texts[i], missing.size());
        missing.push_back(texts[i]);
        waiting.push_back({i});
      }
    }
  }
  if (missing.empty()) return out;
  auto fresh = inner_.embed_batch(missing);
  std::lock_guard lock(mutex_);
  for (std::size_t j = 0; j < missing.size(); ++j) {
    ++misses_;
    const auto& stored = cache_.try_emplace(missing[j], std::move(fresh[j])).first->second;
    for (std::size_t slot : waiting[j]) out[slot] = stored;
  }
  return out;
}

std::size_t CachingBackend::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t CachingBackend::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

}  // namespace depsimp
