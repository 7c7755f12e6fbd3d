#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "depsimp/upos.hpp"

namespace depsimp {

// Interpolated Kneser-Ney n-gram model over UPOS tags.
//
// Outcome vocabulary is the 17 UPOS tags, UNK and EOS (19 symbols); BOS only
// ever appears in contexts. Sequences are padded with order-1 BOS and one EOS
// during training. The highest order uses raw counts with absolute
// discounting; lower orders use continuation counts (number of distinct left
// extensions); the unigram level interpolates with the uniform distribution
// over the outcome vocabulary, so every outcome has non-zero probability.
// A context never seen at some order backs off entirely to the next lower one.
class PosLanguageModel {
 public:
  using Symbol = std::uint8_t;
  static constexpr Symbol kEos = static_cast<Symbol>(kUposCount);      // 18
  static constexpr Symbol kBos = static_cast<Symbol>(kUposCount + 1);  // 19
  static constexpr std::size_t kOutcomes = kUposCount + 1;             // tags + EOS

  // Untrained model; every distribution is uniform over the outcomes.
  explicit PosLanguageModel(int order = 4, double discount = 0.75);

  int order() const noexcept { return order_; }
  double discount() const noexcept { return discount_; }

  // p(next | context). Only the last order-1 symbols of `context` matter; a
  // shorter context is left-padded with BOS. `next` may be EOS but not BOS.
  double prob(Symbol next, std::span<const Symbol> context) const;

  // Counts of stored n-gram types per order (index 0 = unigrams).
  std::vector<std::size_t> ngram_type_counts() const;

  void save(std::ostream& out) const;
  static PosLanguageModel load(std::istream& in);
  void save_file(const std::string& path) const;
  static PosLanguageModel load_file(const std::string& path);

  friend PosLanguageModel train_pos_lm(
      std::span<const std::vector<Upos>> corpus, int order, double discount);

 private:
  struct ContextStats {
    std::uint64_t total = 0;  // sum of (continuation) counts over outcomes
    std::uint64_t types = 0;  // number of outcomes with non-zero count
  };
  // Per order m (1..order): counts of m-grams (raw at m == order, else
  // continuation) and per-context (m-1 prefix) totals.
  struct Level {
    std::unordered_map<std::uint64_t, std::uint64_t> counts;
    std::unordered_map<std::uint64_t, ContextStats> contexts;
  };

  static std::uint64_t pack(std::span<const Symbol> symbols);
  void rebuild_contexts();

  int order_;
  double discount_;
  std::vector<Level> levels_;  // levels_[m-1]
};

// Throws TrainingError on an empty corpus, an empty sequence, order < 2 or a
// discount outside (0,1).
PosLanguageModel train_pos_lm(std::span<const std::vector<Upos>> corpus,
                              int order = 4, double discount = 0.75);

// One space-separated tag sequence per line; blank lines are ignored.
// Unknown tags become UNK and are counted in `unknown_tags`.
std::vector<std::vector<Upos>> read_pos_corpus(std::istream& in,
                                               std::size_t* unknown_tags = nullptr);

// Sum of log p(tag_u | previous tags) with BOS padding; no EOS term.
double sequence_log_prob(const PosLanguageModel& lm, std::span<const Upos> tags);

// Geometric-mean token probability, exp(sequence_log_prob / length), in (0,1].
double fluency_score(const PosLanguageModel& lm, std::span<const Upos> tags);

// Each chunk scored independently from fresh BOS context; the result is the
// length-weighted geometric mean across chunks.
double chunked_fluency_score(const PosLanguageModel& lm,
                             std::span<const std::vector<Upos>> chunks);

}  // namespace depsimp
