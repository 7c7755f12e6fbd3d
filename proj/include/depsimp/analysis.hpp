#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "depsimp/similarity.hpp"
#include "depsimp/treebank.hpp"

namespace depsimp {

struct TokenReduction {
  TokenIndex index = 0;
  double reduction = 0.0;  // 1 - clamped similarity(full, full without token)
};

// Removes each token in turn (remaining forms space-joined in input order).
// Sentences with fewer than two tokens yield an empty list.
std::vector<TokenReduction> leave_one_out_reductions(const DepSentence& sent,
                                                     const EmbeddingBackend& backend);

struct MeanAccumulator {
  double sum = 0.0;
  std::size_t count = 0;
  void add(double x) {
    sum += x;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

struct ImportanceProfile {
  std::map<Upos, MeanAccumulator> by_pos;
  std::map<int, MeanAccumulator> by_depth;
  std::array<MeanAccumulator, 10> by_decile{};  // position decile 0..9
  // depth -> tag -> share of tokens at that depth; each row sums to 1.
  std::map<int, std::map<Upos, double>> pos_by_depth;
  std::size_t sentences_used = 0;
  std::size_t sentences_skipped = 0;  // fewer than two tokens
};

// Throws std::invalid_argument for an empty corpus.
ImportanceProfile aggregate_profile(std::span<const DepSentence> corpus,
                                    const EmbeddingBackend& backend);

void write_profile(std::ostream& out, const ImportanceProfile& profile);

// Long format for plotting: section<TAB>key<TAB>subkey<TAB>value.
void write_profile_tsv(std::ostream& out, const ImportanceProfile& profile);

}  // namespace depsimp
