#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "depsimp/fluency.hpp"
#include "depsimp/similarity.hpp"
#include "depsimp/treebank.hpp"

namespace depsimp {

struct DecoderConfig {
  double alpha = 2.0;         // weight of the fluency term
  double tau = 0.95;          // minimum similarity to stop
  double lambda_ratio = 0.5;  // minimum output/input token ratio to stop
  int beam_size = 5;

  // Throws ConfigError when a field is out of range.
  void validate() const;

  // ceil(lambda_ratio * n), guarded against representation error.
  std::size_t min_length(std::size_t n) const;
};

struct ScoreBreakdown {
  double sim = 0.0;
  double flu = 0.0;
  double depth = 0.0;
  double total = 0.0;
};

enum class Termination { ThresholdMet, TokensExhausted };

const char* to_string(Termination reason);

// A partial simplification. `selected` is in generation order; `chunks` holds
// the same tokens split at separator boundaries, in creation order, each in
// generation order.
struct Hypothesis {
  std::vector<TokenIndex> selected;
  std::vector<std::vector<TokenIndex>> chunks;
  TokenIndex frontier = 0;
  ScoreBreakdown score;
  bool terminated = false;

  bool contains(TokenIndex idx) const;
};

// Seeds the search: [subject, root] with the frontier on the root when the
// root has an nsubj dependent, else [root].
std::vector<Hypothesis> initial_hypotheses(const DepSentence& sent);

// One successor per unselected child of the frontier. With none, a single
// successor that opens a new chunk at the unselected token of least
// (depth, index). With no unselected tokens at all, `hyp` marked terminated.
std::vector<Hypothesis> expand(const DepSentence& sent, const Hypothesis& hyp);

// Chunks in surface order (by first token), tokens sorted by index.
std::vector<std::vector<TokenIndex>> surface_chunks(const Hypothesis& hyp);

// Chunks joined by " - ", tokens within a chunk space-joined in input order.
std::string render(const DepSentence& sent, const Hypothesis& hyp);

// The string similarity is measured on: surface tokens without separators.
std::string similarity_text(const DepSentence& sent, const Hypothesis& hyp);

ScoreBreakdown score(const DecoderConfig& cfg, const DepSentence& sent,
                     const Hypothesis& hyp, const PosLanguageModel& lm,
                     const EmbeddingBackend& backend);

struct DecodeCounters {
  std::size_t hypotheses_scored = 0;
  std::size_t steps = 0;
  std::size_t chunks_created = 0;  // chunks in the returned hypothesis
  // Hypotheses scored per step; entry 0 is the seed.
  std::vector<std::size_t> scored_per_step;
};

struct SimplificationResult {
  std::string surface;
  std::vector<TokenIndex> selected;             // generation order
  std::vector<std::vector<TokenIndex>> chunks;  // creation order
  ScoreBreakdown score;
  Termination reason = Termination::TokensExhausted;
  DecodeCounters counters;
};

// Family-sampling beam search. All live hypotheses grow by one token per step,
// so the beam evolves independently of tau and lambda; the search stops at the
// first step where some candidate with fewer than n tokens has at least
// min_length tokens and sim >= tau, returning the best such candidate. If
// none ever qualifies the sentence is returned verbatim (TokensExhausted).
// Ranking: higher total, then fewer tokens, then lexicographically smaller
// generation sequence.
SimplificationResult simplify(const DecoderConfig& cfg, const DepSentence& sent,
                              const PosLanguageModel& lm, const EmbeddingBackend& backend);

// Strict weak order used for beam pruning and final selection.
bool ranks_before(const Hypothesis& a, const Hypothesis& b);

}  // namespace depsimp
