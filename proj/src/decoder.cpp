#include "depsimp/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "depsimp/errors.hpp"

namespace depsimp {

void DecoderConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must be in [0, 1]");
  if (!(lambda_ratio > 0.0 && lambda_ratio <= 1.0)) {
    throw ConfigError("lambda must be in (0, 1]");
  }
  if (beam_size < 1) throw ConfigError("beam size must be >= 1");
}

std::size_t DecoderConfig::min_length(std::size_t n) const {
  return static_cast<std::size_t>(std::ceil(lambda_ratio * static_cast<double>(n) - 1e-9));
}

const char* to_string(Termination reason) {
  return reason == Termination::ThresholdMet ? "threshold-met" : "tokens-exhausted";
}

bool Hypothesis::contains(TokenIndex idx) const {
  return std::find(selected.begin(), selected.end(), idx) != selected.end();
}

std::vector<Hypothesis> initial_hypotheses(const DepSentence& sent) {
  Hypothesis h;
  if (auto subj = sent.root_subject()) h.selected.push_back(*subj);
  h.selected.push_back(sent.root());
  h.chunks.push_back(h.selected);
  h.frontier = sent.root();
  h.terminated = h.selected.size() == sent.size();
  return {std::move(h)};
}

std::vector<Hypothesis> expand(const DepSentence& sent, const Hypothesis& hyp) {
  std::vector<Hypothesis> out;
  for (TokenIndex child : sent.children(hyp.frontier)) {
    if (hyp.contains(child)) continue;
    Hypothesis next = hyp;
    next.selected.push_back(child);
    next.chunks.back().push_back(child);
    next.frontier = child;
    out.push_back(std::move(next));
  }
  if (!out.empty()) return out;

  // Separator: restart at the unselected token nearest the root.
  TokenIndex restart = 0;
  for (TokenIndex i = 1; i <= static_cast<TokenIndex>(sent.size()); ++i) {
    if (hyp.contains(i)) continue;
    if (restart == 0 || sent.depth(i) < sent.depth(restart)) restart = i;
  }
  Hypothesis next = hyp;
  if (restart == 0) {
    next.terminated = true;
  } else {
    next.selected.push_back(restart);
    next.chunks.push_back({restart});
    next.frontier = restart;
  }
  out.push_back(std::move(next));
  return out;
}

std::vector<std::vector<TokenIndex>> surface_chunks(const Hypothesis& hyp) {
  std::vector<std::vector<TokenIndex>> out;
  for (const auto& c : hyp.chunks) {
    if (c.empty()) continue;
    auto sorted = c;
    std::sort(sorted.begin(), sorted.end());
    out.push_back(std::move(sorted));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

namespace {

std::string join_forms(const DepSentence& sent,
                       const std::vector<std::vector<TokenIndex>>& chunks,
                       std::string_view chunk_sep) {
  std::string out;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    if (c) out += chunk_sep;
    for (std::size_t i = 0; i < chunks[c].size(); ++i) {
      if (i) out += ' ';
      out += sent.token(chunks[c][i]).form;
    }
  }
  return out;
}

std::vector<std::vector<Upos>> chunk_tags(const DepSentence& sent,
                                          const std::vector<std::vector<TokenIndex>>& chunks) {
  std::vector<std::vector<Upos>> tags;
  tags.reserve(chunks.size());
  for (const auto& c : chunks) {
    auto& row = tags.emplace_back();
    for (TokenIndex i : c) row.push_back(sent.token(i).upos);
  }
  return tags;
}

void finish_score(const DecoderConfig& cfg, const DepSentence& sent, const Hypothesis& hyp,
                  const std::vector<std::vector<TokenIndex>>& chunks,
                  const PosLanguageModel& lm, ScoreBreakdown& s) {
  s.flu = chunked_fluency_score(lm, chunk_tags(sent, chunks));
  s.depth = 1.0 / static_cast<double>(sent.max_depth_of(hyp.selected));
  s.total = s.sim + cfg.alpha * s.flu + s.depth;
}

}  // namespace

std::string render(const DepSentence& sent, const Hypothesis& hyp) {
  return join_forms(sent, surface_chunks(hyp), " - ");
}

std::string similarity_text(const DepSentence& sent, const Hypothesis& hyp) {
  return join_forms(sent, surface_chunks(hyp), " ");
}

ScoreBreakdown score(const DecoderConfig& cfg, const DepSentence& sent, const Hypothesis& hyp,
                     const PosLanguageModel& lm, const EmbeddingBackend& backend) {
  if (hyp.selected.empty()) throw std::invalid_argument("score: empty hypothesis");
  const auto chunks = surface_chunks(hyp);
  ScoreBreakdown s;
  s.sim = similarity_score(backend, sent.joined_forms(), join_forms(sent, chunks, " "));
  finish_score(cfg, sent, hyp, chunks, lm, s);
  return s;
}

bool ranks_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.score.total != b.score.total) return a.score.total > b.score.total;
  if (a.selected.size() != b.selected.size()) return a.selected.size() < b.selected.size();
  return a.selected < b.selected;
}

namespace {

// Scores a batch of hypotheses for one sentence, embedding each distinct
// surface string once per sentence.
class SentenceScorer {
 public:
  SentenceScorer(const DecoderConfig& cfg, const DepSentence& sent,
                 const PosLanguageModel& lm, const EmbeddingBackend& backend)
      : cfg_(cfg), sent_(sent), lm_(lm), backend_(backend),
        original_(backend.embed(sent.joined_forms())) {}

  void score_all(std::vector<Hypothesis>& hyps) {
    std::vector<std::vector<std::vector<TokenIndex>>> chunks;
    std::vector<std::string> texts;
    std::vector<std::string> missing;
    chunks.reserve(hyps.size());
    for (const auto& h : hyps) {
      chunks.push_back(surface_chunks(h));
      texts.push_back(join_forms(sent_, chunks.back(), " "));
      if (!sim_cache_.contains(texts.back()) &&
          std::find(missing.begin(), missing.end(), texts.back()) == missing.end()) {
        missing.push_back(texts.back());
      }
    }
    if (!missing.empty()) {
      auto vecs = backend_.embed_batch(missing);
      for (std::size_t i = 0; i < missing.size(); ++i) {
        sim_cache_.emplace(missing[i], clamped_similarity(original_, vecs[i]));
      }
    }
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      ScoreBreakdown& s = hyps[i].score;
      s.sim = sim_cache_.at(texts[i]);
      finish_score(cfg_, sent_, hyps[i], chunks[i], lm_, s);
    }
  }

 private:
  const DecoderConfig& cfg_;
  const DepSentence& sent_;
  const PosLanguageModel& lm_;
  const EmbeddingBackend& backend_;
  EmbeddingVector original_;
  std::unordered_map<std::string, double> sim_cache_;
};

SimplificationResult make_result(const DepSentence& sent, const Hypothesis& h,
                                 Termination reason, DecodeCounters counters) {
  SimplificationResult r;
  r.surface = reason == Termination::TokensExhausted ? sent.joined_forms() : render(sent, h);
  r.selected = h.selected;
  r.chunks = h.chunks;
  r.score = h.score;
  r.reason = reason;
  counters.chunks_created = h.chunks.size();
  r.counters = std::move(counters);
  return r;
}

}  // namespace

SimplificationResult simplify(const DecoderConfig& cfg, const DepSentence& sent,
                              const PosLanguageModel& lm, const EmbeddingBackend& backend) {
  cfg.validate();
  const std::size_t n = sent.size();
  const std::size_t min_len = cfg.min_length(n);
  SentenceScorer scorer(cfg, sent, lm, backend);
  DecodeCounters counters;

  auto completable = [&](const Hypothesis& h) {
    return h.selected.size() < n && h.selected.size() >= min_len && h.score.sim >= cfg.tau;
  };

  std::vector<Hypothesis> beam = initial_hypotheses(sent);
  scorer.score_all(beam);
  counters.hypotheses_scored += beam.size();
  counters.scored_per_step.push_back(beam.size());

  std::vector<Hypothesis> candidates = beam;
  while (true) {
    std::vector<const Hypothesis*> done;
    for (const auto& h : candidates) {
      if (completable(h)) done.push_back(&h);
    }
    if (!done.empty()) {
      const Hypothesis* best = *std::min_element(
          done.begin(), done.end(),
          [](const Hypothesis* a, const Hypothesis* b) { return ranks_before(*a, *b); });
      return make_result(sent, *best, Termination::ThresholdMet, std::move(counters));
    }
    // Every hypothesis has the same length, so all exhaust together.
    if (candidates.front().selected.size() == n) {
      auto best = std::min_element(candidates.begin(), candidates.end(), ranks_before);
      return make_result(sent, *best, Termination::TokensExhausted, std::move(counters));
    }

    std::sort(candidates.begin(), candidates.end(), ranks_before);
    if (candidates.size() > static_cast<std::size_t>(cfg.beam_size)) {
      candidates.resize(static_cast<std::size_t>(cfg.beam_size));
    }
    beam = std::move(candidates);

    candidates.clear();
    for (const auto& h : beam) {
      auto next = expand(sent, h);
      for (auto& c : next) candidates.push_back(std::move(c));
    }
    scorer.score_all(candidates);
    ++counters.steps;
    counters.hypotheses_scored += candidates.size();
    counters.scored_per_step.push_back(candidates.size());
  }
}

}  // namespace depsimp
