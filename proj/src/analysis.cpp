#include "depsimp/analysis.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace depsimp {

std::vector<TokenReduction> leave_one_out_reductions(const DepSentence& sent,
                                                     const EmbeddingBackend& backend) {
  const std::size_t n = sent.size();
  if (n < 2) return {};
  std::vector<std::string> texts;
  texts.reserve(n + 1);
  texts.push_back(sent.joined_forms());
  for (std::size_t skip = 0; skip < n; ++skip) {
    std::string t;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == skip) continue;
      if (!t.empty()) t += ' ';
      t += sent.tokens()[i].form;
    }
    texts.push_back(std::move(t));
  }
  const auto vecs = backend.embed_batch(texts);
  std::vector<TokenReduction> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({static_cast<TokenIndex>(i + 1),
                   1.0 - clamped_similarity(vecs[0], vecs[i + 1])});
  }
  return out;
}

ImportanceProfile aggregate_profile(std::span<const DepSentence> corpus,
                                    const EmbeddingBackend& backend) {
  if (corpus.empty()) throw std::invalid_argument("aggregate_profile: empty corpus");
  ImportanceProfile p;
  std::map<int, std::map<Upos, std::size_t>> tag_counts;
  for (const auto& sent : corpus) {
    const auto reductions = leave_one_out_reductions(sent, backend);
    if (reductions.empty()) {
      ++p.sentences_skipped;
      continue;
    }
    ++p.sentences_used;
    const auto n = static_cast<double>(sent.size());
    for (const auto& r : reductions) {
      const DepToken& tok = sent.token(r.index);
      const int depth = sent.depth(r.index);
      const auto decile = static_cast<std::size_t>(10.0 * (r.index - 1) / n);
      p.by_pos[tok.upos].add(r.reduction);
      p.by_depth[depth].add(r.reduction);
      p.by_decile[std::min<std::size_t>(decile, 9)].add(r.reduction);
      ++tag_counts[depth][tok.upos];
    }
  }
  for (const auto& [depth, row] : tag_counts) {
    std::size_t total = 0;
    for (const auto& [tag, c] : row) total += c;
    auto& dist = p.pos_by_depth[depth];
    for (const auto& [tag, c] : row) {
      dist[tag] = static_cast<double>(c) / static_cast<double>(total);
    }
  }
  return p;
}

void write_profile(std::ostream& out, const ImportanceProfile& p) {
  out << std::fixed << std::setprecision(4);
  out << "sentences used " << p.sentences_used << ", skipped " << p.sentences_skipped << "\n\n";
  out << "mean similarity reduction by POS\n";
  for (const auto& [tag, acc] : p.by_pos) {
    out << "  " << std::left << std::setw(8) << to_string(tag) << std::right << std::setw(10)
        << acc.mean() << std::setw(8) << acc.count << '\n';
  }
  out << "\nmean similarity reduction by tree depth\n";
  for (const auto& [depth, acc] : p.by_depth) {
    out << "  " << std::setw(4) << depth << std::setw(14) << acc.mean() << std::setw(8)
        << acc.count << '\n';
  }
  out << "\nmean similarity reduction by position decile\n";
  for (std::size_t d = 0; d < p.by_decile.size(); ++d) {
    out << "  " << std::setw(4) << d << std::setw(14) << p.by_decile[d].mean() << std::setw(8)
        << p.by_decile[d].count << '\n';
  }
  out << "\nPOS distribution by tree depth\n";
  for (const auto& [depth, row] : p.pos_by_depth) {
    out << "  " << std::setw(4) << depth;
    for (const auto& [tag, share] : row) out << "  " << to_string(tag) << '=' << share;
    out << '\n';
  }
  out << std::defaultfloat;
}

void write_profile_tsv(std::ostream& out, const ImportanceProfile& p) {
  out << "section\tkey\tsubkey\tvalue\n";
  out << std::setprecision(17);
  for (const auto& [tag, acc] : p.by_pos) out << "pos\t" << to_string(tag) << "\t-\t" << acc.mean() << '\n';
  for (const auto& [depth, acc] : p.by_depth) out << "depth\t" << depth << "\t-\t" << acc.mean() << '\n';
  for (std::size_t d = 0; d < p.by_decile.size(); ++d) {
    out << "decile\t" << d << "\t-\t" << p.by_decile[d].mean() << '\n';
  }
  for (const auto& [depth, row] : p.pos_by_depth) {
    for (const auto& [tag, share] : row) {
      out << "pos_by_depth\t" << depth << '\t' << to_string(tag) << '\t' << share << '\n';
    }
  }
}

}  // namespace depsimp
