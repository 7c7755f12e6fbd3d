#include "depsimp/fluency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "depsimp/errors.hpp"
#include "depsimp/text.hpp"

namespace depsimp {
namespace {

constexpr int kBitsPerSymbol = 5;
constexpr int kMaxOrder = 12;  // 12 * 5 bits fits a 64-bit key
constexpr std::uint64_t kSymbolMask = (1u << kBitsPerSymbol) - 1;
constexpr const char* kMagic = "depsimp-poslm";
constexpr int kFormatVersion = 1;

std::string symbol_name(PosLanguageModel::Symbol s) {
  if (s == PosLanguageModel::kEos) return "EOS";
  if (s == PosLanguageModel::kBos) return "BOS";
  return std::string(to_string(static_cast<Upos>(s)));
}

std::vector<std::string> tagset_names() {
  std::vector<std::string> names;
  for (int s = 0; s <= PosLanguageModel::kBos; ++s) {
    names.push_back(symbol_name(static_cast<PosLanguageModel::Symbol>(s)));
  }
  return names;
}

}  // namespace

PosLanguageModel::PosLanguageModel(int order, double discount)
    : order_(order), discount_(discount), levels_(static_cast<std::size_t>(order)) {
  if (order < 2 || order > kMaxOrder) {
    throw TrainingError("order must be in [2, " + std::to_string(kMaxOrder) + "]");
  }
  if (!(discount > 0.0 && discount < 1.0)) {
    throw TrainingError("discount must be in (0, 1)");
  }
}

std::uint64_t PosLanguageModel::pack(std::span<const Symbol> symbols) {
  std::uint64_t key = 0;
  for (Symbol s : symbols) key = (key << kBitsPerSymbol) | s;
  return key;
}

void PosLanguageModel::rebuild_contexts() {
  for (auto& level : levels_) {
    level.contexts.clear();
    for (const auto& [key, count] : level.counts) {
      auto& stats = level.contexts[key >> kBitsPerSymbol];
      stats.total += count;
      stats.types += 1;
    }
  }
}

double PosLanguageModel::prob(Symbol next, std::span<const Symbol> context) const {
  if (next == kBos || next > kBos) {
    throw std::invalid_argument("prob: outcome must be a tag or EOS");
  }
  // Last order-1 symbols of the context, left-padded with BOS.
  const auto width = static_cast<std::size_t>(order_ - 1);
  std::vector<Symbol> ctx(width, kBos);
  const std::size_t take = std::min(width, context.size());
  std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(),
            ctx.end() - static_cast<std::ptrdiff_t>(take));

  double p = 1.0 / static_cast<double>(kOutcomes);
  for (int m = 1; m <= order_; ++m) {
    std::span<const Symbol> sub(ctx.data() + (width - static_cast<std::size_t>(m - 1)),
                                static_cast<std::size_t>(m - 1));
    const Level& level = levels_[static_cast<std::size_t>(m - 1)];
    const std::uint64_t ctx_key = pack(sub);
    auto it = level.contexts.find(ctx_key);
    if (it == level.contexts.end() || it->second.total == 0) continue;
    const auto total = static_cast<double>(it->second.total);
    const auto types = static_cast<double>(it->second.types);
    const std::uint64_t key = (ctx_key << kBitsPerSymbol) | next;
    auto cit = level.counts.find(key);
    const double count = cit == level.counts.end() ? 0.0 : static_cast<double>(cit->second);
    p = std::max(count - discount_, 0.0) / total + discount_ * types / total * p;
  }
  return p;
}

std::vector<std::size_t> PosLanguageModel::ngram_type_counts() const {
  std::vector<std::size_t> out;
  for (const auto& level : levels_) out.push_back(level.counts.size());
  return out;
}

PosLanguageModel train_pos_lm(std::span<const std::vector<Upos>> corpus, int order,
                              double discount) {
  if (corpus.empty()) throw TrainingError("empty training corpus");
  PosLanguageModel lm(order, discount);
  using Symbol = PosLanguageModel::Symbol;

  auto& top = lm.levels_[static_cast<std::size_t>(order - 1)];
  std::vector<Symbol> padded;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (corpus[s].empty()) {
      throw TrainingError("empty sequence at position " + std::to_string(s + 1));
    }
    padded.assign(static_cast<std::size_t>(order - 1), PosLanguageModel::kBos);
    for (Upos t : corpus[s]) padded.push_back(static_cast<Symbol>(t));
    padded.push_back(PosLanguageModel::kEos);
    for (std::size_t i = static_cast<std::size_t>(order - 1); i < padded.size(); ++i) {
      std::span<const Symbol> gram(padded.data() + i + 1 - static_cast<std::size_t>(order),
                                   static_cast<std::size_t>(order));
      ++top.counts[PosLanguageModel::pack(gram)];
    }
  }

  // Continuation counts: each distinct (m+1)-gram type credits its m-suffix.
  for (int m = order - 1; m >= 1; --m) {
    const auto& upper = lm.levels_[static_cast<std::size_t>(m)];
    auto& lower = lm.levels_[static_cast<std::size_t>(m - 1)];
    const std::uint64_t mask =
        (std::uint64_t{1} << (kBitsPerSymbol * m)) - 1;
    for (const auto& entry : upper.counts) ++lower.counts[entry.first & mask];
  }
  lm.rebuild_contexts();
  return lm;
}

void PosLanguageModel::save(std::ostream& out) const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", discount_);
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "order " << order_ << '\n';
  out << "discount " << buf << '\n';
  out << "tagset " << join(tagset_names(), " ") << '\n';
  for (int m = 1; m <= order_; ++m) {
    const auto& counts = levels_[static_cast<std::size_t>(m - 1)].counts;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> rows(counts.begin(), counts.end());
    std::sort(rows.begin(), rows.end());
    out << "level " << m << ' ' << rows.size() << '\n';
    for (const auto& [key, count] : rows) {
      for (int k = m - 1; k >= 0; --k) {
        out << symbol_name(static_cast<Symbol>((key >> (kBitsPerSymbol * k)) & kSymbolMask))
            << ' ';
      }
      out << count << '\n';
    }
  }
  out << "end\n";
}

PosLanguageModel PosLanguageModel::load(std::istream& in) {
  std::string line;
  auto next_line = [&](const char* what) -> std::string {
    if (!std::getline(in, line)) {
      throw ModelFormatError(std::string("truncated model file: missing ") + what);
    }
    return line;
  };

  auto header = split_whitespace(next_line("header"));
  if (header.size() != 2 || header[0] != kMagic) {
    throw ModelFormatError("not a POS language model file");
  }
  if (header[1] != std::to_string(kFormatVersion)) {
    throw ModelFormatError("unsupported model format version " + header[1]);
  }
  auto order_line = split_whitespace(next_line("order"));
  auto discount_line = split_whitespace(next_line("discount"));
  if (order_line.size() != 2 || order_line[0] != "order" || discount_line.size() != 2 ||
      discount_line[0] != "discount") {
    throw ModelFormatError("corrupt model header");
  }
  int order = 0;
  double discount = 0;
  try {
    order = std::stoi(order_line[1]);
    char* end = nullptr;
    discount = std::strtod(discount_line[1].c_str(), &end);
    if (end == discount_line[1].c_str()) throw ModelFormatError("bad discount");
  } catch (const std::logic_error&) {
    throw ModelFormatError("corrupt model header");
  }
  PosLanguageModel lm = [&] {
    try {
      return PosLanguageModel(order, discount);
    } catch (const TrainingError& e) {
      throw ModelFormatError(e.what());
    }
  }();

  auto tagset = split_whitespace(next_line("tagset"));
  auto expected = tagset_names();
  if (tagset.size() != expected.size() + 1 || tagset[0] != "tagset" ||
      !std::equal(expected.begin(), expected.end(), tagset.begin() + 1)) {
    throw ModelFormatError("tagset mismatch");
  }

  auto symbol_of = [&](const std::string& name) -> Symbol {
    for (std::size_t s = 0; s < expected.size(); ++s) {
      if (expected[s] == name) return static_cast<Symbol>(s);
    }
    throw ModelFormatError("unknown symbol '" + name + "'");
  };

  for (int m = 1; m <= order; ++m) {
    auto level_line = split_whitespace(next_line("level header"));
    if (level_line.size() != 3 || level_line[0] != "level" ||
        level_line[1] != std::to_string(m)) {
      throw ModelFormatError("corrupt level header for order " + std::to_string(m));
    }
    std::size_t rows = 0;
    try {
      rows = std::stoull(level_line[2]);
    } catch (const std::logic_error&) {
      throw ModelFormatError("corrupt level row count");
    }
    auto& counts = lm.levels_[static_cast<std::size_t>(m - 1)].counts;
    counts.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      auto fields = split_whitespace(next_line("n-gram row"));
      if (fields.size() != static_cast<std::size_t>(m) + 1) {
        throw ModelFormatError("corrupt n-gram row at order " + std::to_string(m));
      }
      std::vector<Symbol> gram;
      for (int k = 0; k < m; ++k) gram.push_back(symbol_of(fields[static_cast<std::size_t>(k)]));
      std::uint64_t count = 0;
      try {
        count = std::stoull(fields.back());
      } catch (const std::logic_error&) {
        throw ModelFormatError("corrupt n-gram count");
      }
      if (count == 0) throw ModelFormatError("zero n-gram count");
      counts[pack(gram)] = count;
    }
  }
  if (split_whitespace(next_line("end marker")) != std::vector<std::string>{"end"}) {
    throw ModelFormatError("missing end marker");
  }
  lm.rebuild_contexts();
  return lm;
}

void PosLanguageModel::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save(out);
  if (!out) throw std::runtime_error("write failed for " + path);
}

PosLanguageModel PosLanguageModel::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load(in);
}

std::vector<std::vector<Upos>> read_pos_corpus(std::istream& in, std::size_t* unknown_tags) {
  std::vector<std::vector<Upos>> corpus;
  std::size_t unknown = 0;
  std::string line;
  while (std::getline(in, line)) {
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    std::vector<Upos> seq;
    seq.reserve(fields.size());
    for (const auto& f : fields) {
      auto tag = parse_upos(f);
      if (!tag) ++unknown;
      seq.push_back(tag.value_or(Upos::UNK));
    }
    corpus.push_back(std::move(seq));
  }
  if (unknown_tags) *unknown_tags = unknown;
  return corpus;
}

double sequence_log_prob(const PosLanguageModel& lm, std::span<const Upos> tags) {
  if (tags.empty()) throw std::invalid_argument("sequence_log_prob: empty sequence");
  std::vector<PosLanguageModel::Symbol> history;
  history.reserve(tags.size());
  double total = 0.0;
  for (Upos t : tags) {
    const auto sym = static_cast<PosLanguageModel::Symbol>(t);
    total += std::log(lm.prob(sym, history));
    history.push_back(sym);
  }
  return total;
}

double fluency_score(const PosLanguageModel& lm, std::span<const Upos> tags) {
  return std::exp(sequence_log_prob(lm, tags) / static_cast<double>(tags.size()));
}

double chunked_fluency_score(const PosLanguageModel& lm,
                             std::span<const std::vector<Upos>> chunks) {
  double log_sum = 0.0;
  std::size_t length = 0;
  for (const auto& chunk : chunks) {
    if (chunk.empty()) continue;
    log_sum += sequence_log_prob(lm, chunk);
    length += chunk.size();
  }
  if (length == 0) throw std::invalid_argument("chunked_fluency_score: no tags");
  return std::exp(log_sum / static_cast<double>(length));
}

}  // namespace depsimp
