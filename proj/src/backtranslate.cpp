#include "depsimp/backtranslate.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <stdexcept>

#include "depsimp/errors.hpp"
#include "depsimp/text.hpp"

namespace depsimp {

// --- DictionaryClient -------------------------------------------------------

DictionaryClient::DictionaryClient(std::vector<Entry> entries, std::string source_language,
                                   std::string pivot_language)
    : entries_(std::move(entries)),
      source_language_(std::move(source_language)),
      pivot_language_(std::move(pivot_language)) {}

DictionaryClient DictionaryClient::load(std::istream& in, std::string source_language,
                                        std::string pivot_language) {
  std::vector<Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      cols.push_back(trim(std::string_view(line).substr(start, tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 3 || cols[0].empty() || cols[1].empty() || cols[2].empty()) {
      throw ParseError(line_no, "dictionary rows need three non-empty tab-separated columns");
    }
    entries.push_back({cols[0], cols[1], cols[2]});
  }
  return DictionaryClient(std::move(entries), std::move(source_language),
                          std::move(pivot_language));
}

DictionaryClient DictionaryClient::load_file(const std::string& path,
                                             std::string source_language,
                                             std::string pivot_language) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load(in, std::move(source_language), std::move(pivot_language));
}

bool DictionaryClient::supports(std::string_view source, std::string_view target) const {
  return (source == source_language_ && target == pivot_language_) ||
         (source == pivot_language_ && target == source_language_);
}

std::string DictionaryClient::translate(const std::string& text, const std::string& source,
                                        const std::string& target) const {
  if (!supports(source, target)) {
    throw ConfigError("dictionary client does not translate " + source + "->" + target);
  }
  const bool forward = source == source_language_;
  struct Rule {
    std::vector<std::string> from;
    std::vector<std::string> to;
  };
  std::vector<Rule> rules;
  for (const auto& e : entries_) {
    rules.push_back({split_whitespace(forward ? e.source : e.pivot),
                     split_whitespace(forward ? e.pivot : e.back)});
  }
  std::stable_sort(rules.begin(), rules.end(), [](const Rule& a, const Rule& b) {
    return a.from.size() > b.from.size();
  });

  const auto tokens = split_whitespace(text);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const Rule* hit = nullptr;
    for (const auto& r : rules) {
      if (r.from.empty() || i + r.from.size() > tokens.size()) continue;
      if (std::equal(r.from.begin(), r.from.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
        hit = &r;
        break;
      }
    }
    if (hit) {
      out.insert(out.end(), hit->to.begin(), hit->to.end());
      i += hit->from.size();
    } else {
      out.push_back(tokens[i++]);
    }
  }
  return join(out, " ");
}

// --- BtConfig ---------------------------------------------------------------

BtConfig BtConfig::for_source(std::string source_language) {
  BtConfig cfg;
  cfg.pivot_language = source_language == "en" ? "de" : "en";
  cfg.source_language = std::move(source_language);
  return cfg;
}

void BtConfig::validate() const {
  if (source_language.empty() || pivot_language.empty()) {
    throw ConfigError("source and pivot languages must be set");
  }
  if (source_language == pivot_language) {
    throw ConfigError("pivot language must differ from the source language");
  }
  if (retry.attempts < 1) throw ConfigError("retry attempts must be >= 1");
}

std::string apply_separator_policy(std::string_view text, SeparatorPolicy policy) {
  std::string out(text);
  if (policy == SeparatorPolicy::Keep) return out;
  const std::string_view sep = " - ";
  std::size_t pos = 0;
  while ((pos = out.find(sep, pos)) != std::string::npos) {
    out.replace(pos, sep.size(), ", ");
    pos += 2;
  }
  return out;
}

// --- BackTranslator ---------------------------------------------------------

BackTranslator::BackTranslator(const TranslationClient& client, BtConfig config)
    : client_(client), config_(std::move(config)) {
  config_.validate();
  if (!client_.supports(config_.source_language, config_.pivot_language) ||
      !client_.supports(config_.pivot_language, config_.source_language)) {
    throw ConfigError(client_.name() + " client does not support " +
                      config_.source_language + "<->" + config_.pivot_language);
  }
}

std::string BackTranslator::translate_cached(const std::string& text,
                                             const std::string& source,
                                             const std::string& target) const {
  auto key = std::make_tuple(text, source, target);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  std::string result = with_retries(config_.retry, [&] {
    ++calls_;
    return client_.translate(text, source, target);
  });
  std::lock_guard lock(mutex_);
  return cache_.try_emplace(std::move(key), std::move(result)).first->second;
}

std::string BackTranslator::round_trip(std::string_view text) const {
  if (trim(text).empty()) throw std::invalid_argument("round_trip: empty text");
  const std::string prepared = apply_separator_policy(text, config_.separator_policy);
  const std::string pivot =
      translate_cached(prepared, config_.source_language, config_.pivot_language);
  return translate_cached(pivot, config_.pivot_language, config_.source_language);
}

std::vector<BtItem> BackTranslator::batch_round_trip(std::span<const std::string> texts) const {
  std::vector<BtItem> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    BtItem item;
    if (trim(t).empty()) {
      item.status = BtItem::Status::Skipped;
      item.error = "empty text";
    } else {
      try {
        item.text = round_trip(t);
      } catch (const std::exception& e) {
        item.status = BtItem::Status::Failed;
        item.error = e.what();
      }
    }
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace depsimp
