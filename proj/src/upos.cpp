#include "depsimp/upos.hpp"

namespace depsimp {
namespace {

constexpr std::array<std::string_view, kUposCount> kNames = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X", "UNK"};

constexpr std::array<Upos, kUposCount> make_all() {
  std::array<Upos, kUposCount> out{};
  for (std::size_t i = 0; i < kUposCount; ++i) out[i] = static_cast<Upos>(i);
  return out;
}

constexpr std::array<Upos, kUposCount> kAll = make_all();

}  // namespace

std::string_view to_string(Upos tag) {
  return kNames[static_cast<std::size_t>(tag)];
}

std::optional<Upos> parse_upos(std::string_view s) {
  for (std::size_t i = 0; i < kUposCount; ++i) {
    if (kNames[i] == s) return static_cast<Upos>(i);
  }
  return std::nullopt;
}

Upos upos_or_unk(std::string_view s) {
  return parse_upos(s).value_or(Upos::UNK);
}

const std::array<Upos, kUposCount>& all_upos() { return kAll; }

}  // namespace depsimp
