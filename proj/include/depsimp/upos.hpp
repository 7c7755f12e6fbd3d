#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace depsimp {

// Universal POS tagset plus an UNK bucket for anything outside it.
enum class Upos : std::uint8_t {
  ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM, PART,
  PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X, UNK
};

inline constexpr std::size_t kUposCount = 18;  // 17 tags + UNK

std::string_view to_string(Upos tag);

// Exact (case-sensitive) lookup; nullopt for anything outside the tagset.
std::optional<Upos> parse_upos(std::string_view s);

// Like parse_upos but maps unknown strings to UNK.
Upos upos_or_unk(std::string_view s);

const std::array<Upos, kUposCount>& all_upos();

}  // namespace depsimp
