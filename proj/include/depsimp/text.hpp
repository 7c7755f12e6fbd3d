#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace depsimp {

// Splits on ASCII whitespace; no empty pieces.
std::vector<std::string> split_whitespace(std::string_view text);

std::string join(std::span<const std::string> parts, std::string_view sep);

std::string trim(std::string_view text);

std::string ascii_lower(std::string_view text);

// Decodes UTF-8 into code points. Invalid bytes decode as U+FFFD, one per byte.
std::u32string utf8_decode(std::string_view text);

std::size_t utf8_length(std::string_view text);

// Word tokenization shared by the word-level metrics: lowercase, split on
// whitespace, then peel trailing punctuation (. , ! ? ; :) into separate
// tokens. Tokens that are punctuation only are kept whole.
std::vector<std::string> metric_tokens(std::string_view text);

}  // namespace depsimp
