#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "depsimp/upos.hpp"

namespace depsimp {

// 1-based token position; 0 denotes the artificial ROOT.
using TokenIndex = int;

struct DepToken {
  TokenIndex index = 0;
  std::string form;
  Upos upos = Upos::UNK;
  TokenIndex head = 0;
  std::string deprel;

  bool operator==(const DepToken&) const = default;
};

// A dependency-parsed sentence. Construction validates the tree (contiguous
// indices, one ROOT attachment, acyclic heads); the object is immutable after.
class DepSentence {
 public:
  // Throws StructureError (tagged with `sentence_no`) on a malformed tree.
  explicit DepSentence(std::vector<DepToken> tokens, std::string text = {},
                       std::size_t sentence_no = 0);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<DepToken>& tokens() const noexcept { return tokens_; }
  const DepToken& token(TokenIndex idx) const;

  // Detokenized text from the "# text" comment, or the forms joined by spaces.
  const std::string& text() const noexcept { return text_; }

  // Forms joined by single spaces, in index order.
  std::string joined_forms() const;

  TokenIndex root() const noexcept { return root_; }

  // Dependents of `idx` in ascending index order.
  std::span<const TokenIndex> children(TokenIndex idx) const;

  // Nodes on the path ROOT-token..idx inclusive; the ROOT-attached token is 1.
  int depth(TokenIndex idx) const;

  int tree_depth() const noexcept { return tree_depth_; }
  std::size_t max_children() const noexcept { return max_children_; }

  // Lowest-index child of the root whose deprel starts with "nsubj".
  std::optional<TokenIndex> root_subject() const;

  int max_depth_of(std::span<const TokenIndex> indices) const;

  bool operator==(const DepSentence& other) const {
    return tokens_ == other.tokens_ && text_ == other.text_;
  }

 private:
  void check_index(TokenIndex idx) const;

  std::vector<DepToken> tokens_;
  std::string text_;
  TokenIndex root_ = 0;
  std::vector<std::vector<TokenIndex>> children_;  // indexed by token index
  std::vector<int> depth_;                          // indexed by token index
  int tree_depth_ = 0;
  std::size_t max_children_ = 0;
};

struct ConlluCorpus {
  std::vector<DepSentence> sentences;
  std::size_t skipped_multiword = 0;  // "3-4" range lines
  std::size_t skipped_empty_nodes = 0;  // "1.1" lines
  std::size_t unknown_upos = 0;  // tags mapped to UNK
};

// Reads CoNLL-U. Throws ParseError for a malformed line and StructureError
// for a block that does not form a tree.
ConlluCorpus parse_conllu(std::istream& in);
ConlluCorpus parse_conllu_file(const std::string& path);

// Writes the five semantic columns; the rest are "_".
void write_conllu(std::ostream& out, std::span<const DepSentence> sentences);

}  // namespace depsimp
