#include "depsimp/treebank.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "depsimp/errors.hpp"
#include "depsimp/text.hpp"

namespace depsimp {

DepSentence::DepSentence(std::vector<DepToken> tokens, std::string text,
                         std::size_t sentence_no)
    : tokens_(std::move(tokens)) {
  const auto n = static_cast<TokenIndex>(tokens_.size());
  if (n == 0) throw StructureError(sentence_no, "empty sentence");

  children_.assign(static_cast<std::size_t>(n) + 1, {});
  for (TokenIndex i = 1; i <= n; ++i) {
    const DepToken& t = tokens_[static_cast<std::size_t>(i - 1)];
    if (t.index != i) {
      throw StructureError(sentence_no, "token indices are not contiguous at " +
                                            std::to_string(i));
    }
    if (t.head < 0 || t.head > n) {
      throw StructureError(sentence_no, "head " + std::to_string(t.head) +
                                            " out of range for token " +
                                            std::to_string(i));
    }
    if (t.head == i) {
      throw StructureError(sentence_no,
                           "token " + std::to_string(i) + " is its own head");
    }
    if (t.head == 0) {
      if (root_ != 0) throw StructureError(sentence_no, "multiple ROOT tokens");
      root_ = i;
    } else {
      children_[static_cast<std::size_t>(t.head)].push_back(i);
    }
  }
  if (root_ == 0) throw StructureError(sentence_no, "no ROOT token");

  // Depths by walking up; a walk longer than n means a cycle.
  depth_.assign(static_cast<std::size_t>(n) + 1, 0);
  depth_[static_cast<std::size_t>(root_)] = 1;
  for (TokenIndex i = 1; i <= n; ++i) {
    std::vector<TokenIndex> path;
    TokenIndex cur = i;
    while (depth_[static_cast<std::size_t>(cur)] == 0) {
      path.push_back(cur);
      if (static_cast<TokenIndex>(path.size()) > n) {
        throw StructureError(sentence_no, "cyclic head graph");
      }
      cur = tokens_[static_cast<std::size_t>(cur - 1)].head;
      if (cur == 0) throw StructureError(sentence_no, "cyclic head graph");
    }
    int d = depth_[static_cast<std::size_t>(cur)];
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      depth_[static_cast<std::size_t>(*it)] = ++d;
    }
  }
  tree_depth_ = *std::max_element(depth_.begin() + 1, depth_.end());
  for (const auto& c : children_) max_children_ = std::max(max_children_, c.size());

  text_ = text.empty() ? joined_forms() : std::move(text);
}

void DepSentence::check_index(TokenIndex idx) const {
  if (idx < 1 || idx > static_cast<TokenIndex>(tokens_.size())) {
    throw std::out_of_range("token index " + std::to_string(idx) +
                            " outside 1.." + std::to_string(tokens_.size()));
  }
}

const DepToken& DepSentence::token(TokenIndex idx) const {
  check_index(idx);
  return tokens_[static_cast<std::size_t>(idx - 1)];
}

std::string DepSentence::joined_forms() const {
  std::string out;
  for (const auto& t : tokens_) {
    if (!out.empty()) out += ' ';
    out += t.form;
  }
  return out;
}

std::span<const TokenIndex> DepSentence::children(TokenIndex idx) const {
  check_index(idx);
  return children_[static_cast<std::size_t>(idx)];
}

int DepSentence::depth(TokenIndex idx) const {
  check_index(idx);
  return depth_[static_cast<std::size_t>(idx)];
}

std::optional<TokenIndex> DepSentence::root_subject() const {
  for (TokenIndex c : children_[static_cast<std::size_t>(root_)]) {
    if (tokens_[static_cast<std::size_t>(c - 1)].deprel.starts_with("nsubj")) {
      return c;
    }
  }
  return std::nullopt;
}

int DepSentence::max_depth_of(std::span<const TokenIndex> indices) const {
  if (indices.empty()) throw std::invalid_argument("max_depth_of: empty index set");
  int best = 0;
  for (TokenIndex i : indices) best = std::max(best, depth(i));
  return best;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

struct Block {
  std::vector<DepToken> tokens;
  std::string text;
  std::size_t first_line = 0;
};

}  // namespace

ConlluCorpus parse_conllu(std::istream& in) {
  ConlluCorpus corpus;
  Block block;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (block.tokens.empty()) {
      block = Block{};
      return;
    }
    corpus.sentences.emplace_back(std::move(block.tokens), std::move(block.text),
                                  corpus.sentences.size() + 1);
    block = Block{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      std::string_view body(line);
      body.remove_prefix(1);
      std::string t = trim(body);
      if (t.starts_with("text") ) {
        auto eq = t.find('=');
        if (eq != std::string::npos && trim(t.substr(0, eq)) == "text") {
          block.text = trim(std::string_view(t).substr(eq + 1));
        }
      }
      continue;
    }
    if (block.tokens.empty()) block.first_line = line_no;

    auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw ParseError(line_no, "expected 10 tab-separated columns, got " +
                                    std::to_string(cols.size()));
    }
    std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos) {
      ++corpus.skipped_multiword;
      continue;
    }
    if (id.find('.') != std::string_view::npos) {
      ++corpus.skipped_empty_nodes;
      continue;
    }
    DepToken tok;
    if (!parse_int(id, tok.index) || tok.index < 1) {
      throw ParseError(line_no, "bad token id '" + std::string(id) + "'");
    }
    if (!parse_int(cols[6], tok.head) || tok.head < 0) {
      throw ParseError(line_no, "bad head '" + std::string(cols[6]) + "'");
    }
    tok.form = std::string(cols[1]);
    if (tok.form.empty()) throw ParseError(line_no, "empty FORM");
    auto tag = parse_upos(cols[3]);
    if (!tag) ++corpus.unknown_upos;
    tok.upos = tag.value_or(Upos::UNK);
    tok.deprel = std::string(cols[7]);
    block.tokens.push_back(std::move(tok));
  }
  flush();
  return corpus;
}

ConlluCorpus parse_conllu_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_conllu(in);
}

void write_conllu(std::ostream& out, std::span<const DepSentence> sentences) {
  for (const auto& s : sentences) {
    out << "# text = " << s.text() << '\n';
    for (const auto& t : s.tokens()) {
      out << t.index << '\t' << t.form << "\t_\t" << to_string(t.upos)
          << "\t_\t_\t" << t.head << '\t' << t.deprel << "\t_\t_\n";
    }
    out << '\n';
  }
}

}  // namespace depsimp
