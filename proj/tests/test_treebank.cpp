#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>

#include "depsimp/errors.hpp"
#include "depsimp/treebank.hpp"
#include "synthetic.hpp"

using namespace depsimp;

namespace {

DepSentence make(std::vector<std::pair<int, const char*>> heads_and_rels,
                 std::vector<Upos> tags = {}) {
  std::vector<DepToken> toks;
  int i = 0;
  for (auto [head, rel] : heads_and_rels) {
    ++i;
    DepToken t;
    t.index = i;
    t.form = "w" + std::to_string(i);
    t.upos = tags.empty() ? Upos::NOUN : tags[static_cast<std::size_t>(i - 1)];
    t.head = head;
    t.deprel = rel;
    toks.push_back(t);
  }
  return DepSentence(toks);
}

// Depth by breadth-first search from the ROOT-attached token.
std::vector<int> bfs_depths(const DepSentence& s) {
  const int n = static_cast<int>(s.size());
  std::vector<int> depth(static_cast<std::size_t>(n + 1), 0);
  std::queue<int> q;
  for (const auto& t : s.tokens()) {
    if (t.head == 0) {
      depth[static_cast<std::size_t>(t.index)] = 1;
      q.push(t.index);
    }
  }
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (const auto& t : s.tokens()) {
      if (t.head == u) {
        depth[static_cast<std::size_t>(t.index)] = depth[static_cast<std::size_t>(u)] + 1;
        q.push(t.index);
      }
    }
  }
  return depth;
}

}  // namespace

TEST_CASE("minimal one-token block") {
  std::istringstream in("1\tHello\thello\tINTJ\t_\t_\t0\troot\t_\t_\n\n");
  auto corpus = parse_conllu(in);
  REQUIRE(corpus.sentences.size() == 1);
  const auto& s = corpus.sentences[0];
  CHECK(s.size() == 1);
  CHECK(s.token(1).head == 0);
  CHECK(s.token(1).upos == Upos::INTJ);
  CHECK(s.root() == 1);
  CHECK(s.text() == "Hello");
}

TEST_CASE("self-loop is a structural error") {
  std::istringstream in(
      "1\tA\ta\tNOUN\t_\t_\t0\troot\t_\t_\n"
      "2\tB\tb\tNOUN\t_\t_\t2\tdep\t_\t_\n\n");
  CHECK_THROWS_AS(parse_conllu(in), StructureError);
}

TEST_CASE("cycles, missing and duplicate roots are structural errors") {
  std::istringstream cycle(
      "1\tA\ta\tNOUN\t_\t_\t0\troot\t_\t_\n"
      "2\tB\tb\tNOUN\t_\t_\t3\tdep\t_\t_\n"
      "3\tC\tc\tNOUN\t_\t_\t2\tdep\t_\t_\n\n");
  CHECK_THROWS_AS(parse_conllu(cycle), StructureError);
  std::istringstream two_roots(
      "1\tA\ta\tNOUN\t_\t_\t0\troot\t_\t_\n"
      "2\tB\tb\tNOUN\t_\t_\t0\troot\t_\t_\n\n");
  CHECK_THROWS_AS(parse_conllu(two_roots), StructureError);
  std::istringstream no_root(
      "1\tA\ta\tNOUN\t_\t_\t2\tdep\t_\t_\n"
      "2\tB\tb\tNOUN\t_\t_\t1\tdep\t_\t_\n\n");
  CHECK_THROWS_AS(parse_conllu(no_root), StructureError);
  std::istringstream gap(
      "1\tA\ta\tNOUN\t_\t_\t0\troot\t_\t_\n"
      "3\tB\tb\tNOUN\t_\t_\t1\tdep\t_\t_\n\n");
  CHECK_THROWS_AS(parse_conllu(gap), StructureError);
}

TEST_CASE("malformed line reports its line number") {
  std::istringstream in(
      "# comment\n"
      "1\tA\ta\tNOUN\t_\t_\t0\troot\t_\t_\n"
      "2\tB\tb\tNOUN\t_\n\n");
  try {
    parse_conllu(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream bad_head("1\tA\ta\tNOUN\t_\t_\tx\troot\t_\t_\n\n");
  CHECK_THROWS_AS(parse_conllu(bad_head), ParseError);
}

TEST_CASE("three-sentence file with comments") {
  const std::string path = std::string(DEPSIMP_TEST_DATA) + "/three_sentences.conllu";
  // Independent count: sentences are blocks whose first token line has ID 1.
  std::ifstream raw(path);
  std::string line;
  std::size_t blocks = 0, comments = 0;
  while (std::getline(raw, line)) {
    if (line.rfind("1\t", 0) == 0) ++blocks;
    if (line.rfind("#", 0) == 0) ++comments;
  }
  REQUIRE(blocks == 3);
  REQUIRE(comments == 6);

  auto corpus = parse_conllu_file(path);
  REQUIRE(corpus.sentences.size() == blocks);
  CHECK(corpus.skipped_multiword == 1);
  CHECK(corpus.unknown_upos == 0);
  CHECK(corpus.sentences[0].text() == "She runs fast.");
  CHECK(corpus.sentences[0].joined_forms() == "She runs fast .");
  CHECK(corpus.sentences[0].root_subject() == 1);
  CHECK_FALSE(corpus.sentences[1].root_subject().has_value());
  CHECK(corpus.sentences[2].size() == 7);
  CHECK(corpus.sentences[2].root() == 6);
  CHECK(corpus.sentences[2].root_subject() == 3);
}

TEST_CASE("empty nodes are skipped and unknown tags counted") {
  std::istringstream in(
      "1\tA\ta\tNOUN\t_\t_\t0\troot\t_\t_\n"
      "1.1\tgone\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "2\tB\tb\tFOO\t_\t_\t1\tdep\t_\t_\n\n");
  auto corpus = parse_conllu(in);
  REQUIRE(corpus.sentences.size() == 1);
  CHECK(corpus.skipped_empty_nodes == 1);
  CHECK(corpus.unknown_upos == 1);
  CHECK(corpus.sentences[0].token(2).upos == Upos::UNK);
}

TEST_CASE("children on chain, star and leaf") {
  auto chain = make({{0, "root"}, {1, "dep"}, {2, "dep"}, {3, "dep"}});
  CHECK(std::vector<TokenIndex>(chain.children(1).begin(), chain.children(1).end()) ==
        std::vector<TokenIndex>{2});
  CHECK(chain.children(4).empty());
  CHECK(chain.depth(1) == 1);
  CHECK(chain.depth(4) == 4);
  CHECK(chain.tree_depth() == 4);

  auto star = make({{0, "root"}, {1, "dep"}, {1, "dep"}, {1, "dep"}});
  auto kids = star.children(1);
  CHECK(std::vector<TokenIndex>(kids.begin(), kids.end()) == std::vector<TokenIndex>{2, 3, 4});
  CHECK(star.max_children() == 3);
  CHECK_THROWS_AS(star.children(0), std::out_of_range);
  CHECK_THROWS_AS(star.children(5), std::out_of_range);
}

TEST_CASE("root subject") {
  auto she_runs = make({{2, "nsubj"}, {0, "root"}});
  CHECK(she_runs.root_subject() == 1);
  auto run = make({{0, "root"}, {1, "punct"}});
  CHECK_FALSE(run.root_subject().has_value());
  auto two = make({{0, "root"}, {1, "obj"}, {1, "nsubj:pass"}, {1, "nsubj"}});
  CHECK(two.root_subject() == 3);
  auto deep = make({{0, "root"}, {1, "obj"}, {2, "nsubj"}});
  CHECK_FALSE(deep.root_subject().has_value());
}

TEST_CASE("max_depth_of") {
  auto chain = make({{0, "root"}, {1, "dep"}, {2, "dep"}, {3, "dep"}, {4, "dep"}});
  std::vector<TokenIndex> root{1};
  CHECK(chain.max_depth_of(root) == 1);
  std::vector<TokenIndex> all{1, 2, 3, 4, 5};
  CHECK(chain.max_depth_of(all) == 5);
  std::vector<TokenIndex> none;
  CHECK_THROWS_AS(chain.max_depth_of(none), std::invalid_argument);
}

TEST_CASE("random trees agree with BFS depth and partition children") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 15);
    auto s = testing::random_tree(rng, n);
    const auto depth = bfs_depths(s);
    std::vector<int> seen(static_cast<std::size_t>(n + 1), 0);
    seen[static_cast<std::size_t>(s.root())]++;
    int deepest = 0;
    for (TokenIndex i = 1; i <= n; ++i) {
      CHECK(s.depth(i) == depth[static_cast<std::size_t>(i)]);
      deepest = std::max(deepest, depth[static_cast<std::size_t>(i)]);
      const auto kids = s.children(i);
      CHECK(std::is_sorted(kids.begin(), kids.end()));
      for (TokenIndex c : kids) {
        seen[static_cast<std::size_t>(c)]++;
        CHECK(s.depth(c) == s.depth(i) + 1);
      }
    }
    CHECK(s.tree_depth() == deepest);
    for (TokenIndex i = 1; i <= n; ++i) CHECK(seen[static_cast<std::size_t>(i)] == 1);

    std::vector<TokenIndex> subset;
    for (TokenIndex i = 1; i <= n; ++i) {
      if (rng() % 2) subset.push_back(i);
    }
    if (subset.empty()) subset.push_back(1);
    int expect = 0;
    for (TokenIndex i : subset) expect = std::max(expect, depth[static_cast<std::size_t>(i)]);
    CHECK(s.max_depth_of(subset) == expect);
  }
}

TEST_CASE("write then parse round-trips") {
  auto corpus = testing::synthetic_corpus(11, 50, 1, 20);
  std::ostringstream out;
  write_conllu(out, corpus);
  std::istringstream in(out.str());
  auto back = parse_conllu(in);
  REQUIRE(back.sentences.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(back.sentences[i] == corpus[i]);

  auto file = parse_conllu_file(std::string(DEPSIMP_TEST_DATA) + "/three_sentences.conllu");
  std::ostringstream again;
  write_conllu(again, file.sentences);
  std::istringstream in2(again.str());
  auto back2 = parse_conllu(in2);
  REQUIRE(back2.sentences.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back2.sentences[i] == file.sentences[i]);
}
