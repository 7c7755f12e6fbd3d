#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace depsimp {

class EmbeddingBackend;

// Characters (code points) of `out` over characters of `orig`.
double compression_ratio(std::string_view orig, std::string_view out);

// 1 when the metric token sequences are identical, else 0.
int exact_copy(std::string_view orig, std::string_view out);

// Sentences split on . ! ? followed by end of text or a capitalised word;
// dotted initialisms ("U.S.") and common abbreviations do not end a sentence.
// Never less than 1.
std::size_t sentence_count(std::string_view text);
double split_ratio(std::string_view orig, std::string_view out);

// Multiset token differences. Empty output: additions 0, deletions 1.
double additions_proportion(std::string_view orig, std::string_view out);
double deletions_proportion(std::string_view orig, std::string_view out);

std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b);

// 1 - distance / max(|orig|, |out|) over code points; 1 for two empty strings.
double levenshtein_similarity(std::string_view orig, std::string_view out);

struct SariScore {
  double sari = 0.0;
  double add = 0.0;
  double keep = 0.0;
  double del = 0.0;
};

// SARI over n-gram orders 1..4 with F1 for add, keep and delete. n-grams are
// sets; the reference side is the union over all references. An order whose
// precision and recall denominators are both empty is left out of that
// operation's average; if only one is empty that statistic is 0. An operation
// with every order left out scores 100. Components and total are in [0, 100].
SariScore sari(std::string_view orig, std::string_view out,
               std::span<const std::string> refs);

struct EvalInstance {
  std::string original;
  std::string system_output;
  std::vector<std::string> references;
};

struct InstanceMetrics {
  double cr = 0.0;
  int cp = 0;
  double split_ratio = 0.0;
  double additions = 0.0;
  double deletions = 0.0;
  double lev_sim = 0.0;
  std::optional<double> sim;
  SariScore sari;
};

struct MetricsReport {
  std::size_t count = 0;
  double cr = 0.0;
  double cp = 0.0;
  double split_ratio = 0.0;
  double additions = 0.0;
  double deletions = 0.0;
  double lev_sim = 0.0;
  std::optional<double> sim;  // only when a backend was supplied
  double sari = 0.0;
  double sari_add = 0.0;
  double sari_keep = 0.0;
  double sari_del = 0.0;
  std::vector<InstanceMetrics> instances;
};

InstanceMetrics evaluate_instance(const EvalInstance& inst, const EmbeddingBackend* backend);

// Corpus means of the per-instance metrics. Throws std::invalid_argument for
// an empty corpus or an instance without references.
MetricsReport evaluate_corpus(std::span<const EvalInstance> instances,
                              const EmbeddingBackend* backend = nullptr);

// Reads orig/sys/ref files (one sentence per line). Throws ConfigError when
// the line counts disagree.
std::vector<EvalInstance> load_eval_corpus(const std::string& orig_path,
                                           const std::string& sys_path,
                                           std::span<const std::string> ref_paths);

std::vector<std::string> read_lines(const std::string& path);

// Fixed-width table with one header row (FL is reported as unavailable).
void write_report_table(std::ostream& out, const MetricsReport& report);

// Single JSON object of corpus-level values.
std::string report_json(const MetricsReport& report);

}  // namespace depsimp
