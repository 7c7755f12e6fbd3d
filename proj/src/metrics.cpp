#include "depsimp/metrics.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "depsimp/errors.hpp"
#include "depsimp/similarity.hpp"
#include "depsimp/text.hpp"

namespace depsimp {
namespace {

constexpr int kSariMaxOrder = 4;

std::map<std::string, int> bag(const std::vector<std::string>& tokens) {
  std::map<std::string, int> m;
  for (const auto& t : tokens) ++m[t];
  return m;
}

// |a \ b| as multisets.
std::size_t multiset_minus(const std::map<std::string, int>& a,
                           const std::map<std::string, int>& b) {
  std::size_t n = 0;
  for (const auto& [tok, count] : a) {
    auto it = b.find(tok);
    const int other = it == b.end() ? 0 : it->second;
    if (count > other) n += static_cast<std::size_t>(count - other);
  }
  return n;
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

bool is_abbreviation(std::string_view tok) {
  static const std::set<std::string, std::less<>> kKnown = {
      "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.", "vs.", "etc.",
      "inc.", "ltd.", "co.", "no.", "gen.", "gov.", "sen.", "rep.", "mt.", "jan.",
      "feb.", "aug.", "sept.", "oct.", "nov.", "dec."};
  if (kKnown.contains(ascii_lower(tok))) return true;
  // Dotted initialisms: one letter then '.', repeated at least twice.
  if (tok.size() < 4 || tok.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < tok.size(); i += 2) {
    const char c = tok[i];
    const bool letter = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (!letter || tok[i + 1] != '.') return false;
  }
  return true;
}

using NgramSet = std::set<std::vector<std::string>>;

NgramSet ngrams(const std::vector<std::string>& tokens, int n) {
  NgramSet out;
  const auto len = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
    out.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
  }
  return out;
}

struct OpCounts {
  std::size_t good = 0;
  std::size_t precision_den = 0;
  std::size_t recall_den = 0;
};

// F1 at one order, or nullopt when the order is left out.
std::optional<double> op_f1(const OpCounts& c) {
  if (c.precision_den == 0 && c.recall_den == 0) return std::nullopt;
  const double p = c.precision_den ? static_cast<double>(c.good) / static_cast<double>(c.precision_den) : 0.0;
  const double r = c.recall_den ? static_cast<double>(c.good) / static_cast<double>(c.recall_den) : 0.0;
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double mean_or_full(const std::vector<double>& xs) {
  if (xs.empty()) return 100.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return 100.0 * s / static_cast<double>(xs.size());
}

}  // namespace

double compression_ratio(std::string_view orig, std::string_view out) {
  const std::size_t denom = utf8_length(orig);
  if (denom == 0) throw std::invalid_argument("compression_ratio: empty original");
  return static_cast<double>(utf8_length(out)) / static_cast<double>(denom);
}

int exact_copy(std::string_view orig, std::string_view out) {
  return metric_tokens(orig) == metric_tokens(out) ? 1 : 0;
}

std::size_t sentence_count(std::string_view text) {
  const auto words = split_whitespace(text);
  std::size_t count = 0;
  bool open = false;
  for (std::size_t i = 0; i < words.size(); ++i) {
    open = true;
    const std::string& w = words[i];
    const char last = w.back();
    if (last != '.' && last != '!' && last != '?') continue;
    if (last == '.' && is_abbreviation(w)) continue;
    const bool at_end = i + 1 == words.size();
    if (at_end || is_upper(words[i + 1].front()) || words[i + 1].front() == '"') {
      ++count;
      open = false;
    }
  }
  if (open) ++count;
  return std::max<std::size_t>(count, 1);
}

double split_ratio(std::string_view orig, std::string_view out) {
  return static_cast<double>(sentence_count(out)) / static_cast<double>(sentence_count(orig));
}

double additions_proportion(std::string_view orig, std::string_view out) {
  const auto out_tokens = metric_tokens(out);
  if (out_tokens.empty()) return 0.0;
  return static_cast<double>(multiset_minus(bag(out_tokens), bag(metric_tokens(orig)))) /
         static_cast<double>(out_tokens.size());
}

double deletions_proportion(std::string_view orig, std::string_view out) {
  const auto orig_tokens = metric_tokens(orig);
  const auto out_tokens = metric_tokens(out);
  if (out_tokens.empty()) return 1.0;
  if (orig_tokens.empty()) return 0.0;
  return static_cast<double>(multiset_minus(bag(orig_tokens), bag(out_tokens))) /
         static_cast<double>(orig_tokens.size());
}

std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double levenshtein_similarity(std::string_view orig, std::string_view out) {
  const auto a = utf8_decode(orig);
  const auto b = utf8_decode(out);
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein_distance(a, b)) / static_cast<double>(longest);
}

SariScore sari(std::string_view orig, std::string_view out, std::span<const std::string> refs) {
  if (refs.empty()) throw std::invalid_argument("sari: no references");
  const auto orig_tokens = metric_tokens(orig);
  const auto out_tokens = metric_tokens(out);
  std::vector<std::vector<std::string>> ref_tokens;
  for (const auto& r : refs) ref_tokens.push_back(metric_tokens(r));

  std::vector<double> add_f, keep_f, del_f;
  for (int n = 1; n <= kSariMaxOrder; ++n) {
    const NgramSet in = ngrams(orig_tokens, n);
    const NgramSet sys = ngrams(out_tokens, n);
    NgramSet ref;
    for (const auto& rt : ref_tokens) ref.merge(ngrams(rt, n));

    OpCounts add, keep, del;
    for (const auto& g : sys) {
      if (in.contains(g)) {
        ++keep.precision_den;
        if (ref.contains(g)) ++keep.good;
      } else {
        ++add.precision_den;
        if (ref.contains(g)) ++add.good;
      }
    }
    for (const auto& g : ref) {
      if (in.contains(g)) ++keep.recall_den;
      else ++add.recall_den;
    }
    for (const auto& g : in) {
      if (!ref.contains(g)) ++del.recall_den;
      if (!sys.contains(g)) {
        ++del.precision_den;
        if (!ref.contains(g)) ++del.good;
      }
    }
    if (auto f = op_f1(add)) add_f.push_back(*f);
    if (auto f = op_f1(keep)) keep_f.push_back(*f);
    if (auto f = op_f1(del)) del_f.push_back(*f);
  }

  SariScore s;
  s.add = mean_or_full(add_f);
  s.keep = mean_or_full(keep_f);
  s.del = mean_or_full(del_f);
  s.sari = (s.add + s.keep + s.del) / 3.0;
  return s;
}

InstanceMetrics evaluate_instance(const EvalInstance& inst, const EmbeddingBackend* backend) {
  if (inst.references.empty()) throw std::invalid_argument("instance without references");
  InstanceMetrics m;
  m.cr = compression_ratio(inst.original, inst.system_output);
  m.cp = exact_copy(inst.original, inst.system_output);
  m.split_ratio = split_ratio(inst.original, inst.system_output);
  m.additions = additions_proportion(inst.original, inst.system_output);
  m.deletions = deletions_proportion(inst.original, inst.system_output);
  m.lev_sim = levenshtein_similarity(inst.original, inst.system_output);
  if (backend) {
    m.sim = trim(inst.system_output).empty()
                ? 0.0
                : similarity_score(*backend, inst.original, inst.system_output);
  }
  m.sari = sari(inst.original, inst.system_output, inst.references);
  return m;
}

MetricsReport evaluate_corpus(std::span<const EvalInstance> instances,
                              const EmbeddingBackend* backend) {
  if (instances.empty()) throw std::invalid_argument("evaluate_corpus: empty corpus");
  MetricsReport r;
  r.count = instances.size();
  double sim_sum = 0.0;
  for (const auto& inst : instances) {
    InstanceMetrics m = evaluate_instance(inst, backend);
    r.cr += m.cr;
    r.cp += m.cp;
    r.split_ratio += m.split_ratio;
    r.additions += m.additions;
    r.deletions += m.deletions;
    r.lev_sim += m.lev_sim;
    if (m.sim) sim_sum += *m.sim;
    r.sari += m.sari.sari;
    r.sari_add += m.sari.add;
    r.sari_keep += m.sari.keep;
    r.sari_del += m.sari.del;
    r.instances.push_back(m);
  }
  const auto n = static_cast<double>(r.count);
  for (double* field : {&r.cr, &r.cp, &r.split_ratio, &r.additions, &r.deletions, &r.lev_sim,
                        &r.sari, &r.sari_add, &r.sari_keep, &r.sari_del}) {
    *field /= n;
  }
  if (backend) r.sim = sim_sum / n;
  return r;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<EvalInstance> load_eval_corpus(const std::string& orig_path,
                                           const std::string& sys_path,
                                           std::span<const std::string> ref_paths) {
  if (ref_paths.empty()) throw ConfigError("at least one reference file is required");
  const auto orig = read_lines(orig_path);
  const auto sys = read_lines(sys_path);
  if (sys.size() != orig.size()) {
    throw ConfigError("line count mismatch: " + orig_path + " has " +
                      std::to_string(orig.size()) + " lines, " + sys_path + " has " +
                      std::to_string(sys.size()));
  }
  std::vector<std::vector<std::string>> refs;
  for (const auto& p : ref_paths) {
    refs.push_back(read_lines(p));
    if (refs.back().size() != orig.size()) {
      throw ConfigError("line count mismatch: " + p + " has " +
                        std::to_string(refs.back().size()) + " lines, expected " +
                        std::to_string(orig.size()));
    }
  }
  std::vector<EvalInstance> out(orig.size());
  for (std::size_t i = 0; i < orig.size(); ++i) {
    out[i].original = orig[i];
    out[i].system_output = sys[i];
    for (const auto& r : refs) out[i].references.push_back(r[i]);
  }
  return out;
}

void write_report_table(std::ostream& out, const MetricsReport& r) {
  const std::array<const char*, 11> header = {"CR", "CP", "%SP", "%A", "%D", "FL",
                                              "SIM", "SARI", "Add", "Keep", "Del"};
  for (const char* h : header) out << std::setw(8) << h;
  out << '\n' << std::fixed;
  out << std::setw(8) << std::setprecision(2) << r.cr << std::setw(8) << r.cp << std::setw(8)
      << r.split_ratio << std::setw(8) << r.additions << std::setw(8) << r.deletions
      << std::setw(8) << "n/a";
  if (r.sim) out << std::setw(8) << *r.sim;
  else out << std::setw(8) << "n/a";
  out << std::setw(8) << r.sari << std::setw(8) << r.sari_add << std::setw(8) << r.sari_keep
      << std::setw(8) << r.sari_del << '\n';
  out << std::defaultfloat;
}

std::string report_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["instances"] = r.count;
  j["cr"] = r.cr;
  j["cp"] = r.cp;
  j["split_ratio"] = r.split_ratio;
  j["additions"] = r.additions;
  j["deletions"] = r.deletions;
  j["lev_sim"] = r.lev_sim;
  j["fl"] = "unavailable";
  if (r.sim) j["sim"] = *r.sim;
  else j["sim"] = nullptr;
  j["sari"] = r.sari;
  j["sari_add"] = r.sari_add;
  j["sari_keep"] = r.sari_keep;
  j["sari_del"] = r.sari_del;
  return j.dump(2);
}

}  // namespace depsimp
