#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "depsimp/analysis.hpp"
#include "depsimp/backtranslate.hpp"
#include "depsimp/decoder.hpp"
#include "depsimp/errors.hpp"
#include "depsimp/fluency.hpp"
#include "depsimp/metrics.hpp"
#include "depsimp/similarity.hpp"
#include "depsimp/text.hpp"
#include "depsimp/treebank.hpp"

namespace depsimp::cli {
namespace {

using nlohmann::ordered_json;

struct BackendOptions {
  std::string kind = "hash";
  std::string vectors;
  std::string embed_url;
  std::size_t hash_dim = 512;
  int timeout_ms = 30000;
};

struct BtOptions {
  std::string mode = "off";
  std::string dict;
  std::string source = "en";
  std::string pivot;  // empty: default for the source language
  std::string sep_policy = "strip";
  std::string url;
  int timeout_ms = 30000;
};

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

void add_decoder_flags(CLI::App* app, DecoderConfig& cfg) {
  app->add_option("--alpha", cfg.alpha, "Fluency weight")->capture_default_str();
  app->add_option("--tau", cfg.tau, "Similarity threshold")->capture_default_str();
  app->add_option("--lambda", cfg.lambda_ratio, "Minimum output/input length ratio")
      ->capture_default_str();
  app->add_option("--beam", cfg.beam_size, "Beam size")->capture_default_str();
}

void add_backend_flags(CLI::App* app, BackendOptions& b, bool allow_none) {
  std::vector<std::string> kinds{"hash", "wordvec", "http"};
  if (allow_none) kinds.insert(kinds.begin(), "none");
  app->add_option("--backend", b.kind, "Embedding backend")
      ->check(CLI::IsMember(kinds))
      ->capture_default_str();
  app->add_option("--vectors", b.vectors, "Word-vector file for --backend wordvec");
  app->add_option("--embed-url", b.embed_url,
                  "Embedding service URL for --backend http (env DEPSIMP_EMBED_URL)");
  app->add_option("--hash-dim", b.hash_dim, "Dimension of the hashing backend")
      ->capture_default_str();
  app->add_option("--embed-timeout-ms", b.timeout_ms, "Embedding request timeout")
      ->capture_default_str();
}

void add_bt_flags(CLI::App* app, BtOptions& b) {
  app->add_option("--bt", b.mode, "Back-translation client")
      ->check(CLI::IsMember({"off", "identity", "dict", "http"}))
      ->capture_default_str();
  app->add_option("--bt-dict", b.dict, "Phrase table (TSV source/pivot/back) for --bt dict");
  app->add_option("--source-lang", b.source, "Language of the input")->capture_default_str();
  app->add_option("--pivot", b.pivot, "Pivot language (default: de for en, else en)");
  app->add_option("--sep-policy", b.sep_policy, "Chunk separators before translation")
      ->check(CLI::IsMember({"strip", "keep"}))
      ->capture_default_str();
  app->add_option("--translate-url", b.url,
                  "Translation service URL for --bt http (env DEPSIMP_TRANSLATE_URL)");
  app->add_option("--translate-timeout-ms", b.timeout_ms, "Translation request timeout")
      ->capture_default_str();
}

// Splits "http://host:port/path" into base URL and path.
std::pair<std::string, std::string> split_url(const std::string& url,
                                              const std::string& default_path) {
  const auto scheme = url.find("://");
  const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) return {url, default_path};
  return {url.substr(0, slash), url.substr(slash)};
}

// Owns the configured backend plus an optional cache in front of it.
struct BackendHandle {
  std::unique_ptr<EmbeddingBackend> inner;
  std::unique_ptr<CachingBackend> cache;
  const EmbeddingBackend* get() const {
    return cache ? static_cast<const EmbeddingBackend*>(cache.get()) : inner.get();
  }
};

BackendHandle make_backend(const BackendOptions& b) {
  BackendHandle h;
  if (b.kind == "none") return h;
  if (b.kind == "hash") {
    h.inner = std::make_unique<HashingBackend>(b.hash_dim);
  } else if (b.kind == "wordvec") {
    if (b.vectors.empty()) throw ConfigError("--backend wordvec needs --vectors");
    h.inner = std::make_unique<WordVectorBackend>(WordVectorBackend::load_file(b.vectors));
  } else {
    const std::string url = b.embed_url.empty() ? env_or("DEPSIMP_EMBED_URL", "") : b.embed_url;
    if (url.empty()) throw ConfigError("--backend http needs --embed-url or DEPSIMP_EMBED_URL");
    HttpEmbeddingConfig cfg;
    std::tie(cfg.base_url, cfg.path) = split_url(url, "/embed");
    cfg.timeout = std::chrono::milliseconds(b.timeout_ms);
    h.inner = std::make_unique<HttpEmbeddingBackend>(cfg);
    h.cache = std::make_unique<CachingBackend>(*h.inner);
  }
  return h;
}

struct BtHandle {
  std::unique_ptr<TranslationClient> client;
  std::unique_ptr<BackTranslator> translator;
};

BtHandle make_back_translator(const BtOptions& b) {
  BtHandle h;
  if (b.mode == "off") return h;
  BtConfig cfg = BtConfig::for_source(b.source);
  if (!b.pivot.empty()) cfg.pivot_language = b.pivot;
  cfg.separator_policy = b.sep_policy == "keep" ? SeparatorPolicy::Keep : SeparatorPolicy::Strip;
  if (b.mode == "identity") {
    h.client = std::make_unique<IdentityClient>();
  } else if (b.mode == "dict") {
    if (b.dict.empty()) throw ConfigError("--bt dict needs --bt-dict");
    h.client = std::make_unique<DictionaryClient>(
        DictionaryClient::load_file(b.dict, cfg.source_language, cfg.pivot_language));
  } else {
    const std::string url = b.url.empty() ? env_or("DEPSIMP_TRANSLATE_URL", "") : b.url;
    if (url.empty()) throw ConfigError("--bt http needs --translate-url or DEPSIMP_TRANSLATE_URL");
    HttpTranslationConfig cfg_http;
    std::tie(cfg_http.base_url, cfg_http.path) = split_url(url, "/translate");
    cfg_http.api_key = env_or("DEPSIMP_TRANSLATE_KEY", "");
    cfg_http.timeout = std::chrono::milliseconds(b.timeout_ms);
    h.client = std::make_unique<HttpTranslationClient>(cfg_http);
  }
  h.translator = std::make_unique<BackTranslator>(*h.client, cfg);
  return h;
}

PosLanguageModel load_lm(const std::string& path, std::ostream& err) {
  if (path.empty()) {
    err << "note: no --lm given, fluency uses a uniform POS model\n";
    return PosLanguageModel();
  }
  return PosLanguageModel::load_file(path);
}

template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct SentenceOutcome {
  bool ok = false;
  SimplificationResult result;
  std::string output;  // final text written to the output file
  std::string error;
  std::optional<BtItem> bt;
};

std::vector<SentenceOutcome> simplify_corpus(const std::vector<DepSentence>& sentences,
                                             const DecoderConfig& cfg,
                                             const PosLanguageModel& lm,
                                             const EmbeddingBackend& backend,
                                             const BackTranslator* bt, int jobs) {
  std::vector<SentenceOutcome> outcomes(sentences.size());
  parallel_for(sentences.size(), jobs, [&](std::size_t i) {
    SentenceOutcome& o = outcomes[i];
    try {
      o.result = simplify(cfg, sentences[i], lm, backend);
      o.output = o.result.surface;
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
      o.output = sentences[i].joined_forms();
      return;
    }
    if (bt) {
      std::vector<std::string> one{o.output};
      o.bt = bt->batch_round_trip(one).front();
      if (o.bt->status == BtItem::Status::Ok) {
        o.output = o.bt->text;
      } else {
        o.ok = false;
        o.error = "back-translation: " + o.bt->error;
      }
    }
  });
  return outcomes;
}

const char* bt_status_name(BtItem::Status s) {
  switch (s) {
    case BtItem::Status::Ok: return "ok";
    case BtItem::Status::Skipped: return "skipped";
    case BtItem::Status::Failed: return "failed";
  }
  return "unknown";
}

ordered_json sidecar_record(std::size_t index, const SentenceOutcome& o) {
  ordered_json j;
  j["index"] = index;
  j["status"] = o.ok ? "ok" : "error";
  if (!o.error.empty()) j["error"] = o.error;
  if (!o.result.selected.empty()) {
    j["phase1"] = o.result.surface;
    j["reason"] = to_string(o.result.reason);
    j["sim"] = o.result.score.sim;
    j["flu"] = o.result.score.flu;
    j["depth"] = o.result.score.depth;
    j["total"] = o.result.score.total;
    j["selected"] = o.result.selected;
    j["hypotheses_scored"] = o.result.counters.hypotheses_scored;
    j["steps"] = o.result.counters.steps;
    j["chunks"] = o.result.counters.chunks_created;
  }
  if (o.bt) j["bt_status"] = bt_status_name(o.bt->status);
  j["output"] = o.output;
  return j;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << std::setprecision(17);
  return f;
}

// --- subcommands ------------------------------------------------------------

struct TrainLmArgs {
  std::string corpus;
  int order = 4;
  double discount = 0.75;
  std::string out;
};

int cmd_train_lm(const TrainLmArgs& a, std::ostream& out, std::ostream&) {
  std::ifstream in(a.corpus);
  if (!in) throw std::runtime_error("cannot open " + a.corpus);
  std::size_t unknown = 0;
  const auto corpus = read_pos_corpus(in, &unknown);
  const auto lm = train_pos_lm(corpus, a.order, a.discount);
  lm.save_file(a.out);

  out << "trained order-" << lm.order() << " POS model on " << corpus.size()
      << " sequences (discount " << lm.discount() << ")\n";
  out << "tagset:";
  for (Upos t : all_upos()) out << ' ' << to_string(t);
  out << " EOS BOS\n";
  if (unknown) out << "unknown tags mapped to UNK: " << unknown << '\n';
  const auto types = lm.ngram_type_counts();
  for (std::size_t m = 0; m < types.size(); ++m) {
    out << "  " << (m + 1) << "-gram types: " << types[m] << '\n';
  }

  // Normalization probe over contexts drawn from the training data.
  double worst = 0.0;
  std::size_t probes = 0;
  for (std::size_t s = 0; s < corpus.size() && probes < 50; s += std::max<std::size_t>(1, corpus.size() / 50)) {
    std::vector<PosLanguageModel::Symbol> ctx;
    for (Upos t : corpus[s]) ctx.push_back(static_cast<PosLanguageModel::Symbol>(t));
    double sum = 0.0;
    for (PosLanguageModel::Symbol w = 0; w < PosLanguageModel::kOutcomes; ++w) sum += lm.prob(w, ctx);
    worst = std::max(worst, std::abs(sum - 1.0));
    ++probes;
  }
  out << "normalization probe: " << probes << " contexts, max |sum-1| = " << worst << '\n';
  return worst <= 1e-6 ? kOk : kPartialFailure;
}

struct SimplifyArgs {
  std::string input;
  std::string out;
  std::string sidecar;
  std::string lm;
  int jobs = 1;
};

int cmd_simplify(const SimplifyArgs& a, const DecoderConfig& cfg, const BackendOptions& bo,
                 const BtOptions& bto, std::ostream& out, std::ostream& err) {
  cfg.validate();
  const auto corpus = parse_conllu_file(a.input);
  const auto lm = load_lm(a.lm, err);
  const auto backend = make_backend(bo);
  const auto bt = make_back_translator(bto);

  const auto outcomes =
      simplify_corpus(corpus.sentences, cfg, lm, *backend.get(), bt.translator.get(), a.jobs);

  auto text_out = open_out(a.out);
  auto side_out = open_out(a.sidecar.empty() ? a.out + ".jsonl" : a.sidecar);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    text_out << outcomes[i].output << '\n';
    side_out << sidecar_record(i, outcomes[i]).dump() << '\n';
    if (!outcomes[i].ok) {
      ++failures;
      err << "sentence " << (i + 1) << ": " << outcomes[i].error << '\n';
    }
  }
  out << "simplified " << outcomes.size() - failures << "/" << outcomes.size()
      << " sentences -> " << a.out << '\n';
  return failures ? kPartialFailure : kOk;
}

struct EvaluateArgs {
  std::string orig;
  std::string sys;
  std::vector<std::string> refs;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& a, const BackendOptions& bo, std::ostream& out,
                 std::ostream&) {
  const auto instances = load_eval_corpus(a.orig, a.sys, a.refs);
  const auto backend = make_backend(bo);
  const auto report = evaluate_corpus(instances, backend.get());
  write_report_table(out, report);
  if (!a.out.empty()) open_out(a.out) << report_json(report) << '\n';
  return kOk;
}

struct SweepArgs {
  std::string input;
  std::vector<double> taus{0.70, 0.80, 0.90, 0.95};
  std::vector<double> lambdas{0.5};
  std::vector<std::string> refs;
  std::string lm;
  std::string out;
  std::string outputs_dir;
  int jobs = 1;
};

std::string cell_name(double tau, double lambda) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << "tau" << tau << "_lambda" << lambda;
  return s.str();
}

int cmd_sweep(const SweepArgs& a, const DecoderConfig& base, const BackendOptions& bo,
              std::ostream& out, std::ostream& err) {
  const auto corpus = parse_conllu_file(a.input);
  const auto lm = load_lm(a.lm, err);
  const auto backend = make_backend(bo);
  const auto& sents = corpus.sentences;

  std::vector<std::vector<std::string>> refs;
  for (const auto& p : a.refs) {
    refs.push_back(read_lines(p));
    if (refs.back().size() != sents.size()) {
      throw ConfigError("line count mismatch: " + p + " has " + std::to_string(refs.back().size()) +
                        " lines, input has " + std::to_string(sents.size()) + " sentences");
    }
  }
  if (!a.outputs_dir.empty()) std::filesystem::create_directories(a.outputs_dir);

  std::ostringstream table;
  table << "tau\tlambda\tCR\t%D\tSARI\tSIM\tmean_tokens\n";
  std::size_t failures = 0;
  for (double lambda : a.lambdas) {
    for (double tau : a.taus) {
      DecoderConfig cfg = base;
      cfg.tau = tau;
      cfg.lambda_ratio = lambda;
      cfg.validate();
      const auto outcomes = simplify_corpus(sents, cfg, lm, *backend.get(), nullptr, a.jobs);
      double cr = 0, del = 0, sim = 0, sari_sum = 0, tokens = 0;
      std::optional<std::ofstream> cell_out;
      if (!a.outputs_dir.empty()) {
        cell_out = open_out((std::filesystem::path(a.outputs_dir) / (cell_name(tau, lambda) + ".txt")).string());
      }
      for (std::size_t i = 0; i < sents.size(); ++i) {
        const auto& o = outcomes[i];
        if (!o.ok) ++failures;
        const std::string orig = sents[i].joined_forms();
        cr += compression_ratio(orig, o.output);
        del += deletions_proportion(orig, o.output);
        sim += similarity_score(*backend.get(), orig, o.output);
        tokens += static_cast<double>(o.ok ? o.result.selected.size() : sents[i].size());
        if (!refs.empty()) {
          std::vector<std::string> r;
          for (const auto& file : refs) r.push_back(file[i]);
          sari_sum += sari(orig, o.output, r).sari;
        }
        if (cell_out) *cell_out << o.output << '\n';
      }
      const auto n = static_cast<double>(sents.size());
      table << std::fixed << std::setprecision(2) << tau << '\t' << lambda << '\t'
            << std::setprecision(4) << cr / n << '\t' << del / n << '\t';
      if (refs.empty()) table << "n/a";
      else table << std::setprecision(2) << sari_sum / n;
      table << '\t' << std::setprecision(4) << sim / n << '\t' << tokens / n << '\n';
    }
  }
  out << table.str();
  if (!a.out.empty()) open_out(a.out) << table.str();
  return failures ? kPartialFailure : kOk;
}

struct AnalyzeArgs {
  std::string input;
  std::string out;
  std::string tsv;
};

int cmd_analyze(const AnalyzeArgs& a, const BackendOptions& bo, std::ostream& out,
                std::ostream&) {
  const auto corpus = parse_conllu_file(a.input);
  const auto backend = make_backend(bo);
  const auto profile = aggregate_profile(corpus.sentences, *backend.get());
  std::ostringstream report;
  write_profile(report, profile);
  out << report.str();
  if (!a.out.empty()) open_out(a.out) << report.str();
  if (!a.tsv.empty()) {
    auto f = open_out(a.tsv);
    write_profile_tsv(f, profile);
  }
  return kOk;
}

// Fills options that were not given on the command line from a flat
// key=value file. '#' and ';' start comments; "[section]" lines are ignored.
void apply_config_file(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';' || t.front() == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    if (key == "config") continue;
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) continue;  // key for another subcommand
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dependency-tree sentence simplification toolkit", "depsimp"};
  app.require_subcommand(1);

  DecoderConfig decoder;
  BackendOptions backend;
  BtOptions bt;
  std::string config_path;

  TrainLmArgs train;
  auto* train_cmd = app.add_subcommand("train-lm", "Train a Kneser-Ney POS language model");
  train_cmd->add_option("--config", config_path, "Flat key=value defaults; flags override")->check(CLI::ExistingFile);
  train_cmd->add_option("--corpus", train.corpus, "POS corpus, one tag sequence per line")
      ->required();
  train_cmd->add_option("--order", train.order, "n-gram order")->capture_default_str();
  train_cmd->add_option("--discount", train.discount, "Absolute discount")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Model output path")->required();

  SimplifyArgs simp;
  auto* simp_cmd = app.add_subcommand("simplify", "Simplify a CoNLL-U corpus");
  simp_cmd->add_option("--config", config_path, "Flat key=value defaults; flags override")->check(CLI::ExistingFile);
  simp_cmd->add_option("--input", simp.input, "CoNLL-U input")->required();
  simp_cmd->add_option("--out", simp.out, "Output text, one line per sentence")->required();
  simp_cmd->add_option("--sidecar", simp.sidecar, "Per-sentence JSON lines (default OUT.jsonl)");
  simp_cmd->add_option("--lm", simp.lm, "POS language model");
  simp_cmd->add_option("--jobs", simp.jobs, "Worker threads")->capture_default_str();
  add_decoder_flags(simp_cmd, decoder);
  add_backend_flags(simp_cmd, backend, false);
  add_bt_flags(simp_cmd, bt);

  EvaluateArgs eval;
  BackendOptions eval_backend;
  eval_backend.kind = "none";
  auto* eval_cmd = app.add_subcommand("evaluate", "Score system outputs against references");
  eval_cmd->add_option("--config", config_path, "Flat key=value defaults; flags override")->check(CLI::ExistingFile);
  eval_cmd->add_option("--orig", eval.orig, "Original sentences")->required();
  eval_cmd->add_option("--sys", eval.sys, "System outputs")->required();
  eval_cmd->add_option("--refs", eval.refs, "Reference files")->required();
  eval_cmd->add_option("--out", eval.out, "JSON report path");
  add_backend_flags(eval_cmd, eval_backend, true);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid over tau and lambda");
  sweep_cmd->add_option("--config", config_path, "Flat key=value defaults; flags override")->check(CLI::ExistingFile);
  sweep_cmd->add_option("--input", sweep.input, "CoNLL-U input")->required();
  sweep_cmd->add_option("--taus", sweep.taus, "Similarity thresholds")->delimiter(',');
  sweep_cmd->add_option("--lambdas", sweep.lambdas, "Length ratios")->delimiter(',');
  sweep_cmd->add_option("--refs", sweep.refs, "Reference files aligned with the input");
  sweep_cmd->add_option("--lm", sweep.lm, "POS language model");
  sweep_cmd->add_option("--out", sweep.out, "TSV grid path");
  sweep_cmd->add_option("--outputs", sweep.outputs_dir, "Directory for per-cell outputs");
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads")->capture_default_str();
  add_decoder_flags(sweep_cmd, decoder);
  add_backend_flags(sweep_cmd, backend, false);

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Leave-one-out token importance profile");
  analyze_cmd->add_option("--config", config_path, "Flat key=value defaults; flags override")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--input", analyze.input, "CoNLL-U input")->required();
  analyze_cmd->add_option("--out", analyze.out, "Report path");
  analyze_cmd->add_option("--tsv", analyze.tsv, "Long-format TSV for plotting");
  add_backend_flags(analyze_cmd, backend, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (!config_path.empty()) {
      for (auto* sub : app.get_subcommands()) apply_config_file(sub, config_path);
    }
    if (*train_cmd) return cmd_train_lm(train, out, err);
    if (*simp_cmd) return cmd_simplify(simp, decoder, backend, bt, out, err);
    if (*eval_cmd) return cmd_evaluate(eval, eval_backend, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep, decoder, backend, out, err);
    if (*analyze_cmd) return cmd_analyze(analyze, backend, out, err);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace depsimp::cli
