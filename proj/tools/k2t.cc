// Copyright 2026 The k2t Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// k2t: knowledge-to-text decoding, FATE synthesis, HVM training and
// evaluation from the command line.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "k2t/decoder.h"
#include "k2t/error.h"
#include "k2t/eval.h"
#include "k2t/fate.h"
#include "k2t/hvm.h"
#include "k2t/knowledge.h"
#include "k2t/lexicon.h"
#include "k2t/remote.h"
#include "k2t/toy_lm.h"
#include "k2t/verifier.h"
#include "k2t/wire.h"
#include "k2t/world.h"

namespace {

using nlohmann::json;
using namespace k2t;

constexpr uint64_t kDefaultSeed = 7;

void RequireFile(const std::string &path, const std::string &what) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kConfig, what + " not found: " + path);
  }
}

std::ofstream OpenOut(const std::string &path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

std::ifstream OpenIn(const std::string &path, const std::string &what) {
  RequireFile(path, what);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return in;
}

json ReadJsonFile(const std::string &path, const std::string &what) {
  std::ifstream in = OpenIn(path, what);
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kSchema, path + ": " + e.what());
  }
}

void WriteJsonFile(const std::string &path, const json &value) {
  std::ofstream out = OpenOut(path);
  out << value.dump(2) << '\n';
}

void EchoConfig(const std::string &command, const json &config) {
  std::cerr << json{{"command", command}, {"config", config}}.dump() << '\n';
}

std::vector<K2TInstance> ReadCorpus(const std::string &path) {
  RequireFile(path, "corpus");
  return ParseDataset(path, DatasetFormatFromPath(path));
}

PerturbationLexicon ReadLexicon(const std::string &path) {
  return PerturbationLexicon::FromJson(ReadJsonFile(path, "lexicon file"));
}

std::vector<double> ParseNumberList(const std::string &text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string_view trimmed = TrimWhitespace(item);
    if (trimmed.empty()) continue;
    try {
      size_t used = 0;
      values.push_back(std::stod(std::string(trimmed), &used));
      if (used != trimmed.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error &) {
      throw Error(ErrorCode::kConfig, "not a number: " + std::string(trimmed));
    }
  }
  return values;
}

// Decoding flags shared by decode and sweep.
struct DecodeFlags {
  std::string input;
  std::string lm = "";
  std::string vocab;
  std::string bridge;
  std::string strategy = "beam";
  std::optional<int> k;
  std::optional<double> alpha;
  int prune_width = 0;
  int rollout_cap = -1;
  int max_len = 64;
  uint64_t seed = kDefaultSeed;
  std::optional<double> fixed_weight;
  std::string verifier = "oracle";
  std::string lexicon;
  std::string hvm;
  size_t limit = 0;

  void Register(CLI::App *app) {
    app->add_option("--input", input, "corpus (.jsonl or .tsv)")->required();
    app->add_option("--lm", lm, "toy:PATH, remote[:HOST:PORT] or PATH")
        ->required();
    app->add_option("--vocab", vocab, "vocabulary JSON for a remote LM");
    app->add_option("--bridge", bridge,
                    std::string("bridge HOST:PORT (default $") + kBridgeEnv +
                        ")");
    app->add_option("--strategy", strategy,
                    "greedy|beam|tweak-nli-b|tweak-nli-f|tweak-nli-bf|"
                    "tweak-hvm");
    app->add_option("--k", k, "beam size");
    app->add_option("--alpha", alpha, "faithfulness weight");
    app->add_option("--prune-width", prune_width, "m_pre; 0 = 2k");
    app->add_option("--rollout-cap", rollout_cap, "-1 = max_len - t");
    app->add_option("--max-len", max_len, "maximum generated tokens");
    app->add_option("--seed", seed, "seed");
    app->add_option("--fixed-weight", fixed_weight,
                    "fixed w_t for dynamic schemes");
    app->add_option("--verifier", verifier,
                    "oracle|oracle-nli|nli-remote|hvm-local|hvm-remote");
    app->add_option("--lexicon", lexicon, "perturbation lexicon JSON");
    app->add_option("--hvm", hvm, "HVM model for hvm-local");
    app->add_option("--limit", limit, "decode only the first N instances");
  }

  DecodeConfig Config() const {
    DecodeConfig c = DecodeConfig::Defaults(ParseStrategy(strategy));
    if (k) c.k = *k;
    if (alpha) c.alpha = *alpha;
    c.prune_width = prune_width;
    c.rollout_cap = rollout_cap;
    c.max_len = max_len;
    c.seed = seed;
    c.fixed_weight = fixed_weight;
    c.Validate();
    return c;
  }

  json ToJson() const {
    return {{"input", input},     {"lm", lm},
            {"vocab", vocab},     {"bridge", bridge},
            {"verifier", verifier}, {"lexicon", lexicon},
            {"hvm", hvm},         {"limit", limit},
            {"decode", Config().Effective().ToJson()}};
  }
};

Endpoint ResolveBridge(const std::string &flag) {
  if (!flag.empty()) return ParseEndpoint(flag);
  if (auto env = BridgeFromEnv()) return *env;
  throw Error(ErrorCode::kConfig, std::string("no bridge address: pass "
                                              "--bridge or set ") +
                                      kBridgeEnv);
}

struct Backend {
  std::unique_ptr<LanguageModel> lm;
  std::unique_ptr<PerturbationLexicon> lexicon;
  std::unique_ptr<HvmModel> hvm;
  std::unique_ptr<EntailmentScorer> scorer;
  std::unique_ptr<Verifier> verifier;
  std::unique_ptr<RuleOracle> oracle;
};

void OpenVerifier(Backend &b, const std::string &v, const std::string &hvm,
                  const std::string &bridge) {
  if (v == "hvm-local") {
    if (hvm.empty()) throw Error(ErrorCode::kConfig, "hvm-local needs --hvm");
    RequireFile(hvm, "HVM model file");
    b.hvm = std::make_unique<HvmModel>(HvmModel::Load(hvm));
    if (b.lexicon) b.hvm->set_lexicon(*b.lexicon);
    if (!b.lexicon) {
      b.lexicon = std::make_unique<PerturbationLexicon>(b.hvm->lexicon());
    }
    b.verifier = std::make_unique<HvmVerifier>(*b.hvm);
  } else if (v == "oracle" || v == "oracle-nli") {
    if (!b.lexicon) {
      throw Error(ErrorCode::kConfig, v + " verifier needs --lexicon");
    }
    if (v == "oracle") {
      b.verifier = std::make_unique<OracleTableVerifier>(*b.lexicon);
    } else {
      b.scorer = std::make_unique<OracleEntailmentScorer>(*b.lexicon);
      b.verifier = std::make_unique<NliVerifier>(*b.scorer);
    }
  } else if (v == "nli-remote") {
    b.scorer = std::make_unique<RemoteEntailmentScorer>(ResolveBridge(bridge));
    b.verifier = std::make_unique<NliVerifier>(*b.scorer);
  } else if (v == "hvm-remote") {
    b.verifier = std::make_unique<RemoteHvmVerifier>(ResolveBridge(bridge));
  } else {
    throw Error(ErrorCode::kConfig, "unknown verifier: " + v);
  }
}

Backend OpenBackend(const DecodeFlags &f, bool need_oracle) {
  Backend b;
  if (f.lm.rfind("remote", 0) == 0) {
    const std::string rest = f.lm.size() > 6 && f.lm[6] == ':'
                                 ? f.lm.substr(7)
                                 : std::string();
    const Endpoint ep = rest.empty() ? ResolveBridge(f.bridge)
                                     : ParseEndpoint(rest);
    if (f.vocab.empty()) {
      throw Error(ErrorCode::kConfig, "a remote LM needs --vocab");
    }
    RequireFile(f.vocab, "vocabulary file");
    b.lm = std::make_unique<RemoteLm>(LoadVocabulary(f.vocab), ep);
  } else {
    const std::string path =
        f.lm.rfind("toy:", 0) == 0 ? f.lm.substr(4) : f.lm;
    RequireFile(path, "LM model file");
    b.lm = std::make_unique<ToyLm>(ToyLm::Load(path));
  }
  if (!f.lexicon.empty()) {
    b.lexicon = std::make_unique<PerturbationLexicon>(ReadLexicon(f.lexicon));
  }
  const Strategy strategy = ParseStrategy(f.strategy);
  const bool tweak = IsTweak(strategy);
  OpenVerifier(b, f.verifier, f.hvm, f.bridge);
  if (!tweak && !need_oracle) b.verifier.reset();
  if (need_oracle) {
    if (!b.lexicon) {
      throw Error(ErrorCode::kConfig,
                  "the hallucination oracle needs --lexicon (or --hvm)");
    }
    b.oracle = std::make_unique<RuleOracle>(*b.lexicon);
  }
  return b;
}

std::vector<K2TInstance> LimitCorpus(std::vector<K2TInstance> corpus,
                                     size_t limit) {
  if (limit > 0 && corpus.size() > limit) {
    corpus.erase(corpus.begin() + limit, corpus.end());
  }
  return corpus;
}

// ---------------------------------------------------------------------------

int CmdToyCorpus(const std::string &out_dir, size_t instances, uint64_t seed) {
  EchoConfig("toy-corpus", {{"out_dir", out_dir},
                            {"instances", instances},
                            {"seed", seed}});
  std::filesystem::create_directories(out_dir);
  ToyWorldOptions options;
  options.instances = instances;
  options.seed = seed;
  const ToyWorld world = MakeToyWorld(options);
  world.Save(out_dir + "/world.json");
  WriteDataset(out_dir + "/corpus.jsonl", DatasetFormat::kJsonl, world.corpus);
  return 0;
}

struct SynthFlags {
  std::string corpus, world, out, pairs, lexicon, adversarial;
  size_t splits = 1;
  bool no_balance = false;
  std::string position_weights = "1,1,1";
  uint64_t seed = kDefaultSeed;
  size_t min_copies = 2, max_copies = 6;
};

int CmdSynthFate(const SynthFlags &f) {
  EchoConfig("synth-fate", {{"corpus", f.corpus},
                            {"world", f.world},
                            {"out", f.out},
                            {"pairs", f.pairs},
                            {"lexicon", f.lexicon},
                            {"adversarial", f.adversarial},
                            {"splits", f.splits},
                            {"balance", !f.no_balance},
                            {"position_weights", f.position_weights},
                            {"seed", f.seed},
                            {"min_copies", f.min_copies},
                            {"max_copies", f.max_copies}});
  const std::vector<K2TInstance> corpus = ReadCorpus(f.corpus);
  RequireFile(f.world, "world file");
  const ToyWorld world = ToyWorld::Load(f.world);
  FateOptions options;
  options.splits_per_instance = f.splits;
  options.seed = f.seed;
  options.balance = !f.no_balance;
  const std::vector<double> w = ParseNumberList(f.position_weights);
  if (w.size() != 3) {
    throw Error(ErrorCode::kConfig,
                "--position-weights needs three values (subject,relation,"
                "object)");
  }
  std::copy(w.begin(), w.end(), options.position_weights.begin());
  const FateBuild build = BuildFate(corpus, world.pools, world.templates,
                                    options);
  {
    std::ofstream out = OpenOut(f.out);
    WriteFateJsonl(out, build.instances);
  }
  if (!f.pairs.empty()) {
    std::ofstream out = OpenOut(f.pairs);
    WritePairsJsonl(out, build.pairs);
  }
  if (!f.lexicon.empty()) WriteJsonFile(f.lexicon, build.lexicon.ToJson());
  if (!f.adversarial.empty()) {
    AdversarialOptions adv{f.min_copies, f.max_copies, f.seed};
    WriteDataset(f.adversarial, DatasetFormatFromPath(f.adversarial),
                 AdversarialCorpus(build.instances, adv));
  }
  std::cout << json{{"instances", build.instances.size()},
                    {"pairs", build.pairs.size()},
                    {"lexicon_entries", build.lexicon.entry_count()}}
                   .dump()
            << '\n';
  return 0;
}

int CmdTrainLm(const std::string &corpus_path, const std::string &out,
               const ToyLmOptions &options) {
  EchoConfig("train-lm", {{"corpus", corpus_path},
                          {"out", out},
                          {"order", options.order},
                          {"smoothing", options.smoothing},
                          {"buckets", options.buckets}});
  const ToyLm lm = ToyLm::Train(ReadCorpus(corpus_path), options);
  lm.Save(out);
  std::cout << json{{"vocab", lm.vocabulary().size()}}.dump() << '\n';
  return 0;
}

int CmdTrainHvm(const std::string &pairs_path, const std::string &lexicon_path,
                const std::string &out, const HvmTrainOptions &options) {
  EchoConfig("train-hvm", {{"pairs", pairs_path},
                           {"lexicon", lexicon_path},
                           {"out", out},
                           {"epochs", options.epochs},
                           {"learning_rate", options.learning_rate},
                           {"seed", options.seed}});
  std::ifstream in = OpenIn(pairs_path, "pairs file");
  const std::vector<HypothesisPair> pairs = ReadPairsJsonl(in, pairs_path);
  const PerturbationLexicon lexicon = ReadLexicon(lexicon_path);
  const HvmTrainResult result = TrainHvm(pairs, lexicon, options);
  result.model.Save(out);
  std::cout << json{{"pairs", pairs.size()},
                    {"final_loss", result.model.meta().final_loss},
                    {"train_accuracy", CellAccuracy(result.model, pairs)}}
                   .dump()
            << '\n';
  return 0;
}

int CmdDecode(const DecodeFlags &f, const std::string &out,
              const std::string &trace_path) {
  json echo = f.ToJson();
  echo["out"] = out;
  echo["trace"] = trace_path;
  EchoConfig("decode", echo);
  const DecodeConfig config = f.Config();
  const std::vector<K2TInstance> corpus =
      LimitCorpus(ReadCorpus(f.input), f.limit);
  Backend b = OpenBackend(f, false);
  const std::vector<DecodeResult> results =
      DecodeCorpus(corpus, *b.lm, b.verifier.get(), config);
  std::ofstream outputs = OpenOut(out);
  for (size_t i = 0; i < results.size(); ++i) {
    outputs << json{{"instance", i}, {"output", JoinWords(results[i].words)}}
                   .dump()
            << '\n';
  }
  if (!trace_path.empty()) {
    std::ofstream trace = OpenOut(trace_path);
    for (size_t i = 0; i < results.size(); ++i) {
      WriteTraceJsonl(trace, results[i].trace, b.lm->vocabulary(), i);
    }
  }
  return 0;
}

std::vector<Words> ReadOutputs(const std::string &path) {
  std::ifstream in = OpenIn(path, "outputs file");
  std::vector<Words> outputs;
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (TrimWhitespace(line).empty()) continue;
    try {
      const json record = json::parse(line);
      if (record.at("instance").get<size_t>() != outputs.size()) {
        throw Error(ErrorCode::kSchema, "outputs out of order");
      }
      outputs.push_back(Tokenize(record.at("output").get<std::string>()));
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kSchema,
                  path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return outputs;
}

struct EvalFlags {
  std::string input, outputs, lexicon, trace, histogram, run_out, name = "run";
  std::string verifier, hvm, bridge;
  size_t bins = 10;
  size_t limit = 0;
};

int CmdEval(const EvalFlags &f) {
  EchoConfig("eval", {{"input", f.input},
                      {"outputs", f.outputs},
                      {"lexicon", f.lexicon},
                      {"trace", f.trace},
                      {"histogram", f.histogram},
                      {"run_out", f.run_out},
                      {"name", f.name},
                      {"bins", f.bins},
                      {"limit", f.limit},
                      {"verifier", f.verifier},
                      {"hvm", f.hvm},
                      {"bridge", f.bridge}});
  const std::vector<K2TInstance> corpus =
      LimitCorpus(ReadCorpus(f.input), f.limit);
  const std::vector<Words> outputs = ReadOutputs(f.outputs);
  const PerturbationLexicon lexicon = ReadLexicon(f.lexicon);
  const RuleOracle oracle(lexicon);
  const RunResult run = Evaluate(f.name, {{"outputs", f.outputs}}, corpus,
                                 outputs, oracle);
  json report = {{"name", run.name},
                 {"instances", run.outputs.size()},
                 {"bleu", std::isfinite(run.corpus_bleu)
                              ? json(run.corpus_bleu)
                              : json(nullptr)},
                 {"hallucination_rate_oracle", run.hallucination_rate},
                 {"length_split",
                  LengthSplitJson(LengthSplitReport(corpus, run,
                                                    DefaultLengthBounds()))}};
  if (!f.verifier.empty()) {
    Backend b;
    b.lexicon = std::make_unique<PerturbationLexicon>(lexicon);
    OpenVerifier(b, f.verifier, f.hvm, f.bridge);
    size_t negative = 0;
    double total = 0.0;
    for (size_t i = 0; i < outputs.size(); ++i) {
      if (outputs[i].empty()) continue;
      const Verdict v = b.verifier->Score(corpus[i].facts, outputs[i],
                                          HypothesisKind::kBackward);
      negative += IsNegative(v);
      total += v.score;
    }
    report["verifier"] = {
        {"name", f.verifier},
        {"negative_rate",
         outputs.empty() ? 0.0 : double(negative) / outputs.size()},
        {"mean_log_score", outputs.empty() ? 0.0 : total / outputs.size()}};
  }
  if (!f.trace.empty()) {
    std::ifstream in = OpenIn(f.trace, "trace file");
    const std::vector<VerdictRecord> verdicts = ReadTraceVerdicts(in, f.trace);
    const PositionHistogram h = MakePositionHistogram(verdicts, f.bins);
    report["position_histogram"] = h.ToJson();
    if (!f.histogram.empty()) {
      std::ofstream out = OpenOut(f.histogram);
      h.WriteCsv(out);
    }
  }
  if (!f.run_out.empty()) WriteJsonFile(f.run_out, run.ToJson());
  std::cout << report.dump(2) << '\n';
  return 0;
}

int CmdSweep(const DecodeFlags &f, const std::string &axis_name,
             const std::string &values_text, const std::string &json_out) {
  json echo = f.ToJson();
  echo["axis"] = axis_name;
  echo["values"] = values_text;
  echo["json"] = json_out;
  EchoConfig("sweep", echo);
  const SweepAxis axis = ParseSweepAxis(axis_name);
  const std::vector<double> values = ParseNumberList(values_text);
  const std::vector<K2TInstance> corpus =
      LimitCorpus(ReadCorpus(f.input), f.limit);
  Backend b = OpenBackend(f, true);
  DecodeConfig base = f.Config();
  const Verifier *verifier = IsTweak(base.strategy) ? b.verifier.get() : nullptr;
  const std::vector<SweepRow> rows =
      Sweep(corpus, *b.lm, verifier, *b.oracle, base, axis, values);
  std::cout << SweepTable(axis, rows);
  if (!json_out.empty()) WriteJsonFile(json_out, SweepJson(axis, rows));
  return 0;
}

int CmdCompare(const std::vector<std::string> &paths,
               const std::string &json_out) {
  EchoConfig("compare", {{"runs", paths}, {"json", json_out}});
  std::vector<RunResult> runs;
  for (const std::string &p : paths) {
    runs.push_back(RunResult::FromJson(ReadJsonFile(p, "run file")));
  }
  const CompareReport report = Compare(runs);
  std::cout << report.table;
  if (!json_out.empty()) WriteJsonFile(json_out, report.json);
  return 0;
}

int ExitCodeFor(ErrorCode code) {
  return code == ErrorCode::kUsage || code == ErrorCode::kConfig ? 2 : 1;
}

void ReportError(std::string_view code, const std::string &message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump()
            << '\n';
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"knowledge-to-text decoding with hypothesis verification"};
  app.require_subcommand(1);

  std::string toy_out;
  size_t toy_instances = 200;
  uint64_t toy_seed = kDefaultSeed;
  CLI::App *toy = app.add_subcommand("toy-corpus", "generate a toy world");
  toy->add_option("--out-dir", toy_out, "output directory")->required();
  toy->add_option("--instances", toy_instances, "instances");
  toy->add_option("--seed", toy_seed, "seed");

  SynthFlags synth;
  CLI::App *fate = app.add_subcommand("synth-fate", "synthesize FATE data");
  fate->add_option("--corpus", synth.corpus, "corpus")->required();
  fate->add_option("--world", synth.world, "templates and pools")->required();
  fate->add_option("--out", synth.out, "FATE JSONL")->required();
  fate->add_option("--pairs", synth.pairs, "hypothesis-pair JSONL");
  fate->add_option("--lexicon", synth.lexicon, "perturbation lexicon JSON");
  fate->add_option("--adversarial", synth.adversarial,
                   "adversarial LM corpus");
  fate->add_option("--splits", synth.splits, "splits per instance; 0 = all");
  fate->add_flag("--no-balance", synth.no_balance, "skip label balancing");
  fate->add_option("--position-weights", synth.position_weights,
                   "subject,relation,object");
  fate->add_option("--seed", synth.seed, "seed");
  fate->add_option("--min-copies", synth.min_copies, "adversarial T- copies");
  fate->add_option("--max-copies", synth.max_copies, "adversarial T- copies");

  std::string lm_corpus, lm_out;
  ToyLmOptions lm_options;
  CLI::App *train_lm = app.add_subcommand("train-lm", "train the toy LM");
  train_lm->add_option("--corpus", lm_corpus, "corpus")->required();
  train_lm->add_option("--out", lm_out, "model JSON")->required();
  train_lm->add_option("--order", lm_options.order, "n-gram order");
  train_lm->add_option("--smoothing", lm_options.smoothing, "add-constant");
  train_lm->add_option("--buckets", lm_options.buckets, "fact buckets");

  std::string hvm_pairs, hvm_lexicon, hvm_out;
  HvmTrainOptions hvm_options;
  hvm_options.seed = kDefaultSeed;
  CLI::App *train_hvm = app.add_subcommand("train-hvm", "train the HVM");
  train_hvm->add_option("--pairs", hvm_pairs, "hypothesis pairs")->required();
  train_hvm->add_option("--lexicon", hvm_lexicon, "lexicon")->required();
  train_hvm->add_option("--out", hvm_out, "model JSON")->required();
  train_hvm->add_option("--epochs", hvm_options.epochs, "epochs");
  train_hvm->add_option("--lr", hvm_options.learning_rate, "learning rate");
  train_hvm->add_option("--seed", hvm_options.seed, "seed");

  DecodeFlags decode_flags;
  std::string decode_out, decode_trace;
  CLI::App *decode = app.add_subcommand("decode", "decode a corpus");
  decode_flags.Register(decode);
  decode->add_option("--out", decode_out, "outputs JSONL")->required();
  decode->add_option("--trace", decode_trace, "trace JSONL");

  EvalFlags eval_flags;
  CLI::App *eval = app.add_subcommand("eval", "score decoded outputs");
  eval->add_option("--input", eval_flags.input, "corpus")->required();
  eval->add_option("--outputs", eval_flags.outputs, "outputs")->required();
  eval->add_option("--lexicon", eval_flags.lexicon, "lexicon")->required();
  eval->add_option("--trace", eval_flags.trace, "trace JSONL");
  eval->add_option("--histogram", eval_flags.histogram, "histogram CSV");
  eval->add_option("--bins", eval_flags.bins, "histogram bins");
  eval->add_option("--run-out", eval_flags.run_out, "run result JSON");
  eval->add_option("--name", eval_flags.name, "run name");
  eval->add_option("--limit", eval_flags.limit, "first N instances");
  eval->add_option("--verifier", eval_flags.verifier,
                   "also score outputs with oracle|oracle-nli|nli-remote|"
                   "hvm-local|hvm-remote");
  eval->add_option("--hvm", eval_flags.hvm, "HVM model for hvm-local");
  eval->add_option("--bridge", eval_flags.bridge, "bridge HOST:PORT");

  DecodeFlags sweep_flags;
  std::string sweep_axis = "alpha", sweep_values, sweep_json;
  CLI::App *sweep = app.add_subcommand("sweep", "sweep alpha or beam size");
  sweep_flags.Register(sweep);
  sweep->add_option("--axis", sweep_axis, "alpha|beam_size");
  sweep->add_option("--values", sweep_values, "comma-separated")->required();
  sweep->add_option("--json", sweep_json, "JSON table");

  std::vector<std::string> compare_runs;
  std::string compare_json;
  CLI::App *compare = app.add_subcommand("compare", "compare run results");
  compare->add_option("--runs", compare_runs, "run JSON files")->required();
  compare->add_option("--json", compare_json, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    ReportError("usage", e.what());
    return 2;
  }

  try {
    if (*toy) return CmdToyCorpus(toy_out, toy_instances, toy_seed);
    if (*fate) return CmdSynthFate(synth);
    if (*train_lm) return CmdTrainLm(lm_corpus, lm_out, lm_options);
    if (*train_hvm) {
      return CmdTrainHvm(hvm_pairs, hvm_lexicon, hvm_out, hvm_options);
    }
    if (*decode) return CmdDecode(decode_flags, decode_out, decode_trace);
    if (*eval) return CmdEval(eval_flags);
    if (*sweep) return CmdSweep(sweep_flags, sweep_axis, sweep_values, sweep_json);
    if (*compare) return CmdCompare(compare_runs, compare_json);
  } catch (const Error &e) {
    ReportError(ErrorCodeName(e.code()), e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception &e) {
    ReportError("internal", e.what());
    return 1;
  }
  return 2;
}
