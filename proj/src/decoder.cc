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

#include "k2t/decoder.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "k2t/error.h"

namespace k2t {

using nlohmann::json;

namespace {

struct StrategyInfo {
  Strategy strategy;
  std::string_view name;
};

constexpr StrategyInfo kStrategies[] = {
    {Strategy::kGreedy, "greedy"},
    {Strategy::kBeam, "beam"},
    {Strategy::kTweakNliB, "tweak-nli-b"},
    {Strategy::kTweakNliF, "tweak-nli-f"},
    {Strategy::kTweakNliBF, "tweak-nli-bf"},
    {Strategy::kTweakHvm, "tweak-hvm"},
};

std::string Describe(const Vocabulary &vocab,
                     const std::vector<TokenId> &tokens) {
  std::string out = "[";
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += vocab.Contains(tokens[i]) ? vocab.token(tokens[i])
                                     : std::to_string(tokens[i]);
  }
  return out + "]";
}

// Rethrows with the candidate named, keeping the error code.
[[noreturn]] void FailFor(const Error &e, const Vocabulary &vocab,
                          const std::vector<TokenId> &tokens) {
  throw Error(e.code(),
              std::string(e.what()) + " (candidate " + Describe(vocab, tokens) +
                  ")");
}

bool ByGenThenTokens(const BeamCandidate &a, const BeamCandidate &b) {
  if (a.gen_logprob != b.gen_logprob) return a.gen_logprob > b.gen_logprob;
  return a.tokens < b.tokens;
}

bool ByCombined(const BeamCandidate &a, const BeamCandidate &b) {
  if (a.combined != b.combined) return a.combined > b.combined;
  return ByGenThenTokens(a, b);
}

json OptionalNumber(const std::optional<double> &v) {
  return v ? json(*v) : json(nullptr);
}

json CandidateToJson(const BeamCandidate &c) {
  json out = {{"tokens", c.tokens},
              {"gen", c.gen_logprob},
              {"combined", c.combined},
              {"finished", c.finished}};
  if (c.faith) out["faith"] = *c.faith;
  return out;
}

}  // namespace

std::string_view StrategyName(Strategy strategy) {
  for (const StrategyInfo &info : kStrategies) {
    if (info.strategy == strategy) return info.name;
  }
  return "beam";
}

Strategy ParseStrategy(std::string_view name) {
  for (const StrategyInfo &info : kStrategies) {
    if (info.name == name) return info.strategy;
  }
  throw Error(ErrorCode::kConfig, "unknown strategy: " + std::string(name));
}

const std::vector<Strategy> &AllStrategies() {
  static const std::vector<Strategy> kAll = {
      Strategy::kGreedy,    Strategy::kBeam,      Strategy::kTweakNliB,
      Strategy::kTweakNliF, Strategy::kTweakNliBF, Strategy::kTweakHvm};
  return kAll;
}

bool IsTweak(Strategy strategy) {
  return strategy != Strategy::kGreedy && strategy != Strategy::kBeam;
}

WeightScheme SchemeOf(Strategy strategy) {
  switch (strategy) {
    case Strategy::kTweakNliF: return WeightScheme::kForward;
    case Strategy::kTweakNliBF:
    case Strategy::kTweakHvm: return WeightScheme::kDynamic;
    default: return WeightScheme::kBackward;
  }
}

double FaithfulnessWeight(WeightScheme scheme, size_t t, size_t forward_len,
                          std::optional<double> fixed) {
  switch (scheme) {
    case WeightScheme::kBackward: return 1.0;
    case WeightScheme::kForward: return 0.0;
    case WeightScheme::kDynamic:
      if (forward_len == 0) return 1.0;
      if (fixed) return *fixed;
      return static_cast<double>(t) / static_cast<double>(t + forward_len);
  }
  return 1.0;
}

DecodeConfig DecodeConfig::Defaults(Strategy strategy) {
  DecodeConfig c;
  c.strategy = strategy;
  if (strategy == Strategy::kGreedy) {
    c.k = 1;
  } else if (IsTweak(strategy)) {
    c.k = 4;
    c.alpha = 8.0;
  }
  return c;
}

DecodeConfig DecodeConfig::Effective() const {
  DecodeConfig c = *this;
  if (c.strategy == Strategy::kGreedy) {
    c.k = 1;
    c.alpha = 0.0;
  }
  if (c.strategy == Strategy::kBeam) c.alpha = 0.0;
  if (c.prune_width == 0) c.prune_width = 2 * c.k;
  return c;
}

void DecodeConfig::Validate() const {
  const DecodeConfig c = Effective();
  if (c.k < 1) throw Error(ErrorCode::kConfig, "beam size k must be >= 1");
  if (c.prune_width < c.k) {
    throw Error(ErrorCode::kConfig, "prune width must be >= k");
  }
  if (!(c.alpha >= 0.0) || !std::isfinite(c.alpha)) {
    throw Error(ErrorCode::kConfig, "alpha must be finite and >= 0");
  }
  if (c.rollout_cap < -1) {
    throw Error(ErrorCode::kConfig, "rollout cap must be >= 0 (or -1)");
  }
  if (c.max_len < 1) throw Error(ErrorCode::kConfig, "max_len must be >= 1");
  if (c.fixed_weight && !(*c.fixed_weight >= 0.0 && *c.fixed_weight <= 1.0)) {
    throw Error(ErrorCode::kConfig, "fixed weight must lie in [0, 1]");
  }
}

json DecodeConfig::ToJson() const {
  return {{"strategy", StrategyName(strategy)},
          {"k", k},
          {"alpha", alpha},
          {"prune_width", prune_width},
          {"rollout_cap", rollout_cap},
          {"max_len", max_len},
          {"seed", seed},
          {"fixed_weight", OptionalNumber(fixed_weight)}};
}

std::optional<std::vector<TokenId>> RolloutCache::Lookup(
    const std::vector<TokenId> &prefix, size_t cap) const {
  auto it = entries_.find(prefix);
  if (it == entries_.end()) return std::nullopt;
  const Entry &e = it->second;
  if (!e.complete && cap > e.tokens.size()) return std::nullopt;
  ++hits_;
  const size_t n = std::min(cap, e.tokens.size());
  return std::vector<TokenId>(e.tokens.begin(), e.tokens.begin() + n);
}

void RolloutCache::Put(std::vector<TokenId> key, Entry entry) {
  auto [it, inserted] = entries_.try_emplace(std::move(key), entry);
  if (inserted) return;
  Entry &old = it->second;
  if (old.complete) return;
  if (entry.complete || entry.tokens.size() > old.tokens.size()) {
    old = std::move(entry);
  }
}

void RolloutCache::Store(const std::vector<TokenId> &prefix,
                         const std::vector<TokenId> &rollout, TokenId eos) {
  const bool complete = !rollout.empty() && rollout.back() == eos;
  std::vector<TokenId> key = prefix;
  for (size_t i = 0; i <= rollout.size(); ++i) {
    if (i > 0) {
      if (rollout[i - 1] == eos) break;
      key.push_back(rollout[i - 1]);
    }
    Put(key, Entry{std::vector<TokenId>(rollout.begin() + i, rollout.end()),
                   complete});
  }
}

std::vector<TokenId> Rollout(const LanguageModel &lm,
                             const std::vector<TokenId> &prefix,
                             const FactList &facts, size_t cap,
                             RolloutCache *cache) {
  const TokenId eos = lm.vocabulary().eos();
  if (prefix.empty() || prefix.back() == eos) return {};
  if (cache != nullptr) {
    if (auto hit = cache->Lookup(prefix, cap)) return *hit;
  }
  std::vector<TokenId> seq = prefix;
  std::vector<TokenId> out;
  while (out.size() < cap) {
    const TokenId next = lm.ArgmaxNext(seq, facts);
    out.push_back(next);
    seq.push_back(next);
    if (next == eos) break;
  }
  if (cache != nullptr) cache->Store(prefix, out, eos);
  return out;
}

FaithResult FaithScore(const Verifier &verifier, const FactList &facts,
                       const Words &backward, const Words &rollout_words,
                       Strategy strategy, std::optional<double> fixed_weight) {
  const WeightScheme scheme = SchemeOf(strategy);
  FaithResult r;
  r.weight = FaithfulnessWeight(scheme, backward.size(), rollout_words.size(),
                                fixed_weight);
  Words forward;
  if (strategy == Strategy::kTweakHvm) {
    forward = rollout_words;
  } else {
    forward = backward;
    forward.insert(forward.end(), rollout_words.begin(), rollout_words.end());
  }
  const bool need_b = r.weight != 0.0 && !backward.empty();
  const bool need_f = r.weight != 1.0 && !forward.empty();
  PairVerdict v = verifier.ScorePair(facts, need_b ? &backward : nullptr,
                                     need_f ? &forward : nullptr);
  r.backward = std::move(v.backward);
  r.forward = std::move(v.forward);
  const double hb = r.backward ? r.backward->score : 0.0;
  const double hf = r.forward ? r.forward->score : 0.0;
  r.faith = 0.0;
  if (r.weight != 0.0) r.faith += r.weight * hb;
  if (r.weight != 1.0) r.faith += (1.0 - r.weight) * hf;
  return r;
}

double CombinedScore(double gen_logprob, double faith, double alpha) {
  if (alpha == 0.0) return gen_logprob;
  return gen_logprob + alpha * faith;
}

std::vector<BeamCandidate> BeamStep(const std::vector<BeamCandidate> &beam,
                                    DecodeContext &context,
                                    StepRecord *record) {
  const DecodeConfig &cfg = context.config;
  const Vocabulary &vocab = context.lm.vocabulary();
  const TokenId eos = vocab.eos();
  if (beam.empty()) throw Error(ErrorCode::kInvalidArgument, "empty beam");

  std::vector<BeamCandidate> expansions;
  for (const BeamCandidate &c : beam) {
    if (c.finished) continue;
    LogProbVector lp;
    try {
      lp = context.lm.NextLogProbs(c.tokens, context.facts);
    } catch (const Error &e) {
      FailFor(e, vocab, c.tokens);
    }
    for (size_t v = 0; v < lp.size(); ++v) {
      if (std::isinf(lp[v]) && lp[v] < 0) continue;
      BeamCandidate x;
      x.tokens = c.tokens;
      x.tokens.push_back(static_cast<TokenId>(v));
      x.gen_logprob = c.gen_logprob + lp[v];
      x.finished = static_cast<TokenId>(v) == eos;
      expansions.push_back(std::move(x));
    }
  }
  if (expansions.empty() &&
      std::none_of(beam.begin(), beam.end(),
                   [](const BeamCandidate &c) { return c.finished; })) {
    throw Error(ErrorCode::kInvalidArgument, "no candidate to expand");
  }
  const size_t keep =
      std::min(expansions.size(), static_cast<size_t>(cfg.prune_width));
  std::partial_sort(expansions.begin(), expansions.begin() + keep,
                    expansions.end(), ByGenThenTokens);
  expansions.resize(keep);

  const bool tweak = IsTweak(cfg.strategy);
  for (BeamCandidate &s : expansions) {
    if (!tweak) {
      s.combined = s.gen_logprob;
      if (record) {
        ScoredCandidate sc;
        sc.tokens = s.tokens;
        sc.gen_logprob = s.gen_logprob;
        sc.combined = s.combined;
        record->scored.push_back(std::move(sc));
      }
      continue;
    }
    try {
      std::vector<TokenId> rollout;
      if (!s.finished) {
        const size_t generated = s.tokens.size() - 1;
        const size_t cap =
            cfg.rollout_cap >= 0
                ? static_cast<size_t>(cfg.rollout_cap)
                : static_cast<size_t>(std::max<int64_t>(
                      0, static_cast<int64_t>(cfg.max_len) -
                             static_cast<int64_t>(generated)));
        rollout = Rollout(context.lm, s.tokens, context.facts, cap,
                          &context.cache);
      }
      const Words backward = vocab.ToWords(s.tokens);
      const Words forward = vocab.ToWords(rollout);
      FaithResult fr = FaithScore(*context.verifier, context.facts, backward,
                                  forward, cfg.strategy, cfg.fixed_weight);
      s.rollout = rollout;
      s.faith = fr.faith;
      s.combined = CombinedScore(s.gen_logprob, fr.faith, cfg.alpha);
      if (record) {
        ScoredCandidate sc{s.tokens, s.gen_logprob, rollout, fr.weight,
                           std::nullopt, std::nullopt, fr.faith, s.combined};
        if (fr.backward) {
          sc.backward_score = fr.backward->score;
          record->verdicts.push_back({backward.size(),
                                      HypothesisKind::kBackward,
                                      fr.backward->score,
                                      IsNegative(*fr.backward), 0.0});
        }
        if (fr.forward) {
          sc.forward_score = fr.forward->score;
          record->verdicts.push_back({backward.size(), HypothesisKind::kForward,
                                      fr.forward->score,
                                      IsNegative(*fr.forward), 0.0});
        }
        record->scored.push_back(std::move(sc));
      }
    } catch (const Error &e) {
      FailFor(e, vocab, s.tokens);
    }
  }

  std::vector<BeamCandidate> pool = std::move(expansions);
  for (const BeamCandidate &c : beam) {
    if (c.finished) pool.push_back(c);
  }
  const size_t k = std::min(pool.size(), static_cast<size_t>(cfg.k));
  std::partial_sort(pool.begin(), pool.begin() + k, pool.end(), ByCombined);
  pool.resize(k);
  if (record) record->beam = pool;
  return pool;
}

DecodeResult Decode(const FactList &facts, const LanguageModel &lm,
                    const Verifier *verifier, const DecodeConfig &config) {
  config.Validate();
  DecodeContext context{lm, verifier, facts, config.Effective(), {}};
  if (IsTweak(context.config.strategy) && verifier == nullptr) {
    throw Error(ErrorCode::kConfig,
                std::string(StrategyName(context.config.strategy)) +
                    " requires a verifier");
  }
  BeamCandidate start;
  start.tokens = {lm.vocabulary().bos()};
  std::vector<BeamCandidate> beam = {start};
  DecodeResult result;
  for (int step = 0; step < context.config.max_len; ++step) {
    if (std::all_of(beam.begin(), beam.end(),
                    [](const BeamCandidate &c) { return c.finished; })) {
      break;
    }
    StepRecord record;
    record.step = static_cast<size_t>(step);
    beam = BeamStep(beam, context, &record);
    result.trace.steps.push_back(std::move(record));
  }
  result.best = beam.front().tokens;
  result.words = lm.vocabulary().ToWords(result.best);
  result.beam = std::move(beam);
  const double length =
      static_cast<double>(std::max<size_t>(1, result.words.size()));
  for (StepRecord &step : result.trace.steps) {
    for (VerdictRecord &v : step.verdicts) {
      v.position = std::min(1.0, static_cast<double>(v.t) / length);
    }
  }
  return result;
}

std::vector<DecodeResult> DecodeCorpus(const std::vector<K2TInstance> &corpus,
                                       const LanguageModel &lm,
                                       const Verifier *verifier,
                                       const DecodeConfig &config) {
  std::vector<DecodeResult> out;
  out.reserve(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    try {
      out.push_back(Decode(corpus[i].facts, lm, verifier, config));
    } catch (const Error &e) {
      throw Error(e.code(), "instance " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

json StepToJson(const StepRecord &step, const Vocabulary &vocab,
                size_t instance) {
  json scored = json::array();
  for (const ScoredCandidate &s : step.scored) {
    scored.push_back({{"tokens", s.tokens},
                      {"text", JoinWords(vocab.ToWords(s.tokens))},
                      {"gen", s.gen_logprob},
                      {"rollout", s.rollout},
                      {"w", s.weight},
                      {"h_b", OptionalNumber(s.backward_score)},
                      {"h_f", OptionalNumber(s.forward_score)},
                      {"faith", s.faith},
                      {"combined", s.combined}});
  }
  json beam = json::array();
  for (const BeamCandidate &c : step.beam) beam.push_back(CandidateToJson(c));
  json verdicts = json::array();
  for (const VerdictRecord &v : step.verdicts) {
    verdicts.push_back({{"t", v.t},
                        {"kind", HypothesisKindName(v.kind)},
                        {"score", v.score},
                        {"negative", v.negative},
                        {"position", v.position}});
  }
  return {{"instance", instance},
          {"step", step.step},
          {"scored", std::move(scored)},
          {"beam", std::move(beam)},
          {"verdicts", std::move(verdicts)}};
}

void WriteTraceJsonl(std::ostream &out, const DecodeTrace &trace,
                     const Vocabulary &vocab, size_t instance) {
  for (const StepRecord &step : trace.steps) {
    out << StepToJson(step, vocab, instance).dump() << '\n';
  }
}

std::vector<VerdictRecord> ReadTraceVerdicts(std::istream &in,
                                             std::string_view source) {
  std::vector<VerdictRecord> out;
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (TrimWhitespace(line).empty()) continue;
    try {
      const json record = json::parse(line);
      for (const json &v : record.at("verdicts")) {
        const std::string kind = v.at("kind").get<std::string>();
        if (kind != "backward" && kind != "forward") {
          throw Error(ErrorCode::kSchema, "unknown verdict kind " + kind);
        }
        out.push_back({v.at("t").get<size_t>(),
                       kind == "backward" ? HypothesisKind::kBackward
                                          : HypothesisKind::kForward,
                       v.at("score").is_number() ? v["score"].get<double>()
                                                 : -std::numeric_limits<
                                                       double>::infinity(),
                       v.at("negative").get<bool>(),
                       v.at("position").get<double>()});
      }
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kSchema, std::string(source) + ":" +
                                          std::to_string(number) + ": " +
                                          e.what());
    }
  }
  return out;
}

}  // namespace k2t
