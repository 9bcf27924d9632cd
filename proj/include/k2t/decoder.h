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

#ifndef K2T_DECODER_H_
#define K2T_DECODER_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "k2t/knowledge.h"
#include "k2t/lm.h"
#include "k2t/verifier.h"

namespace k2t {

enum class Strategy {
  kGreedy,
  kBeam,
  kTweakNliB,
  kTweakNliF,
  kTweakNliBF,
  kTweakHvm,
};

std::string_view StrategyName(Strategy strategy);
Strategy ParseStrategy(std::string_view name);
const std::vector<Strategy> &AllStrategies();
bool IsTweak(Strategy strategy);

enum class WeightScheme { kBackward, kForward, kDynamic };

WeightScheme SchemeOf(Strategy strategy);

// w_t. A fixed weight, when given, replaces the schedule whenever the
// forward hypothesis is non-empty.
double FaithfulnessWeight(WeightScheme scheme, size_t t, size_t forward_len,
                          std::optional<double> fixed = std::nullopt);

struct DecodeConfig {
  Strategy strategy = Strategy::kBeam;
  int k = 5;
  double alpha = 0.0;
  int prune_width = 0;   // m_pre; 0 = 2k
  int rollout_cap = -1;  // -1 = max_len - t
  int max_len = 384;     // generated tokens, eos included
  uint64_t seed = 0;
  std::optional<double> fixed_weight;

  // Baseline beam k=5; TWEAK k=4, alpha=8; greedy k=1.
  static DecodeConfig Defaults(Strategy strategy);

  // Resolves derived defaults (m_pre, greedy's k and alpha).
  DecodeConfig Effective() const;
  void Validate() const;

  nlohmann::json ToJson() const;
};

struct BeamCandidate {
  std::vector<TokenId> tokens;  // starts with bos
  double gen_logprob = 0.0;
  std::optional<std::vector<TokenId>> rollout;
  std::optional<double> faith;
  double combined = 0.0;
  bool finished = false;
};

struct ScoredCandidate {
  std::vector<TokenId> tokens;
  double gen_logprob = 0.0;
  std::vector<TokenId> rollout;
  double weight = 1.0;
  std::optional<double> backward_score;
  std::optional<double> forward_score;
  double faith = 0.0;
  double combined = 0.0;
};

struct VerdictRecord {
  size_t t = 0;  // backward words at scoring time
  HypothesisKind kind = HypothesisKind::kBackward;
  double score = 0.0;
  bool negative = false;
  double position = 0.0;  // t / |final output|, clamped to [0, 1]
};

struct StepRecord {
  size_t step = 0;
  std::vector<ScoredCandidate> scored;
  std::vector<BeamCandidate> beam;
  std::vector<VerdictRecord> verdicts;
};

struct DecodeTrace {
  std::vector<StepRecord> steps;
};

// Greedy continuations keyed by candidate tokens. Entries are either
// complete (end in eos) or truncated at their cap.
class RolloutCache {
 public:
  std::optional<std::vector<TokenId>> Lookup(const std::vector<TokenId> &prefix,
                                             size_t cap) const;
  void Store(const std::vector<TokenId> &prefix,
             const std::vector<TokenId> &rollout, TokenId eos);
  size_t size() const { return entries_.size(); }
  size_t hits() const { return hits_; }

 private:
  struct Entry {
    std::vector<TokenId> tokens;
    bool complete = false;
  };
  void Put(std::vector<TokenId> key, Entry entry);

  std::map<std::vector<TokenId>, Entry> entries_;
  mutable size_t hits_ = 0;
};

std::vector<TokenId> Rollout(const LanguageModel &lm,
                             const std::vector<TokenId> &prefix,
                             const FactList &facts, size_t cap,
                             RolloutCache *cache = nullptr);

struct FaithResult {
  double weight = 1.0;
  std::optional<Verdict> backward;
  std::optional<Verdict> forward;
  double faith = 0.0;
};

// backward/forward are word sequences (no bos/eos). For NLI schemes the
// forward hypothesis is backward followed by the rollout words; for the HVM
// scheme it is the rollout words alone.
FaithResult FaithScore(const Verifier &verifier, const FactList &facts,
                       const Words &backward, const Words &rollout_words,
                       Strategy strategy,
                       std::optional<double> fixed_weight = std::nullopt);

double CombinedScore(double gen_logprob, double faith, double alpha);

struct DecodeContext {
  const LanguageModel &lm;
  const Verifier *verifier;
  const FactList &facts;
  DecodeConfig config;  // effective
  RolloutCache cache;
};

std::vector<BeamCandidate> BeamStep(const std::vector<BeamCandidate> &beam,
                                    DecodeContext &context,
                                    StepRecord *record = nullptr);

struct DecodeResult {
  std::vector<TokenId> best;
  Words words;
  std::vector<BeamCandidate> beam;
  DecodeTrace trace;
};

DecodeResult Decode(const FactList &facts, const LanguageModel &lm,
                    const Verifier *verifier, const DecodeConfig &config);

std::vector<DecodeResult> DecodeCorpus(const std::vector<K2TInstance> &corpus,
                                       const LanguageModel &lm,
                                       const Verifier *verifier,
                                       const DecodeConfig &config);

nlohmann::json StepToJson(const StepRecord &step, const Vocabulary &vocab,
                          size_t instance);
void WriteTraceJsonl(std::ostream &out, const DecodeTrace &trace,
                     const Vocabulary &vocab, size_t instance);

// Verdicts read back from trace JSONL.
std::vector<VerdictRecord> ReadTraceVerdicts(std::istream &in,
                                             std::string_view source);

}  // namespace k2t

#endif  // K2T_DECODER_H_
