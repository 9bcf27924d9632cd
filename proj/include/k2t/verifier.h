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

#ifndef K2T_VERIFIER_H_
#define K2T_VERIFIER_H_

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "k2t/knowledge.h"
#include "k2t/lexicon.h"

namespace k2t {

enum class HypothesisKind { kBackward, kForward };

std::string_view HypothesisKindName(HypothesisKind kind);

// Probabilities below this are clamped before taking logs.
inline constexpr double kProbabilityFloor = 1e-300;

// Support of a hypothesis on the log-probability scale (score <= 0).
// Tabular verifiers also report per-triple supported-probabilities, in which
// case score is the mean of their logs.
struct Verdict {
  double score = 0.0;
  std::vector<double> per_triple;
};

Verdict VerdictFromProbabilities(std::vector<double> per_triple);

// A verdict is negative (a predicted hallucination) when some triple is more
// likely unsupported, or, without a table, when exp(score) < 0.5.
bool IsNegative(const Verdict &verdict);

struct PairVerdict {
  std::optional<Verdict> backward;
  std::optional<Verdict> forward;
};

// h(x, y). Implementations are pure and safe for concurrent calls. Empty
// hypotheses are rejected with Error(kInvalidArgument).
class Verifier {
 public:
  virtual ~Verifier() = default;

  virtual Verdict Score(const FactList &facts, const Words &hypothesis,
                        HypothesisKind kind) const = 0;

  // Scores whichever of the two hypotheses is non-null. Backends that encode
  // both at once override this.
  virtual PairVerdict ScorePair(const FactList &facts, const Words *backward,
                                const Words *forward) const;
};

// Entailment probability of `hypothesis` given `premise`, in [0, 1].
class EntailmentScorer {
 public:
  virtual ~EntailmentScorer() = default;
  virtual double EntailProb(std::string_view premise,
                            std::string_view hypothesis) const = 0;
};

// Triples rendered as "subj rel obj" joined by "; ".
std::string NliPremise(const FactList &facts);

// log P(entailment); the neutral and contradiction mass is ignored.
double NliAdapterScore(const EntailmentScorer &scorer, const FactList &facts,
                       std::string_view hypothesis);

// Sentence-level NLI verifier: one premise for all triples.
class NliVerifier : public Verifier {
 public:
  explicit NliVerifier(const EntailmentScorer &scorer) : scorer_(scorer) {}

  Verdict Score(const FactList &facts, const Words &hypothesis,
                HypothesisKind kind) const override;

 private:
  const EntailmentScorer &scorer_;
};

// Entailment scorer backed by the rule oracle. The premise is mapped back to
// registered triples; the entailment probability is the product over triples
// of (1 - epsilon) if supported, epsilon otherwise.
class OracleEntailmentScorer : public EntailmentScorer {
 public:
  explicit OracleEntailmentScorer(const PerturbationLexicon &lexicon,
                                  double epsilon = 1e-3);

  double EntailProb(std::string_view premise,
                    std::string_view hypothesis) const override;

 private:
  RuleOracle oracle_;
  double epsilon_;
  std::unordered_map<std::string, FactTriple> by_text_;
};

// Tabular rule-oracle verifier: per-triple probability 1 - epsilon when
// supported, epsilon otherwise.
class OracleTableVerifier : public Verifier {
 public:
  explicit OracleTableVerifier(const PerturbationLexicon &lexicon,
                               double epsilon = 1e-3)
      : oracle_(lexicon), epsilon_(epsilon) {}

  Verdict Score(const FactList &facts, const Words &hypothesis,
                HypothesisKind kind) const override;

 private:
  RuleOracle oracle_;
  double epsilon_;
};

}  // namespace k2t

#endif  // K2T_VERIFIER_H_
