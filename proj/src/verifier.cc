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

#include "k2t/verifier.h"

#include <algorithm>
#include <cmath>

#include "k2t/error.h"

namespace k2t {

namespace {

void RequireHypothesis(const Words &hypothesis) {
  if (hypothesis.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty hypothesis");
  }
}

std::string TripleText(const FactTriple &t) {
  return t.subject + " " + t.relation + " " + t.object;
}

}  // namespace

std::string_view HypothesisKindName(HypothesisKind kind) {
  return kind == HypothesisKind::kBackward ? "backward" : "forward";
}

Verdict VerdictFromProbabilities(std::vector<double> per_triple) {
  Verdict v;
  double sum = 0;
  for (double p : per_triple) sum += std::log(std::max(p, kProbabilityFloor));
  v.score = per_triple.empty() ? 0.0 : sum / per_triple.size();
  v.per_triple = std::move(per_triple);
  return v;
}

bool IsNegative(const Verdict &verdict) {
  if (!verdict.per_triple.empty()) {
    return std::any_of(verdict.per_triple.begin(), verdict.per_triple.end(),
                       [](double p) { return p < 0.5; });
  }
  return std::exp(verdict.score) < 0.5;
}

PairVerdict Verifier::ScorePair(const FactList &facts, const Words *backward,
                                const Words *forward) const {
  PairVerdict out;
  if (backward) out.backward = Score(facts, *backward, HypothesisKind::kBackward);
  if (forward) out.forward = Score(facts, *forward, HypothesisKind::kForward);
  return out;
}

std::string NliPremise(const FactList &facts) {
  std::string out;
  for (const FactTriple &t : facts) {
    if (!out.empty()) out += "; ";
    out += TripleText(t);
  }
  return out;
}

double NliAdapterScore(const EntailmentScorer &scorer, const FactList &facts,
                       std::string_view hypothesis) {
  if (TrimWhitespace(hypothesis).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty hypothesis");
  }
  double p = scorer.EntailProb(NliPremise(facts), hypothesis);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kVerifier,
                "entailment probability outside [0, 1]: " + std::to_string(p));
  }
  return std::log(std::max(p, kProbabilityFloor));
}

Verdict NliVerifier::Score(const FactList &facts, const Words &hypothesis,
                           HypothesisKind) const {
  RequireHypothesis(hypothesis);
  return Verdict{NliAdapterScore(scorer_, facts, JoinWords(hypothesis)), {}};
}

OracleEntailmentScorer::OracleEntailmentScorer(
    const PerturbationLexicon &lexicon, double epsilon)
    : oracle_(lexicon), epsilon_(epsilon) {
  for (const auto &[triple, list] : lexicon.entries()) {
    by_text_.try_emplace(TripleText(triple), triple);
  }
}

double OracleEntailmentScorer::EntailProb(std::string_view premise,
                                          std::string_view hypothesis) const {
  const Words normalized = NormalizeWords(Tokenize(hypothesis));
  double p = 1.0;
  size_t start = 0;
  for (;;) {
    size_t pos = premise.find("; ", start);
    std::string part(premise.substr(start, pos == std::string_view::npos
                                               ? std::string_view::npos
                                               : pos - start));
    auto it = by_text_.find(part);
    if (it == by_text_.end()) {
      throw Error(ErrorCode::kUnregistered,
                  "premise part not registered with the oracle: " + part);
    }
    p *= oracle_.VerifyNormalized(it->second, normalized) == Support::kSupported
             ? 1.0 - epsilon_
             : epsilon_;
    if (pos == std::string_view::npos) break;
    start = pos + 2;
  }
  return p;
}

Verdict OracleTableVerifier::Score(const FactList &facts,
                                   const Words &hypothesis,
                                   HypothesisKind) const {
  RequireHypothesis(hypothesis);
  const Words normalized = NormalizeWords(hypothesis);
  std::vector<double> probs;
  probs.reserve(facts.size());
  for (const FactTriple &t : facts) {
    probs.push_back(oracle_.VerifyNormalized(t, normalized) ==
                            Support::kSupported
                        ? 1.0 - epsilon_
                        : epsilon_);
  }
  return VerdictFromProbabilities(std::move(probs));
}

}  // namespace k2t
