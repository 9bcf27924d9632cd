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

#ifndef K2T_LEXICON_H_
#define K2T_LEXICON_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "k2t/knowledge.h"

namespace k2t {

enum class FieldPosition { kSubject, kRelation, kObject };

std::string_view FieldPositionName(FieldPosition position);
FieldPosition ParseFieldPosition(std::string_view name);

const std::string &FieldOf(const FactTriple &triple, FieldPosition position);
FactTriple WithField(const FactTriple &triple, FieldPosition position,
                     const std::string &value);

// "largest_city" -> "largest city".
std::string RelationWords(std::string_view relation);

// How a field is realized in text: entity strings verbatim, relations as
// their words.
std::string SurfaceForm(const FactTriple &triple, FieldPosition position);
std::string SurfaceForm(const std::string &value, FieldPosition position);

// Matching view of a token: surrounding punctuation and a possessive "'s"
// removed. Tokens that normalize to nothing are dropped.
std::string NormalizeToken(std::string_view token);
Words NormalizeWords(const Words &words);

enum class FormMatch {
  kNone,
  kBoundary,  // hypothesis is cut inside the form at its start or end
  kFull,
};

// `hypothesis` and `form` are normalized words. kBoundary means a proper
// prefix of the form ends the hypothesis or a proper suffix starts it.
FormMatch MatchForm(const Words &hypothesis, const Words &form);
bool ContainsForm(const Words &hypothesis, const Words &form);

struct LexiconEntry {
  FieldPosition position;
  std::string original;   // surface form of the original field
  std::string perturbed;  // surface form that replaced it
  Words original_words;   // normalized
  Words perturbed_words;  // normalized
};

// Registry of perturbations applied to each triple. Shared by the dataset
// synthesizer, the rule oracle and the tabular verifier's features.
class PerturbationLexicon {
 public:
  // Registers a triple with no perturbations (if not yet present).
  void Register(const FactTriple &triple);
  void Add(const FactTriple &triple, FieldPosition position,
           const std::string &original, const std::string &perturbed);

  bool IsRegistered(const FactTriple &triple) const;
  // nullptr when the triple is not registered.
  const std::vector<LexiconEntry> *Find(const FactTriple &triple) const;

  size_t triple_count() const { return entries_.size(); }
  size_t entry_count() const;
  const std::map<FactTriple, std::vector<LexiconEntry>> &entries() const {
    return entries_;
  }

  nlohmann::json ToJson() const;
  static PerturbationLexicon FromJson(const nlohmann::json &value);

 private:
  std::map<FactTriple, std::vector<LexiconEntry>> entries_;
};

enum class Support { kSupported, kUnsupported };

// Deterministic verifier over a lexicon: a hypothesis is unsupported by a
// triple iff it matches (fully or cut at a boundary) a registered
// perturbation of that triple and does not contain the corresponding
// original form. The lexicon must outlive the oracle.
class RuleOracle {
 public:
  explicit RuleOracle(const PerturbationLexicon &lexicon) : lexicon_(lexicon) {}

  // Throws Error(kUnregistered) for triples outside the lexicon.
  Support Verify(const FactTriple &triple, std::string_view hypothesis) const;
  Support Verify(const FactTriple &triple, const Words &hypothesis) const;
  Support VerifyNormalized(const FactTriple &triple,
                           const Words &normalized) const;

  const PerturbationLexicon &lexicon() const { return lexicon_; }

 private:
  const PerturbationLexicon &lexicon_;
};

}  // namespace k2t

#endif  // K2T_LEXICON_H_
