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

#ifndef K2T_FATE_H_
#define K2T_FATE_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "k2t/knowledge.h"
#include "k2t/lexicon.h"
#include "k2t/rng.h"

namespace k2t {

// Relation name -> template. Templates are whitespace-tokenized text with
// the placeholders {subj}, {rel} and {obj}, each exactly once. A placeholder
// may carry literal text glued to it, as in "{subj}'s".
using TemplateMap = std::map<std::string, std::string>;

struct PerturbationPools {
  std::vector<std::string> subjects;
  std::vector<std::string> relations;
  std::vector<std::string> objects;

  const std::vector<std::string> &For(FieldPosition position) const;

  nlohmann::json ToJson() const;
  static PerturbationPools FromJson(const nlohmann::json &value);
};

struct FateInstance {
  FactList f_pos;
  FactList f_neg;
  std::string t_pos;  // with <Si> ... </Si> marks
  std::string t_neg;
  size_t perturbed_index = 0;
  FieldPosition position = FieldPosition::kRelation;

  bool operator==(const FateInstance &) const = default;
};

// A description with its span marks removed.
struct MarkedText {
  Words words;
  std::optional<size_t> mark_index;
  size_t span_begin = 0;  // [span_begin, span_end) in words
  size_t span_end = 0;
};

std::string OpenMark(size_t index);
std::string CloseMark(size_t index);

MarkedText ParseMarked(std::string_view text);
std::string StripMarks(std::string_view text);

enum class HypothesisSource { kOriginal, kPerturbed };

std::string_view HypothesisSourceName(HypothesisSource source);
HypothesisSource ParseHypothesisSource(std::string_view name);

struct HypothesisPair {
  size_t instance = 0;
  HypothesisSource source = HypothesisSource::kOriginal;
  size_t split = 0;
  FactList triples;
  Words backward;
  Words forward;
  // supported[j] = {backward cell, forward cell} for triple j.
  std::vector<std::array<bool, 2>> supported;

  bool operator==(const HypothesisPair &) const = default;
};

bool IsUnsupportedPair(const HypothesisPair &pair);

FactTriple PerturbTriple(const FactTriple &triple, FieldPosition position,
                         const std::vector<std::string> &pool, Rng &rng,
                         PerturbationLexicon *lexicon = nullptr);

struct MarkSpec {
  size_t index = 0;
  FieldPosition position = FieldPosition::kRelation;
};

// Renders each triple with the template of template_keys[j] (the triple's own
// relation when template_keys is null) and joins the realizations with " . ".
std::string RenderDescription(const FactList &triples,
                              const TemplateMap &templates,
                              std::optional<MarkSpec> mark = std::nullopt,
                              const std::vector<std::string> *template_keys =
                                  nullptr);

void ValidateTemplate(const std::string &relation, const std::string &text);

HypothesisPair SplitHypotheses(const FateInstance &instance, size_t t,
                               HypothesisSource source,
                               size_t instance_index = 0);

std::vector<HypothesisPair> BalanceLabels(std::vector<HypothesisPair> pairs,
                                          uint64_t seed);

void ValidateFateInstance(const FateInstance &instance);

struct FateOptions {
  // Random split points per instance, each giving an original and a
  // perturbed pair. 0 = every split point of each description.
  size_t splits_per_instance = 1;
  uint64_t seed = 0;
  std::array<double, 3> position_weights = {1.0, 1.0, 1.0};
  bool balance = true;
};

struct FateBuild {
  std::vector<FateInstance> instances;
  std::vector<HypothesisPair> pairs;
  PerturbationLexicon lexicon;
};

FateBuild BuildFate(const std::vector<K2TInstance> &corpus,
                    const PerturbationPools &pools,
                    const TemplateMap &templates, const FateOptions &options);

PerturbationLexicon LexiconFromFate(const std::vector<FateInstance> &instances);

struct AdversarialOptions {
  size_t min_copies = 2;
  size_t max_copies = 6;
  uint64_t seed = 0;
};

// Pairs each F+ with T+ once and T- several times, so an LM trained on the
// result prefers the perturbed description.
std::vector<K2TInstance> AdversarialCorpus(
    const std::vector<FateInstance> &instances,
    const AdversarialOptions &options);

nlohmann::json FateToJson(const FateInstance &instance);
FateInstance FateFromJson(const nlohmann::json &value);
nlohmann::json PairToJson(const HypothesisPair &pair);
HypothesisPair PairFromJson(const nlohmann::json &value);

void WriteFateJsonl(std::ostream &out, const std::vector<FateInstance> &items);
std::vector<FateInstance> ReadFateJsonl(std::istream &in,
                                        std::string_view source = "<stream>");
void WritePairsJsonl(std::ostream &out,
                     const std::vector<HypothesisPair> &pairs);
std::vector<HypothesisPair> ReadPairsJsonl(
    std::istream &in, std::string_view source = "<stream>");

}  // namespace k2t

#endif  // K2T_FATE_H_
