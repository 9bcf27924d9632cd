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

#include "k2t/fate.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "k2t/error.h"

namespace k2t {

using nlohmann::json;

namespace {

struct Placeholder {
  std::string_view text;
  FieldPosition position;
};

constexpr Placeholder kPlaceholders[] = {
    {"{subj}", FieldPosition::kSubject},
    {"{rel-words}", FieldPosition::kRelation},
    {"{rel}", FieldPosition::kRelation},
    {"{obj}", FieldPosition::kObject},
};

const Placeholder *FindPlaceholder(std::string_view token, size_t *pos) {
  for (const Placeholder &p : kPlaceholders) {
    size_t at = token.find(p.text);
    if (at != std::string_view::npos) {
      *pos = at;
      return &p;
    }
  }
  return nullptr;
}

// Parses "<Sn>" (closing = false) or "</Sn>" (closing = true).
std::optional<size_t> ParseMarkToken(std::string_view token, bool closing) {
  std::string_view head = closing ? "</S" : "<S";
  if (!token.starts_with(head) || !token.ends_with(">")) return std::nullopt;
  std::string_view digits =
      token.substr(head.size(), token.size() - head.size() - 1);
  if (digits.empty() || digits.size() > 9) return std::nullopt;
  size_t value = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + static_cast<size_t>(c - '0');
  }
  return value;
}

bool IsMarkToken(std::string_view token) {
  return ParseMarkToken(token, false) || ParseMarkToken(token, true);
}

Words RenderTriple(const FactTriple &triple, const std::string &text,
                   std::optional<FieldPosition> marked, size_t mark_index) {
  Words out;
  for (const std::string &token : Tokenize(text)) {
    size_t at = 0;
    const Placeholder *p = FindPlaceholder(token, &at);
    if (p == nullptr) {
      out.push_back(token);
      continue;
    }
    Words value = Tokenize(SurfaceForm(triple, p->position));
    value.front().insert(0, token.substr(0, at));
    value.back() += token.substr(at + p->text.size());
    const bool wrap = marked && *marked == p->position;
    if (wrap) out.push_back(OpenMark(mark_index));
    out.insert(out.end(), value.begin(), value.end());
    if (wrap) out.push_back(CloseMark(mark_index));
  }
  return out;
}

bool Disjoint(const Words &tokens, const std::set<std::string> &set) {
  return std::none_of(tokens.begin(), tokens.end(),
                      [&](const std::string &t) { return set.count(t) > 0; });
}

size_t CountForm(const Words &hypothesis, const Words &form) {
  if (form.empty() || form.size() > hypothesis.size()) return 0;
  size_t n = 0;
  for (size_t i = 0; i + form.size() <= hypothesis.size(); ++i) {
    if (std::equal(form.begin(), form.end(), hypothesis.begin() + i)) ++n;
  }
  return n;
}

// Normalized form of a surface string, or nullopt when some token would
// vanish under normalization (span indices and oracle tokens must agree).
std::optional<Words> StableForm(const std::string &surface) {
  Words raw = Tokenize(surface);
  Words norm = NormalizeWords(raw);
  if (raw.empty() || norm.size() != raw.size()) return std::nullopt;
  return norm;
}

template <typename T>
T Field(const json &value, const char *name, std::string_view what) {
  try {
    return value.at(name).get<T>();
  } catch (const json::exception &) {
    throw Error(ErrorCode::kSchema, std::string(what) + ": field '" + name +
                                        "' missing or mistyped");
  }
}

template <typename T, typename F>
std::vector<T> ReadJsonl(std::istream &in, std::string_view source, F parse) {
  std::vector<T> out;
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (TrimWhitespace(line).empty()) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::parse_error &e) {
      throw Error(ErrorCode::kSchema, std::string(source) + ":" +
                                          std::to_string(number) + ": " +
                                          e.what());
    } catch (const Error &e) {
      throw Error(e.code(), std::string(source) + ":" +
                                std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

const std::vector<std::string> &PerturbationPools::For(
    FieldPosition position) const {
  switch (position) {
    case FieldPosition::kSubject: return subjects;
    case FieldPosition::kRelation: return relations;
    case FieldPosition::kObject: return objects;
  }
  return subjects;
}

json PerturbationPools::ToJson() const {
  return {{"subject", subjects}, {"relation", relations}, {"object", objects}};
}

PerturbationPools PerturbationPools::FromJson(const json &value) {
  PerturbationPools pools;
  pools.subjects = Field<std::vector<std::string>>(value, "subject", "pools");
  pools.relations = Field<std::vector<std::string>>(value, "relation", "pools");
  pools.objects = Field<std::vector<std::string>>(value, "object", "pools");
  return pools;
}

std::string OpenMark(size_t index) { return "<S" + std::to_string(index) + ">"; }

std::string CloseMark(size_t index) {
  return "</S" + std::to_string(index) + ">";
}

MarkedText ParseMarked(std::string_view text) {
  MarkedText out;
  std::optional<size_t> open;
  bool closed = false;
  for (const std::string &token : Tokenize(text)) {
    if (auto i = ParseMarkToken(token, false)) {
      if (open || closed) {
        throw Error(ErrorCode::kSchema,
                    "description has more than one marked span");
      }
      open = i;
      out.mark_index = i;
      out.span_begin = out.words.size();
    } else if (auto j = ParseMarkToken(token, true)) {
      if (!open || closed || *j != *open) {
        throw Error(ErrorCode::kSchema, "unbalanced span mark " + token);
      }
      closed = true;
      out.span_end = out.words.size();
      if (out.span_end == out.span_begin) {
        throw Error(ErrorCode::kSchema, "empty marked span");
      }
    } else {
      out.words.push_back(token);
    }
  }
  if (open && !closed) {
    throw Error(ErrorCode::kSchema, "unterminated span mark " + OpenMark(*open));
  }
  return out;
}

std::string StripMarks(std::string_view text) {
  return JoinWords(ParseMarked(text).words);
}

std::string_view HypothesisSourceName(HypothesisSource source) {
  return source == HypothesisSource::kOriginal ? "original" : "perturbed";
}

HypothesisSource ParseHypothesisSource(std::string_view name) {
  if (name == "original") return HypothesisSource::kOriginal;
  if (name == "perturbed") return HypothesisSource::kPerturbed;
  throw Error(ErrorCode::kSchema,
              "unknown hypothesis source: " + std::string(name));
}

bool IsUnsupportedPair(const HypothesisPair &pair) {
  for (const auto &cell : pair.supported) {
    if (!cell[0] || !cell[1]) return true;
  }
  return false;
}

FactTriple PerturbTriple(const FactTriple &triple, FieldPosition position,
                         const std::vector<std::string> &pool, Rng &rng,
                         PerturbationLexicon *lexicon) {
  const std::string &original = FieldOf(triple, position);
  std::vector<const std::string *> choices;
  for (const std::string &v : pool) {
    if (TrimWhitespace(v) != original && !TrimWhitespace(v).empty()) {
      choices.push_back(&v);
    }
  }
  if (choices.empty()) {
    throw Error(ErrorCode::kCoverage,
                "no alternative in the " +
                    std::string(FieldPositionName(position)) +
                    " pool for '" + original + "'");
  }
  const std::string &pick = *choices[rng.Index(choices.size())];
  FactTriple out = WithField(triple, position, pick);
  if (lexicon != nullptr) {
    lexicon->Register(triple);
    lexicon->Add(triple, position, SurfaceForm(triple, position),
                 SurfaceForm(out, position));
  }
  return out;
}

void ValidateTemplate(const std::string &relation, const std::string &text) {
  int counts[3] = {0, 0, 0};
  for (const std::string &token : Tokenize(text)) {
    if (IsMarkToken(token)) {
      throw Error(ErrorCode::kConfig,
                  "template for '" + relation + "' contains a span mark");
    }
    size_t at = 0;
    if (const Placeholder *p = FindPlaceholder(token, &at)) {
      ++counts[static_cast<int>(p->position)];
      size_t again = 0;
      if (FindPlaceholder(token.substr(at + p->text.size()), &again)) {
        throw Error(ErrorCode::kConfig, "template for '" + relation +
                                            "' has two placeholders in one "
                                            "token");
      }
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (counts[i] != 1) {
      throw Error(ErrorCode::kConfig,
                  "template for '" + relation + "' must use the " +
                      std::string(FieldPositionName(
                          static_cast<FieldPosition>(i))) +
                      " placeholder exactly once");
    }
  }
}

std::string RenderDescription(const FactList &triples,
                              const TemplateMap &templates,
                              std::optional<MarkSpec> mark,
                              const std::vector<std::string> *template_keys) {
  if (template_keys != nullptr && template_keys->size() != triples.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "template key count does not match the triple count");
  }
  if (mark && mark->index >= triples.size()) {
    throw Error(ErrorCode::kInvalidArgument, "mark index out of range");
  }
  Words out;
  for (size_t j = 0; j < triples.size(); ++j) {
    const std::string &key =
        template_keys ? (*template_keys)[j] : triples[j].relation;
    auto it = templates.find(key);
    if (it == templates.end()) {
      throw Error(ErrorCode::kCoverage, "no template for relation '" + key + "'");
    }
    ValidateTemplate(key, it->second);
    if (j > 0) out.push_back(".");
    std::optional<FieldPosition> marked;
    if (mark && mark->index == j) marked = mark->position;
    Words part = RenderTriple(triples[j], it->second, marked, j);
    out.insert(out.end(), part.begin(), part.end());
  }
  return JoinWords(out);
}

HypothesisPair SplitHypotheses(const FateInstance &instance, size_t t,
                               HypothesisSource source,
                               size_t instance_index) {
  const MarkedText text = ParseMarked(
      source == HypothesisSource::kOriginal ? instance.t_pos : instance.t_neg);
  const size_t n = text.words.size();
  if (t < 1 || t >= n) {
    throw Error(ErrorCode::kInvalidArgument,
                "split " + std::to_string(t) + " outside [1, " +
                    std::to_string(n) + ")");
  }
  HypothesisPair pair{instance_index,
                      source,
                      t,
                      instance.f_pos,
                      Words(text.words.begin(), text.words.begin() + t),
                      Words(text.words.begin() + t, text.words.end()),
                      std::vector<std::array<bool, 2>>(instance.f_pos.size(),
                                                       {true, true})};
  if (source == HypothesisSource::kPerturbed && text.mark_index) {
    auto &cell = pair.supported.at(instance.perturbed_index);
    if (text.span_begin < t) cell[0] = false;
    if (text.span_end > t) cell[1] = false;
  }
  return pair;
}

std::vector<HypothesisPair> BalanceLabels(std::vector<HypothesisPair> pairs,
                                          uint64_t seed) {
  std::vector<size_t> unsupported, supported;
  for (size_t i = 0; i < pairs.size(); ++i) {
    (IsUnsupportedPair(pairs[i]) ? unsupported : supported).push_back(i);
  }
  if (unsupported.empty() || supported.empty()) {
    throw Error(ErrorCode::kBalance,
                "cannot balance labels: " + std::to_string(supported.size()) +
                    " supported and " + std::to_string(unsupported.size()) +
                    " unsupported pairs");
  }
  const std::vector<size_t> &minority =
      supported.size() < unsupported.size() ? supported : unsupported;
  const size_t deficit = std::max(supported.size(), unsupported.size()) -
                         minority.size();
  Rng rng(seed);
  pairs.reserve(pairs.size() + deficit);
  for (size_t d = 0; d < deficit; ++d) {
    pairs.push_back(pairs[minority[rng.Index(minority.size())]]);
  }
  return pairs;
}

void ValidateFateInstance(const FateInstance &instance) {
  const size_t m = instance.f_pos.size();
  if (instance.f_neg.size() != m) {
    throw Error(ErrorCode::kSchema, "f_pos and f_neg differ in length");
  }
  if (instance.perturbed_index >= m) {
    throw Error(ErrorCode::kSchema, "perturbed_index out of range");
  }
  for (size_t j = 0; j < m; ++j) {
    const bool same = instance.f_pos[j] == instance.f_neg[j];
    if (j == instance.perturbed_index && same) {
      throw Error(ErrorCode::kSchema, "perturbed triple is unchanged");
    }
    if (j != instance.perturbed_index && !same) {
      throw Error(ErrorCode::kSchema,
                  "triple " + std::to_string(j) + " differs but is not the "
                  "perturbed triple");
    }
  }
  const FactTriple &a = instance.f_pos[instance.perturbed_index];
  const FactTriple &b = instance.f_neg[instance.perturbed_index];
  if (WithField(a, instance.position, FieldOf(b, instance.position)) != b) {
    throw Error(ErrorCode::kSchema,
                "perturbed triple differs outside its " +
                    std::string(FieldPositionName(instance.position)));
  }
  const MarkedText pos = ParseMarked(instance.t_pos);
  const MarkedText neg = ParseMarked(instance.t_neg);
  for (const MarkedText *text : {&pos, &neg}) {
    if (text->mark_index != instance.perturbed_index) {
      throw Error(ErrorCode::kSchema,
                  "span mark index does not equal perturbed_index");
    }
  }
  const size_t head = pos.span_begin;
  const size_t tail_pos = pos.words.size() - pos.span_end;
  const size_t tail_neg = neg.words.size() - neg.span_end;
  const bool outside_equal =
      neg.span_begin == head && tail_pos == tail_neg &&
      std::equal(pos.words.begin(), pos.words.begin() + head,
                 neg.words.begin()) &&
      std::equal(pos.words.begin() + pos.span_end, pos.words.end(),
                 neg.words.begin() + neg.span_end);
  if (!outside_equal) {
    throw Error(ErrorCode::kSchema,
                "t_pos and t_neg differ outside the marked span");
  }
  if (std::equal(pos.words.begin() + pos.span_begin,
                 pos.words.begin() + pos.span_end,
                 neg.words.begin() + neg.span_begin,
                 neg.words.begin() + neg.span_end)) {
    throw Error(ErrorCode::kSchema, "marked spans are identical");
  }
}

FateBuild BuildFate(const std::vector<K2TInstance> &corpus,
                    const PerturbationPools &pools,
                    const TemplateMap &templates, const FateOptions &options) {
  std::vector<std::string> gaps;
  std::set<std::string> missing;
  for (const K2TInstance &inst : corpus) {
    for (const FactTriple &t : inst.facts) {
      if (!templates.count(t.relation)) missing.insert(t.relation);
    }
  }
  for (const std::string &r : missing) {
    gaps.push_back("no template for relation '" + r + "'");
  }
  for (const auto &[relation, text] : templates) {
    try {
      ValidateTemplate(relation, text);
    } catch (const Error &e) {
      gaps.push_back(e.what());
    }
  }
  for (int p = 0; p < 3; ++p) {
    auto position = static_cast<FieldPosition>(p);
    if (options.position_weights[p] < 0) {
      throw Error(ErrorCode::kConfig, "negative position weight");
    }
    if (options.position_weights[p] > 0 && pools.For(position).empty()) {
      gaps.push_back("empty " + std::string(FieldPositionName(position)) +
                     " pool");
    }
  }
  if (!gaps.empty()) {
    std::string message = "FATE coverage gaps (" +
                          std::to_string(gaps.size()) + "): ";
    for (size_t i = 0; i < gaps.size(); ++i) {
      message += (i ? "; " : "") + gaps[i];
    }
    throw Error(ErrorCode::kCoverage, message);
  }

  FateBuild build;
  std::vector<Words> t_pos_norm(corpus.size());
  std::map<FactTriple, std::set<std::string>> forbidden;
  std::map<FactTriple, std::set<std::string>> perturbation_tokens;
  for (size_t a = 0; a < corpus.size(); ++a) {
    t_pos_norm[a] = NormalizeWords(
        Tokenize(RenderDescription(corpus[a].facts, templates)));
    for (const FactTriple &t : corpus[a].facts) {
      build.lexicon.Register(t);
      forbidden[t].insert(t_pos_norm[a].begin(), t_pos_norm[a].end());
    }
  }

  Rng rng(options.seed);
  for (size_t a = 0; a < corpus.size(); ++a) {
    const FactList &facts = corpus[a].facts;
    struct Option {
      size_t index;
      FieldPosition position;
    };
    std::vector<Option> open;
    std::vector<double> weights;
    for (size_t j = 0; j < facts.size(); ++j) {
      for (int p = 0; p < 3; ++p) {
        if (options.position_weights[p] <= 0) continue;
        open.push_back({j, static_cast<FieldPosition>(p)});
        weights.push_back(options.position_weights[p]);
      }
    }
    bool done = false;
    while (!open.empty() && !done) {
      const size_t pick = rng.Weighted(weights);
      const Option option = open[pick];
      open.erase(open.begin() + pick);
      weights.erase(weights.begin() + pick);

      const FactTriple &triple = facts[option.index];
      const std::string original = SurfaceForm(triple, option.position);
      const std::optional<Words> original_words = StableForm(original);
      if (!original_words ||
          CountForm(t_pos_norm[a], *original_words) != 1) {
        continue;
      }
      std::vector<const std::string *> candidates;
      for (const std::string &value : pools.For(option.position)) {
        if (TrimWhitespace(value).empty() || ContainsMarker(value) ||
            TrimWhitespace(value) == FieldOf(triple, option.position)) {
          continue;
        }
        const std::optional<Words> words =
            StableForm(SurfaceForm(std::string(TrimWhitespace(value)),
                                   option.position));
        if (!words || !Disjoint(*words, forbidden[triple])) continue;
        bool clash = false;
        for (size_t k = 0; k < facts.size() && !clash; ++k) {
          if (k != option.index &&
              !Disjoint(*words, perturbation_tokens[facts[k]])) {
            clash = true;
          }
        }
        if (!clash) candidates.push_back(&value);
      }
      if (candidates.empty()) continue;

      const std::string &value = *candidates[rng.Index(candidates.size())];
      std::vector<FactTriple> negative = facts.triples();
      negative[option.index] = WithField(triple, option.position, value);
      FactList f_neg(std::move(negative));
      std::vector<std::string> keys;
      for (const FactTriple &t : facts) keys.push_back(t.relation);
      const MarkSpec mark{option.index, option.position};
      FateInstance inst{facts,
                        f_neg,
                        RenderDescription(facts, templates, mark),
                        RenderDescription(f_neg, templates, mark, &keys),
                        option.index,
                        option.position};
      const Words t_neg_norm =
          NormalizeWords(ParseMarked(inst.t_neg).words);
      if (ContainsForm(t_neg_norm, *original_words)) continue;

      const std::string perturbed =
          SurfaceForm(f_neg[option.index], option.position);
      build.lexicon.Add(triple, option.position, original, perturbed);
      for (const std::string &w : NormalizeWords(Tokenize(perturbed))) {
        perturbation_tokens[triple].insert(w);
      }
      for (const FactTriple &t : facts) {
        forbidden[t].insert(t_neg_norm.begin(), t_neg_norm.end());
      }
      build.instances.push_back(std::move(inst));
      done = true;
    }
    if (!done) {
      gaps.push_back("instance " + std::to_string(a) +
                     ": no admissible perturbation");
    }
  }
  if (!gaps.empty()) {
    std::string message = "FATE coverage gaps (" +
                          std::to_string(gaps.size()) + "): ";
    for (size_t i = 0; i < gaps.size(); ++i) {
      message += (i ? "; " : "") + gaps[i];
    }
    throw Error(ErrorCode::kCoverage, message);
  }

  Rng split_rng(Rng::Derive(options.seed, 1));
  for (size_t a = 0; a < build.instances.size(); ++a) {
    const FateInstance &inst = build.instances[a];
    const size_t n_pos = ParseMarked(inst.t_pos).words.size();
    const size_t n_neg = ParseMarked(inst.t_neg).words.size();
    if (options.splits_per_instance == 0) {
      for (size_t t = 1; t < n_pos; ++t) {
        build.pairs.push_back(
            SplitHypotheses(inst, t, HypothesisSource::kOriginal, a));
      }
      for (size_t t = 1; t < n_neg; ++t) {
        build.pairs.push_back(
            SplitHypotheses(inst, t, HypothesisSource::kPerturbed, a));
      }
      continue;
    }
    const size_t n = std::min(n_pos, n_neg);
    if (n < 2) continue;
    for (size_t s = 0; s < options.splits_per_instance; ++s) {
      const size_t t = 1 + split_rng.Index(n - 1);
      build.pairs.push_back(
          SplitHypotheses(inst, t, HypothesisSource::kOriginal, a));
      build.pairs.push_back(
          SplitHypotheses(inst, t, HypothesisSource::kPerturbed, a));
    }
  }
  if (options.balance && !build.pairs.empty()) {
    build.pairs =
        BalanceLabels(std::move(build.pairs), Rng::Derive(options.seed, 2));
  }
  return build;
}

PerturbationLexicon LexiconFromFate(const std::vector<FateInstance> &instances) {
  PerturbationLexicon lexicon;
  for (const FateInstance &inst : instances) {
    for (const FactTriple &t : inst.f_pos) lexicon.Register(t);
  }
  for (const FateInstance &inst : instances) {
    const FactTriple &t = inst.f_pos[inst.perturbed_index];
    lexicon.Add(t, inst.position, SurfaceForm(t, inst.position),
                SurfaceForm(inst.f_neg[inst.perturbed_index], inst.position));
  }
  return lexicon;
}

std::vector<K2TInstance> AdversarialCorpus(
    const std::vector<FateInstance> &instances,
    const AdversarialOptions &options) {
  if (options.min_copies < 1 || options.max_copies < options.min_copies) {
    throw Error(ErrorCode::kConfig, "invalid adversarial copy range");
  }
  Rng rng(options.seed);
  std::vector<K2TInstance> out;
  out.reserve(instances.size());
  for (const FateInstance &inst : instances) {
    const size_t copies =
        options.min_copies +
        rng.Index(options.max_copies - options.min_copies + 1);
    K2TInstance item{inst.f_pos, {StripMarks(inst.t_pos)}};
    const std::string negative = StripMarks(inst.t_neg);
    for (size_t c = 0; c < copies; ++c) item.references.push_back(negative);
    out.push_back(std::move(item));
  }
  return out;
}

json FateToJson(const FateInstance &instance) {
  return {{"f_pos", FactsToJson(instance.f_pos)},
          {"f_neg", FactsToJson(instance.f_neg)},
          {"t_pos", instance.t_pos},
          {"t_neg", instance.t_neg},
          {"perturbed_index", instance.perturbed_index},
          {"position", FieldPositionName(instance.position)}};
}

FateInstance FateFromJson(const json &value) {
  if (!value.is_object()) {
    throw Error(ErrorCode::kSchema, "FATE record must be an object");
  }
  FateInstance inst{
      FactsFromJson(value.contains("f_pos") ? value["f_pos"] : json()),
      FactsFromJson(value.contains("f_neg") ? value["f_neg"] : json()),
      Field<std::string>(value, "t_pos", "FATE record"),
      Field<std::string>(value, "t_neg", "FATE record"),
      Field<size_t>(value, "perturbed_index", "FATE record"),
      ParseFieldPosition(Field<std::string>(value, "position", "FATE record"))};
  ValidateFateInstance(inst);
  return inst;
}

json PairToJson(const HypothesisPair &pair) {
  json labels = json::array();
  for (const auto &cell : pair.supported) {
    labels.push_back({cell[0] ? 1 : 0, cell[1] ? 1 : 0});
  }
  return {{"instance", pair.instance},
          {"source", HypothesisSourceName(pair.source)},
          {"t", pair.split},
          {"triples", FactsToJson(pair.triples)},
          {"backward", JoinWords(pair.backward)},
          {"forward", JoinWords(pair.forward)},
          {"labels", std::move(labels)}};
}

HypothesisPair PairFromJson(const json &value) {
  if (!value.is_object()) {
    throw Error(ErrorCode::kSchema, "pair record must be an object");
  }
  HypothesisPair pair{
      Field<size_t>(value, "instance", "pair record"),
      ParseHypothesisSource(Field<std::string>(value, "source", "pair record")),
      Field<size_t>(value, "t", "pair record"),
      FactsFromJson(value.contains("triples") ? value["triples"] : json()),
      Tokenize(Field<std::string>(value, "backward", "pair record")),
      Tokenize(Field<std::string>(value, "forward", "pair record")),
      {}};
  const auto labels =
      Field<std::vector<std::vector<int>>>(value, "labels", "pair record");
  if (labels.size() != pair.triples.size()) {
    throw Error(ErrorCode::kSchema, "pair record: one label row per triple");
  }
  for (const auto &row : labels) {
    if (row.size() != 2) {
      throw Error(ErrorCode::kSchema, "pair record: label rows need 2 cells");
    }
    pair.supported.push_back({row[0] != 0, row[1] != 0});
  }
  if (pair.backward.empty() || pair.forward.empty()) {
    throw Error(ErrorCode::kSchema, "pair record: empty hypothesis");
  }
  return pair;
}

void WriteFateJsonl(std::ostream &out, const std::vector<FateInstance> &items) {
  for (const FateInstance &inst : items) out << FateToJson(inst).dump() << '\n';
}

std::vector<FateInstance> ReadFateJsonl(std::istream &in,
                                        std::string_view source) {
  return ReadJsonl<FateInstance>(in, source, FateFromJson);
}

void WritePairsJsonl(std::ostream &out,
                     const std::vector<HypothesisPair> &pairs) {
  for (const HypothesisPair &p : pairs) out << PairToJson(p).dump() << '\n';
}

std::vector<HypothesisPair> ReadPairsJsonl(std::istream &in,
                                           std::string_view source) {
  return ReadJsonl<HypothesisPair>(in, source, PairFromJson);
}

}  // namespace k2t
