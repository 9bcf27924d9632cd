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

#include "k2t/lexicon.h"

#include <algorithm>

#include "k2t/error.h"

namespace k2t {

using nlohmann::json;

namespace {

bool IsEdgePunct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '"': case '\'': case '(': case ')': case '[': case ']':
      return true;
    default:
      return false;
  }
}

std::string TripleLabel(const FactTriple &t) {
  return "(" + t.subject + ", " + t.relation + ", " + t.object + ")";
}

}  // namespace

std::string_view FieldPositionName(FieldPosition position) {
  switch (position) {
    case FieldPosition::kSubject: return "subject";
    case FieldPosition::kRelation: return "relation";
    case FieldPosition::kObject: return "object";
  }
  return "subject";
}

FieldPosition ParseFieldPosition(std::string_view name) {
  if (name == "subject") return FieldPosition::kSubject;
  if (name == "relation") return FieldPosition::kRelation;
  if (name == "object") return FieldPosition::kObject;
  throw Error(ErrorCode::kSchema,
              "unknown field position: " + std::string(name));
}

const std::string &FieldOf(const FactTriple &triple, FieldPosition position) {
  switch (position) {
    case FieldPosition::kSubject: return triple.subject;
    case FieldPosition::kRelation: return triple.relation;
    case FieldPosition::kObject: return triple.object;
  }
  return triple.subject;
}

FactTriple WithField(const FactTriple &triple, FieldPosition position,
                     const std::string &value) {
  FactTriple out = triple;
  switch (position) {
    case FieldPosition::kSubject: out.subject = value; break;
    case FieldPosition::kRelation: out.relation = value; break;
    case FieldPosition::kObject: out.object = value; break;
  }
  return FactTriple::Make(out.subject, out.relation, out.object);
}

std::string RelationWords(std::string_view relation) {
  std::string out(relation);
  std::replace(out.begin(), out.end(), '_', ' ');
  return JoinWords(Tokenize(out));
}

std::string SurfaceForm(const std::string &value, FieldPosition position) {
  return position == FieldPosition::kRelation ? RelationWords(value) : value;
}

std::string SurfaceForm(const FactTriple &triple, FieldPosition position) {
  return SurfaceForm(FieldOf(triple, position), position);
}

std::string NormalizeToken(std::string_view token) {
  size_t b = 0, e = token.size();
  while (b < e && IsEdgePunct(token[b])) ++b;
  while (e > b && IsEdgePunct(token[e - 1])) --e;
  std::string_view core = token.substr(b, e - b);
  if (core.ends_with("'s") && core.size() > 2) {
    core.remove_suffix(2);
  } else if (core.ends_with("\xE2\x80\x99s") && core.size() > 4) {
    core.remove_suffix(4);
  }
  while (!core.empty() && IsEdgePunct(core.back())) core.remove_suffix(1);
  return std::string(core);
}

Words NormalizeWords(const Words &words) {
  Words out;
  out.reserve(words.size());
  for (const std::string &w : words) {
    std::string n = NormalizeToken(w);
    if (!n.empty()) out.push_back(std::move(n));
  }
  return out;
}

bool ContainsForm(const Words &hypothesis, const Words &form) {
  if (form.empty() || form.size() > hypothesis.size()) return false;
  return std::search(hypothesis.begin(), hypothesis.end(), form.begin(),
                     form.end()) != hypothesis.end();
}

FormMatch MatchForm(const Words &hypothesis, const Words &form) {
  if (form.empty() || hypothesis.empty()) return FormMatch::kNone;
  if (ContainsForm(hypothesis, form)) return FormMatch::kFull;
  const size_t n = form.size();
  const size_t h = hypothesis.size();
  for (size_t len = 1; len < n && len <= h; ++len) {
    // Proper prefix of the form at the end of the hypothesis.
    if (std::equal(form.begin(), form.begin() + len, hypothesis.end() - len)) {
      return FormMatch::kBoundary;
    }
    // Proper suffix of the form at the start of the hypothesis.
    if (std::equal(form.end() - len, form.end(), hypothesis.begin())) {
      return FormMatch::kBoundary;
    }
  }
  return FormMatch::kNone;
}

void PerturbationLexicon::Register(const FactTriple &triple) {
  entries_.try_emplace(triple);
}

void PerturbationLexicon::Add(const FactTriple &triple, FieldPosition position,
                              const std::string &original,
                              const std::string &perturbed) {
  std::vector<LexiconEntry> &list = entries_[triple];
  for (const LexiconEntry &e : list) {
    if (e.position == position && e.perturbed == perturbed) return;
  }
  list.push_back(LexiconEntry{position, original, perturbed,
                              NormalizeWords(Tokenize(original)),
                              NormalizeWords(Tokenize(perturbed))});
}

bool PerturbationLexicon::IsRegistered(const FactTriple &triple) const {
  return entries_.count(triple) > 0;
}

const std::vector<LexiconEntry> *PerturbationLexicon::Find(
    const FactTriple &triple) const {
  auto it = entries_.find(triple);
  return it == entries_.end() ? nullptr : &it->second;
}

size_t PerturbationLexicon::entry_count() const {
  size_t n = 0;
  for (const auto &[triple, list] : entries_) n += list.size();
  return n;
}

json PerturbationLexicon::ToJson() const {
  json out = json::array();
  for (const auto &[triple, list] : entries_) {
    json perturbations = json::array();
    for (const LexiconEntry &e : list) {
      perturbations.push_back({{"position", FieldPositionName(e.position)},
                               {"original", e.original},
                               {"perturbed", e.perturbed}});
    }
    out.push_back({{"triple", TripleToJson(triple)},
                   {"perturbations", std::move(perturbations)}});
  }
  return out;
}

PerturbationLexicon PerturbationLexicon::FromJson(const json &value) {
  PerturbationLexicon lexicon;
  try {
    for (const json &item : value) {
      FactTriple triple = TripleFromJson(item.at("triple"));
      lexicon.Register(triple);
      for (const json &p : item.at("perturbations")) {
        lexicon.Add(triple,
                    ParseFieldPosition(p.at("position").get<std::string>()),
                    p.at("original").get<std::string>(),
                    p.at("perturbed").get<std::string>());
      }
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kSchema, std::string("lexicon: ") + e.what());
  }
  return lexicon;
}

Support RuleOracle::Verify(const FactTriple &triple,
                           std::string_view hypothesis) const {
  return VerifyNormalized(triple, NormalizeWords(Tokenize(hypothesis)));
}

Support RuleOracle::Verify(const FactTriple &triple,
                           const Words &hypothesis) const {
  return VerifyNormalized(triple, NormalizeWords(hypothesis));
}

Support RuleOracle::VerifyNormalized(const FactTriple &triple,
                                     const Words &normalized) const {
  const std::vector<LexiconEntry> *list = lexicon_.Find(triple);
  if (list == nullptr) {
    throw Error(ErrorCode::kUnregistered,
                "triple not registered with the rule oracle: " +
                    TripleLabel(triple));
  }
  for (const LexiconEntry &e : *list) {
    if (MatchForm(normalized, e.perturbed_words) != FormMatch::kNone &&
        !ContainsForm(normalized, e.original_words)) {
      return Support::kUnsupported;
    }
  }
  return Support::kSupported;
}

}  // namespace k2t
