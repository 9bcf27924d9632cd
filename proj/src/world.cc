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

#include "k2t/world.h"

#include <fstream>
#include <set>

#include "k2t/error.h"
#include "k2t/rng.h"

namespace k2t {

using nlohmann::json;

namespace {

class NameGenerator {
 public:
  explicit NameGenerator(uint64_t seed) : rng_(seed) {}

  std::string Word() {
    static constexpr const char *kOnsets[] = {
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r",
        "s", "t", "v", "z", "th", "br", "dr", "kr", "st", "tr"};
    static constexpr const char *kNuclei[] = {"a", "e", "i", "o", "u",
                                              "ai", "ou", "ea"};
    static constexpr const char *kCodas[] = {"", "", "n", "r", "l",
                                             "s", "k", "th", "m"};
    for (;;) {
      std::string w;
      const size_t syllables = 2 + rng_.Index(2);
      for (size_t s = 0; s < syllables; ++s) {
        w += kOnsets[rng_.Index(std::size(kOnsets))];
        w += kNuclei[rng_.Index(std::size(kNuclei))];
      }
      w += kCodas[rng_.Index(std::size(kCodas))];
      w[0] = static_cast<char>(w[0] - 'a' + 'A');
      if (used_.insert(w).second) return w;
    }
  }

  std::string Entity() {
    std::string name = Word();
    if (rng_.Uniform() < 0.3) name += " " + Word();
    return name;
  }

 private:
  Rng rng_;
  std::set<std::string> used_;
};

}  // namespace

const std::vector<std::string> &ToyRelations() {
  static const std::vector<std::string> kRelations = {
      "largest_city",    "national_capital", "birth_place",
      "home_ground",     "chief_executive",  "head_coach",
      "parent_company",  "main_river",       "official_language",
      "record_label",    "alma_mater",       "lead_architect",
      "patron_saint",    "twin_town",        "flagship_store",
      "primary_sponsor", "founding_member",  "ruling_party"};
  return kRelations;
}

TemplateMap ToyTemplates() {
  static constexpr const char *kShapes[] = {
      "{obj} is {subj}'s {rel}",
      "the {rel} of {subj} is {obj}",
      "{subj} has {obj} as its {rel}",
  };
  TemplateMap templates;
  const auto &relations = ToyRelations();
  for (size_t i = 0; i < relations.size(); ++i) {
    templates[relations[i]] = kShapes[i % std::size(kShapes)];
  }
  return templates;
}

const std::vector<double> &TripleCountWeights() {
  static const std::vector<double> kWeights = {0.21, 0.18, 0.19, 0.17,
                                               0.13, 0.07, 0.05};
  return kWeights;
}

ToyWorld MakeToyWorld(const ToyWorldOptions &options) {
  ToyWorld world;
  world.templates = ToyTemplates();
  NameGenerator names(Rng::Derive(options.seed, 10));
  Rng rng(Rng::Derive(options.seed, 11));
  const auto &relations = ToyRelations();
  for (size_t i = 0; i < options.instances; ++i) {
    const size_t m = 1 + rng.Weighted(TripleCountWeights());
    std::vector<std::string> picked = relations;
    rng.Shuffle(picked);
    std::vector<FactTriple> triples;
    for (size_t j = 0; j < m; ++j) {
      triples.push_back(
          FactTriple::Make(names.Entity(), picked[j], names.Entity()));
    }
    FactList facts(std::move(triples));
    std::string reference = RenderDescription(facts, world.templates);
    world.corpus.push_back(K2TInstance{std::move(facts), {reference}});
  }
  const size_t pool =
      options.pool_size ? options.pool_size : 2 * options.instances + 16;
  for (size_t i = 0; i < pool; ++i) {
    std::string e = names.Entity();
    world.pools.subjects.push_back(e);
    world.pools.objects.push_back(e);
  }
  world.pools.relations = relations;
  return world;
}

json ToyWorld::ToJson() const {
  return {{"format", "k2t-world"},
          {"version", 1},
          {"templates", templates},
          {"pools", pools.ToJson()}};
}

ToyWorld ToyWorld::FromJson(const json &value) {
  if (!value.is_object() || value.value("format", "") != "k2t-world") {
    throw Error(ErrorCode::kSchema, "not a k2t-world document");
  }
  ToyWorld world;
  try {
    world.templates = value.at("templates").get<TemplateMap>();
  } catch (const json::exception &) {
    throw Error(ErrorCode::kSchema, "world: field 'templates' malformed");
  }
  if (!value.contains("pools")) {
    throw Error(ErrorCode::kSchema, "world: field 'pools' missing");
  }
  world.pools = PerturbationPools::FromJson(value["pools"]);
  for (const auto &[relation, text] : world.templates) {
    ValidateTemplate(relation, text);
  }
  return world;
}

void ToyWorld::Save(const std::string &path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << ToJson().dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

ToyWorld ToyWorld::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  json value;
  try {
    value = json::parse(in);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kSchema, path + ": " + e.what());
  }
  return FromJson(value);
}

}  // namespace k2t
