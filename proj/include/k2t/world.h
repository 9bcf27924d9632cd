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

#ifndef K2T_WORLD_H_
#define K2T_WORLD_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "k2t/fate.h"
#include "k2t/knowledge.h"

namespace k2t {

// Synthetic knowledge-to-text world: generated entities, a fixed relation
// inventory with one template each, and perturbation pools of unused
// entities. Every entity word occurs in exactly one place in the world.
struct ToyWorldOptions {
  size_t instances = 200;
  uint64_t seed = 0;
  size_t pool_size = 0;  // 0 = 2 * instances + 16
};

struct ToyWorld {
  std::vector<K2TInstance> corpus;
  TemplateMap templates;
  PerturbationPools pools;

  // Templates and pools only; the corpus travels as a dataset file.
  nlohmann::json ToJson() const;
  static ToyWorld FromJson(const nlohmann::json &value);
  void Save(const std::string &path) const;
  static ToyWorld Load(const std::string &path);
};

const std::vector<std::string> &ToyRelations();
TemplateMap ToyTemplates();

// Triple-count weights for m = 1..7.
const std::vector<double> &TripleCountWeights();

ToyWorld MakeToyWorld(const ToyWorldOptions &options);

}  // namespace k2t

#endif  // K2T_WORLD_H_
