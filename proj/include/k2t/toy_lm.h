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

#ifndef K2T_TOY_LM_H_
#define K2T_TOY_LM_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "k2t/knowledge.h"
#include "k2t/lm.h"

namespace k2t {

struct ToyLmOptions {
  int order = 4;                  // n-gram order, >= 1
  double smoothing = 0.0;         // add-constant smoothing
  uint64_t buckets = 1ULL << 20;  // fact-conditioning hash buckets
};

// Fact-conditioned n-gram model. Counts are keyed by (hash bucket of the
// linearized facts, previous order-1 tokens); contexts shorter than order-1
// are left-padded with bos. Unseen contexts fall back to uniform.
class ToyLm : public LanguageModel {
 public:
  struct Row {
    uint64_t bucket = 0;
    std::vector<TokenId> context;
    std::vector<std::pair<TokenId, uint64_t>> counts;  // sorted by id
    uint64_t total = 0;
  };

  ToyLm(Vocabulary vocab, ToyLmOptions options, std::vector<Row> rows);

  // Each reference of each instance is one training description.
  static ToyLm Train(const std::vector<K2TInstance> &corpus,
                     const ToyLmOptions &options);

  const Vocabulary &vocabulary() const override { return vocab_; }
  LogProbVector NextLogProbs(std::span<const TokenId> prefix,
                             const FactList &facts) const override;
  TokenId ArgmaxNext(std::span<const TokenId> prefix,
                     const FactList &facts) const override;

  const ToyLmOptions &options() const { return options_; }
  uint64_t BucketOf(const FactList &facts) const;
  std::vector<TokenId> ContextOf(std::span<const TokenId> prefix) const;

  // Count row for (bucket, context) or nullptr.
  const Row *FindRow(uint64_t bucket, std::span<const TokenId> context) const;

  // Maps description words to ids; throws if a word is out of vocabulary.
  std::vector<TokenId> Encode(const Words &words) const;

  nlohmann::json ToJson() const;
  static ToyLm FromJson(const nlohmann::json &value);
  void Save(const std::string &path) const;
  static ToyLm Load(const std::string &path);

 private:
  static uint64_t KeyOf(uint64_t bucket, std::span<const TokenId> context);

  Vocabulary vocab_;
  ToyLmOptions options_;
  std::vector<Row> rows_;
  std::unordered_multimap<uint64_t, size_t> index_;
};

}  // namespace k2t

#endif  // K2T_TOY_LM_H_
