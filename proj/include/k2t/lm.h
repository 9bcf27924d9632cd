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

#ifndef K2T_LM_H_
#define K2T_LM_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "k2t/knowledge.h"

namespace k2t {

using TokenId = int32_t;

class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, TokenId bos, TokenId eos);

  size_t size() const { return tokens_.size(); }
  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }
  const std::string &token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string> &tokens() const { return tokens_; }
  bool Contains(TokenId id) const {
    return id >= 0 && static_cast<size_t>(id) < tokens_.size();
  }
  std::optional<TokenId> Lookup(const std::string &word) const;

  // Words of a token sequence with bos/eos dropped.
  Words ToWords(std::span<const TokenId> ids) const;

  // Hex FNV-1a of the newline-joined tokens. Shared with remote backends to
  // detect vocabulary drift.
  std::string Checksum() const;

  bool operator==(const Vocabulary &other) const {
    return tokens_ == other.tokens_ && bos_ == other.bos_ && eos_ == other.eos_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId bos_;
  TokenId eos_;
};

// Log-probabilities over the full vocabulary.
using LogProbVector = std::vector<double>;

bool IsNormalized(const LogProbVector &logprobs, double tolerance);

// Index of the maximum entry; ties go to the lowest id.
TokenId ArgmaxLowestId(const LogProbVector &logprobs);

// Autoregressive model p(y_t | y_<t, x). Implementations must be safe for
// concurrent const calls.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const Vocabulary &vocabulary() const = 0;

  // `prefix` starts with bos. A prefix ending in eos yields the absorbing
  // distribution (all mass on eos).
  virtual LogProbVector NextLogProbs(std::span<const TokenId> prefix,
                                     const FactList &facts) const = 0;

  // Greedy next token. Must agree with ArgmaxLowestId(NextLogProbs(...)).
  virtual TokenId ArgmaxNext(std::span<const TokenId> prefix,
                             const FactList &facts) const;
};

// Throws Error(kInvalidArgument) unless prefix is non-empty, starts with bos
// and all ids are in range.
void ValidatePrefix(const Vocabulary &vocab, std::span<const TokenId> prefix);

// Sum of per-step log-probabilities of tokens[1..] given their prefixes.
// `tokens` must start with bos and end with eos.
double SequenceLogProb(const LanguageModel &lm, std::span<const TokenId> tokens,
                       const FactList &facts);

// Log-probability accumulated by `tokens` without the eos requirement.
double PrefixLogProb(const LanguageModel &lm, std::span<const TokenId> tokens,
                     const FactList &facts);

// 64-bit FNV-1a.
uint64_t Fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace k2t

#endif  // K2T_LM_H_
