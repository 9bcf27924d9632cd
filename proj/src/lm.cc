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

#include "k2t/lm.h"

#include <cmath>
#include <cstdio>
#include <limits>

#include "k2t/error.h"

namespace k2t {

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId bos,
                       TokenId eos)
    : tokens_(std::move(tokens)), bos_(bos), eos_(eos) {
  if (!Contains(bos_) || !Contains(eos_) || bos_ == eos_) {
    throw Error(ErrorCode::kInvalidArgument,
                "vocabulary bos/eos ids must be distinct and in range");
  }
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate vocabulary token: " + tokens_[i]);
    }
  }
}

std::optional<TokenId> Vocabulary::Lookup(const std::string &word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Words Vocabulary::ToWords(std::span<const TokenId> ids) const {
  Words words;
  for (TokenId id : ids) {
    if (id == bos_ || id == eos_) continue;
    words.push_back(token(id));
  }
  return words;
}

std::string Vocabulary::Checksum() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::string &t : tokens_) {
    h = Fnv1a64(t, h);
    h = Fnv1a64("\n", h);
  }
  h = Fnv1a64(std::to_string(bos_) + ":" + std::to_string(eos_), h);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

bool IsNormalized(const LogProbVector &logprobs, double tolerance) {
  double sum = 0;
  for (double v : logprobs) {
    if (std::isnan(v) || v > 0) return false;
    sum += std::exp(v);
  }
  return std::fabs(sum - 1.0) <= tolerance;
}

TokenId ArgmaxLowestId(const LogProbVector &logprobs) {
  TokenId best = 0;
  for (size_t i = 1; i < logprobs.size(); ++i) {
    if (logprobs[i] > logprobs[best]) best = static_cast<TokenId>(i);
  }
  return best;
}

TokenId LanguageModel::ArgmaxNext(std::span<const TokenId> prefix,
                                  const FactList &facts) const {
  return ArgmaxLowestId(NextLogProbs(prefix, facts));
}

void ValidatePrefix(const Vocabulary &vocab, std::span<const TokenId> prefix) {
  if (prefix.empty() || prefix.front() != vocab.bos()) {
    throw Error(ErrorCode::kInvalidArgument, "prefix must start with bos");
  }
  for (TokenId id : prefix) {
    if (!vocab.Contains(id)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "token id out of range: " + std::to_string(id));
    }
  }
}

double PrefixLogProb(const LanguageModel &lm, std::span<const TokenId> tokens,
                     const FactList &facts) {
  ValidatePrefix(lm.vocabulary(), tokens);
  double total = 0;
  for (size_t t = 1; t < tokens.size(); ++t) {
    LogProbVector lp = lm.NextLogProbs(tokens.first(t), facts);
    total += lp[tokens[t]];
  }
  return total;
}

double SequenceLogProb(const LanguageModel &lm, std::span<const TokenId> tokens,
                       const FactList &facts) {
  if (tokens.size() < 2 || tokens.back() != lm.vocabulary().eos()) {
    throw Error(ErrorCode::kInvalidArgument,
                "sequence must start with bos and end with eos");
  }
  return PrefixLogProb(lm, tokens, facts);
}

uint64_t Fnv1a64(std::string_view data, uint64_t seed) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace k2t
