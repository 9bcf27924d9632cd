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

#ifndef K2T_REMOTE_H_
#define K2T_REMOTE_H_

#include <memory>
#include <string>

#include "k2t/lm.h"
#include "k2t/verifier.h"
#include "k2t/wire.h"

namespace k2t {

// Accepts {"vocab": [...], "bos": id, "eos": id}, which toy LM files share.
Vocabulary LoadVocabulary(const std::string &path);

// Language model served by a bridge process ("next_logprobs").
class RemoteLm : public LanguageModel {
 public:
  RemoteLm(Vocabulary vocab, Endpoint endpoint);

  const Vocabulary &vocabulary() const override { return vocab_; }
  LogProbVector NextLogProbs(std::span<const TokenId> prefix,
                             const FactList &facts) const override;

 private:
  Vocabulary vocab_;
  std::string checksum_;
  LineClient client_;
};

// "nli_score".
class RemoteEntailmentScorer : public EntailmentScorer {
 public:
  explicit RemoteEntailmentScorer(Endpoint endpoint);

  double EntailProb(std::string_view premise,
                    std::string_view hypothesis) const override;

 private:
  LineClient client_;
};

// "hvm_table": one call scores both hypotheses of a candidate.
class RemoteHvmVerifier : public Verifier {
 public:
  explicit RemoteHvmVerifier(Endpoint endpoint);

  Verdict Score(const FactList &facts, const Words &hypothesis,
                HypothesisKind kind) const override;
  PairVerdict ScorePair(const FactList &facts, const Words *backward,
                        const Words *forward) const override;

 private:
  LineClient client_;
};

// Tolerance on the exp-sum of remote log-probabilities.
inline constexpr double kRemoteNormalizationTolerance = 1e-4;

}  // namespace k2t

#endif  // K2T_REMOTE_H_
