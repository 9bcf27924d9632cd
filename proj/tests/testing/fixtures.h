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

#ifndef K2T_TESTING_FIXTURES_H_
#define K2T_TESTING_FIXTURES_H_

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "k2t/decoder.h"
#include "k2t/fate.h"
#include "k2t/hvm.h"
#include "k2t/knowledge.h"
#include "k2t/lm.h"
#include "k2t/rng.h"
#include "k2t/toy_lm.h"
#include "k2t/world.h"

namespace k2t::testing {

// World -> FATE -> adversarial corpus -> toy LM, plus an HVM trained on the
// FATE pairs.
struct ToyPipeline {
  ToyWorld world;
  FateBuild fate;
  std::vector<K2TInstance> adversarial;
  ToyLm lm;
  HvmModel hvm;

  ToyPipeline(size_t instances, uint64_t seed, double smoothing = 0.0)
      : world(MakeWorld(instances, seed)),
        fate(BuildFate(world.corpus, world.pools, world.templates,
                       FateOptions{1, seed, {1, 1, 1}, true})),
        adversarial(AdversarialCorpus(fate.instances, {2, 6, seed})),
        lm(ToyLm::Train(adversarial, ToyLmOptions{4, smoothing, 1ULL << 20})),
        hvm(TrainHvm(fate.pairs, fate.lexicon, HvmTrainOptions{200, 4.0, seed})
                .model) {}

  static ToyWorld MakeWorld(size_t instances, uint64_t seed) {
    ToyWorldOptions o;
    o.instances = instances;
    o.seed = seed;
    return MakeToyWorld(o);
  }
};

// Seeded random conditional distribution over a small vocabulary; eos is
// absorbing. Some entries are -inf so pruning of impossible tokens is
// exercised.
class RandomLm : public LanguageModel {
 public:
  RandomLm(size_t vocab_size, uint64_t seed)
      : vocab_(MakeVocab(vocab_size)), seed_(seed) {}

  const Vocabulary &vocabulary() const override { return vocab_; }

  LogProbVector NextLogProbs(std::span<const TokenId> prefix,
                             const FactList &facts) const override {
    ValidatePrefix(vocab_, prefix);
    const size_t v = vocab_.size();
    const double ninf = -std::numeric_limits<double>::infinity();
    LogProbVector out(v, ninf);
    if (prefix.back() == vocab_.eos()) {
      out[vocab_.eos()] = 0.0;
      return out;
    }
    uint64_t h = Fnv1a64(facts.linearized(), seed_);
    for (TokenId id : prefix) h = Rng::Mix(h ^ static_cast<uint64_t>(id + 17));
    Rng rng(h);
    std::vector<double> logits(v);
    double max = ninf;
    for (size_t i = 0; i < v; ++i) {
      logits[i] = rng.Uniform() < 0.15 && i != 0 ? ninf
                                                 : 4.0 * rng.Uniform() - 2.0;
      max = std::max(max, logits[i]);
    }
    double z = 0.0;
    for (double l : logits) z += std::isinf(l) ? 0.0 : std::exp(l - max);
    for (size_t i = 0; i < v; ++i) {
      if (!std::isinf(logits[i])) out[i] = logits[i] - max - std::log(z);
    }
    return out;
  }

 private:
  static Vocabulary MakeVocab(size_t n) {
    std::vector<std::string> tokens = {"</s>", "<s>"};
    for (size_t i = 2; i < n; ++i) tokens.push_back("w" + std::to_string(i));
    return Vocabulary(tokens, 1, 0);
  }

  Vocabulary vocab_;
  uint64_t seed_;
};

struct BruteForceBest {
  std::vector<TokenId> tokens;
  double logprob = -std::numeric_limits<double>::infinity();
};

// Exhaustive search over every sequence the decoder can emit within max_len
// generated tokens: ending in eos, or cut at max_len.
inline BruteForceBest BruteForceArgmax(const LanguageModel &lm,
                                       const FactList &facts, size_t max_len) {
  BruteForceBest best;
  const Vocabulary &vocab = lm.vocabulary();
  std::vector<std::pair<std::vector<TokenId>, double>> frontier = {
      {{vocab.bos()}, 0.0}};
  auto consider = [&](const std::vector<TokenId> &seq, double lp) {
    if (lp > best.logprob || (lp == best.logprob && seq < best.tokens)) {
      best.tokens = seq;
      best.logprob = lp;
    }
  };
  for (size_t step = 0; step < max_len; ++step) {
    std::vector<std::pair<std::vector<TokenId>, double>> next;
    for (const auto &[seq, lp] : frontier) {
      const LogProbVector dist = lm.NextLogProbs(seq, facts);
      for (size_t v = 0; v < dist.size(); ++v) {
        if (std::isinf(dist[v])) continue;
        std::vector<TokenId> s = seq;
        s.push_back(static_cast<TokenId>(v));
        const double score = lp + dist[v];
        if (static_cast<TokenId>(v) == vocab.eos() || step + 1 == max_len) {
          consider(s, score);
        }
        if (static_cast<TokenId>(v) != vocab.eos()) next.emplace_back(s, score);
      }
    }
    frontier = std::move(next);
  }
  return best;
}

inline FactList OneFact(const std::string &s = "Ireland",
                        const std::string &r = "largest_city",
                        const std::string &o = "Dublin") {
  return FactList({FactTriple::Make(s, r, o)});
}

}  // namespace k2t::testing

#endif  // K2T_TESTING_FIXTURES_H_
