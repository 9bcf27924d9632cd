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

#include "k2t/decoder.h"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "k2t/error.h"
#include "k2t/hvm.h"
#include "testing/fixtures.h"

namespace k2t {
namespace {

// Returns fixed scores by hypothesis kind and records every call.
class ConstVerifier : public Verifier {
 public:
  ConstVerifier(double backward, double forward)
      : backward_(backward), forward_(forward) {}

  Verdict Score(const FactList &, const Words &hypothesis,
                HypothesisKind kind) const override {
    calls.push_back({kind, hypothesis});
    return Verdict{kind == HypothesisKind::kBackward ? backward_ : forward_,
                   {}};
  }

  mutable std::vector<std::pair<HypothesisKind, Words>> calls;

 private:
  double backward_;
  double forward_;
};

TEST(Strategy, NamesRoundTrip) {
  for (Strategy s : AllStrategies()) {
    EXPECT_EQ(ParseStrategy(StrategyName(s)), s);
  }
  EXPECT_EQ(StrategyName(Strategy::kTweakNliBF), "tweak-nli-bf");
  EXPECT_THROW(ParseStrategy("sampling"), Error);
  EXPECT_FALSE(IsTweak(Strategy::kBeam));
  EXPECT_TRUE(IsTweak(Strategy::kTweakHvm));
}

TEST(Weight, Schemes) {
  EXPECT_EQ(FaithfulnessWeight(WeightScheme::kBackward, 3, 7), 1.0);
  EXPECT_EQ(FaithfulnessWeight(WeightScheme::kForward, 3, 7), 0.0);
  EXPECT_EQ(FaithfulnessWeight(WeightScheme::kDynamic, 5, 15), 0.25);
  EXPECT_EQ(FaithfulnessWeight(WeightScheme::kDynamic, 5, 0), 1.0);
  EXPECT_EQ(FaithfulnessWeight(WeightScheme::kDynamic, 5, 15, 0.5), 0.5);
  EXPECT_EQ(FaithfulnessWeight(WeightScheme::kDynamic, 5, 0, 0.5), 1.0);
  EXPECT_EQ(SchemeOf(Strategy::kTweakNliB), WeightScheme::kBackward);
  EXPECT_EQ(SchemeOf(Strategy::kTweakNliF), WeightScheme::kForward);
  EXPECT_EQ(SchemeOf(Strategy::kTweakNliBF), WeightScheme::kDynamic);
  EXPECT_EQ(SchemeOf(Strategy::kTweakHvm), WeightScheme::kDynamic);
}

TEST(FaithScore, HvmDynamicExample) {
  ConstVerifier v(-0.2, -1.0);
  const Words backward(5, "b");
  const Words rollout(15, "r");
  FaithResult r = FaithScore(v, testing::OneFact(), backward, rollout,
                             Strategy::kTweakHvm);
  EXPECT_DOUBLE_EQ(r.weight, 0.25);
  EXPECT_NEAR(r.faith, -0.8, 1e-12);
  ASSERT_EQ(v.calls.size(), 2u);
  // The HVM forward hypothesis is the rollout alone.
  EXPECT_EQ(v.calls[1].second, rollout);
}

TEST(FaithScore, NliForwardIncludesPrefix) {
  ConstVerifier v(-0.2, -1.0);
  FaithResult r = FaithScore(v, testing::OneFact(), {"a", "b"}, {"c"},
                             Strategy::kTweakNliBF);
  EXPECT_NEAR(r.weight, 2.0 / 3.0, 1e-15);
  ASSERT_EQ(v.calls.size(), 2u);
  EXPECT_EQ(v.calls[1].second, (Words{"a", "b", "c"}));
}

TEST(FaithScore, SkipsZeroWeightSide) {
  ConstVerifier v(-0.2, -1.0);
  FaithResult b = FaithScore(v, testing::OneFact(), {"a"}, {"c"},
                             Strategy::kTweakNliB);
  EXPECT_EQ(b.faith, -0.2);
  EXPECT_FALSE(b.forward.has_value());
  FaithResult f = FaithScore(v, testing::OneFact(), {"a"}, {"c"},
                             Strategy::kTweakNliF);
  EXPECT_EQ(f.faith, -1.0);
  EXPECT_FALSE(f.backward.has_value());
  EXPECT_EQ(v.calls.size(), 2u);
}

TEST(FaithScore, EmptyRolloutUsesBackwardOnly) {
  ConstVerifier v(-0.2, -1.0);
  FaithResult r = FaithScore(v, testing::OneFact(), {"a"}, {},
                             Strategy::kTweakHvm);
  EXPECT_EQ(r.weight, 1.0);
  EXPECT_EQ(r.faith, -0.2);
  EXPECT_EQ(v.calls.size(), 1u);
}

TEST(FaithScore, EmptyHypothesisScoresZero) {
  ConstVerifier v(-0.2, -1.0);
  FaithResult r = FaithScore(v, testing::OneFact(), {}, {},
                             Strategy::kTweakNliF);
  EXPECT_EQ(r.faith, 0.0);
  EXPECT_TRUE(v.calls.empty());
}

TEST(CombinedScore, Examples) {
  EXPECT_EQ(CombinedScore(-2.0, -0.5, 8.0), -6.0);
  EXPECT_EQ(CombinedScore(-2.0, -0.5, 0.0), -2.0);
  EXPECT_EQ(CombinedScore(-2.0, -std::numeric_limits<double>::infinity(), 0.0),
            -2.0);
}

TEST(DecodeConfig, DefaultsAndEffective) {
  DecodeConfig beam = DecodeConfig::Defaults(Strategy::kBeam);
  EXPECT_EQ(beam.k, 5);
  EXPECT_EQ(beam.Effective().prune_width, 10);
  DecodeConfig tweak = DecodeConfig::Defaults(Strategy::kTweakHvm);
  EXPECT_EQ(tweak.k, 4);
  EXPECT_EQ(tweak.alpha, 8.0);
  EXPECT_EQ(tweak.max_len, 384);
  DecodeConfig greedy = tweak;
  greedy.strategy = Strategy::kGreedy;
  EXPECT_EQ(greedy.Effective().k, 1);
  EXPECT_EQ(greedy.Effective().alpha, 0.0);
  greedy.strategy = Strategy::kBeam;
  EXPECT_EQ(greedy.Effective().alpha, 0.0);
}

TEST(DecodeConfig, ValidationErrors) {
  auto code = [](DecodeConfig c) {
    try {
      c.Validate();
    } catch (const Error &e) {
      return e.code();
    }
    return ErrorCode::kUsage;
  };
  DecodeConfig c = DecodeConfig::Defaults(Strategy::kTweakHvm);
  c.k = 0;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
  c = DecodeConfig::Defaults(Strategy::kTweakHvm);
  c.prune_width = 2;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
  c = DecodeConfig::Defaults(Strategy::kTweakHvm);
  c.alpha = -1;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
  c = DecodeConfig::Defaults(Strategy::kTweakHvm);
  c.fixed_weight = 1.5;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
  c = DecodeConfig::Defaults(Strategy::kTweakHvm);
  c.max_len = 0;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
}

TEST(Rollout, CapAndEos) {
  testing::RandomLm lm(5, 3);
  const FactList facts = testing::OneFact();
  const TokenId bos = lm.vocabulary().bos();
  const TokenId eos = lm.vocabulary().eos();
  EXPECT_TRUE(Rollout(lm, {bos}, facts, 0).empty());
  EXPECT_TRUE(Rollout(lm, {bos, 2, eos}, facts, 5).empty());
  std::vector<TokenId> r = Rollout(lm, {bos}, facts, 6);
  ASSERT_FALSE(r.empty());
  EXPECT_LE(r.size(), 6u);
  // Greedy continuation, stopping after eos.
  std::vector<TokenId> seq = {bos};
  for (TokenId id : r) {
    EXPECT_EQ(id, lm.ArgmaxNext(seq, facts));
    seq.push_back(id);
  }
  if (r.size() < 6) {
    EXPECT_EQ(r.back(), eos);
  }
  for (size_t i = 0; i + 1 < r.size(); ++i) EXPECT_NE(r[i], eos);
}

TEST(Rollout, CacheIsSound) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    testing::RandomLm lm(4, seed);
    const FactList facts = testing::OneFact();
    RolloutCache cache;
    Rng rng(seed);
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<TokenId> prefix = {lm.vocabulary().bos()};
      const size_t len = rng.Index(4);
      for (size_t i = 0; i < len; ++i) {
        prefix.push_back(static_cast<TokenId>(2 + rng.Index(2)));
      }
      const size_t cap = rng.Index(7);
      EXPECT_EQ(Rollout(lm, prefix, facts, cap, &cache),
                Rollout(lm, prefix, facts, cap))
          << "seed " << seed << " trial " << trial;
    }
    EXPECT_GT(cache.hits(), 0u);
  }
}

TEST(Decode, GreedyMatchesArgmaxLoop) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    testing::RandomLm lm(6, seed);
    const FactList facts = testing::OneFact();
    DecodeConfig c = DecodeConfig::Defaults(Strategy::kGreedy);
    c.max_len = 10;
    DecodeResult r = Decode(facts, lm, nullptr, c);
    std::vector<TokenId> seq = {lm.vocabulary().bos()};
    while (seq.size() <= 10 && seq.back() != lm.vocabulary().eos()) {
      seq.push_back(lm.ArgmaxNext(seq, facts));
    }
    EXPECT_EQ(r.best, seq);
  }
}

TEST(Decode, GreedyReplaysTrainingSentence) {
  std::vector<K2TInstance> corpus = {
      K2TInstance{testing::OneFact(), {"Dublin is Ireland's largest city"}}};
  ToyLm lm = ToyLm::Train(corpus, {4, 0.0, 1 << 10});
  DecodeResult r = Decode(testing::OneFact(), lm, nullptr,
                          DecodeConfig::Defaults(Strategy::kGreedy));
  EXPECT_EQ(JoinWords(r.words), "Dublin is Ireland's largest city");
  EXPECT_EQ(r.best.back(), lm.vocabulary().eos());
}

TEST(Decode, TieBreakPrefersLowerTokenIds) {
  // Two equally likely sentences; the lower-id token wins.
  std::vector<K2TInstance> corpus = {
      K2TInstance{testing::OneFact(), {"a x", "b x"}}};
  ToyLm lm = ToyLm::Train(corpus, {2, 0.0, 1 << 10});
  for (Strategy s : {Strategy::kGreedy, Strategy::kBeam}) {
    DecodeResult r = Decode(testing::OneFact(), lm, nullptr,
                            DecodeConfig::Defaults(s));
    EXPECT_EQ(JoinWords(r.words), "a x") << StrategyName(s);
  }
}

TEST(Decode, BeamMatchesBruteForceOnSmallLm) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    testing::RandomLm lm(3, seed);
    const FactList facts = testing::OneFact();
    DecodeConfig c = DecodeConfig::Defaults(Strategy::kBeam);
    c.max_len = 4;
    c.k = 81;
    c.prune_width = 243;
    DecodeResult r = Decode(facts, lm, nullptr, c);
    testing::BruteForceBest best = testing::BruteForceArgmax(lm, facts, 4);
    EXPECT_EQ(r.best, best.tokens) << seed;
    EXPECT_NEAR(r.beam.front().gen_logprob, best.logprob, 1e-12);
  }
}

TEST(Decode, TweakRequiresVerifier) {
  testing::RandomLm lm(4, 1);
  try {
    Decode(testing::OneFact(), lm, nullptr,
           DecodeConfig::Defaults(Strategy::kTweakHvm));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

TEST(Decode, AlphaZeroTweakEqualsBeam) {
  auto pipeline = testing::ToyPipeline(20, 12, 0.1);
  HvmVerifier verifier(pipeline.hvm);
  for (const auto &inst : pipeline.world.corpus) {
    DecodeConfig beam = DecodeConfig::Defaults(Strategy::kBeam);
    beam.k = 4;
    beam.max_len = 30;
    DecodeConfig tweak = DecodeConfig::Defaults(Strategy::kTweakHvm);
    tweak.alpha = 0.0;
    tweak.max_len = 30;
    EXPECT_EQ(Decode(inst.facts, pipeline.lm, nullptr, beam).best,
              Decode(inst.facts, pipeline.lm, &verifier, tweak).best);
  }
}

TEST(Decode, AdversarialLmHallucinatesAndTweakRecovers) {
  auto pipeline = testing::ToyPipeline(30, 13);
  HvmVerifier verifier(pipeline.hvm);
  size_t beam_neg = 0, tweak_pos = 0;
  for (const auto &inst : pipeline.fate.instances) {
    DecodeResult beam = Decode(inst.f_pos, pipeline.lm, nullptr,
                               DecodeConfig::Defaults(Strategy::kBeam));
    DecodeResult tweak = Decode(inst.f_pos, pipeline.lm, &verifier,
                                DecodeConfig::Defaults(Strategy::kTweakHvm));
    beam_neg += JoinWords(beam.words) == StripMarks(inst.t_neg);
    tweak_pos += JoinWords(tweak.words) == StripMarks(inst.t_pos);
  }
  EXPECT_EQ(beam_neg, pipeline.fate.instances.size());
  EXPECT_GE(tweak_pos, pipeline.fate.instances.size() * 9 / 10);
}

TEST(Decode, TraceIsCompleteForGreedy) {
  auto pipeline = testing::ToyPipeline(10, 14);
  for (const auto &inst : pipeline.world.corpus) {
    DecodeResult r = Decode(inst.facts, pipeline.lm, nullptr,
                            DecodeConfig::Defaults(Strategy::kGreedy));
    ASSERT_EQ(r.trace.steps.size(), r.best.size() - 1);
    for (size_t s = 0; s < r.trace.steps.size(); ++s) {
      const StepRecord &step = r.trace.steps[s];
      EXPECT_EQ(step.step, s);
      ASSERT_EQ(step.beam.size(), 1u);
      EXPECT_EQ(step.beam[0].tokens,
                std::vector<TokenId>(r.best.begin(), r.best.begin() + s + 2));
      EXPECT_FALSE(step.scored.empty());
    }
  }
}

TEST(Decode, TraceRolloutsMatchUncachedRollouts) {
  auto pipeline = testing::ToyPipeline(10, 15, 0.1);
  HvmVerifier verifier(pipeline.hvm);
  DecodeConfig c = DecodeConfig::Defaults(Strategy::kTweakHvm);
  c.max_len = 30;
  for (const auto &inst : pipeline.world.corpus) {
    DecodeResult r = Decode(inst.facts, pipeline.lm, &verifier, c);
    for (const StepRecord &step : r.trace.steps) {
      for (const ScoredCandidate &sc : step.scored) {
        if (sc.tokens.back() == pipeline.lm.vocabulary().eos()) continue;
        const size_t cap = static_cast<size_t>(c.max_len) - (sc.tokens.size() - 1);
        EXPECT_EQ(sc.rollout, Rollout(pipeline.lm, sc.tokens, inst.facts, cap));
      }
    }
  }
}

TEST(Decode, VerdictPositions) {
  auto pipeline = testing::ToyPipeline(10, 16);
  HvmVerifier verifier(pipeline.hvm);
  for (const auto &inst : pipeline.world.corpus) {
    DecodeResult r = Decode(inst.facts, pipeline.lm, &verifier,
                            DecodeConfig::Defaults(Strategy::kTweakHvm));
    const double len = std::max<size_t>(1, r.words.size());
    for (const StepRecord &step : r.trace.steps) {
      for (const VerdictRecord &v : step.verdicts) {
        EXPECT_EQ(v.position, std::min(1.0, v.t / len));
        EXPECT_GE(v.position, 0.0);
        EXPECT_LE(v.position, 1.0);
      }
    }
  }
}

TEST(Decode, Deterministic) {
  auto pipeline = testing::ToyPipeline(10, 17, 0.1);
  HvmVerifier verifier(pipeline.hvm);
  DecodeConfig c = DecodeConfig::Defaults(Strategy::kTweakHvm);
  c.max_len = 30;
  auto a = DecodeCorpus(pipeline.world.corpus, pipeline.lm, &verifier, c);
  auto b = DecodeCorpus(pipeline.world.corpus, pipeline.lm, &verifier, c);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].best, b[i].best);
    std::stringstream ta, tb;
    WriteTraceJsonl(ta, a[i].trace, pipeline.lm.vocabulary(), i);
    WriteTraceJsonl(tb, b[i].trace, pipeline.lm.vocabulary(), i);
    EXPECT_EQ(ta.str(), tb.str());
  }
}

TEST(Trace, VerdictsRoundTrip) {
  auto pipeline = testing::ToyPipeline(5, 18);
  HvmVerifier verifier(pipeline.hvm);
  DecodeResult r = Decode(pipeline.world.corpus[0].facts, pipeline.lm,
                          &verifier, DecodeConfig::Defaults(Strategy::kTweakHvm));
  std::stringstream buf;
  WriteTraceJsonl(buf, r.trace, pipeline.lm.vocabulary(), 0);
  std::vector<VerdictRecord> read = ReadTraceVerdicts(buf, "trace");
  std::vector<VerdictRecord> expected;
  for (const auto &s : r.trace.steps) {
    expected.insert(expected.end(), s.verdicts.begin(), s.verdicts.end());
  }
  ASSERT_EQ(read.size(), expected.size());
  for (size_t i = 0; i < read.size(); ++i) {
    EXPECT_EQ(read[i].t, expected[i].t);
    EXPECT_EQ(read[i].kind, expected[i].kind);
    EXPECT_EQ(read[i].score, expected[i].score);
    EXPECT_EQ(read[i].negative, expected[i].negative);
    EXPECT_EQ(read[i].position, expected[i].position);
  }
}

class ThrowingVerifier : public Verifier {
 public:
  Verdict Score(const FactList &, const Words &, HypothesisKind) const override {
    throw Error(ErrorCode::kTransport, "bridge down");
  }
};

TEST(Decode, VerifierErrorsNameTheCandidate) {
  testing::RandomLm lm(4, 2);
  ThrowingVerifier verifier;
  try {
    Decode(testing::OneFact(), lm, &verifier,
           DecodeConfig::Defaults(Strategy::kTweakHvm));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransport);
    EXPECT_NE(std::string(e.what()).find("candidate"), std::string::npos);
  }
}

}  // namespace
}  // namespace k2t
