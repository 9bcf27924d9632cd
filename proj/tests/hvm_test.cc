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

#include "k2t/hvm.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "k2t/error.h"
#include "k2t/rng.h"
#include "testing/fixtures.h"

namespace k2t {
namespace {

PerturbationLexicon DublinLexicon() {
  PerturbationLexicon lexicon;
  const FactTriple t = testing::OneFact()[0];
  lexicon.Register(t);
  lexicon.Add(t, FieldPosition::kRelation, "largest city", "national capital");
  return lexicon;
}

TEST(Featurize, Components) {
  const PerturbationLexicon lexicon = DublinLexicon();
  const FactTriple t = testing::OneFact()[0];
  FeatureVector phi = Featurize(t, Tokenize("Dublin is Ireland's national"),
                                HypothesisKind::kBackward, lexicon);
  EXPECT_EQ(phi[kBias], 1.0);
  EXPECT_EQ(phi[kKindForward], 0.0);
  EXPECT_EQ(phi[kSubjectOverlap], 1.0);
  EXPECT_EQ(phi[kRelationOverlap], 0.0);
  EXPECT_EQ(phi[kObjectOverlap], 1.0);
  EXPECT_EQ(phi[kLexiconFullHit], 0.0);
  EXPECT_EQ(phi[kLexiconBoundaryHit], 1.0);
  EXPECT_EQ(phi[kLengthMedium], 1.0);

  phi = Featurize(t, Tokenize("national capital"), HypothesisKind::kForward,
                  lexicon);
  EXPECT_EQ(phi[kKindForward], 1.0);
  EXPECT_EQ(phi[kLexiconFullHit], 1.0);
  EXPECT_EQ(phi[kLengthShort], 1.0);

  phi = Featurize(t, Tokenize("largest city and national capital"),
                  HypothesisKind::kForward, lexicon);
  EXPECT_EQ(phi[kLexiconHitWithOriginal], 1.0);
  EXPECT_EQ(phi[kLexiconFullHit], 0.0);
  EXPECT_EQ(phi[kRelationOverlap], 1.0);

  EXPECT_THROW(Featurize(t, {}, HypothesisKind::kForward, lexicon), Error);
}

TEST(Featurize, LengthBucketsOneHot) {
  const PerturbationLexicon lexicon = DublinLexicon();
  const FactTriple t = testing::OneFact()[0];
  const std::pair<size_t, HvmFeature> cases[] = {
      {1, kLengthShort},  {3, kLengthShort},    {4, kLengthMedium},
      {7, kLengthMedium}, {8, kLengthLong},     {15, kLengthLong},
      {16, kLengthVeryLong}, {40, kLengthVeryLong}};
  for (auto [n, bucket] : cases) {
    FeatureVector phi =
        Featurize(t, Words(n, "x"), HypothesisKind::kBackward, lexicon);
    EXPECT_EQ(phi[bucket], 1.0) << n;
    EXPECT_EQ(phi[kLengthShort] + phi[kLengthMedium] + phi[kLengthLong] +
                  phi[kLengthVeryLong],
              1.0);
  }
}

TEST(HvmModel, UntrainedUseFails) {
  HvmModel model;
  try {
    model.Predict(testing::OneFact()[0], {"x"}, HypothesisKind::kForward);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotTrained);
  }
  EXPECT_THROW(HvmVerifier{model}, Error);
}

TEST(HvmModel, ZeroWeightsGiveHalf) {
  HvmModel model(FeatureVector{}, HvmMeta{}, DublinLexicon());
  EXPECT_EQ(model.Predict(testing::OneFact()[0], {"x"},
                          HypothesisKind::kForward),
            0.5);
  EXPECT_NEAR(HvmScore(model, testing::OneFact(), {"x"},
                       HypothesisKind::kForward),
              std::log(0.5), 1e-15);
}

TEST(TableLoss, ZeroWeightsIsLn2) {
  auto pipeline = testing::ToyPipeline(20, 1);
  auto batch = EncodePairs(pipeline.fate.pairs, pipeline.fate.lexicon);
  EXPECT_NEAR(TableLoss(FeatureVector{}, batch), std::log(2.0), 1e-12);
}

TEST(TableLoss, HandComputedTwoTriples) {
  FeatureVector w{};
  w[kBias] = 0.3;
  w[kKindForward] = -1.2;
  w[kLexiconFullHit] = -2.0;
  EncodedPair e;
  auto phi = [](double fwd, double hit) {
    FeatureVector p{};
    p[kBias] = 1;
    p[kKindForward] = fwd;
    p[kLexiconFullHit] = hit;
    return p;
  };
  e.features = {phi(0, 0), phi(1, 1), phi(0, 0), phi(1, 0)};
  e.targets = {1, 0, 1, 1};
  // Logits 0.3, -2.9, 0.3, -0.9.
  auto nll_pos = [](double z) { return -std::log(1 / (1 + std::exp(-z))); };
  auto nll_neg = [](double z) { return -std::log(1 - 1 / (1 + std::exp(-z))); };
  const double expected =
      (nll_pos(0.3) + nll_neg(-2.9) + nll_pos(0.3) + nll_pos(-0.9)) / 4;
  EXPECT_NEAR(TableLoss(w, {e}), expected, 1e-12);
}

TEST(TableLoss, GradientMatchesCentralDifferences) {
  auto pipeline = testing::ToyPipeline(15, 2);
  auto batch = EncodePairs(pipeline.fate.pairs, pipeline.fate.lexicon);
  Rng rng(4);
  FeatureVector w{};
  for (double &x : w) x = rng.Uniform() * 2 - 1;
  FeatureVector g = TableLossGradient(w, batch);
  const double h = 1e-6;
  for (size_t i = 0; i < kFeatureDim; ++i) {
    FeatureVector a = w, b = w;
    a[i] += h;
    b[i] -= h;
    EXPECT_NEAR(g[i], (TableLoss(a, batch) - TableLoss(b, batch)) / (2 * h),
                1e-7)
        << i;
  }
}

TEST(TableLoss, EmptyBatchFails) {
  EXPECT_THROW(TableLoss(FeatureVector{}, {}), Error);
}

TEST(TrainHvm, ZeroLearningRateKeepsInitialWeights) {
  auto pipeline = testing::ToyPipeline(10, 3);
  HvmTrainOptions o;
  o.epochs = 5;
  o.learning_rate = 0.0;
  o.seed = 17;
  auto result = TrainHvm(pipeline.fate.pairs, pipeline.fate.lexicon, o);
  Rng rng(17);
  for (size_t i = 0; i < kFeatureDim; ++i) {
    EXPECT_EQ(result.model.weights()[i], 0.01 * (2.0 * rng.Uniform() - 1.0));
  }
  EXPECT_EQ(result.losses.size(), 6u);
}

TEST(TrainHvm, SeedDeterminismAndLossDecrease) {
  auto pipeline = testing::ToyPipeline(30, 5);
  HvmTrainOptions o;
  o.seed = 8;
  auto a = TrainHvm(pipeline.fate.pairs, pipeline.fate.lexicon, o);
  auto b = TrainHvm(pipeline.fate.pairs, pipeline.fate.lexicon, o);
  EXPECT_EQ(a.model.weights(), b.model.weights());
  EXPECT_EQ(a.losses, b.losses);
  EXPECT_LT(a.losses.back(), a.losses.front());
  EXPECT_NEAR(a.losses.front(), std::log(2.0), 0.05);
}

TEST(TrainHvm, FitsTrainingCells) {
  auto pipeline = testing::ToyPipeline(60, 6);
  EXPECT_GE(CellAccuracy(pipeline.hvm, pipeline.fate.pairs), 0.9);
}

TEST(TrainHvm, DivergenceDetected) {
  // Identical hypotheses with opposite labels: the optimum sits at a finite
  // point and a large step overshoots it further every epoch.
  const FactList facts = testing::OneFact();
  HypothesisPair yes{0, HypothesisSource::kOriginal, 1, facts,
                     {"Dublin"}, {"is"}, {{true, true}}};
  HypothesisPair no = yes;
  no.supported = {{false, false}};
  HvmTrainOptions o;
  o.learning_rate = 100;
  o.epochs = 50;
  try {
    TrainHvm({yes, no}, DublinLexicon(), o);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergence);
    EXPECT_NE(std::string(e.what()).find("learning rate"), std::string::npos);
  }
  o.learning_rate = 0.5;
  EXPECT_NO_THROW(TrainHvm({yes, no}, DublinLexicon(), o));
}

TEST(TrainHvm, BadOptions) {
  auto pipeline = testing::ToyPipeline(5, 7);
  HvmTrainOptions o;
  o.epochs = 0;
  EXPECT_THROW(TrainHvm(pipeline.fate.pairs, pipeline.fate.lexicon, o), Error);
  o.epochs = 1;
  o.learning_rate = -1;
  EXPECT_THROW(TrainHvm(pipeline.fate.pairs, pipeline.fate.lexicon, o), Error);
}

TEST(HvmModel, SaveLoadIsBitIdentical) {
  auto pipeline = testing::ToyPipeline(20, 9);
  const auto path =
      (std::filesystem::temp_directory_path() / "k2t_hvm_test.json").string();
  pipeline.hvm.Save(path);
  HvmModel loaded = HvmModel::Load(path);
  EXPECT_EQ(loaded.weights(), pipeline.hvm.weights());
  EXPECT_EQ(loaded.lexicon().ToJson(), pipeline.hvm.lexicon().ToJson());
  const auto &facts = pipeline.world.corpus[0].facts;
  const Words h = Tokenize(pipeline.world.corpus[0].references[0]);
  EXPECT_EQ(HvmScore(loaded, facts, h, HypothesisKind::kBackward),
            HvmScore(pipeline.hvm, facts, h, HypothesisKind::kBackward));
  {
    std::ofstream out(path);
    out << "{\"format\": \"something-else\"}";
  }
  EXPECT_THROW(HvmModel::Load(path), Error);
}

TEST(HvmScore, ExpIsGeometricMeanOfCells) {
  auto pipeline = testing::ToyPipeline(40, 10);
  for (const auto &inst : pipeline.fate.instances) {
    if (inst.f_pos.size() < 2) continue;
    const Words h = ParseMarked(inst.t_neg).words;
    double log_sum = 0;
    for (const auto &t : inst.f_pos) {
      log_sum += std::log(pipeline.hvm.Predict(t, h, HypothesisKind::kForward));
    }
    const double geo = std::exp(log_sum / inst.f_pos.size());
    EXPECT_NEAR(std::exp(HvmScore(pipeline.hvm, inst.f_pos, h,
                                  HypothesisKind::kForward)),
                geo, 1e-12);
    HvmVerifier verifier(pipeline.hvm);
    EXPECT_NEAR(verifier.Score(inst.f_pos, h, HypothesisKind::kForward).score,
                std::log(geo), 1e-12);
  }
}

TEST(PredictTable, WorkedExampleOrdering) {
  auto pipeline = testing::ToyPipeline(200, 7);
  HvmModel model = pipeline.hvm;
  PerturbationLexicon lexicon = model.lexicon();
  const FactTriple t = testing::OneFact()[0];
  lexicon.Register(t);
  lexicon.Add(t, FieldPosition::kRelation, "largest city", "national capital");
  model.set_lexicon(lexicon);
  const FactList facts = testing::OneFact();
  VerificationTable good =
      PredictTable(model, facts, Tokenize("Dublin is Ireland's largest"),
                   Tokenize("city"));
  VerificationTable bad =
      PredictTable(model, facts, Tokenize("Dublin is Ireland's national"),
                   Tokenize("capital"));
  EXPECT_GT(good.cells[0][0], 0.5);
  EXPECT_GT(good.cells[0][1], 0.5);
  EXPECT_LT(bad.cells[0][0], 0.5);
  EXPECT_LT(bad.cells[0][1], 0.5);
}

}  // namespace
}  // namespace k2t
