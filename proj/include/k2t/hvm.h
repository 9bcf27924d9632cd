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

#ifndef K2T_HVM_H_
#define K2T_HVM_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "k2t/fate.h"
#include "k2t/knowledge.h"
#include "k2t/lexicon.h"
#include "k2t/verifier.h"

namespace k2t {

enum HvmFeature : size_t {
  kBias = 0,
  kKindForward,
  kSubjectOverlap,
  kRelationOverlap,
  kObjectOverlap,
  kLexiconFullHit,      // a perturbed form appears whole, original absent
  kLexiconBoundaryHit,  // a perturbed form is cut at a hypothesis edge
  kLexiconHitWithOriginal,
  kLengthShort,  // 1-3 tokens
  kLengthMedium,  // 4-7
  kLengthLong,  // 8-15
  kLengthVeryLong,  // 16+
  kFeatureDim,
};

using FeatureVector = std::array<double, kFeatureDim>;

FeatureVector Featurize(const FactTriple &triple, const Words &hypothesis,
                        HypothesisKind kind,
                        const PerturbationLexicon &lexicon);

// Same, on a hypothesis already passed through NormalizeWords.
FeatureVector FeaturizeNormalized(const FactTriple &triple,
                                  const Words &normalized, size_t raw_length,
                                  HypothesisKind kind,
                                  const PerturbationLexicon &lexicon);

struct HvmMeta {
  uint64_t seed = 0;
  int epochs = 0;
  double learning_rate = 0.0;
  double final_loss = 0.0;
};

class HvmModel {
 public:
  HvmModel() = default;
  HvmModel(FeatureVector weights, HvmMeta meta, PerturbationLexicon lexicon);

  bool trained() const { return trained_; }
  const FeatureVector &weights() const { return weights_; }
  const HvmMeta &meta() const { return meta_; }
  const PerturbationLexicon &lexicon() const { return lexicon_; }
  void set_lexicon(PerturbationLexicon lexicon) { lexicon_ = std::move(lexicon); }

  double Logit(const FeatureVector &phi) const;
  // Probability that the triple supports the hypothesis.
  double Predict(const FactTriple &triple, const Words &hypothesis,
                 HypothesisKind kind) const;

  nlohmann::json ToJson() const;
  static HvmModel FromJson(const nlohmann::json &value);
  void Save(const std::string &path) const;
  static HvmModel Load(const std::string &path);

 private:
  FeatureVector weights_{};
  HvmMeta meta_;
  PerturbationLexicon lexicon_;
  bool trained_ = false;
};

double Sigmoid(double z);

// Row j holds P(supported) of triple j for {backward, forward}.
struct VerificationTable {
  std::vector<std::array<double, 2>> cells;
};

VerificationTable PredictTable(const HvmModel &model, const FactList &triples,
                               const Words &backward, const Words &forward);

// Mean over triples of log P(supported).
double HvmScore(const HvmModel &model, const FactList &facts,
                const Words &hypothesis, HypothesisKind kind);

class HvmVerifier : public Verifier {
 public:
  explicit HvmVerifier(const HvmModel &model);

  Verdict Score(const FactList &facts, const Words &hypothesis,
                HypothesisKind kind) const override;

 private:
  const HvmModel &model_;
};

// Training side. A pair encodes to 2m feature rows with 0/1 targets
// (1 = supported), rows ordered (triple 0 backward, triple 0 forward, ...).
struct EncodedPair {
  std::vector<FeatureVector> features;
  std::vector<double> targets;
};

std::vector<EncodedPair> EncodePairs(const std::vector<HypothesisPair> &pairs,
                                     const PerturbationLexicon &lexicon);

// -(1/(2m)) sum log P(B-hat = B), averaged over pairs.
double TableLoss(const FeatureVector &weights,
                 const std::vector<EncodedPair> &batch);
FeatureVector TableLossGradient(const FeatureVector &weights,
                                const std::vector<EncodedPair> &batch);

struct HvmTrainOptions {
  int epochs = 200;
  double learning_rate = 4.0;
  uint64_t seed = 0;
  double init_scale = 0.01;
};

struct HvmTrainResult {
  HvmModel model;
  std::vector<double> losses;  // loss before each epoch, then the final loss
};

HvmTrainResult TrainHvm(const std::vector<HypothesisPair> &pairs,
                        const PerturbationLexicon &lexicon,
                        const HvmTrainOptions &options);

// Fraction of cells whose thresholded prediction matches the label.
double CellAccuracy(const HvmModel &model,
                    const std::vector<HypothesisPair> &pairs);

}  // namespace k2t

#endif  // K2T_HVM_H_
