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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "k2t/error.h"
#include "k2t/rng.h"

namespace k2t {

using nlohmann::json;

namespace {

double OverlapRate(const std::string &surface,
                   const std::set<std::string> &present) {
  const Words field = NormalizeWords(Tokenize(surface));
  if (field.empty()) return 0.0;
  size_t hit = 0;
  for (const std::string &w : field) hit += present.count(w);
  return static_cast<double>(hit) / field.size();
}

// log(1 + exp(x)) without overflow.
double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

void RequireTrained(const HvmModel &model) {
  if (!model.trained()) {
    throw Error(ErrorCode::kNotTrained, "HVM model is not trained");
  }
}

}  // namespace

FeatureVector FeaturizeNormalized(const FactTriple &triple,
                                  const Words &normalized, size_t raw_length,
                                  HypothesisKind kind,
                                  const PerturbationLexicon &lexicon) {
  FeatureVector phi{};
  phi[kBias] = 1.0;
  phi[kKindForward] = kind == HypothesisKind::kForward ? 1.0 : 0.0;
  const std::set<std::string> present(normalized.begin(), normalized.end());
  phi[kSubjectOverlap] =
      OverlapRate(SurfaceForm(triple, FieldPosition::kSubject), present);
  phi[kRelationOverlap] =
      OverlapRate(SurfaceForm(triple, FieldPosition::kRelation), present);
  phi[kObjectOverlap] =
      OverlapRate(SurfaceForm(triple, FieldPosition::kObject), present);
  if (const auto *entries = lexicon.Find(triple)) {
    for (const LexiconEntry &e : *entries) {
      const FormMatch match = MatchForm(normalized, e.perturbed_words);
      if (match == FormMatch::kNone) continue;
      if (ContainsForm(normalized, e.original_words)) {
        phi[kLexiconHitWithOriginal] = 1.0;
      } else if (match == FormMatch::kFull) {
        phi[kLexiconFullHit] = 1.0;
      } else {
        phi[kLexiconBoundaryHit] = 1.0;
      }
    }
  }
  if (raw_length <= 3) {
    phi[kLengthShort] = 1.0;
  } else if (raw_length <= 7) {
    phi[kLengthMedium] = 1.0;
  } else if (raw_length <= 15) {
    phi[kLengthLong] = 1.0;
  } else {
    phi[kLengthVeryLong] = 1.0;
  }
  return phi;
}

FeatureVector Featurize(const FactTriple &triple, const Words &hypothesis,
                        HypothesisKind kind,
                        const PerturbationLexicon &lexicon) {
  if (hypothesis.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty hypothesis");
  }
  return FeaturizeNormalized(triple, NormalizeWords(hypothesis),
                             hypothesis.size(), kind, lexicon);
}

HvmModel::HvmModel(FeatureVector weights, HvmMeta meta,
                   PerturbationLexicon lexicon)
    : weights_(weights),
      meta_(meta),
      lexicon_(std::move(lexicon)),
      trained_(true) {}

double HvmModel::Logit(const FeatureVector &phi) const {
  double z = 0.0;
  for (size_t i = 0; i < kFeatureDim; ++i) z += weights_[i] * phi[i];
  return z;
}

double HvmModel::Predict(const FactTriple &triple, const Words &hypothesis,
                         HypothesisKind kind) const {
  RequireTrained(*this);
  return Sigmoid(Logit(Featurize(triple, hypothesis, kind, lexicon_)));
}

json HvmModel::ToJson() const {
  RequireTrained(*this);
  return {{"format", "k2t-hvm"},
          {"version", 1},
          {"features", static_cast<size_t>(kFeatureDim)},
          {"weights", weights_},
          {"meta",
           {{"seed", meta_.seed},
            {"epochs", meta_.epochs},
            {"learning_rate", meta_.learning_rate},
            {"final_loss", meta_.final_loss}}},
          {"lexicon", lexicon_.ToJson()}};
}

HvmModel HvmModel::FromJson(const json &value) {
  if (!value.is_object() || value.value("format", "") != "k2t-hvm") {
    throw Error(ErrorCode::kSchema, "not a k2t-hvm model");
  }
  try {
    if (value.at("features").get<size_t>() != kFeatureDim) {
      throw Error(ErrorCode::kSchema, "HVM feature dimension mismatch");
    }
    const auto w = value.at("weights").get<std::vector<double>>();
    if (w.size() != kFeatureDim) {
      throw Error(ErrorCode::kSchema, "HVM weight vector has wrong length");
    }
    FeatureVector weights{};
    std::copy(w.begin(), w.end(), weights.begin());
    const json &m = value.at("meta");
    HvmMeta meta{m.at("seed").get<uint64_t>(), m.at("epochs").get<int>(),
                 m.at("learning_rate").get<double>(),
                 m.at("final_loss").get<double>()};
    return HvmModel(weights, meta,
                    PerturbationLexicon::FromJson(value.at("lexicon")));
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kSchema, std::string("HVM model: ") + e.what());
  }
}

void HvmModel::Save(const std::string &path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << ToJson().dump() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

HvmModel HvmModel::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  try {
    return FromJson(json::parse(in));
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kSchema, path + ": " + e.what());
  }
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

VerificationTable PredictTable(const HvmModel &model, const FactList &triples,
                               const Words &backward, const Words &forward) {
  RequireTrained(model);
  VerificationTable table;
  table.cells.reserve(triples.size());
  for (const FactTriple &t : triples) {
    table.cells.push_back(
        {model.Predict(t, backward, HypothesisKind::kBackward),
         model.Predict(t, forward, HypothesisKind::kForward)});
  }
  return table;
}

double HvmScore(const HvmModel &model, const FactList &facts,
                const Words &hypothesis, HypothesisKind kind) {
  RequireTrained(model);
  if (hypothesis.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty hypothesis");
  }
  const Words normalized = NormalizeWords(hypothesis);
  double sum = 0.0;
  for (const FactTriple &t : facts) {
    const double p = Sigmoid(model.Logit(FeaturizeNormalized(
        t, normalized, hypothesis.size(), kind, model.lexicon())));
    sum += std::log(std::max(p, kProbabilityFloor));
  }
  return sum / facts.size();
}

HvmVerifier::HvmVerifier(const HvmModel &model) : model_(model) {
  RequireTrained(model);
}

Verdict HvmVerifier::Score(const FactList &facts, const Words &hypothesis,
                           HypothesisKind kind) const {
  if (hypothesis.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty hypothesis");
  }
  const Words normalized = NormalizeWords(hypothesis);
  std::vector<double> probs;
  probs.reserve(facts.size());
  for (const FactTriple &t : facts) {
    probs.push_back(Sigmoid(model_.Logit(FeaturizeNormalized(
        t, normalized, hypothesis.size(), kind, model_.lexicon()))));
  }
  return VerdictFromProbabilities(std::move(probs));
}

std::vector<EncodedPair> EncodePairs(const std::vector<HypothesisPair> &pairs,
                                     const PerturbationLexicon &lexicon) {
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const HypothesisPair &p : pairs) {
    if (p.supported.size() != p.triples.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pair is missing label cells for some triples");
    }
    EncodedPair e;
    for (size_t j = 0; j < p.triples.size(); ++j) {
      e.features.push_back(Featurize(p.triples[j], p.backward,
                                     HypothesisKind::kBackward, lexicon));
      e.targets.push_back(p.supported[j][0] ? 1.0 : 0.0);
      e.features.push_back(Featurize(p.triples[j], p.forward,
                                     HypothesisKind::kForward, lexicon));
      e.targets.push_back(p.supported[j][1] ? 1.0 : 0.0);
    }
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

double Dot(const FeatureVector &w, const FeatureVector &phi) {
  double z = 0.0;
  for (size_t i = 0; i < kFeatureDim; ++i) z += w[i] * phi[i];
  return z;
}

void RequireBatch(const std::vector<EncodedPair> &batch) {
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty training batch");
  }
}

}  // namespace

double TableLoss(const FeatureVector &weights,
                 const std::vector<EncodedPair> &batch) {
  RequireBatch(batch);
  double total = 0.0;
  for (const EncodedPair &e : batch) {
    double sum = 0.0;
    for (size_t c = 0; c < e.features.size(); ++c) {
      const double z = Dot(weights, e.features[c]);
      // -log P(label): softplus(-z) for supported, softplus(z) otherwise.
      sum += e.targets[c] > 0.5 ? Softplus(-z) : Softplus(z);
    }
    total += sum / e.features.size();
  }
  return total / batch.size();
}

FeatureVector TableLossGradient(const FeatureVector &weights,
                                const std::vector<EncodedPair> &batch) {
  RequireBatch(batch);
  FeatureVector grad{};
  for (const EncodedPair &e : batch) {
    const double scale = 1.0 / (e.features.size() * batch.size());
    for (size_t c = 0; c < e.features.size(); ++c) {
      const double r = Sigmoid(Dot(weights, e.features[c])) - e.targets[c];
      for (size_t i = 0; i < kFeatureDim; ++i) {
        grad[i] += scale * r * e.features[c][i];
      }
    }
  }
  return grad;
}

HvmTrainResult TrainHvm(const std::vector<HypothesisPair> &pairs,
                        const PerturbationLexicon &lexicon,
                        const HvmTrainOptions &options) {
  if (options.epochs < 1) {
    throw Error(ErrorCode::kConfig, "epochs must be >= 1");
  }
  if (!(options.learning_rate >= 0.0) ||
      !std::isfinite(options.learning_rate)) {
    throw Error(ErrorCode::kConfig, "learning rate must be finite and >= 0");
  }
  const std::vector<EncodedPair> batch = EncodePairs(pairs, lexicon);
  RequireBatch(batch);
  Rng rng(options.seed);
  FeatureVector w{};
  for (double &x : w) x = options.init_scale * (2.0 * rng.Uniform() - 1.0);

  HvmTrainResult result;
  int rising = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const double loss = TableLoss(w, batch);
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::kDivergence,
                  "non-finite loss at epoch " + std::to_string(epoch));
    }
    if (!result.losses.empty() && loss > result.losses.back() + 1e-9) {
      if (++rising >= 3) {
        std::ostringstream msg;
        msg << "loss increased for 3 consecutive epochs (epoch " << epoch
            << ", loss " << loss << ", learning rate "
            << options.learning_rate << ")";
        throw Error(ErrorCode::kDivergence, msg.str());
      }
    } else {
      rising = 0;
    }
    result.losses.push_back(loss);
    const FeatureVector g = TableLossGradient(w, batch);
    for (size_t i = 0; i < kFeatureDim; ++i) w[i] -= options.learning_rate * g[i];
  }
  const double final_loss = TableLoss(w, batch);
  result.losses.push_back(final_loss);
  result.model = HvmModel(w,
                          HvmMeta{options.seed, options.epochs,
                                  options.learning_rate, final_loss},
                          lexicon);
  return result;
}

double CellAccuracy(const HvmModel &model,
                    const std::vector<HypothesisPair> &pairs) {
  RequireTrained(model);
  size_t correct = 0, total = 0;
  for (const HypothesisPair &p : pairs) {
    const VerificationTable table =
        PredictTable(model, p.triples, p.backward, p.forward);
    for (size_t j = 0; j < p.triples.size(); ++j) {
      for (int c = 0; c < 2; ++c) {
        correct += (table.cells[j][c] >= 0.5) == p.supported[j][c];
        ++total;
      }
    }
  }
  return total ? static_cast<double>(correct) / total : 0.0;
}

}  // namespace k2t
