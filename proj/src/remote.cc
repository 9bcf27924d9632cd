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

#include "k2t/remote.h"

#include <cmath>
#include <fstream>
#include <limits>

#include "k2t/error.h"

namespace k2t {

using nlohmann::json;

namespace {

double Probability(const json &value, const std::string &what) {
  if (!value.is_number()) {
    throw Error(ErrorCode::kProtocol, what + " is not a number");
  }
  const double p = value.get<double>();
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kProtocol, what + " outside [0, 1]");
  }
  return p;
}

}  // namespace

Vocabulary LoadVocabulary(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  try {
    const json value = json::parse(in);
    return Vocabulary(value.at("vocab").get<std::vector<std::string>>(),
                      value.at("bos").get<TokenId>(),
                      value.at("eos").get<TokenId>());
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kSchema, path + ": " + e.what());
  }
}

RemoteLm::RemoteLm(Vocabulary vocab, Endpoint endpoint)
    : vocab_(std::move(vocab)),
      checksum_(vocab_.Checksum()),
      client_(std::move(endpoint)) {}

LogProbVector RemoteLm::NextLogProbs(std::span<const TokenId> prefix,
                                     const FactList &facts) const {
  ValidatePrefix(vocab_, prefix);
  const json response = client_.Call(
      {{"op", "next_logprobs"},
       {"prefix", std::vector<TokenId>(prefix.begin(), prefix.end())},
       {"facts_linearized", facts.linearized()},
       {"vocab_checksum", checksum_}});
  if (!response.contains("logprobs") || !response["logprobs"].is_array()) {
    throw Error(ErrorCode::kProtocol, "next_logprobs: missing 'logprobs'");
  }
  const json &values = response["logprobs"];
  if (values.size() != vocab_.size()) {
    throw Error(ErrorCode::kProtocol,
                "next_logprobs: expected " + std::to_string(vocab_.size()) +
                    " values, got " + std::to_string(values.size()));
  }
  LogProbVector out;
  out.reserve(values.size());
  for (const json &v : values) {
    if (v.is_null()) {
      out.push_back(-std::numeric_limits<double>::infinity());
    } else if (v.is_number()) {
      out.push_back(std::min(0.0, v.get<double>()));
      if (v.get<double>() > 1e-6) {
        throw Error(ErrorCode::kProtocol,
                    "next_logprobs: positive log-probability");
      }
    } else {
      throw Error(ErrorCode::kProtocol, "next_logprobs: non-numeric value");
    }
  }
  if (!IsNormalized(out, kRemoteNormalizationTolerance)) {
    throw Error(ErrorCode::kProtocol,
                "next_logprobs: distribution is not normalized");
  }
  return out;
}

RemoteEntailmentScorer::RemoteEntailmentScorer(Endpoint endpoint)
    : client_(std::move(endpoint)) {}

double RemoteEntailmentScorer::EntailProb(std::string_view premise,
                                          std::string_view hypothesis) const {
  const json response = client_.Call({{"op", "nli_score"},
                                      {"premise", premise},
                                      {"hypothesis", hypothesis}});
  if (!response.contains("entail_prob")) {
    throw Error(ErrorCode::kProtocol, "nli_score: missing 'entail_prob'");
  }
  return Probability(response["entail_prob"], "nli_score: entail_prob");
}

RemoteHvmVerifier::RemoteHvmVerifier(Endpoint endpoint)
    : client_(std::move(endpoint)) {}

Verdict RemoteHvmVerifier::Score(const FactList &facts,
                                 const Words &hypothesis,
                                 HypothesisKind kind) const {
  const bool backward = kind == HypothesisKind::kBackward;
  PairVerdict v = ScorePair(facts, backward ? &hypothesis : nullptr,
                            backward ? nullptr : &hypothesis);
  return backward ? *v.backward : *v.forward;
}

PairVerdict RemoteHvmVerifier::ScorePair(const FactList &facts,
                                         const Words *backward,
                                         const Words *forward) const {
  PairVerdict out;
  if (backward == nullptr && forward == nullptr) return out;
  for (const Words *w : {backward, forward}) {
    if (w != nullptr && w->empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty hypothesis");
    }
  }
  json triples = json::array();
  for (const FactTriple &t : facts) triples.push_back(TripleToJson(t));
  const json response = client_.Call(
      {{"op", "hvm_table"},
       {"triples", std::move(triples)},
       {"backward", backward ? JoinWords(*backward) : std::string()},
       {"forward", forward ? JoinWords(*forward) : std::string()}});
  if (!response.contains("table") || !response["table"].is_array() ||
      response["table"].size() != facts.size()) {
    throw Error(ErrorCode::kProtocol,
                "hvm_table: expected one row per triple");
  }
  std::vector<double> b, f;
  for (const json &row : response["table"]) {
    if (!row.is_array() || row.size() != 2) {
      throw Error(ErrorCode::kProtocol, "hvm_table: rows need 2 cells");
    }
    b.push_back(Probability(row[0], "hvm_table: cell"));
    f.push_back(Probability(row[1], "hvm_table: cell"));
  }
  if (backward) out.backward = VerdictFromProbabilities(std::move(b));
  if (forward) out.forward = VerdictFromProbabilities(std::move(f));
  return out;
}

}  // namespace k2t
