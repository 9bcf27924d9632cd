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

#ifndef K2T_EVAL_H_
#define K2T_EVAL_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "k2t/decoder.h"
#include "k2t/knowledge.h"
#include "k2t/lexicon.h"

namespace k2t {

// Clipped n-gram statistics of one segment.
struct BleuStats {
  std::vector<uint64_t> matches;  // index n-1
  std::vector<uint64_t> totals;
  uint64_t candidate_length = 0;
  uint64_t reference_length = 0;  // closest reference length
};

BleuStats ComputeBleuStats(const Words &candidate,
                           const std::vector<Words> &references,
                           int max_n = 4);

double BleuFromStats(const BleuStats &stats);

// Score in [0, 100].
double SentenceBleu(const Words &candidate,
                    const std::vector<Words> &references, int max_n = 4);
double CorpusBleu(const std::vector<Words> &candidates,
                  const std::vector<std::vector<Words>> &references,
                  int max_n = 4);

// True for outputs in which some triple is judged unsupported.
std::vector<bool> HallucinationFlags(const std::vector<Words> &outputs,
                                     const std::vector<FactList> &facts,
                                     const RuleOracle &oracle);
double HallucinationRate(const std::vector<Words> &outputs,
                         const std::vector<FactList> &facts,
                         const RuleOracle &oracle);

struct PositionHistogram {
  std::vector<double> edges;  // bins + 1 edges over [0, 1]
  std::vector<uint64_t> backward;
  std::vector<uint64_t> forward;

  size_t bins() const { return backward.size(); }
  uint64_t Total() const;

  void WriteCsv(std::ostream &out) const;
  static PositionHistogram ReadCsv(std::istream &in);
  nlohmann::json ToJson() const;
  bool operator==(const PositionHistogram &) const = default;
};

PositionHistogram MakePositionHistogram(
    const std::vector<VerdictRecord> &verdicts, size_t bins);
PositionHistogram MakePositionHistogram(const std::vector<DecodeTrace> &traces,
                                        size_t bins);

size_t CountNegativeVerdicts(const std::vector<DecodeTrace> &traces);

struct RunResult {
  std::string name;
  nlohmann::json config;
  std::vector<std::string> instance_keys;  // linearized facts
  std::vector<Words> outputs;
  std::vector<double> bleu;                // per instance; NaN without refs
  std::vector<bool> hallucinated;
  double corpus_bleu = 0.0;
  double hallucination_rate = 0.0;

  nlohmann::json ToJson() const;
  static RunResult FromJson(const nlohmann::json &value);
};

// Scores outputs against the instance references and the oracle.
RunResult Evaluate(std::string name, nlohmann::json config,
                   const std::vector<K2TInstance> &instances,
                   const std::vector<Words> &outputs,
                   const RuleOracle &oracle);

std::vector<Words> OutputsOf(const std::vector<DecodeResult> &results);

enum class SweepAxis { kAlpha, kBeamSize };

SweepAxis ParseSweepAxis(std::string_view name);
std::string_view SweepAxisName(SweepAxis axis);

struct SweepRow {
  double value = 0.0;
  double bleu = 0.0;
  double hallucination_rate = 0.0;
  RunResult run;
};

std::vector<SweepRow> Sweep(const std::vector<K2TInstance> &instances,
                            const LanguageModel &lm, const Verifier *verifier,
                            const RuleOracle &oracle,
                            const DecodeConfig &base, SweepAxis axis,
                            const std::vector<double> &values);

std::string SweepTable(SweepAxis axis, const std::vector<SweepRow> &rows);
nlohmann::json SweepJson(SweepAxis axis, const std::vector<SweepRow> &rows);

struct LengthGroup {
  size_t lo = 0;
  size_t hi = 0;
  size_t size = 0;
  std::optional<double> bleu;
  std::optional<double> hallucination_rate;
};

// Groups by triple count; bounds are inclusive [lo, hi] ranges.
std::vector<LengthGroup> LengthSplitReport(
    const std::vector<K2TInstance> &instances, const RunResult &run,
    const std::vector<std::pair<size_t, size_t>> &bounds);

const std::vector<std::pair<size_t, size_t>> &DefaultLengthBounds();

nlohmann::json LengthSplitJson(const std::vector<LengthGroup> &groups);

struct CompareReport {
  std::string table;
  nlohmann::json json;
};

CompareReport Compare(const std::vector<RunResult> &runs);

}  // namespace k2t

#endif  // K2T_EVAL_H_
