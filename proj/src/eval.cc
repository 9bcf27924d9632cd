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

#include "k2t/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "k2t/error.h"

namespace k2t {

using nlohmann::json;

namespace {

using NgramCounts = std::map<std::vector<std::string>, uint64_t>;

NgramCounts CountNgrams(const Words &words, size_t n) {
  NgramCounts counts;
  for (size_t i = 0; i + n <= words.size(); ++i) {
    ++counts[std::vector<std::string>(words.begin() + i,
                                      words.begin() + i + n)];
  }
  return counts;
}

std::string FormatNumber(double v, int precision) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string ExactNumber(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json NumberOrNull(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string RenderTable(const std::vector<std::vector<std::string>> &rows) {
  std::vector<size_t> width;
  for (const auto &row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  for (size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (size_t c = 0; c < rows[r].size(); ++c) {
      if (c) line += "  ";
      std::string cell = rows[r][c];
      if (c == 0) {
        cell.resize(width[c], ' ');
      } else {
        cell.insert(0, width[c] - cell.size(), ' ');
      }
      line += cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
    if (r == 0) {
      size_t total = 0;
      for (size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
      out += std::string(total, '-') + '\n';
    }
  }
  return out;
}

}  // namespace

BleuStats ComputeBleuStats(const Words &candidate,
                           const std::vector<Words> &references, int max_n) {
  if (max_n < 1) throw Error(ErrorCode::kInvalidArgument, "max_n must be >= 1");
  if (references.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "BLEU needs a reference");
  }
  BleuStats stats;
  stats.candidate_length = candidate.size();
  size_t best = references.front().size();
  for (const Words &r : references) {
    const auto d = [&](size_t len) {
      return len > candidate.size() ? len - candidate.size()
                                    : candidate.size() - len;
    };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) {
      best = r.size();
    }
  }
  stats.reference_length = best;
  for (int n = 1; n <= max_n; ++n) {
    const NgramCounts cand = CountNgrams(candidate, n);
    NgramCounts max_ref;
    for (const Words &r : references) {
      for (const auto &[gram, count] : CountNgrams(r, n)) {
        uint64_t &slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    uint64_t matched = 0;
    for (const auto &[gram, count] : cand) {
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(count, it->second);
    }
    stats.matches.push_back(matched);
    stats.totals.push_back(candidate.size() >= static_cast<size_t>(n)
                               ? candidate.size() - n + 1
                               : 0);
  }
  return stats;
}

double BleuFromStats(const BleuStats &stats) {
  if (stats.candidate_length == 0 || stats.matches.empty() ||
      stats.matches[0] == 0) {
    return 0.0;
  }
  double log_sum = 0.0;
  for (size_t i = 0; i < stats.matches.size(); ++i) {
    double p;
    if (stats.matches[i] == 0) {
      p = 1.0 / (static_cast<double>(stats.totals[i]) + 1.0);
    } else {
      p = static_cast<double>(stats.matches[i]) / stats.totals[i];
    }
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(stats.candidate_length);
  const double r = static_cast<double>(stats.reference_length);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::exp(log_sum / stats.matches.size());
}

double SentenceBleu(const Words &candidate,
                    const std::vector<Words> &references, int max_n) {
  return BleuFromStats(ComputeBleuStats(candidate, references, max_n));
}

double CorpusBleu(const std::vector<Words> &candidates,
                  const std::vector<std::vector<Words>> &references,
                  int max_n) {
  if (candidates.size() != references.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "candidate and reference counts differ");
  }
  BleuStats total;
  total.matches.assign(max_n, 0);
  total.totals.assign(max_n, 0);
  for (size_t i = 0; i < candidates.size(); ++i) {
    const BleuStats s = ComputeBleuStats(candidates[i], references[i], max_n);
    for (int n = 0; n < max_n; ++n) {
      total.matches[n] += s.matches[n];
      total.totals[n] += s.totals[n];
    }
    total.candidate_length += s.candidate_length;
    total.reference_length += s.reference_length;
  }
  return BleuFromStats(total);
}

std::vector<bool> HallucinationFlags(const std::vector<Words> &outputs,
                                     const std::vector<FactList> &facts,
                                     const RuleOracle &oracle) {
  if (outputs.size() != facts.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "output and instance counts differ");
  }
  std::vector<bool> flags;
  flags.reserve(outputs.size());
  for (size_t i = 0; i < outputs.size(); ++i) {
    const Words normalized = NormalizeWords(outputs[i]);
    bool bad = false;
    for (const FactTriple &t : facts[i]) {
      if (oracle.VerifyNormalized(t, normalized) == Support::kUnsupported) {
        bad = true;
        break;
      }
    }
    flags.push_back(bad);
  }
  return flags;
}

double HallucinationRate(const std::vector<Words> &outputs,
                         const std::vector<FactList> &facts,
                         const RuleOracle &oracle) {
  const std::vector<bool> flags = HallucinationFlags(outputs, facts, oracle);
  if (flags.empty()) return 0.0;
  return static_cast<double>(std::count(flags.begin(), flags.end(), true)) /
         flags.size();
}

uint64_t PositionHistogram::Total() const {
  uint64_t n = 0;
  for (uint64_t c : backward) n += c;
  for (uint64_t c : forward) n += c;
  return n;
}

void PositionHistogram::WriteCsv(std::ostream &out) const {
  out << "bin_start,bin_end,backward_count,forward_count\n";
  for (size_t b = 0; b < bins(); ++b) {
    out << ExactNumber(edges[b]) << ',' << ExactNumber(edges[b + 1]) << ','
        << backward[b] << ',' << forward[b] << '\n';
  }
}

PositionHistogram PositionHistogram::ReadCsv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) ||
      TrimWhitespace(line) != "bin_start,bin_end,backward_count,forward_count") {
    throw Error(ErrorCode::kSchema, "histogram CSV: bad header");
  }
  PositionHistogram h;
  size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (TrimWhitespace(line).empty()) continue;
    std::stringstream ss{std::string(TrimWhitespace(line))};
    std::string cells[4];
    for (int c = 0; c < 4; ++c) {
      if (!std::getline(ss, cells[c], ',')) {
        throw Error(ErrorCode::kSchema, "histogram CSV line " +
                                            std::to_string(number) +
                                            ": expected 4 columns");
      }
    }
    try {
      size_t used = 0;
      const double start = std::stod(cells[0], &used);
      const double end = std::stod(cells[1]);
      if (h.edges.empty()) {
        h.edges.push_back(start);
      } else if (h.edges.back() != start) {
        throw Error(ErrorCode::kSchema, "histogram CSV line " +
                                            std::to_string(number) +
                                            ": bins are not contiguous");
      }
      h.edges.push_back(end);
      h.backward.push_back(std::stoull(cells[2]));
      h.forward.push_back(std::stoull(cells[3]));
    } catch (const std::logic_error &) {
      throw Error(ErrorCode::kSchema, "histogram CSV line " +
                                          std::to_string(number) +
                                          ": malformed number");
    }
  }
  return h;
}

json PositionHistogram::ToJson() const {
  return {{"edges", edges}, {"backward", backward}, {"forward", forward}};
}

PositionHistogram MakePositionHistogram(
    const std::vector<VerdictRecord> &verdicts, size_t bins) {
  if (bins == 0) throw Error(ErrorCode::kInvalidArgument, "bins must be >= 1");
  PositionHistogram h;
  for (size_t b = 0; b <= bins; ++b) {
    h.edges.push_back(static_cast<double>(b) / bins);
  }
  h.backward.assign(bins, 0);
  h.forward.assign(bins, 0);
  for (const VerdictRecord &v : verdicts) {
    if (!v.negative) continue;
    const double p = std::clamp(v.position, 0.0, 1.0);
    const size_t b =
        std::min(bins - 1, static_cast<size_t>(std::floor(p * bins)));
    (v.kind == HypothesisKind::kBackward ? h.backward : h.forward)[b]++;
  }
  return h;
}

PositionHistogram MakePositionHistogram(const std::vector<DecodeTrace> &traces,
                                        size_t bins) {
  std::vector<VerdictRecord> all;
  for (const DecodeTrace &t : traces) {
    for (const StepRecord &s : t.steps) {
      all.insert(all.end(), s.verdicts.begin(), s.verdicts.end());
    }
  }
  return MakePositionHistogram(all, bins);
}

size_t CountNegativeVerdicts(const std::vector<DecodeTrace> &traces) {
  size_t n = 0;
  for (const DecodeTrace &t : traces) {
    for (const StepRecord &s : t.steps) {
      for (const VerdictRecord &v : s.verdicts) n += v.negative;
    }
  }
  return n;
}

json RunResult::ToJson() const {
  json outs = json::array();
  for (const Words &w : outputs) outs.push_back(JoinWords(w));
  json scores = json::array();
  for (double b : bleu) scores.push_back(NumberOrNull(b));
  return {{"name", name},
          {"config", config},
          {"instances", instance_keys},
          {"outputs", std::move(outs)},
          {"bleu", std::move(scores)},
          {"hallucinated", hallucinated},
          {"corpus_bleu", corpus_bleu},
          {"hallucination_rate", hallucination_rate}};
}

RunResult RunResult::FromJson(const json &value) {
  RunResult r;
  try {
    r.name = value.at("name").get<std::string>();
    r.config = value.at("config");
    r.instance_keys = value.at("instances").get<std::vector<std::string>>();
    for (const json &o : value.at("outputs")) {
      r.outputs.push_back(Tokenize(o.get<std::string>()));
    }
    for (const json &b : value.at("bleu")) {
      r.bleu.push_back(b.is_number() ? b.get<double>()
                                     : std::numeric_limits<double>::quiet_NaN());
    }
    r.hallucinated = value.at("hallucinated").get<std::vector<bool>>();
    r.corpus_bleu = value.at("corpus_bleu").get<double>();
    r.hallucination_rate = value.at("hallucination_rate").get<double>();
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kSchema, std::string("run result: ") + e.what());
  }
  const size_t n = r.instance_keys.size();
  if (r.outputs.size() != n || r.bleu.size() != n ||
      r.hallucinated.size() != n) {
    throw Error(ErrorCode::kSchema, "run result: per-instance lists differ in "
                                    "length");
  }
  return r;
}

RunResult Evaluate(std::string name, json config,
                   const std::vector<K2TInstance> &instances,
                   const std::vector<Words> &outputs,
                   const RuleOracle &oracle) {
  if (instances.size() != outputs.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "output and instance counts differ");
  }
  RunResult r;
  r.name = std::move(name);
  r.config = std::move(config);
  r.outputs = outputs;
  std::vector<FactList> facts;
  std::vector<Words> cands;
  std::vector<std::vector<Words>> refs;
  for (size_t i = 0; i < instances.size(); ++i) {
    r.instance_keys.push_back(instances[i].facts.linearized());
    facts.push_back(instances[i].facts);
    if (instances[i].references.empty()) {
      r.bleu.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    std::vector<Words> ref;
    for (const std::string &s : instances[i].references) {
      ref.push_back(Tokenize(s));
    }
    r.bleu.push_back(SentenceBleu(outputs[i], ref));
    cands.push_back(outputs[i]);
    refs.push_back(std::move(ref));
  }
  r.corpus_bleu = cands.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : CorpusBleu(cands, refs);
  r.hallucinated = HallucinationFlags(outputs, facts, oracle);
  r.hallucination_rate =
      r.hallucinated.empty()
          ? 0.0
          : static_cast<double>(std::count(r.hallucinated.begin(),
                                           r.hallucinated.end(), true)) /
                r.hallucinated.size();
  return r;
}

std::vector<Words> OutputsOf(const std::vector<DecodeResult> &results) {
  std::vector<Words> out;
  out.reserve(results.size());
  for (const DecodeResult &r : results) out.push_back(r.words);
  return out;
}

SweepAxis ParseSweepAxis(std::string_view name) {
  if (name == "alpha") return SweepAxis::kAlpha;
  if (name == "beam_size" || name == "beam-size" || name == "k") {
    return SweepAxis::kBeamSize;
  }
  throw Error(ErrorCode::kConfig, "unknown sweep axis: " + std::string(name));
}

std::string_view SweepAxisName(SweepAxis axis) {
  return axis == SweepAxis::kAlpha ? "alpha" : "beam_size";
}

std::vector<SweepRow> Sweep(const std::vector<K2TInstance> &instances,
                            const LanguageModel &lm, const Verifier *verifier,
                            const RuleOracle &oracle,
                            const DecodeConfig &base, SweepAxis axis,
                            const std::vector<double> &values) {
  if (values.empty()) {
    throw Error(ErrorCode::kConfig, "sweep needs at least one value");
  }
  std::vector<SweepRow> rows;
  for (double v : values) {
    DecodeConfig cfg = base;
    if (axis == SweepAxis::kAlpha) {
      cfg.alpha = v;
    } else {
      if (v < 1 || v != std::floor(v)) {
        throw Error(ErrorCode::kConfig,
                    "beam size must be a positive integer: " + ExactNumber(v));
      }
      cfg.k = static_cast<int>(v);
    }
    const std::vector<DecodeResult> results =
        DecodeCorpus(instances, lm, verifier, cfg);
    SweepRow row;
    row.value = v;
    row.run = Evaluate(std::string(SweepAxisName(axis)) + "=" + ExactNumber(v),
                       cfg.ToJson(), instances, OutputsOf(results), oracle);
    row.bleu = row.run.corpus_bleu;
    row.hallucination_rate = row.run.hallucination_rate;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string SweepTable(SweepAxis axis, const std::vector<SweepRow> &rows) {
  std::vector<std::vector<std::string>> cells = {
      {std::string(SweepAxisName(axis)), "BLEU", "hallucination_rate(oracle)"}};
  for (const SweepRow &r : rows) {
    cells.push_back({ExactNumber(r.value), FormatNumber(r.bleu, 2),
                     FormatNumber(r.hallucination_rate, 4)});
  }
  return RenderTable(cells);
}

json SweepJson(SweepAxis axis, const std::vector<SweepRow> &rows) {
  json out = json::array();
  for (const SweepRow &r : rows) {
    out.push_back({{"value", r.value},
                   {"bleu", NumberOrNull(r.bleu)},
                   {"hallucination_rate", r.hallucination_rate},
                   {"config", r.run.config}});
  }
  return {{"axis", SweepAxisName(axis)}, {"rows", std::move(out)}};
}

const std::vector<std::pair<size_t, size_t>> &DefaultLengthBounds() {
  static const std::vector<std::pair<size_t, size_t>> kBounds = {
      {1, 1}, {2, 4}, {5, 7}};
  return kBounds;
}

std::vector<LengthGroup> LengthSplitReport(
    const std::vector<K2TInstance> &instances, const RunResult &run,
    const std::vector<std::pair<size_t, size_t>> &bounds) {
  if (bounds.empty()) throw Error(ErrorCode::kConfig, "no length bounds");
  for (size_t g = 0; g < bounds.size(); ++g) {
    if (bounds[g].first > bounds[g].second ||
        (g > 0 && bounds[g].first <= bounds[g - 1].second)) {
      throw Error(ErrorCode::kConfig,
                  "length bounds must be ordered, disjoint ranges");
    }
  }
  if (run.outputs.size() != instances.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "run does not match the instance set");
  }
  std::vector<std::vector<size_t>> members(bounds.size());
  for (size_t i = 0; i < instances.size(); ++i) {
    const size_t m = instances[i].facts.size();
    auto it = std::find_if(bounds.begin(), bounds.end(), [&](const auto &b) {
      return b.first <= m && m <= b.second;
    });
    if (it == bounds.end()) {
      throw Error(ErrorCode::kConfig,
                  "length bounds do not cover m=" + std::to_string(m));
    }
    members[it - bounds.begin()].push_back(i);
  }
  std::vector<LengthGroup> groups;
  for (size_t g = 0; g < bounds.size(); ++g) {
    LengthGroup group{bounds[g].first, bounds[g].second, members[g].size(),
                      std::nullopt, std::nullopt};
    if (!members[g].empty()) {
      std::vector<Words> cands;
      std::vector<std::vector<Words>> refs;
      size_t bad = 0;
      for (size_t i : members[g]) {
        bad += run.hallucinated[i];
        if (instances[i].references.empty()) continue;
        cands.push_back(run.outputs[i]);
        std::vector<Words> ref;
        for (const std::string &s : instances[i].references) {
          ref.push_back(Tokenize(s));
        }
        refs.push_back(std::move(ref));
      }
      if (!cands.empty()) group.bleu = CorpusBleu(cands, refs);
      group.hallucination_rate =
          static_cast<double>(bad) / members[g].size();
    }
    groups.push_back(group);
  }
  return groups;
}

json LengthSplitJson(const std::vector<LengthGroup> &groups) {
  json out = json::array();
  for (const LengthGroup &g : groups) {
    out.push_back({{"lo", g.lo},
                   {"hi", g.hi},
                   {"size", g.size},
                   {"empty", g.size == 0},
                   {"bleu", g.bleu ? json(*g.bleu) : json(nullptr)},
                   {"hallucination_rate", g.hallucination_rate
                                              ? json(*g.hallucination_rate)
                                              : json(nullptr)}});
  }
  return out;
}

CompareReport Compare(const std::vector<RunResult> &runs) {
  if (runs.empty()) throw Error(ErrorCode::kInvalidArgument, "no runs");
  for (const RunResult &r : runs) {
    if (r.instance_keys != runs.front().instance_keys) {
      throw Error(ErrorCode::kInvalidArgument,
                  "run '" + r.name + "' covers a different instance set than '" +
                      runs.front().name + "'");
    }
  }
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"metric"};
  std::vector<std::string> bleu = {"BLEU"};
  std::vector<std::string> rate = {"hallucination_rate(oracle)"};
  std::vector<std::string> count = {"instances"};
  json items = json::array();
  for (const RunResult &r : runs) {
    header.push_back(r.name);
    bleu.push_back(FormatNumber(r.corpus_bleu, 2));
    rate.push_back(FormatNumber(r.hallucination_rate, 4));
    count.push_back(std::to_string(r.outputs.size()));
    items.push_back({{"name", r.name},
                     {"config", r.config},
                     {"corpus_bleu", NumberOrNull(r.corpus_bleu)},
                     {"hallucination_rate", r.hallucination_rate}});
  }
  cells = {header, bleu, rate, count};
  json diffs = json::array();
  for (size_t i = 0; i < runs.front().outputs.size(); ++i) {
    bool differ = false;
    for (const RunResult &r : runs) {
      differ |= r.outputs[i] != runs.front().outputs[i];
    }
    if (!differ) continue;
    json outs = json::array();
    for (const RunResult &r : runs) outs.push_back(JoinWords(r.outputs[i]));
    diffs.push_back({{"instance", i}, {"outputs", std::move(outs)}});
  }
  CompareReport report;
  report.table = RenderTable(cells);
  report.json = {{"runs", std::move(items)},
                 {"diff_count", diffs.size()},
                 {"diffs", std::move(diffs)}};
  return report;
}

}  // namespace k2t
