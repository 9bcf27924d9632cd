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

#include "k2t/toy_lm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "k2t/error.h"

namespace k2t {

using nlohmann::json;

namespace {

constexpr char kFormat[] = "k2t-toy-lm";
constexpr int kVersion = 1;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

ToyLm::ToyLm(Vocabulary vocab, ToyLmOptions options, std::vector<Row> rows)
    : vocab_(std::move(vocab)), options_(options), rows_(std::move(rows)) {
  if (options_.order < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  }
  if (options_.smoothing < 0 || !std::isfinite(options_.smoothing)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must be >= 0");
  }
  if (options_.buckets == 0) {
    throw Error(ErrorCode::kInvalidArgument, "bucket count must be > 0");
  }
  for (size_t i = 0; i < rows_.size(); ++i) {
    Row &row = rows_[i];
    if (row.context.size() != static_cast<size_t>(options_.order - 1)) {
      throw Error(ErrorCode::kInvalidArgument, "row context has wrong length");
    }
    std::sort(row.counts.begin(), row.counts.end());
    row.total = 0;
    for (auto [id, c] : row.counts) {
      if (!vocab_.Contains(id)) {
        throw Error(ErrorCode::kInvalidArgument, "row token out of range");
      }
      row.total += c;
    }
    index_.emplace(KeyOf(row.bucket, row.context), i);
  }
}

uint64_t ToyLm::KeyOf(uint64_t bucket, std::span<const TokenId> context) {
  uint64_t h = bucket * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL;
  for (TokenId id : context) {
    h ^= static_cast<uint64_t>(static_cast<uint32_t>(id)) +
         0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

uint64_t ToyLm::BucketOf(const FactList &facts) const {
  return Fnv1a64(facts.linearized()) % options_.buckets;
}

std::vector<TokenId> ToyLm::ContextOf(std::span<const TokenId> prefix) const {
  const size_t n = static_cast<size_t>(options_.order - 1);
  std::vector<TokenId> context(n, vocab_.bos());
  size_t take = std::min(n, prefix.size());
  std::copy(prefix.end() - take, prefix.end(), context.end() - take);
  return context;
}

const ToyLm::Row *ToyLm::FindRow(uint64_t bucket,
                                 std::span<const TokenId> context) const {
  auto [lo, hi] = index_.equal_range(KeyOf(bucket, context));
  for (auto it = lo; it != hi; ++it) {
    const Row &row = rows_[it->second];
    if (row.bucket == bucket &&
        std::equal(row.context.begin(), row.context.end(), context.begin(),
                   context.end())) {
      return &row;
    }
  }
  return nullptr;
}

LogProbVector ToyLm::NextLogProbs(std::span<const TokenId> prefix,
                                  const FactList &facts) const {
  ValidatePrefix(vocab_, prefix);
  const size_t v = vocab_.size();
  if (prefix.back() == vocab_.eos()) {
    LogProbVector out(v, kNegInf);
    out[vocab_.eos()] = 0.0;
    return out;
  }
  const Row *row = FindRow(BucketOf(facts), ContextOf(prefix));
  if (row == nullptr || row->total == 0) {
    return LogProbVector(v, -std::log(static_cast<double>(v)));
  }
  const double delta = options_.smoothing;
  const double denom = static_cast<double>(row->total) + delta * v;
  LogProbVector out(v, delta > 0 ? std::log(delta / denom) : kNegInf);
  for (auto [id, c] : row->counts) {
    out[id] = std::log((static_cast<double>(c) + delta) / denom);
  }
  return out;
}

TokenId ToyLm::ArgmaxNext(std::span<const TokenId> prefix,
                          const FactList &facts) const {
  ValidatePrefix(vocab_, prefix);
  if (prefix.back() == vocab_.eos()) return vocab_.eos();
  const Row *row = FindRow(BucketOf(facts), ContextOf(prefix));
  if (row == nullptr || row->total == 0) return 0;
  TokenId best = -1;
  uint64_t best_count = 0;
  for (auto [id, c] : row->counts) {
    if (c > best_count) {
      best = id;
      best_count = c;
    }
  }
  if (best < 0) return 0;
  return best;
}

std::vector<TokenId> ToyLm::Encode(const Words &words) const {
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const std::string &w : words) {
    auto id = vocab_.Lookup(w);
    if (!id) {
      throw Error(ErrorCode::kInvalidArgument, "word not in vocabulary: " + w);
    }
    ids.push_back(*id);
  }
  return ids;
}

ToyLm ToyLm::Train(const std::vector<K2TInstance> &corpus,
                   const ToyLmOptions &options) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "training corpus is empty");
  }
  std::set<std::string> words;
  bool any = false;
  for (const K2TInstance &inst : corpus) {
    for (const std::string &ref : inst.references) {
      any = true;
      for (std::string &w : Tokenize(ref)) words.insert(std::move(w));
    }
  }
  if (!any) {
    throw Error(ErrorCode::kInvalidArgument,
                "training corpus has no descriptions");
  }
  std::vector<std::string> tokens = {"</s>", "<s>"};
  for (const std::string &w : words) {
    if (w == "</s>" || w == "<s>") {
      throw Error(ErrorCode::kInvalidArgument,
                  "description contains a reserved token: " + w);
    }
    tokens.push_back(w);
  }
  Vocabulary vocab(std::move(tokens), /*bos=*/1, /*eos=*/0);

  // Build counts through a shell model so bucket/context logic is shared.
  ToyLm shell(vocab, options, {});
  std::map<std::pair<uint64_t, std::vector<TokenId>>, std::map<TokenId, uint64_t>>
      counts;
  for (const K2TInstance &inst : corpus) {
    const uint64_t bucket = shell.BucketOf(inst.facts);
    for (const std::string &ref : inst.references) {
      std::vector<TokenId> seq = {vocab.bos()};
      for (TokenId id : shell.Encode(Tokenize(ref))) seq.push_back(id);
      seq.push_back(vocab.eos());
      for (size_t t = 1; t < seq.size(); ++t) {
        auto ctx = shell.ContextOf(std::span<const TokenId>(seq).first(t));
        ++counts[{bucket, ctx}][seq[t]];
      }
    }
  }
  std::vector<Row> rows;
  rows.reserve(counts.size());
  for (auto &[key, next] : counts) {
    Row row;
    row.bucket = key.first;
    row.context = key.second;
    for (auto [id, c] : next) row.counts.emplace_back(id, c);
    rows.push_back(std::move(row));
  }
  return ToyLm(std::move(vocab), options, std::move(rows));
}

json ToyLm::ToJson() const {
  json out;
  out["format"] = kFormat;
  out["version"] = kVersion;
  out["order"] = options_.order;
  out["smoothing"] = options_.smoothing;
  out["buckets"] = options_.buckets;
  out["vocab"] = vocab_.tokens();
  out["bos"] = vocab_.bos();
  out["eos"] = vocab_.eos();
  std::vector<const Row *> sorted;
  for (const Row &r : rows_) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const Row *a, const Row *b) {
    return std::tie(a->bucket, a->context) < std::tie(b->bucket, b->context);
  });
  json rows = json::array();
  for (const Row *r : sorted) {
    json counts = json::array();
    for (auto [id, c] : r->counts) counts.push_back({id, c});
    rows.push_back({{"bucket", r->bucket}, {"context", r->context},
                    {"counts", counts}});
  }
  out["rows"] = std::move(rows);
  return out;
}

ToyLm ToyLm::FromJson(const json &value) {
  try {
    if (value.at("format") != kFormat || value.at("version") != kVersion) {
      throw Error(ErrorCode::kSchema, "not a k2t toy LM (format/version)");
    }
    ToyLmOptions options;
    options.order = value.at("order").get<int>();
    options.smoothing = value.at("smoothing").get<double>();
    options.buckets = value.at("buckets").get<uint64_t>();
    Vocabulary vocab(value.at("vocab").get<std::vector<std::string>>(),
                     value.at("bos").get<TokenId>(),
                     value.at("eos").get<TokenId>());
    std::vector<Row> rows;
    for (const json &r : value.at("rows")) {
      Row row;
      row.bucket = r.at("bucket").get<uint64_t>();
      row.context = r.at("context").get<std::vector<TokenId>>();
      for (const json &c : r.at("counts")) {
        row.counts.emplace_back(c.at(0).get<TokenId>(), c.at(1).get<uint64_t>());
      }
      rows.push_back(std::move(row));
    }
    return ToyLm(std::move(vocab), options, std::move(rows));
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kSchema, std::string("toy LM: ") + e.what());
  }
}

void ToyLm::Save(const std::string &path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << ToJson().dump() << '\n';
}

ToyLm ToyLm::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  json value;
  try {
    value = json::parse(in);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kSchema, path + ": " + e.what());
  }
  return FromJson(value);
}

}  // namespace k2t
