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

#ifndef K2T_KNOWLEDGE_H_
#define K2T_KNOWLEDGE_H_

#include <compare>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace k2t {

using Words = std::vector<std::string>;

// Reserved linearization markers. Fields containing them are rejected.
inline constexpr std::string_view kSubjectMarker = "<H>";
inline constexpr std::string_view kRelationMarker = "<R>";
inline constexpr std::string_view kObjectMarker = "<T>";

// A single <subject, relation, object> fact. Fields are whitespace-trimmed,
// non-empty and free of marker tokens.
struct FactTriple {
  std::string subject;
  std::string relation;
  std::string object;

  // Trims and validates the fields. Throws Error(kInvalidArgument).
  static FactTriple Make(std::string_view subject, std::string_view relation,
                         std::string_view object);

  auto operator<=>(const FactTriple &) const = default;
  bool operator==(const FactTriple &) const = default;
};

// Non-empty ordered list of facts. The marker linearization is computed once
// at construction since language models condition on it for every query.
class FactList {
 public:
  explicit FactList(std::vector<FactTriple> triples);

  const std::vector<FactTriple> &triples() const { return triples_; }
  size_t size() const { return triples_.size(); }
  const FactTriple &operator[](size_t i) const { return triples_[i]; }
  auto begin() const { return triples_.begin(); }
  auto end() const { return triples_.end(); }

  const std::string &linearized() const { return linearized_; }

  bool operator==(const FactList &other) const {
    return triples_ == other.triples_;
  }

 private:
  std::vector<FactTriple> triples_;
  std::string linearized_;
};

struct K2TInstance {
  FactList facts;
  std::vector<std::string> references;

  bool operator==(const K2TInstance &) const = default;
};

// "<H> subj <R> rel <T> obj" per triple, joined by single spaces.
std::string Linearize(const FactList &facts);

// Whitespace tokenization used everywhere in the engine.
Words Tokenize(std::string_view text);
std::string JoinWords(const Words &words, size_t begin = 0,
                      size_t end = static_cast<size_t>(-1));

std::string_view TrimWhitespace(std::string_view text);

// True if any whitespace token of `text` is one of the reserved markers.
bool ContainsMarker(std::string_view text);

enum class DatasetFormat { kJsonl, kTsv };

DatasetFormat DatasetFormatFromPath(std::string_view path);

// Parsers report schema violations as Error(kSchema) naming the line and
// field. `source` is only used in messages.
std::vector<K2TInstance> ParseJsonl(std::istream &in,
                                    std::string_view source = "<stream>");
std::vector<K2TInstance> ParseTsv(std::istream &in,
                                  std::string_view source = "<stream>");
std::vector<K2TInstance> ParseDataset(const std::string &path,
                                      DatasetFormat format);

void WriteJsonl(std::ostream &out, const std::vector<K2TInstance> &instances);
void WriteTsv(std::ostream &out, const std::vector<K2TInstance> &instances);
void WriteDataset(const std::string &path, DatasetFormat format,
                  const std::vector<K2TInstance> &instances);

nlohmann::json TripleToJson(const FactTriple &triple);
FactTriple TripleFromJson(const nlohmann::json &value);
nlohmann::json FactsToJson(const FactList &facts);
FactList FactsFromJson(const nlohmann::json &value);

}  // namespace k2t

#endif  // K2T_KNOWLEDGE_H_
