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

#include "k2t/knowledge.h"

#include <fstream>
#include <sstream>

#include "k2t/error.h"

namespace k2t {

using nlohmann::json;

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string CheckedField(std::string_view value, std::string_view name) {
  std::string_view trimmed = TrimWhitespace(value);
  if (trimmed.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "fact field '" + std::string(name) + "' is empty");
  }
  if (ContainsMarker(trimmed)) {
    throw Error(ErrorCode::kInvalidArgument,
                "fact field '" + std::string(name) +
                    "' contains a reserved marker token: " +
                    std::string(trimmed));
  }
  return std::string(trimmed);
}

[[noreturn]] void SchemaError(std::string_view source, size_t line,
                              std::string_view field,
                              const std::string &what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": field '" << field << "': " << what;
  throw Error(ErrorCode::kSchema, msg.str());
}

std::vector<std::string> SplitOn(std::string_view text, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  for (;;) {
    size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      return parts;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

FactTriple FactTriple::Make(std::string_view subject,
                            std::string_view relation,
                            std::string_view object) {
  return FactTriple{CheckedField(subject, "subject"),
                    CheckedField(relation, "relation"),
                    CheckedField(object, "object")};
}

FactList::FactList(std::vector<FactTriple> triples)
    : triples_(std::move(triples)) {
  if (triples_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "fact list must not be empty");
  }
  for (auto &t : triples_) t = FactTriple::Make(t.subject, t.relation, t.object);
  linearized_ = Linearize(*this);
}

std::string Linearize(const FactList &facts) {
  std::string out;
  for (const FactTriple &t : facts) {
    if (!out.empty()) out += ' ';
    out += kSubjectMarker;
    out += ' ';
    out += t.subject;
    out += ' ';
    out += kRelationMarker;
    out += ' ';
    out += t.relation;
    out += ' ';
    out += kObjectMarker;
    out += ' ';
    out += t.object;
  }
  return out;
}

Words Tokenize(std::string_view text) {
  Words words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    size_t start = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

std::string JoinWords(const Words &words, size_t begin, size_t end) {
  end = std::min(end, words.size());
  std::string out;
  for (size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += words[i];
  }
  return out;
}

std::string_view TrimWhitespace(std::string_view text) {
  size_t b = 0, e = text.size();
  while (b < e && IsSpace(text[b])) ++b;
  while (e > b && IsSpace(text[e - 1])) --e;
  return text.substr(b, e - b);
}

bool ContainsMarker(std::string_view text) {
  for (const std::string &w : Tokenize(text)) {
    if (w == kSubjectMarker || w == kRelationMarker || w == kObjectMarker) {
      return true;
    }
  }
  return false;
}

DatasetFormat DatasetFormatFromPath(std::string_view path) {
  if (path.ends_with(".tsv")) return DatasetFormat::kTsv;
  return DatasetFormat::kJsonl;
}

json TripleToJson(const FactTriple &triple) {
  return json::array({triple.subject, triple.relation, triple.object});
}

FactTriple TripleFromJson(const json &value) {
  if (!value.is_array() || value.size() != 3) {
    throw Error(ErrorCode::kSchema, "triple must be an array of 3 strings");
  }
  static constexpr const char *kNames[] = {"subject", "relation", "object"};
  for (int i = 0; i < 3; ++i) {
    if (!value[i].is_string()) {
      throw Error(ErrorCode::kSchema,
                  std::string("triple ") + kNames[i] + " must be a string");
    }
  }
  return FactTriple::Make(value[0].get<std::string>(),
                          value[1].get<std::string>(),
                          value[2].get<std::string>());
}

json FactsToJson(const FactList &facts) {
  json out = json::array();
  for (const FactTriple &t : facts) out.push_back(TripleToJson(t));
  return out;
}

FactList FactsFromJson(const json &value) {
  if (!value.is_array()) {
    throw Error(ErrorCode::kSchema, "facts must be an array of triples");
  }
  std::vector<FactTriple> triples;
  for (const json &t : value) triples.push_back(TripleFromJson(t));
  return FactList(std::move(triples));
}

std::vector<K2TInstance> ParseJsonl(std::istream &in, std::string_view source) {
  std::vector<K2TInstance> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (TrimWhitespace(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error &e) {
      SchemaError(source, lineno, "<record>", e.what());
    }
    if (!record.is_object()) {
      SchemaError(source, lineno, "<record>", "expected a JSON object");
    }
    if (!record.contains("facts")) {
      SchemaError(source, lineno, "facts", "missing");
    }
    const json &facts = record["facts"];
    if (!facts.is_array() || facts.empty()) {
      SchemaError(source, lineno, "facts", "must be a non-empty array");
    }
    std::vector<FactTriple> triples;
    static constexpr const char *kNames[] = {"subject", "relation", "object"};
    for (size_t j = 0; j < facts.size(); ++j) {
      const json &t = facts[j];
      if (!t.is_array()) {
        SchemaError(source, lineno, "facts", "triple " + std::to_string(j) +
                                                 " is not an array");
      }
      for (size_t f = 0; f < 3; ++f) {
        if (f >= t.size() || !t[f].is_string()) {
          SchemaError(source, lineno, kNames[f],
                      "missing or not a string in triple " +
                          std::to_string(j));
        }
      }
      if (t.size() != 3) {
        SchemaError(source, lineno, "facts",
                    "triple " + std::to_string(j) + " has extra fields");
      }
      try {
        triples.push_back(FactTriple::Make(t[0].get<std::string>(),
                                           t[1].get<std::string>(),
                                           t[2].get<std::string>()));
      } catch (const Error &e) {
        SchemaError(source, lineno, "facts", e.what());
      }
    }
    std::vector<std::string> references;
    if (record.contains("references")) {
      const json &refs = record["references"];
      if (!refs.is_array()) {
        SchemaError(source, lineno, "references", "must be an array");
      }
      for (const json &r : refs) {
        if (!r.is_string()) {
          SchemaError(source, lineno, "references", "must contain strings");
        }
        references.push_back(r.get<std::string>());
      }
    }
    out.push_back(K2TInstance{FactList(std::move(triples)),
                              std::move(references)});
  }
  return out;
}

std::vector<K2TInstance> ParseTsv(std::istream &in, std::string_view source) {
  std::vector<K2TInstance> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (TrimWhitespace(line).empty()) continue;
    std::vector<std::string> columns = SplitOn(line, '\t');
    std::vector<FactTriple> triples;
    size_t c = 0;
    // Leading columns of the form subj|rel|obj are triples; the first column
    // that is not starts the references.
    for (; c < columns.size(); ++c) {
      std::vector<std::string> parts = SplitOn(columns[c], '|');
      if (parts.size() != 3) break;
      try {
        triples.push_back(FactTriple::Make(parts[0], parts[1], parts[2]));
      } catch (const Error &e) {
        SchemaError(source, lineno, "facts", e.what());
      }
    }
    if (triples.empty()) {
      SchemaError(source, lineno, "facts",
                  "expected at least one subj|rel|obj column");
    }
    std::vector<std::string> references(columns.begin() + c, columns.end());
    out.push_back(K2TInstance{FactList(std::move(triples)),
                              std::move(references)});
  }
  return out;
}

std::vector<K2TInstance> ParseDataset(const std::string &path,
                                      DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return format == DatasetFormat::kTsv ? ParseTsv(in, path)
                                       : ParseJsonl(in, path);
}

void WriteJsonl(std::ostream &out, const std::vector<K2TInstance> &instances) {
  for (const K2TInstance &inst : instances) {
    json record;
    record["facts"] = FactsToJson(inst.facts);
    record["references"] = inst.references;
    out << record.dump() << '\n';
  }
}

void WriteTsv(std::ostream &out, const std::vector<K2TInstance> &instances) {
  auto check = [](const std::string &s, bool triple_field) {
    if (s.find('\t') != std::string::npos || s.find('\n') != std::string::npos ||
        (triple_field && s.find('|') != std::string::npos)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "value not representable in TSV: " + s);
    }
  };
  for (const K2TInstance &inst : instances) {
    bool first = true;
    for (const FactTriple &t : inst.facts) {
      check(t.subject, true);
      check(t.relation, true);
      check(t.object, true);
      if (!first) out << '\t';
      out << t.subject << '|' << t.relation << '|' << t.object;
      first = false;
    }
    for (const std::string &r : inst.references) {
      check(r, false);
      if (SplitOn(r, '|').size() == 3) {
        throw Error(ErrorCode::kInvalidArgument,
                    "reference would parse as a triple in TSV: " + r);
      }
      out << '\t' << r;
    }
    out << '\n';
  }
}

void WriteDataset(const std::string &path, DatasetFormat format,
                  const std::vector<K2TInstance> &instances) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  if (format == DatasetFormat::kTsv) {
    WriteTsv(out, instances);
  } else {
    WriteJsonl(out, instances);
  }
}

}  // namespace k2t
