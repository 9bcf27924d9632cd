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

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "k2t/error.h"
#include "k2t/hvm.h"
#include "testing/fake_bridge.h"
#include "testing/fixtures.h"

namespace k2t {
namespace {

using nlohmann::json;

ErrorCode CodeOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kUsage;
}

// Serves next_logprobs from a local model, keyed by linearized facts.
testing::FakeBridge::Handler LmHandler(
    const LanguageModel &lm, const std::vector<K2TInstance> &corpus,
    std::vector<json> *seen = nullptr) {
  return [&lm, &corpus, seen](const std::string &line) -> std::optional<std::string> {
    json req = json::parse(line);
    if (seen) seen->push_back(req);
    if (req["vocab_checksum"] != lm.vocabulary().Checksum()) {
      return json{{"error", "vocabulary checksum mismatch"}}.dump();
    }
    const std::string key = req["facts_linearized"];
    for (const auto &inst : corpus) {
      if (inst.facts.linearized() != key) continue;
      auto prefix = req["prefix"].get<std::vector<TokenId>>();
      json values = json::array();
      for (double v : lm.NextLogProbs(prefix, inst.facts)) {
        values.push_back(std::isinf(v) ? json(nullptr) : json(v));
      }
      return json{{"logprobs", values}}.dump();
    }
    return json{{"error", "unknown facts"}}.dump();
  };
}

TEST(Endpoint, Parse) {
  Endpoint e = ParseEndpoint("localhost:8080");
  EXPECT_EQ(e.host, "localhost");
  EXPECT_EQ(e.port, 8080);
  EXPECT_EQ(ParseEndpoint(":99").host, "127.0.0.1");
  EXPECT_EQ(ParseEndpoint("::1:7000").host, "::1");
  for (const char *bad : {"nohost", "h:", "h:0", "h:70000", "h:12a"}) {
    EXPECT_EQ(CodeOf([&] { ParseEndpoint(bad); }), ErrorCode::kConfig) << bad;
  }
}

TEST(Endpoint, FromEnvironment) {
  ::unsetenv(kBridgeEnv);
  EXPECT_FALSE(BridgeFromEnv().has_value());
  ::setenv(kBridgeEnv, "127.0.0.1:4567", 1);
  ASSERT_TRUE(BridgeFromEnv().has_value());
  EXPECT_EQ(BridgeFromEnv()->port, 4567);
  ::setenv(kBridgeEnv, "garbage", 1);
  EXPECT_THROW(BridgeFromEnv(), Error);
  ::unsetenv(kBridgeEnv);
}

TEST(LineClient, RoundTripAndConnectionReuse) {
  testing::FakeBridge bridge([](const std::string &line) {
    json req = json::parse(line);
    return std::optional<std::string>(json{{"echo", req["x"]}}.dump());
  });
  LineClient client(bridge.endpoint());
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(client.Call({{"x", i}})["echo"], i);
  }
  EXPECT_EQ(bridge.requests(), 5u);
  EXPECT_EQ(bridge.connections(), 1u);
}

TEST(LineClient, ProtocolErrors) {
  testing::FakeBridge bridge([](const std::string &line) {
    json req = json::parse(line);
    const std::string mode = req["mode"];
    if (mode == "garbage") return std::optional<std::string>("{not json");
    if (mode == "array") return std::optional<std::string>("[1, 2]");
    return std::optional<std::string>(json{{"error", "boom"}}.dump());
  });
  LineClient client(bridge.endpoint());
  EXPECT_EQ(CodeOf([&] { client.Call({{"mode", "garbage"}}); }),
            ErrorCode::kProtocol);
  EXPECT_EQ(CodeOf([&] { client.Call({{"mode", "array"}}); }),
            ErrorCode::kProtocol);
  try {
    client.Call({{"mode", "error"}});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kProtocol);
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
}

TEST(LineClient, TransportErrors) {
  uint16_t dead_port;
  {
    testing::FakeBridge bridge([](const std::string &) {
      return std::optional<std::string>("{}");
    });
    dead_port = bridge.endpoint().port;
  }
  LineClient refused(Endpoint{"127.0.0.1", dead_port});
  EXPECT_EQ(CodeOf([&] { refused.Call({{"op", "x"}}); }),
            ErrorCode::kTransport);

  testing::FakeBridge closer([](const std::string &) {
    return std::optional<std::string>();
  });
  LineClient client(closer.endpoint());
  EXPECT_EQ(CodeOf([&] { client.Call({{"op", "x"}}); }), ErrorCode::kTransport);
  // The client reconnects on the next call.
  EXPECT_EQ(CodeOf([&] { client.Call({{"op", "x"}}); }), ErrorCode::kTransport);
  EXPECT_EQ(closer.connections(), 2u);
}

TEST(LineClient, Timeout) {
  testing::FakeBridge slow([](const std::string &) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    return std::optional<std::string>("{}");
  });
  LineClient client(slow.endpoint(), 100);
  EXPECT_EQ(CodeOf([&] { client.Call({{"op", "x"}}); }), ErrorCode::kTransport);
}

TEST(RemoteLm, MatchesLocalModelExactly) {
  auto pipeline = testing::ToyPipeline(10, 31, 0.1);
  std::vector<json> seen;
  testing::FakeBridge bridge(
      LmHandler(pipeline.lm, pipeline.adversarial, &seen));
  RemoteLm remote(pipeline.lm.vocabulary(), bridge.endpoint());
  for (const auto &inst : pipeline.adversarial) {
    std::vector<TokenId> prefix = {pipeline.lm.vocabulary().bos()};
    for (int i = 0; i < 5; ++i) {
      EXPECT_EQ(remote.NextLogProbs(prefix, inst.facts),
                pipeline.lm.NextLogProbs(prefix, inst.facts));
      prefix.push_back(pipeline.lm.ArgmaxNext(prefix, inst.facts));
    }
  }
  ASSERT_FALSE(seen.empty());
  for (const json &req : seen) {
    EXPECT_EQ(req["op"], "next_logprobs");
    EXPECT_EQ(req["vocab_checksum"], pipeline.lm.vocabulary().Checksum());
  }
}

TEST(RemoteLm, DecodingMatchesLocal) {
  auto pipeline = testing::ToyPipeline(8, 32);
  testing::FakeBridge bridge(LmHandler(pipeline.lm, pipeline.adversarial));
  RemoteLm remote(pipeline.lm.vocabulary(), bridge.endpoint());
  HvmVerifier verifier(pipeline.hvm);
  for (const auto &inst : pipeline.adversarial) {
    for (Strategy s : {Strategy::kBeam, Strategy::kTweakHvm}) {
      DecodeConfig c = DecodeConfig::Defaults(s);
      EXPECT_EQ(Decode(inst.facts, remote, &verifier, c).best,
                Decode(inst.facts, pipeline.lm, &verifier, c).best);
    }
  }
}

TEST(RemoteLm, ChecksumMismatchIsProtocolError) {
  auto pipeline = testing::ToyPipeline(3, 33);
  testing::FakeBridge bridge(LmHandler(pipeline.lm, pipeline.adversarial));
  std::vector<std::string> tokens = pipeline.lm.vocabulary().tokens();
  std::swap(tokens[2], tokens[3]);
  RemoteLm remote(Vocabulary(tokens, 1, 0), bridge.endpoint());
  std::vector<TokenId> prefix = {1};
  EXPECT_EQ(CodeOf([&] {
              remote.NextLogProbs(prefix, pipeline.adversarial[0].facts);
            }),
            ErrorCode::kProtocol);
}

TEST(RemoteLm, MalformedReplies) {
  Vocabulary vocab({"</s>", "<s>", "a"}, 1, 0);
  const FactList facts = testing::OneFact();
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"wrong size", R"({"logprobs": [0.0, null]})"},
      {"unnormalized", R"({"logprobs": [-1.0, null, -1.0]})"},
      {"positive", R"({"logprobs": [0.5, null, null]})"},
      {"string", R"({"logprobs": ["x", null, 0.0]})"},
      {"missing", R"({"other": 1})"},
  };
  for (const auto &[name, reply] : cases) {
    testing::FakeBridge bridge([reply](const std::string &) {
      return std::optional<std::string>(reply);
    });
    RemoteLm remote(vocab, bridge.endpoint());
    std::vector<TokenId> prefix = {1};
    EXPECT_EQ(CodeOf([&] { remote.NextLogProbs(prefix, facts); }),
              ErrorCode::kProtocol)
        << name;
  }
}

TEST(RemoteLm, NearlyNormalizedIsAccepted) {
  Vocabulary vocab({"</s>", "<s>", "a"}, 1, 0);
  const double lp = std::log(0.5 + 2e-5);
  testing::FakeBridge bridge([lp](const std::string &) {
    return std::optional<std::string>(
        json{{"logprobs", {lp, nullptr, lp}}}.dump());
  });
  RemoteLm remote(vocab, bridge.endpoint());
  std::vector<TokenId> prefix = {1};
  LogProbVector out = remote.NextLogProbs(prefix, testing::OneFact());
  EXPECT_EQ(out[1], -std::numeric_limits<double>::infinity());
}

TEST(RemoteNli, ScoresThroughAdapter) {
  std::vector<json> seen;
  testing::FakeBridge bridge([&seen](const std::string &line) {
    json req = json::parse(line);
    seen.push_back(req);
    const double p = req["hypothesis"] == "bad" ? 1.5 : std::exp(-1.0);
    return std::optional<std::string>(json{{"entail_prob", p}}.dump());
  });
  RemoteEntailmentScorer scorer(bridge.endpoint());
  NliVerifier verifier(scorer);
  Verdict v = verifier.Score(testing::OneFact(), {"Dublin", "is"},
                             HypothesisKind::kForward);
  EXPECT_NEAR(v.score, -1.0, 1e-12);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0]["op"], "nli_score");
  EXPECT_EQ(seen[0]["premise"], "Ireland largest_city Dublin");
  EXPECT_EQ(seen[0]["hypothesis"], "Dublin is");
  EXPECT_EQ(CodeOf([&] {
              verifier.Score(testing::OneFact(), {"bad"},
                             HypothesisKind::kForward);
            }),
            ErrorCode::kProtocol);
}

TEST(RemoteHvm, MatchesLocalTable) {
  auto pipeline = testing::ToyPipeline(20, 34);
  std::vector<json> seen;
  testing::FakeBridge bridge([&](const std::string &line) {
    json req = json::parse(line);
    seen.push_back(req);
    std::vector<FactTriple> triples;
    for (const json &t : req["triples"]) triples.push_back(TripleFromJson(t));
    const Words b = Tokenize(req["backward"].get<std::string>());
    const Words f = Tokenize(req["forward"].get<std::string>());
    json table = json::array();
    for (const FactTriple &t : triples) {
      table.push_back(
          {b.empty() ? 0.5 : pipeline.hvm.Predict(t, b, HypothesisKind::kBackward),
           f.empty() ? 0.5 : pipeline.hvm.Predict(t, f, HypothesisKind::kForward)});
    }
    return std::optional<std::string>(json{{"table", table}}.dump());
  });
  RemoteHvmVerifier remote(bridge.endpoint());
  HvmVerifier local(pipeline.hvm);
  for (const auto &inst : pipeline.fate.instances) {
    const Words b = Tokenize(StripMarks(inst.t_pos));
    const Words f = ParseMarked(inst.t_neg).words;
    PairVerdict r = remote.ScorePair(inst.f_pos, &b, &f);
    PairVerdict l = local.ScorePair(inst.f_pos, &b, &f);
    EXPECT_EQ(r.backward->score, l.backward->score);
    EXPECT_EQ(r.forward->score, l.forward->score);
    Verdict only_f = remote.Score(inst.f_pos, f, HypothesisKind::kForward);
    EXPECT_EQ(only_f.score, l.forward->score);
    EXPECT_EQ(seen.back()["backward"], "");
  }
}

TEST(RemoteHvm, BadTableShape) {
  testing::FakeBridge bridge([](const std::string &) {
    return std::optional<std::string>(R"({"table": [[0.5]]})");
  });
  RemoteHvmVerifier remote(bridge.endpoint());
  EXPECT_EQ(CodeOf([&] {
              remote.Score(testing::OneFact(), {"x"}, HypothesisKind::kForward);
            }),
            ErrorCode::kProtocol);
}

}  // namespace
}  // namespace k2t
