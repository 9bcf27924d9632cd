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

#ifndef K2T_WIRE_H_
#define K2T_WIRE_H_

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace k2t {

inline constexpr const char *kBridgeEnv = "K2T_BRIDGE";

struct Endpoint {
  std::string host;
  uint16_t port = 0;

  std::string ToString() const;
};

// "host:port"; the host may be empty for localhost.
Endpoint ParseEndpoint(std::string_view text);

std::optional<Endpoint> BridgeFromEnv();

// Newline-delimited JSON over one TCP connection. Calls are serialized per
// client; the connection is opened lazily and reopened after a failure.
// Transport failures raise kTransport, bad or error responses kProtocol.
class LineClient {
 public:
  explicit LineClient(Endpoint endpoint, int timeout_ms = 30000);
  ~LineClient();

  LineClient(const LineClient &) = delete;
  LineClient &operator=(const LineClient &) = delete;

  nlohmann::json Call(const nlohmann::json &request) const;

  const Endpoint &endpoint() const { return endpoint_; }

 private:
  void Connect() const;
  void Close() const;
  [[noreturn]] void Fail(const std::string &what) const;

  Endpoint endpoint_;
  int timeout_ms_;
  mutable std::mutex mu_;
  mutable int fd_ = -1;
  mutable std::string buffer_;
};

}  // namespace k2t

#endif  // K2T_WIRE_H_
