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

#include "k2t/wire.h"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

#include "k2t/error.h"

namespace k2t {

using nlohmann::json;

std::string Endpoint::ToString() const {
  return host + ":" + std::to_string(port);
}

Endpoint ParseEndpoint(std::string_view text) {
  const size_t colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kConfig,
                "bridge address must be host:port, got '" + std::string(text) +
                    "'");
  }
  const std::string_view port = text.substr(colon + 1);
  unsigned value = 0;
  if (port.empty() || port.size() > 5) {
    throw Error(ErrorCode::kConfig, "bad bridge port in '" +
                                        std::string(text) + "'");
  }
  for (char c : port) {
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::kConfig, "bad bridge port in '" +
                                          std::string(text) + "'");
    }
    value = value * 10 + static_cast<unsigned>(c - '0');
  }
  if (value == 0 || value > 65535) {
    throw Error(ErrorCode::kConfig, "bridge port out of range in '" +
                                        std::string(text) + "'");
  }
  std::string host(text.substr(0, colon));
  if (host.empty()) host = "127.0.0.1";
  return Endpoint{host, static_cast<uint16_t>(value)};
}

std::optional<Endpoint> BridgeFromEnv() {
  const char *value = std::getenv(kBridgeEnv);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return ParseEndpoint(value);
}

LineClient::LineClient(Endpoint endpoint, int timeout_ms)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

LineClient::~LineClient() { Close(); }

void LineClient::Close() const {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  buffer_.clear();
}

void LineClient::Fail(const std::string &what) const {
  Close();
  throw Error(ErrorCode::kTransport,
              "bridge " + endpoint_.ToString() + ": " + what);
}

void LineClient::Connect() const {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo *found = nullptr;
  const std::string port = std::to_string(endpoint_.port);
  const int rc =
      ::getaddrinfo(endpoint_.host.c_str(), port.c_str(), &hints, &found);
  if (rc != 0) Fail(std::string("resolve failed: ") + ::gai_strerror(rc));
  std::string last = "no addresses";
  for (addrinfo *a = found; a != nullptr; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) {
      last = std::strerror(errno);
      continue;
    }
    timeval tv{timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000};
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
      fd_ = fd;
      ::freeaddrinfo(found);
      return;
    }
    last = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(found);
  Fail("connect failed: " + last);
}

json LineClient::Call(const json &request) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (fd_ < 0) Connect();
  const std::string line = request.dump() + "\n";
  size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n =
        ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) Fail(std::string("send failed: ") + std::strerror(errno));
    sent += static_cast<size_t>(n);
  }
  size_t newline;
  while ((newline = buffer_.find('\n')) == std::string::npos) {
    char chunk[65536];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n == 0) Fail("connection closed by peer");
    if (n < 0) Fail(std::string("receive failed: ") + std::strerror(errno));
    buffer_.append(chunk, static_cast<size_t>(n));
  }
  const std::string reply = buffer_.substr(0, newline);
  buffer_.erase(0, newline + 1);
  json response;
  try {
    response = json::parse(reply);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kProtocol,
                std::string("bridge sent malformed JSON: ") + e.what());
  }
  if (!response.is_object()) {
    throw Error(ErrorCode::kProtocol, "bridge response is not an object");
  }
  if (response.contains("error")) {
    const json &e = response["error"];
    throw Error(ErrorCode::kProtocol,
                "bridge error: " +
                    (e.is_string() ? e.get<std::string>() : e.dump()));
  }
  return response;
}

}  // namespace k2t
