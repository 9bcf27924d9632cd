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

#ifndef K2T_TESTING_FAKE_BRIDGE_H_
#define K2T_TESTING_FAKE_BRIDGE_H_

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "k2t/wire.h"

namespace k2t::testing {

// Line-oriented TCP server on 127.0.0.1 with an ephemeral port. The handler
// maps one request line to one reply line; returning std::nullopt closes the
// connection instead of replying.
class FakeBridge {
 public:
  using Handler = std::function<std::optional<std::string>(const std::string &)>;

  explicit FakeBridge(Handler handler);
  ~FakeBridge();

  FakeBridge(const FakeBridge &) = delete;
  FakeBridge &operator=(const FakeBridge &) = delete;

  Endpoint endpoint() const { return Endpoint{"127.0.0.1", port_}; }
  size_t requests() const { return requests_.load(); }
  size_t connections() const { return connections_.load(); }

 private:
  void AcceptLoop();
  void Serve(int fd);

  Handler handler_;
  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
  std::atomic<size_t> requests_{0};
  std::atomic<size_t> connections_{0};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<int> client_fds_;
  std::vector<std::thread> workers_;
};

}  // namespace k2t::testing

#endif  // K2T_TESTING_FAKE_BRIDGE_H_
