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

#include "k2t/error.h"

namespace k2t {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kVerifier: return "verifier";
    case ErrorCode::kNotTrained: return "not_trained";
    case ErrorCode::kUnregistered: return "unregistered";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kBalance: return "balance";
    case ErrorCode::kCoverage: return "coverage";
  }
  return "unknown";
}

}  // namespace k2t
