// Copyright 2026 The TLR Authors
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

/// \file
/// JSON-over-HTTP front end of a CurationSession, rooted at /api/v1.
#pragma once

#include <memory>
#include <string>

#include "tlr/curation.hpp"

namespace tlr {

class CurationServer {
 public:
  explicit CurationServer(CurationSession& session);
  ~CurationServer();
  CurationServer(const CurationServer&) = delete;
  CurationServer& operator=(const CurationServer&) = delete;

  /// Binds without serving. Port 0 picks a free one; returns the bound port.
  /// Throws IoError when the address cannot be bound.
  int bind(const std::string& host, int port);
  /// Serves on the bound socket until stop(). Blocks.
  void serve();
  /// bind() then serve() on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tlr
