// Copyright 2026 The SGIR Authors.
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

#ifndef SGIR_TOOLS_HTTP_SERVER_H_
#define SGIR_TOOLS_HTTP_SERVER_H_

#include <memory>
#include <string>

#include "sgir/service.h"

namespace sgir {

// JSON endpoints over a QueryService:
//   GET /api/vocab, POST /api/query, GET /api/record/{id}, GET /api/health
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<const QueryService> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds `host`; port 0 picks a free port. Returns the bound port.
  // Throws Io when binding fails.
  int Bind(const std::string& host, int port);
  // Serves until Stop(). Call after Bind().
  void Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sgir

#endif  // SGIR_TOOLS_HTTP_SERVER_H_
