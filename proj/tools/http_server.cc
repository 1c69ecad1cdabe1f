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

#include "http_server.h"

#include <cstdint>
#include <string>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "sgir/error.h"

namespace sgir {

namespace {

constexpr const char* kJson = "application/json";

void Reply(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

// Maps ApiError to its status and anything else to 500.
template <typename Fn>
void Guarded(httplib::Response& res, Fn&& fn) {
  try {
    Reply(res, 200, fn());
  } catch (const ApiError& e) {
    Reply(res, e.status(), e.ToJson());
  } catch (const std::exception& e) {
    spdlog::error("request failed: {}", e.what());
    Reply(res, 500, ApiError(500, e.what()).ToJson());
  }
}

}  // namespace

struct HttpServer::Impl {
  std::shared_ptr<const QueryService> service;
  httplib::Server server;
};

HttpServer::HttpServer(std::shared_ptr<const QueryService> service)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  const QueryService* svc = impl_->service.get();
  httplib::Server& s = impl_->server;
  // SO_REUSEADDR only, so binding a busy port fails.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
               reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  s.Get("/api/health", [svc](const httplib::Request&, httplib::Response& res) {
    Guarded(res, [&] { return svc->Health(); });
  });
  s.Get("/api/vocab", [svc](const httplib::Request&, httplib::Response& res) {
    Guarded(res, [&] { return svc->Vocab(); });
  });
  s.Post("/api/query", [svc](const httplib::Request& req,
                             httplib::Response& res) {
    Guarded(res, [&] { return svc->QueryText(req.body); });
  });
  s.Get(R"(/api/record/([^/]+))",
        [svc](const httplib::Request& req, httplib::Response& res) {
          Guarded(res, [&] {
            const std::string token = req.matches[1];
            std::uint64_t id = 0;
            std::size_t used = 0;
            try {
              id = std::stoull(token, &used);
            } catch (const std::exception&) {
              used = 0;
            }
            if (used == 0 || used != token.size() || token[0] == '-') {
              throw ApiError(400, "record id must be a non-negative integer",
                             "id", token);
            }
            return svc->Record(id);
          });
        });
  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      res.set_content(ApiError(404, "no route for " + req.path).ToJson().dump(),
                      kJson);
    }
  });
  s.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info("{} {} -> {}", req.method, req.path, res.status);
  });
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    throw Error(ErrorCode::kIo,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::Listen() { impl_->server.listen_after_bind(); }

void HttpServer::Stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace sgir
