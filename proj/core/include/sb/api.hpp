// Copyright 2026 The smartbuilding Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <memory>
#include <string>

#include "sb/building.hpp"

namespace sb::iface {

inline constexpr const char* kApiVersion = "1";

/// "host:port" split; throws ValidationError on malformed input.
std::pair<std::string, int> parse_address(const std::string& addr);

/// HTTP/JSON front end over a running Building. Endpoints:
///   GET  /status, /events[?status=open], /tickets, /reports/{name}
///   GET  /stream           server-sent events, resumable via Last-Event-ID
///   POST /tickets/{id}/ack, /tickets/{id}/resolve {"resolution"}
///   POST /commission, /commission/waive {"point_id"}
///   POST /tenant/comfort {"zone_id", "min", "max"}
/// Mutations need X-Actor-Id; X-Request-Id makes a retried POST return the
/// first response without re-applying it.
class ApiServer {
public:
    explicit ApiServer(autonomic::Building& building);
    ~ApiServer();

    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free port.
    /// Returns the bound port.
    int start(const std::string& host, int port);
    void stop();
    [[nodiscard]] bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sb::iface
