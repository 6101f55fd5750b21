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

#include "sb/api.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace sb::iface {

std::pair<std::string, int> parse_address(const std::string& addr)
{
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size())
        throw ValidationError("address '" + addr + "' must be host:port");
    try {
        std::size_t used = 0;
        const int port = std::stoi(addr.substr(colon + 1), &used);
        if (used != addr.size() - colon - 1 || port < 0 || port > 65535)
            throw std::out_of_range("port");
        return {addr.substr(0, colon), port};
    } catch (const std::logic_error&) {
        throw ValidationError("address '" + addr + "' has an invalid port");
    }
}

namespace {

void reply(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_header("X-Api-Version", kApiVersion);
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& kind, const std::string& message)
{
    reply(res, status, json{{"error", kind}, {"message", message}});
}

}  // namespace

struct ApiServer::Impl {
    explicit Impl(autonomic::Building& b) : building(b) {}

    autonomic::Building& building;
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> stopping{false};
    std::mutex idem_mu;
    std::map<std::string, std::pair<int, std::string>> idem;  // request id -> response

    using Handler = std::function<json(const httplib::Request&, const std::string& actor)>;

    // Runs a mutation once per X-Request-Id and maps errors to status codes.
    void mutate(const httplib::Request& req, httplib::Response& res, const Handler& fn)
    {
        const auto request_id = req.get_header_value("X-Request-Id");
        std::unique_lock lk(idem_mu);
        if (!request_id.empty()) {
            if (const auto it = idem.find(request_id); it != idem.end()) {
                res.status = it->second.first;
                res.set_header("X-Api-Version", kApiVersion);
                res.set_header("X-Idempotent-Replay", "true");
                res.set_content(it->second.second, "application/json");
                return;
            }
        }
        const auto actor = req.get_header_value("X-Actor-Id");
        if (actor.empty())
            reply_error(res, 401, "Unauthenticated", "X-Actor-Id header required");
        else
            guarded(res, [&] { reply(res, 200, fn(req, actor)); });
        if (!request_id.empty())
            idem[request_id] = {res.status, res.body};
    }

    template <class F>
    static void guarded(httplib::Response& res, F&& f)
    {
        try {
            f();
        } catch (const ValidationError& e) {
            reply_error(res, 400, "ValidationError", e.what());
        } catch (const NotFoundError& e) {
            reply_error(res, 404, "NotFound", e.what());
        } catch (const RejectedError& e) {
            reply_error(res, 409, "Rejected", e.what());
        } catch (const ConflictError& e) {
            reply_error(res, 409, "Conflict", e.what());
        } catch (const json::exception& e) {
            reply_error(res, 400, "ValidationError", e.what());
        } catch (const std::exception& e) {
            reply_error(res, 500, "InternalError", e.what());
        }
    }

    static json body_of(const httplib::Request& req)
    {
        if (req.body.empty())
            return json::object();
        auto j = json::parse(req.body, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw ValidationError("request body must be a JSON object");
        return j;
    }

    void routes()
    {
        auto get = [this](const std::string& pattern, std::function<json(const httplib::Request&)> fn) {
            server.Get(pattern, [fn](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] { reply(res, 200, fn(req)); });
            });
        };
        get("/status", [this](const httplib::Request&) { return building.describe("status"); });
        get("/events", [this](const httplib::Request& req) {
            auto all = building.describe("events");
            if (!req.has_param("status"))
                return all;
            json out = json::array();
            for (auto& e : all)
                if (e["status"] == req.get_param_value("status"))
                    out.push_back(std::move(e));
            return out;
        });
        get("/tickets", [this](const httplib::Request&) { return building.describe("tickets"); });
        get(R"(/reports/([A-Za-z_\-]+))", [this](const httplib::Request& req) {
            return building.describe(req.matches[1].str());
        });
        get("/reports", [](const httplib::Request&) { return json(autonomic::Building::report_names()); });

        server.Post(R"(/tickets/([A-Za-z0-9_\-]+)/ack)", [this](const httplib::Request& req, httplib::Response& res) {
            mutate(req, res, [this](const httplib::Request& r, const std::string& actor) {
                return building.acknowledge(r.matches[1].str(), actor);
            });
        });
        server.Post(R"(/tickets/([A-Za-z0-9_\-]+)/resolve)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        mutate(req, res, [this](const httplib::Request& r, const std::string& actor) {
                            const auto body = body_of(r);
                            if (!body.contains("resolution"))
                                throw ValidationError("resolution is required");
                            return building.resolve(r.matches[1].str(),
                                                    parse_resolution(body["resolution"].get<std::string>()), actor);
                        });
                    });
        server.Post("/commission", [this](const httplib::Request& req, httplib::Response& res) {
            mutate(req, res, [this](const httplib::Request&, const std::string&) { return building.commission(); });
        });
        server.Post("/commission/waive", [this](const httplib::Request& req, httplib::Response& res) {
            mutate(req, res, [this](const httplib::Request& r, const std::string& actor) {
                return building.waive(body_of(r).at("point_id").get<std::string>(), actor);
            });
        });
        server.Post("/tenant/comfort", [this](const httplib::Request& req, httplib::Response& res) {
            mutate(req, res, [this](const httplib::Request& r, const std::string& actor) {
                const auto body = body_of(r);
                return building.tenant_comfort(body.at("zone_id").get<std::string>(), body.at("min").get<double>(),
                                               body.at("max").get<double>(), actor);
            });
        });

        server.Get("/stream", [this](const httplib::Request& req, httplib::Response& res) {
            std::uint64_t after = 0;
            const auto last = req.has_header("Last-Event-ID") ? req.get_header_value("Last-Event-ID")
                                                              : req.get_param_value("after");
            if (!last.empty()) {
                try {
                    after = std::stoull(last);
                } catch (const std::logic_error&) {
                    reply_error(res, 400, "ValidationError", "Last-Event-ID must be an integer");
                    return;
                }
            }
            res.set_header("Cache-Control", "no-cache");
            res.set_header("X-Api-Version", kApiVersion);
            res.set_chunked_content_provider("text/event-stream", [this, after](std::size_t, httplib::DataSink& sink) mutable {
                if (stopping)
                    return false;
                const auto items = building.stream_after(after, std::chrono::milliseconds(500));
                std::string chunk;
                for (const auto& it : items) {
                    chunk += "id: " + std::to_string(it.seq) + "\nevent: " + it.type + "\ndata: " + it.data.dump() +
                             "\n\n";
                    after = it.seq;
                }
                if (chunk.empty())
                    chunk = ": keepalive\n\n";
                return sink.write(chunk.data(), chunk.size());
            });
        });
    }
};

ApiServer::ApiServer(autonomic::Building& building) : impl_(std::make_unique<Impl>(building)) { impl_->routes(); }

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port)
{
    if (impl_->thread.joinable())
        throw ConflictError("API server already running");
    int bound = port;
    if (port == 0)
        bound = impl_->server.bind_to_any_port(host);
    else if (!impl_->server.bind_to_port(host, port))
        bound = -1;
    if (bound < 0)
        throw UnavailableError("cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    spdlog::info("api: listening on {}:{}", host, bound);
    return bound;
}

void ApiServer::stop()
{
    if (!impl_ || !impl_->thread.joinable())
        return;
    impl_->stopping = true;
    impl_->server.stop();
    impl_->thread.join();
}

bool ApiServer::running() const { return impl_->server.is_running(); }

}  // namespace sb::iface
