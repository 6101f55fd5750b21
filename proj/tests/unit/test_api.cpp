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

#include <gtest/gtest.h>
#include <httplib.h>

#include "sb/api.hpp"

using namespace sb;
using namespace sb::autonomic;

namespace {

constexpr Tick kFaultAt = 1500;

RuntimeConfig manual_config()
{
    auto cfg = default_runtime_config();
    for (auto& a : cfg.actors)
        if (a.actor_id == "maint-hvac") {
            a.ack_delay.reset();
            a.resolve_delay.reset();
        }
    return cfg;
}

sim::ScenarioScript bias()
{
    return json{{"events",
                 {{{"tick", kFaultAt},
                   {"kind", "FaultInjection"},
                   {"target", "chiller.supply_temp"},
                   {"parameters", {{"mode", "bias"}, {"offset", 9.0}}}}}}}
        .get<sim::ScenarioScript>();
}

struct SseEvent {
    std::uint64_t id = 0;
    std::string type;
    json data;
};

/// Reads `count` server-sent events, optionally resuming after `last_id`.
std::vector<SseEvent> read_sse(int port, std::size_t count, std::optional<std::uint64_t> last_id)
{
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(5);
    httplib::Headers headers;
    if (last_id)
        headers.emplace("Last-Event-ID", std::to_string(*last_id));
    std::string buffer;
    std::vector<SseEvent> out;
    cli.Get("/stream", headers, [&](const char* data, std::size_t len) {
        buffer.append(data, len);
        for (std::size_t end; out.size() < count && (end = buffer.find("\n\n")) != std::string::npos;) {
            const auto frame = buffer.substr(0, end);
            buffer.erase(0, end + 2);
            if (frame.rfind(":", 0) == 0)
                continue;  // keepalive
            SseEvent ev;
            std::istringstream lines(frame);
            for (std::string line; std::getline(lines, line);) {
                if (line.rfind("id: ", 0) == 0)
                    ev.id = std::stoull(line.substr(4));
                else if (line.rfind("event: ", 0) == 0)
                    ev.type = line.substr(7);
                else if (line.rfind("data: ", 0) == 0)
                    ev.data = json::parse(line.substr(6));
            }
            out.push_back(std::move(ev));
        }
        return out.size() < count;
    });
    return out;
}

}  // namespace

TEST(Address, ParsesHostPort)
{
    EXPECT_EQ(iface::parse_address("127.0.0.1:8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
    EXPECT_THROW(iface::parse_address("localhost"), ValidationError);
    EXPECT_THROW(iface::parse_address(":80"), ValidationError);
    EXPECT_THROW(iface::parse_address("h:99999"), ValidationError);
    EXPECT_THROW(iface::parse_address("h:8o"), ValidationError);
}

class Api : public ::testing::Test {
protected:
    static void SetUpTestSuite()
    {
        building = new Building(manual_config(), bias());
        building->run(kFaultAt + 20);
        server = new iface::ApiServer(*building);
        port = server->start("127.0.0.1", 0);
    }
    static void TearDownTestSuite()
    {
        delete server;
        delete building;
    }

    static std::string hvac_ticket()
    {
        for (const auto& t : building->tickets())
            if (t.actor_id == "maint-hvac")
                return t.ticket_id;
        return {};
    }

    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }

    static Building* building;
    static iface::ApiServer* server;
    static int port;
};

Building* Api::building = nullptr;
iface::ApiServer* Api::server = nullptr;
int Api::port = 0;

TEST_F(Api, StatusCarriesVersionAndMode)
{
    auto cli = client();
    const auto res = cli.Get("/status");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("X-Api-Version"), iface::kApiVersion);
    EXPECT_EQ(json::parse(res->body).at("mode"), "Interfacing");
}

TEST_F(Api, ReportsAndUnknownReport)
{
    auto cli = client();
    const auto names = json::parse(cli.Get("/reports")->body);
    EXPECT_EQ(names.size(), Building::report_names().size());
    EXPECT_EQ(cli.Get("/reports/energy")->status, 200);
    const auto res = cli.Get("/reports/weather");
    EXPECT_EQ(res->status, 404);
    EXPECT_EQ(json::parse(res->body).at("error"), "NotFound");
}

TEST_F(Api, EventsFilterByStatus)
{
    auto cli = client();
    const auto all = json::parse(cli.Get("/events")->body);
    const auto open = json::parse(cli.Get("/events?status=open")->body);
    EXPECT_FALSE(all.empty());
    EXPECT_LE(open.size(), all.size());
    for (const auto& e : open)
        EXPECT_EQ(e.at("status"), "open");
}

TEST_F(Api, MutationsNeedActor)
{
    auto cli = client();
    const auto res = cli.Post("/tickets/" + hvac_ticket() + "/ack", "", "application/json");
    EXPECT_EQ(res->status, 401);
    EXPECT_EQ(json::parse(res->body).at("error"), "Unauthenticated");
}

TEST_F(Api, BadBodiesAre400)
{
    auto cli = client();
    httplib::Headers h{{"X-Actor-Id", "tenants"}};
    EXPECT_EQ(cli.Post("/tenant/comfort", h, "[1,2]", "application/json")->status, 400);
    EXPECT_EQ(cli.Post("/tenant/comfort", h, R"({"zone_id":"zone01"})", "application/json")->status, 400);
    EXPECT_EQ(cli.Post("/tenant/comfort", h, R"({"zone_id":"zone01","min":10,"max":30})", "application/json")->status,
              400);
    EXPECT_EQ(cli.Post("/tenant/comfort", h, R"({"zone_id":"zone01","min":21.5,"max":24})", "application/json")
                  ->status,
              200);
}

TEST_F(Api, RetriedRequestIdIsReplayedNotReapplied)
{
    const auto id = hvac_ticket();
    ASSERT_FALSE(id.empty());
    auto cli = client();
    httplib::Headers h{{"X-Actor-Id", "maint-hvac"}, {"X-Request-Id", "req-ack-1"}};
    const auto first = cli.Post("/tickets/" + id + "/ack", h, "", "application/json");
    ASSERT_EQ(first->status, 200);
    EXPECT_FALSE(first->has_header("X-Idempotent-Replay"));
    const auto retry = cli.Post("/tickets/" + id + "/ack", h, "", "application/json");
    EXPECT_EQ(retry->status, 200);
    EXPECT_EQ(retry->get_header_value("X-Idempotent-Replay"), "true");
    EXPECT_EQ(retry->body, first->body);
    // A fresh request id applies again and is refused: already acknowledged.
    httplib::Headers fresh{{"X-Actor-Id", "maint-hvac"}, {"X-Request-Id", "req-ack-2"}};
    EXPECT_EQ(cli.Post("/tickets/" + id + "/ack", fresh, "", "application/json")->status, 409);

    httplib::Headers resolve{{"X-Actor-Id", "maint-hvac"}};
    EXPECT_EQ(cli.Post("/tickets/" + id + "/resolve", resolve, R"({"resolution":"sideways"})", "application/json")
                  ->status,
              400);
    EXPECT_EQ(cli.Post("/tickets/" + id + "/resolve", resolve, R"({"resolution":"repaired"})", "application/json")
                  ->status,
              200);
    EXPECT_EQ(cli.Post("/tickets/tk-999999/ack", resolve, "", "application/json")->status, 404);
}

TEST_F(Api, StreamResumesFromLastEventId)
{
    const auto first = read_sse(port, 5, std::nullopt);
    ASSERT_EQ(first.size(), 5u);
    for (std::size_t i = 1; i < first.size(); ++i)
        EXPECT_GT(first[i].id, first[i - 1].id);
    EXPECT_FALSE(first.front().type.empty());
    EXPECT_TRUE(first.front().data.is_object());
    const auto resumed = read_sse(port, 2, first[2].id);
    ASSERT_EQ(resumed.size(), 2u);
    EXPECT_EQ(resumed[0].id, first[3].id);
    EXPECT_EQ(resumed[1].id, first[4].id);
}

TEST_F(Api, StreamRejectsMalformedCursor)
{
    auto cli = client();
    EXPECT_EQ(cli.Get("/stream?after=abc")->status, 400);
}
