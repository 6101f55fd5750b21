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

// sbctl: scenario runner and thin client for the building API.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "sb/api.hpp"
#include "sb/building.hpp"

namespace fs = std::filesystem;
using sb::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInvalid = 3;
constexpr int kExitUnreachable = 4;
constexpr int kExitRejected = 5;

std::atomic<bool> g_interrupted{false};

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw sb::NotFoundError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        std::string what = e.what();
        for (auto pos = what.find("; "); pos != std::string::npos; pos = what.find("; "))
            what.replace(pos, 2, ", ");
        throw sb::ValidationError(path + ": " + what);
    }
}

void print_errors(const std::string& what, const std::string& joined)
{
    std::cerr << what << " is invalid:\n";
    std::size_t start = 0;
    while (start <= joined.size()) {
        const auto end = joined.find("; ", start);
        std::cerr << "  - " << joined.substr(start, end - start) << "\n";
        if (end == std::string::npos)
            break;
        start = end + 2;
    }
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::trunc);
    out << text;
}

struct RunOptions {
    std::string config;
    std::string scenario;
    sb::Tick ticks = 0;
    double speed = 0.0;  // ticks per second, 0 = unpaced
    std::string out = "run";
    std::string api_addr;
    bool serve = false;
};

int cmd_run(const RunOptions& o)
{
    // Everything is validated before the artifacts directory is touched.
    sb::autonomic::RuntimeConfig config;
    sb::sim::ScenarioScript scenario;
    try {
        if (o.config.empty()) {
            config = sb::autonomic::default_runtime_config();
        } else {
            auto doc = read_json_file(o.config);
            const auto base = fs::path(o.config).parent_path();
            if (doc.contains("legacy") && doc["legacy"].contains("feed")) {
                const fs::path feed = doc["legacy"]["feed"].get<std::string>();
                if (feed.is_relative())
                    doc["legacy"]["feed"] = (base / feed).string();
            }
            config = sb::autonomic::load_runtime_config(doc);
        }
    } catch (const sb::Error& e) {
        print_errors("configuration", e.what());
        return kExitInvalid;
    }
    try {
        if (!o.scenario.empty())
            scenario = read_json_file(o.scenario).get<sb::sim::ScenarioScript>();
    } catch (const std::exception& e) {
        print_errors("scenario", e.what());
        return kExitInvalid;
    }
    if (const auto errors = scenario.validation_errors(config.building); !errors.empty()) {
        std::string joined;
        for (const auto& e : errors)
            joined += (joined.empty() ? "" : "; ") + e;
        print_errors("scenario", joined);
        return kExitInvalid;
    }
    std::pair<std::string, int> addr;
    if (!o.api_addr.empty()) {
        try {
            addr = sb::iface::parse_address(o.api_addr);
        } catch (const sb::Error& e) {
            std::cerr << e.what() << "\n";
            return kExitUsage;
        }
    }

    const fs::path out = o.out;
    std::unique_ptr<sb::autonomic::Building> building;
    try {
        building = std::make_unique<sb::autonomic::Building>(config, scenario, out.string());
    } catch (const sb::Error& e) {
        std::cerr << "startup failed: " << e.what() << "\n";
        return kExitInvalid;
    }
    std::unique_ptr<sb::iface::ApiServer> api;
    if (!o.api_addr.empty()) {
        api = std::make_unique<sb::iface::ApiServer>(*building);
        try {
            const int port = api->start(addr.first, addr.second);
            std::cout << "api listening on " << addr.first << ":" << port << std::endl;
        } catch (const sb::Error& e) {
            std::cerr << e.what() << "\n";
            return kExitUnreachable;
        }
    }

    const auto start = std::chrono::steady_clock::now();
    const auto first = building->tick();
    for (sb::Tick i = 0; i < o.ticks && !g_interrupted; ++i) {
        building->step();
        if (o.speed > 0.0)
            std::this_thread::sleep_until(start + std::chrono::duration<double>((i + 1) / o.speed));
    }

    const auto summary = building->summary();
    write_text(out / "summary.json", summary.dump(2) + "\n");
    {
        std::ofstream j(out / "journal.jsonl", std::ios::trunc);
        for (const auto& rec : building->journal())
            j << rec.dump() << "\n";
    }
    write_text(out / "events.json", building->describe("events").dump(2) + "\n");
    write_text(out / "tickets.json", building->describe("tickets").dump(2) + "\n");
    write_text(out / "commands.json", json(building->commands()).dump(2) + "\n");
    std::cout << "ran ticks " << first << ".." << building->tick() << " mode "
              << summary["final_mode"].get<std::string>() << " events " << summary["events"].size() << " tickets "
              << summary["tickets"].size() << " -> " << out.string() << std::endl;

    if (api && o.serve) {
        std::cout << "serving until interrupted" << std::endl;
        while (!g_interrupted)
            std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
    return kExitOk;
}

int cmd_validate(const std::string& config_path, const std::string& scenario_path)
{
    try {
        auto config = config_path.empty() ? sb::autonomic::default_runtime_config()
                                          : sb::autonomic::load_runtime_config(read_json_file(config_path));
        if (!scenario_path.empty()) {
            const auto s = read_json_file(scenario_path).get<sb::sim::ScenarioScript>();
            std::string joined;
            for (const auto& e : s.validation_errors(config.building))
                joined += (joined.empty() ? "" : "; ") + e;
            if (!joined.empty()) {
                print_errors("scenario", joined);
                return kExitInvalid;
            }
        }
    } catch (const std::exception& e) {
        print_errors("configuration", e.what());
        return kExitInvalid;
    }
    std::cout << "ok\n";
    return kExitOk;
}

// Client side

struct ClientOptions {
    std::string api_addr = "127.0.0.1:8080";
    std::string actor;
    std::string request_id;
    bool raw = false;
};

std::string new_request_id()
{
    std::random_device rd;
    std::uniform_int_distribution<std::uint64_t> dist;
    char buf[40];
    std::snprintf(buf, sizeof buf, "req-%016llx", static_cast<unsigned long long>(dist(rd)));
    return buf;
}

int call(const ClientOptions& o, const std::string& method, const std::string& path, const json& body = nullptr)
{
    std::pair<std::string, int> addr;
    try {
        addr = sb::iface::parse_address(o.api_addr);
    } catch (const sb::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }
    httplib::Client cli(addr.first, addr.second);
    cli.set_connection_timeout(std::chrono::seconds(3));
    httplib::Headers headers;
    if (!o.actor.empty())
        headers.emplace("X-Actor-Id", o.actor);
    httplib::Result res;
    if (method == "GET") {
        res = cli.Get(path, headers);
    } else {
        headers.emplace("X-Request-Id", o.request_id.empty() ? new_request_id() : o.request_id);
        res = cli.Post(path, headers, body.is_null() ? std::string{"{}"} : body.dump(), "application/json");
    }
    if (!res) {
        std::cerr << "cannot reach the building API at " << o.api_addr << " (" << httplib::to_string(res.error())
                  << ").\nStart one with `sbctl run --api-addr " << o.api_addr
                  << " --serve` or point --api-addr / SB_API_ADDR at a running instance, then retry.\n";
        return kExitUnreachable;
    }
    const auto doc = json::parse(res->body, nullptr, false);
    if (res->status >= 400) {
        std::cerr << "error " << res->status << ": "
                  << (doc.is_object() ? doc.value("message", res->body) : res->body) << "\n";
        return res->status == 409 || res->status == 401 ? kExitRejected : kExitInvalid;
    }
    if (o.raw || doc.is_discarded())
        std::cout << res->body << "\n";
    else
        std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

void on_signal(int) { g_interrupted = true; }

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"sbctl: run the autonomic building and operate it through its API"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->envname("SB_LOG_LEVEL");

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write artifacts");
    run_cmd->add_option("--config", run.config, "Runtime configuration JSON (default: reference building)")
        ->envname("SB_CONFIG");
    run_cmd->add_option("--scenario", run.scenario, "Scenario script JSON")->envname("SB_SCENARIO");
    run_cmd->add_option("--ticks", run.ticks, "Ticks to simulate")->envname("SB_TICKS")->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--speed", run.speed, "Ticks per wall-clock second; 0 runs unpaced")
        ->envname("SB_SPEED")
        ->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--out", run.out, "Artifacts directory (resumed when it exists)")->envname("SB_OUT");
    run_cmd->add_option("--api-addr", run.api_addr, "Serve the HTTP API on host:port")->envname("SB_API_ADDR");
    run_cmd->add_flag("--serve", run.serve, "Keep serving the API after the run until interrupted");

    std::string validate_config, validate_scenario;
    auto* validate_cmd = app.add_subcommand("validate", "Check a configuration and scenario without running");
    validate_cmd->add_option("--config", validate_config)->envname("SB_CONFIG");
    validate_cmd->add_option("--scenario", validate_scenario)->envname("SB_SCENARIO");

    auto* defaults_cmd = app.add_subcommand("defaults", "Print the default runtime configuration");

    ClientOptions client;
    const auto client_flags = [&](CLI::App* c, bool mutating) {
        c->add_option("--api-addr", client.api_addr, "API host:port")->envname("SB_API_ADDR");
        c->add_flag("--raw", client.raw, "Print the response body unformatted");
        if (mutating) {
            c->add_option("--actor", client.actor, "Actor identity (X-Actor-Id)")->envname("SB_ACTOR")->required();
            c->add_option("--request-id", client.request_id, "Idempotency key; reuse it when retrying");
        }
    };

    auto* status_cmd = app.add_subcommand("status", "Current mode and counters");
    client_flags(status_cmd, false);
    std::string report_name;
    auto* report_cmd = app.add_subcommand("report", "Self-description report");
    report_cmd->add_option("name", report_name, "status, energy, events, tickets, devices, modes, commissioning, "
                                                "schedules, ocx")
        ->required();
    client_flags(report_cmd, false);
    bool open_only = false;
    auto* events_cmd = app.add_subcommand("events", "Change events");
    events_cmd->add_flag("--open", open_only, "Only unresolved events");
    client_flags(events_cmd, false);
    auto* tickets_cmd = app.add_subcommand("tickets", "Action tickets");
    client_flags(tickets_cmd, false);

    std::string ticket_id, resolution, point_id, zone_id;
    double band_min = 0.0, band_max = 0.0;
    auto* ack_cmd = app.add_subcommand("ack", "Acknowledge a ticket");
    ack_cmd->add_option("ticket", ticket_id)->required();
    client_flags(ack_cmd, true);
    auto* resolve_cmd = app.add_subcommand("resolve", "Resolve a ticket");
    resolve_cmd->add_option("ticket", ticket_id)->required();
    resolve_cmd->add_option("resolution", resolution, "repaired, equipment-changed or waived")->required();
    client_flags(resolve_cmd, true);
    auto* commission_cmd = app.add_subcommand("commission", "Start or inspect commissioning");
    client_flags(commission_cmd, true);
    auto* waive_cmd = app.add_subcommand("waive", "Waive a failed commissioning item");
    waive_cmd->add_option("point", point_id)->required();
    client_flags(waive_cmd, true);
    auto* comfort_cmd = app.add_subcommand("comfort", "Request a zone comfort band");
    comfort_cmd->add_option("zone", zone_id)->required();
    comfort_cmd->add_option("min", band_min)->required();
    comfort_cmd->add_option("max", band_max)->required();
    client_flags(comfort_cmd, true);
    std::size_t stream_count = 0;
    std::uint64_t stream_after = 0;
    auto* stream_cmd = app.add_subcommand("stream", "Follow the server-sent event stream");
    stream_cmd->add_option("--count", stream_count, "Stop after this many events (0 = follow)");
    stream_cmd->add_option("--after", stream_after, "Resume after this event id");
    client_flags(stream_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    if (*run_cmd)
        return cmd_run(run);
    if (*defaults_cmd) {
        std::cout << to_json(sb::autonomic::default_runtime_config()).dump(2) << "\n";
        return kExitOk;
    }
    if (*validate_cmd)
        return cmd_validate(validate_config, validate_scenario);
    if (*status_cmd)
        return call(client, "GET", "/status");
    if (*report_cmd)
        return call(client, "GET", "/reports/" + report_name);
    if (*events_cmd)
        return call(client, "GET", open_only ? "/events?status=open" : "/events");
    if (*tickets_cmd)
        return call(client, "GET", "/tickets");
    if (*ack_cmd)
        return call(client, "POST", "/tickets/" + ticket_id + "/ack");
    if (*resolve_cmd)
        return call(client, "POST", "/tickets/" + ticket_id + "/resolve", json{{"resolution", resolution}});
    if (*commission_cmd)
        return call(client, "POST", "/commission");
    if (*waive_cmd)
        return call(client, "POST", "/commission/waive", json{{"point_id", point_id}});
    if (*comfort_cmd)
        return call(client, "POST", "/tenant/comfort", json{{"zone_id", zone_id}, {"min", band_min}, {"max", band_max}});
    if (*stream_cmd) {
        const auto [host, port] = sb::iface::parse_address(client.api_addr);
        httplib::Client cli(host, port);
        cli.set_read_timeout(std::chrono::hours(24));
        std::size_t seen = 0;
        std::string buffer;
        httplib::Headers headers{{"Last-Event-ID", std::to_string(stream_after)}};
        auto res = cli.Get("/stream", headers, [&](const char* data, std::size_t len) {
            buffer.append(data, len);
            for (auto pos = buffer.find("\n\n"); pos != std::string::npos; pos = buffer.find("\n\n")) {
                const auto frame = buffer.substr(0, pos);
                buffer.erase(0, pos + 2);
                if (frame.rfind(":", 0) == 0)
                    continue;
                std::cout << frame << "\n\n" << std::flush;
                if (stream_count && ++seen >= stream_count)
                    return false;
            }
            return !g_interrupted.load();
        });
        if (!res && res.error() != httplib::Error::Canceled) {
            std::cerr << "cannot reach the building API at " << client.api_addr << "; retry once it is running\n";
            return kExitUnreachable;
        }
        return kExitOk;
    }
    return kExitUsage;
}
