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

// Demo scenario: a chiller fault followed one tick later by a mains outage,
// checked behavior by behavior and against the golden journal.
//
//   acceptance_scenario_golden --regenerate   rewrites the golden file

#include <cstring>

#include "report.hpp"
#include "sb/building.hpp"

using namespace sb;
using namespace sb::autonomic;

namespace {

constexpr Tick kTicks = 5200;
const char* kGolden = "tests/golden/demo_journal.jsonl";

bool has(const std::vector<json>& journal, const json& pattern)
{
    return std::any_of(journal.begin(), journal.end(), [&](const json& rec) {
        for (const auto& [k, v] : pattern.items())
            if (!rec.contains(k) || rec[k] != v)
                return false;
        return true;
    });
}

std::optional<json> first(const std::vector<json>& journal, const json& pattern)
{
    for (const auto& rec : journal) {
        bool ok = true;
        for (const auto& [k, v] : pattern.items())
            ok = ok && rec.contains(k) && rec[k] == v;
        if (ok)
            return std::optional<json>(std::in_place, rec);
    }
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv)
{
    const bool regenerate = argc > 1 && std::strcmp(argv[1], "--regenerate") == 0;
    acceptance::Report report("scenario_golden");
    acceptance::Stopwatch clock;

    const auto script =
        acceptance::load_json(acceptance::source_path("config/scenarios/demo.json")).get<sim::ScenarioScript>();
    const Tick fault_at = script.events.at(0).tick;
    acceptance::TempDir dir("sb-acc-demo");
    Building b(default_runtime_config(), script, dir.str());
    b.run(kTicks);
    const auto journal = b.journal();
    const auto history = replay(journal);

    // Chiller fault at t, outage at t + 1, both faults.
    const auto chiller_ev = first(journal, {{"type", "event"}, {"system", "chiller"}, {"kind", "Fault"}});
    const auto mains_ev = first(journal, {{"type", "event"}, {"system", "mains"}, {"kind", "Fault"}});
    report.check("faults_detected", chiller_ev && mains_ev && (*chiller_ev)["tick"] == fault_at &&
                                        (*mains_ev)["tick"] == fault_at + 1,
                 chiller_ev && mains_ev ? "chiller @" + (*chiller_ev)["tick"].dump() + ", mains @" +
                                              (*mains_ev)["tick"].dump()
                                        : "missing");

    report.check("chiller_maintenance_ticket",
                 has(journal, {{"type", "ticket"}, {"status", "Dispatched"}, {"system", "chiller"},
                               {"actor_id", "maint-hvac"}, {"tick", fault_at}}));

    const auto commands = b.commands();
    const bool gen_start = std::any_of(commands.begin(), commands.end(), [](const ActuatorCommand& c) {
        return c.actuator_id == "generator" && c.verb == "start";
    });
    const auto start_rec = first(journal, {{"type", "command"}, {"actuator", "generator"}, {"verb", "Start"}});
    const auto first_power_ticket = first(journal, {{"type", "ticket"}, {"status", "Dispatched"}, {"system", "mains"}});
    bool start_before_tickets = false;
    if (start_rec && first_power_ticket) {
        const auto pos = [&](const json& r) { return std::find(journal.begin(), journal.end(), r) - journal.begin(); };
        start_before_tickets = pos(*start_rec) < pos(*first_power_ticket);
    }
    report.check("generator_start_command", gen_start && start_rec && start_before_tickets &&
                                                (*start_rec)["tick"] == fault_at + 1,
                 "self-healing command precedes the outage tickets");

    const bool notified = has(journal, {{"type", "ticket"}, {"actor_id", "maint-power"}, {"verb", "RestoreMains"}}) &&
                          has(journal, {{"type", "ticket"}, {"actor_id", "smart-grid"}, {"verb", "ReportOutage"}}) &&
                          has(journal, {{"type", "ticket"}, {"actor_id", "tenants"}, {"verb", "NotifyOutage"}}) &&
                          has(journal, {{"type", "ticket"}, {"actor_id", "manager"}, {"verb", "NotifyOutage"}});
    report.check("power_grid_tenant_notifications", notified);

    // Detection kept running while the building was in Interfacing.
    std::size_t during = 0;
    for (const auto& rec : journal)
        if (rec["type"] == "event" && mode_at(history, rec["tick"].get<Tick>() - 1) == Mode::Interfacing)
            ++during;
    report.check("monitoring_continues_during_interfacing",
                 mains_ev && mode_at(history, fault_at) == Mode::Interfacing && during >= 1,
                 std::to_string(during) + " events detected while Interfacing");

    const auto closed = first(journal, {{"type", "concern"}, {"system", "chiller"}, {"status", "closed"}});
    const auto reopt = first(journal, {{"type", "optimization"}, {"system", "chiller"}, {"reason", "repair"},
                                       {"status", "Optimal"}});
    report.check("post_repair_reoptimization", closed && reopt && (*reopt)["tick"] > (*closed)["tick"] &&
                                                   has(journal, {{"type", "transition"},
                                                                 {"stimulus", "FaultResolvedNoEquipChange"}}),
                 closed ? "concern closed @" + (*closed)["tick"].dump() : "concern open");

    const auto ocx = first(journal, {{"type", "ocx"}, {"status", "closed"}, {"system", "chiller"}, {"trigger", "repair"}});
    std::size_t ocx_baselines = 0;
    for (const auto& a : b.bkr().baseline_archive())
        if (a.value("provenance", std::string{}) == "OCx" && a.value("point_id", std::string{}).rfind("chiller.", 0) == 0)
            ++ocx_baselines;
    report.check("ocx_baseline_update", ocx && ocx_baselines > 0 && b.mode() == Mode::DetectingChange,
                 std::to_string(ocx_baselines) + " chiller baselines with OCx provenance, final mode " +
                     to_string(b.mode()));

    // Golden comparison on the stable projection of every record.
    std::vector<std::string> projected;
    for (const auto& rec : journal)
        projected.push_back(golden_projection(rec).dump());
    const auto golden_path = acceptance::source_path(kGolden);
    if (regenerate) {
        std::ofstream out(golden_path, std::ios::trunc);
        for (const auto& line : projected)
            out << line << "\n";
        std::cout << "wrote " << projected.size() << " records to " << golden_path << std::endl;
    }
    std::vector<std::string> golden;
    {
        std::ifstream in(golden_path);
        for (std::string line; std::getline(in, line);)
            if (!line.empty())
                golden.push_back(line);
    }
    std::size_t first_diff = 0;
    while (first_diff < golden.size() && first_diff < projected.size() && golden[first_diff] == projected[first_diff])
        ++first_diff;
    const bool same = !golden.empty() && golden.size() == projected.size() && first_diff == golden.size();
    report.check("golden_journal_match", same,
                 same ? std::to_string(golden.size()) + " records"
                      : "first difference at record " + std::to_string(first_diff) + " (golden " +
                            std::to_string(golden.size()) + ", run " + std::to_string(projected.size()) + ")");

    const auto elapsed = clock.seconds();
    report.check("runtime_under_2min", elapsed < 120.0, acceptance::fmt_double(elapsed, 2) + " s");
    return report.exit_code();
}
