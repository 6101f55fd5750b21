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

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sb/bkr.hpp"
#include "sb/cdo.hpp"
#include "sb/message.hpp"

/// Rules-driven dispatch to external actors and the ticket workflow.
namespace sb::iface {

enum class ActorKind { MaintenanceStaff, Tenant, Manager, SmartGrid, OtherBuilding, VehicleService, BackupGenerator };

NLOHMANN_JSON_SERIALIZE_ENUM(ActorKind, {{ActorKind::MaintenanceStaff, "MaintenanceStaff"},
                                         {ActorKind::Tenant, "Tenant"},
                                         {ActorKind::Manager, "Manager"},
                                         {ActorKind::SmartGrid, "SmartGrid"},
                                         {ActorKind::OtherBuilding, "OtherBuilding"},
                                         {ActorKind::VehicleService, "VehicleService"},
                                         {ActorKind::BackupGenerator, "BackupGenerator"}})

enum class TicketStatus { Dispatched, Acknowledged, Resolved };
enum class Resolution { RepairedNoEquipChange, EquipmentChanged, Waived };

NLOHMANN_JSON_SERIALIZE_ENUM(TicketStatus, {{TicketStatus::Dispatched, "Dispatched"},
                                            {TicketStatus::Acknowledged, "Acknowledged"},
                                            {TicketStatus::Resolved, "Resolved"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Resolution, {{Resolution::RepairedNoEquipChange, "RepairedNoEquipChange"},
                                          {Resolution::EquipmentChanged, "EquipmentChanged"},
                                          {Resolution::Waived, "Waived"}})

/// Accepts "repaired", "equipment-changed", "waived" and the enum names.
Resolution parse_resolution(const std::string& s);

struct ActorStub {
    std::string actor_id;
    ActorKind kind = ActorKind::Manager;
    std::string name;
    std::optional<int> ack_delay;      // ticks; empty = manual
    std::optional<int> resolve_delay;  // ticks after acknowledgement; empty = manual
    Resolution resolution = Resolution::RepairedNoEquipChange;
    std::string actuator;  // BackupGenerator only
};

void to_json(json& j, const ActorStub& a);
void from_json(const json& j, ActorStub& a);

class ActorDirectory {
public:
    ActorDirectory() = default;
    explicit ActorDirectory(std::vector<ActorStub> actors);

    [[nodiscard]] const ActorStub* find(const std::string& actor_id) const;
    [[nodiscard]] const ActorStub* first_of(ActorKind kind) const;
    [[nodiscard]] std::set<std::string> ids() const;
    [[nodiscard]] const std::vector<ActorStub>& actors() const noexcept { return actors_; }

private:
    std::vector<ActorStub> actors_;
};

struct AuditEntry {
    Tick tick = 0;
    std::string actor;
    std::string action;
    bool accepted = true;
    std::string detail;
};

void to_json(json& j, const AuditEntry& a);

struct ActionTicket {
    std::string ticket_id;
    std::string source_event;  // ChangeEvent id or notice key
    std::string system;
    std::string rule_id;
    std::string actor_id;
    std::string verb;
    json parameters = json::object();
    int priority = 0;
    bool awaits_resolution = true;
    TicketStatus status = TicketStatus::Dispatched;
    std::optional<Resolution> resolution;
    Tick dispatched_at = 0;
    std::optional<Tick> acknowledged_at;
    std::optional<Tick> resolved_at;
    std::string resolved_by;
    std::vector<AuditEntry> audit;
};

void to_json(json& j, const ActionTicket& t);

/// Pattern fields a rule can match on.
struct Trigger {
    std::string kind;  // Fault, ConceptDrift, FaultResolved or a notice kind
    std::string system;
    std::string system_kind;
    cdo::Severity severity = cdo::Severity::Info;
    std::string mode;
    std::string source;  // event id or notice key
};

struct Dispatch {
    std::vector<ActuatorCommand> commands;
    std::vector<ActionTicket> tickets;
    std::vector<json> journal;  // records to append to the building journal
};

/// Validates BackupGenerator verbs and actor ids on top of the BKR checks.
void validate_rules(const std::vector<bkr::Rule>& rules, const ActorDirectory& directory);

/// Rules evaluated in (priority, rule_id) order; the first enabled
/// non-default match wins, then the default rule for the kind (or "*").
/// Returns nullptr when nothing matches.
const bkr::Rule* match_rule(const std::vector<bkr::Rule>& rules, const Trigger& trigger);

class Interfacing {
public:
    Interfacing(ActorDirectory directory, std::vector<bkr::Rule> rules);

    /// Evaluates the rules for a fault (or notice) and instantiates the
    /// first matching rule's actions. Self-healing commands come first.
    Dispatch handle(const Trigger& trigger, Tick now);
    Dispatch handle_event(const cdo::ChangeEvent& ev, const std::string& mode, Tick now);
    Dispatch handle_notice(const cdo::Notice& n, const std::string& mode, Tick now);
    /// Runs non-default rules keyed on FaultResolved (e.g. stop the
    /// generator once mains power is back).
    Dispatch handle_fault_resolved(const std::string& system, const std::string& system_kind,
                                   const std::string& source, Tick now);
    /// Escalation ticket to the first Manager.
    Dispatch escalate(const std::string& source, const std::string& system, const std::string& reason, Tick now);

    ActionTicket acknowledge(const std::string& ticket_id, const std::string& actor_id, Tick now);
    ActionTicket resolve(const std::string& ticket_id, Resolution resolution, const std::string& actor_id, Tick now);

    struct StubActivity {
        std::vector<ActionTicket> acknowledged;
        std::vector<ActionTicket> resolved;
    };
    /// Advances scripted actor behavior to `now`.
    StubActivity tick(Tick now);

    [[nodiscard]] std::vector<ActionTicket> tickets() const;
    [[nodiscard]] const ActionTicket& ticket(const std::string& ticket_id) const;
    [[nodiscard]] const ActorDirectory& directory() const noexcept { return directory_; }
    [[nodiscard]] const std::vector<bkr::Rule>& rules() const noexcept { return rules_; }
    [[nodiscard]] std::size_t rejected_actions() const noexcept { return rejected_; }

private:
    ActionTicket& dispatch_ticket(const std::string& source, const std::string& system, const std::string& rule_id,
                                  const bkr::RuleAction& action, Tick now, Dispatch& out);
    void instantiate(const bkr::Rule& rule, const Trigger& trigger, Tick now, Dispatch& out);

    ActorDirectory directory_;
    std::vector<bkr::Rule> rules_;
    std::map<std::string, ActionTicket> tickets_;
    std::uint64_t next_ticket_ = 1;
    std::uint64_t next_command_ = 1;
    std::size_t rejected_ = 0;
};

/// Reference actor directory and rules for the synthetic building.
std::vector<ActorStub> default_actors();
std::vector<bkr::Rule> default_rules();

}  // namespace sb::iface
