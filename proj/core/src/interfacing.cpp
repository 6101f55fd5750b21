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

#include "sb/interfacing.hpp"

#include <algorithm>
#include <cstdio>

#include <spdlog/spdlog.h>

namespace sb::iface {

namespace {

int severity_rank(cdo::Severity s) { return static_cast<int>(s); }

std::string make_id(const char* prefix, std::uint64_t n)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%06llu", prefix, static_cast<unsigned long long>(n));
    return buf;
}

bool generator_verb(const std::string& verb) { return verb == "Start" || verb == "Stop"; }

}  // namespace

Resolution parse_resolution(const std::string& s)
{
    if (s == "repaired" || s == "RepairedNoEquipChange")
        return Resolution::RepairedNoEquipChange;
    if (s == "equipment-changed" || s == "replaced" || s == "EquipmentChanged")
        return Resolution::EquipmentChanged;
    if (s == "waived" || s == "Waived")
        return Resolution::Waived;
    throw ValidationError("unknown resolution '" + s + "' (expected repaired, equipment-changed or waived)");
}

void to_json(json& j, const ActorStub& a)
{
    j = json{{"actor_id", a.actor_id}, {"kind", a.kind}, {"name", a.name}, {"resolution", a.resolution}};
    j["ack_delay"] = a.ack_delay ? json(*a.ack_delay) : json(nullptr);
    j["resolve_delay"] = a.resolve_delay ? json(*a.resolve_delay) : json(nullptr);
    if (!a.actuator.empty())
        j["actuator"] = a.actuator;
}

void from_json(const json& j, ActorStub& a)
{
    a.actor_id = j.at("actor_id").get<std::string>();
    a.kind = j.at("kind").get<ActorKind>();
    if (j.at("kind").get<std::string>() != json(a.kind).get<std::string>())
        throw ValidationError("actor " + a.actor_id + " has unknown kind " + j.at("kind").dump());
    a.name = j.value("name", a.actor_id);
    a.ack_delay = j.contains("ack_delay") && !j["ack_delay"].is_null() ? std::optional<int>(j["ack_delay"].get<int>())
                                                                          : std::nullopt;
    a.resolve_delay = j.contains("resolve_delay") && !j["resolve_delay"].is_null()
                          ? std::optional<int>(j["resolve_delay"].get<int>())
                          : std::nullopt;
    a.resolution = j.contains("resolution") ? parse_resolution(j["resolution"].get<std::string>())
                                            : Resolution::RepairedNoEquipChange;
    a.actuator = j.value("actuator", std::string{});
    if (a.actor_id.empty())
        throw ValidationError("actor without actor_id");
    if ((a.ack_delay && *a.ack_delay < 0) || (a.resolve_delay && *a.resolve_delay < 0))
        throw ValidationError("actor " + a.actor_id + " has a negative delay");
    if (a.kind == ActorKind::BackupGenerator && a.actuator.empty())
        throw ValidationError("BackupGenerator actor " + a.actor_id + " needs an actuator");
}

ActorDirectory::ActorDirectory(std::vector<ActorStub> actors) : actors_(std::move(actors))
{
    std::set<std::string> seen;
    for (const auto& a : actors_)
        if (!seen.insert(a.actor_id).second)
            throw ValidationError("duplicate actor_id " + a.actor_id);
}

const ActorStub* ActorDirectory::find(const std::string& actor_id) const
{
    for (const auto& a : actors_)
        if (a.actor_id == actor_id)
            return &a;
    return nullptr;
}

const ActorStub* ActorDirectory::first_of(ActorKind kind) const
{
    for (const auto& a : actors_)
        if (a.kind == kind)
            return &a;
    return nullptr;
}

std::set<std::string> ActorDirectory::ids() const
{
    std::set<std::string> out;
    for (const auto& a : actors_)
        out.insert(a.actor_id);
    return out;
}

void to_json(json& j, const AuditEntry& a)
{
    j = json{{"tick", a.tick}, {"actor", a.actor}, {"action", a.action}, {"accepted", a.accepted}};
    if (!a.detail.empty())
        j["detail"] = a.detail;
}

void to_json(json& j, const ActionTicket& t)
{
    j = json{{"ticket_id", t.ticket_id},
             {"source_event", t.source_event},
             {"system", t.system},
             {"rule_id", t.rule_id},
             {"actor_id", t.actor_id},
             {"command", {{"verb", t.verb}, {"parameters", t.parameters}}},
             {"priority", t.priority},
             {"awaits_resolution", t.awaits_resolution},
             {"status", t.status},
             {"resolution", t.resolution ? json(*t.resolution) : json(nullptr)},
             {"timestamps",
              {{"Dispatched", t.dispatched_at},
               {"Acknowledged", t.acknowledged_at ? json(*t.acknowledged_at) : json(nullptr)},
               {"Resolved", t.resolved_at ? json(*t.resolved_at) : json(nullptr)}}},
             {"audit", t.audit}};
    if (!t.resolved_by.empty())
        j["resolved_by"] = t.resolved_by;
}

void validate_rules(const std::vector<bkr::Rule>& rules, const ActorDirectory& directory)
{
    bkr::validate_rules(rules, directory.ids());
    for (const auto& r : rules) {
        if (r.trigger.min_severity)
            (void)cdo::parse_severity(*r.trigger.min_severity);
        for (const auto& a : r.actions) {
            const auto* actor = directory.find(a.actor_id);
            if (actor->kind == ActorKind::BackupGenerator && !generator_verb(a.verb))
                throw ValidationError("rule " + r.rule_id + ": BackupGenerator accepts only Start and Stop, got " +
                                      a.verb);
        }
    }
}

namespace {

bool matches(const bkr::Rule& r, const Trigger& t)
{
    const auto& p = r.trigger;
    if (p.event_kind != t.kind && !(r.is_default && p.event_kind == "*"))
        return false;
    if (p.system && *p.system != t.system)
        return false;
    if (p.system_kind && *p.system_kind != t.system_kind)
        return false;
    if (p.min_severity && severity_rank(t.severity) < severity_rank(cdo::parse_severity(*p.min_severity)))
        return false;
    if (p.mode && *p.mode != t.mode)
        return false;
    return true;
}

}  // namespace

const bkr::Rule* match_rule(const std::vector<bkr::Rule>& rules, const Trigger& trigger)
{
    std::vector<const bkr::Rule*> ordered;
    for (const auto& r : rules)
        if (r.enabled)
            ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(), [](const bkr::Rule* a, const bkr::Rule* b) {
        return std::tie(a->priority, a->rule_id) < std::tie(b->priority, b->rule_id);
    });
    for (const auto* r : ordered)
        if (!r->is_default && matches(*r, trigger))
            return r;
    // Kind-specific default beats the wildcard one.
    for (const auto* r : ordered)
        if (r->is_default && r->trigger.event_kind == trigger.kind && matches(*r, trigger))
            return r;
    for (const auto* r : ordered)
        if (r->is_default && r->trigger.event_kind == "*" && matches(*r, trigger))
            return r;
    return nullptr;
}

Interfacing::Interfacing(ActorDirectory directory, std::vector<bkr::Rule> rules)
    : directory_(std::move(directory)), rules_(std::move(rules))
{
    bkr::validate_rules(rules_, [&] {
        // Unknown actors are tolerated here and escalated at dispatch time.
        auto ids = directory_.ids();
        for (const auto& r : rules_)
            for (const auto& a : r.actions)
                ids.insert(a.actor_id);
        return ids;
    }());
    for (const auto& r : rules_)
        for (const auto& a : r.actions)
            if (const auto* actor = directory_.find(a.actor_id);
                actor && actor->kind == ActorKind::BackupGenerator && !generator_verb(a.verb))
                throw ValidationError("rule " + r.rule_id + ": BackupGenerator accepts only Start and Stop, got " +
                                      a.verb);
}

ActionTicket& Interfacing::dispatch_ticket(const std::string& source, const std::string& system,
                                           const std::string& rule_id, const bkr::RuleAction& action, Tick now,
                                           Dispatch& out)
{
    ActionTicket t;
    t.ticket_id = make_id("tk", next_ticket_++);
    t.source_event = source;
    t.system = system;
    t.rule_id = rule_id;
    t.actor_id = action.actor_id;
    t.verb = action.verb;
    t.parameters = action.parameters;
    t.priority = action.priority;
    t.awaits_resolution = action.awaits_resolution;
    t.dispatched_at = now;
    t.audit.push_back({now, "interfacing", "Dispatched", true, "rule " + rule_id});
    auto& stored = tickets_[t.ticket_id] = std::move(t);
    out.tickets.push_back(stored);
    out.journal.push_back(json{{"type", "ticket"},
                               {"tick", now},
                               {"ticket_id", stored.ticket_id},
                               {"status", "Dispatched"},
                               {"actor_id", stored.actor_id},
                               {"verb", stored.verb},
                               {"system", system},
                               {"source", source},
                               {"rule_id", rule_id}});
    return stored;
}

void Interfacing::instantiate(const bkr::Rule& rule, const Trigger& trigger, Tick now, Dispatch& out)
{
    auto actions = rule.actions;
    std::stable_sort(actions.begin(), actions.end(),
                     [](const bkr::RuleAction& a, const bkr::RuleAction& b) { return a.priority < b.priority; });
    // Self-healing commands go out before any ticket.
    for (const auto& a : actions) {
        const auto* actor = directory_.find(a.actor_id);
        if (!actor || actor->kind != ActorKind::BackupGenerator)
            continue;
        ActuatorCommand cmd;
        cmd.command_id = make_id("cmd", next_command_++);
        cmd.issuer = "interfacing";
        cmd.actuator_id = actor->actuator;
        cmd.verb = a.verb == "Start" ? "start" : "stop";
        out.commands.push_back(cmd);
        out.journal.push_back(json{{"type", "command"},
                                   {"tick", now},
                                   {"command_id", cmd.command_id},
                                   {"actor_id", actor->actor_id},
                                   {"actuator", cmd.actuator_id},
                                   {"verb", a.verb},
                                   {"source", trigger.source},
                                   {"rule_id", rule.rule_id}});
    }
    for (const auto& a : actions) {
        const auto* actor = directory_.find(a.actor_id);
        if (actor && actor->kind == ActorKind::BackupGenerator)
            continue;
        if (!actor) {
            ++rejected_;
            spdlog::warn("rule {} names missing actor {}; escalating", rule.rule_id, a.actor_id);
            out.journal.push_back(json{{"type", "rule_suggestion"},
                                       {"tick", now},
                                       {"rule_id", rule.rule_id},
                                       {"suggestion", "disable"},
                                       {"detail", "actor " + a.actor_id + " not in directory"}});
            auto esc = escalate(trigger.source, trigger.system, "actor " + a.actor_id + " not in directory", now);
            for (auto& t : esc.tickets)
                out.tickets.push_back(std::move(t));
            for (auto& j : esc.journal)
                out.journal.push_back(std::move(j));
            continue;
        }
        dispatch_ticket(trigger.source, trigger.system, rule.rule_id, a, now, out);
    }
}

Dispatch Interfacing::handle(const Trigger& trigger, Tick now)
{
    Dispatch out;
    if (const auto* rule = match_rule(rules_, trigger))
        instantiate(*rule, trigger, now, out);
    else
        out = escalate(trigger.source, trigger.system, "no rule for " + trigger.kind, now);
    return out;
}

Dispatch Interfacing::handle_event(const cdo::ChangeEvent& ev, const std::string& mode, Tick now)
{
    return handle(Trigger{json(ev.kind).get<std::string>(), ev.system, ev.system_kind, ev.severity, mode, ev.event_id},
                  now);
}

Dispatch Interfacing::handle_notice(const cdo::Notice& n, const std::string& mode, Tick now)
{
    return handle(Trigger{n.kind, n.system, {}, n.severity, mode, n.kind + ":" + n.target}, now);
}

Dispatch Interfacing::handle_fault_resolved(const std::string& system, const std::string& system_kind,
                                            const std::string& source, Tick now)
{
    Dispatch out;
    const Trigger trigger{"FaultResolved", system, system_kind, cdo::Severity::Info, {}, source};
    const auto* rule = match_rule(rules_, trigger);
    if (rule && !rule->is_default)
        instantiate(*rule, trigger, now, out);
    return out;
}

Dispatch Interfacing::escalate(const std::string& source, const std::string& system, const std::string& reason,
                               Tick now)
{
    Dispatch out;
    const auto* manager = directory_.first_of(ActorKind::Manager);
    if (!manager)
        throw NotFoundError("no Manager actor to escalate to: " + reason);
    bkr::RuleAction a;
    a.actor_id = manager->actor_id;
    a.verb = "Escalate";
    a.parameters = json{{"reason", reason}};
    dispatch_ticket(source, system, "escalation", a, now, out);
    return out;
}

ActionTicket Interfacing::acknowledge(const std::string& ticket_id, const std::string& actor_id, Tick now)
{
    const auto it = tickets_.find(ticket_id);
    if (it == tickets_.end())
        throw NotFoundError("no ticket " + ticket_id);
    auto& t = it->second;
    if (actor_id != t.actor_id) {
        t.audit.push_back({now, actor_id, "Acknowledge", false, "foreign ticket"});
        throw RejectedError("actor " + actor_id + " cannot acknowledge ticket " + ticket_id + " assigned to " +
                            t.actor_id);
    }
    if (t.status != TicketStatus::Dispatched) {
        t.audit.push_back({now, actor_id, "Acknowledge", false, "already " + json(t.status).get<std::string>()});
        throw RejectedError("ticket " + ticket_id + " is already " + json(t.status).get<std::string>());
    }
    t.status = TicketStatus::Acknowledged;
    t.acknowledged_at = now;
    t.audit.push_back({now, actor_id, "Acknowledge", true, {}});
    return t;
}

ActionTicket Interfacing::resolve(const std::string& ticket_id, Resolution resolution, const std::string& actor_id,
                                  Tick now)
{
    const auto it = tickets_.find(ticket_id);
    if (it == tickets_.end())
        throw NotFoundError("no ticket " + ticket_id);
    auto& t = it->second;
    const auto action = "Resolve:" + json(resolution).get<std::string>();
    if (actor_id.empty() || !directory_.find(actor_id)) {
        t.audit.push_back({now, actor_id, action, false, "unauthenticated actor"});
        throw RejectedError("resolution of " + ticket_id + " needs a known actor identity");
    }
    if (actor_id != t.actor_id) {
        t.audit.push_back({now, actor_id, action, false, "foreign ticket"});
        throw RejectedError("actor " + actor_id + " cannot resolve ticket " + ticket_id + " assigned to " +
                            t.actor_id);
    }
    if (t.status != TicketStatus::Acknowledged) {
        const auto why = t.status == TicketStatus::Resolved ? "already resolved" : "not acknowledged";
        t.audit.push_back({now, actor_id, action, false, why});
        throw RejectedError("ticket " + ticket_id + " is " + why);
    }
    t.status = TicketStatus::Resolved;
    t.resolution = resolution;
    t.resolved_at = now;
    t.resolved_by = actor_id;
    t.audit.push_back({now, actor_id, action, true, {}});
    return t;
}

Interfacing::StubActivity Interfacing::tick(Tick now)
{
    StubActivity out;
    for (auto& [id, t] : tickets_) {
        const auto* actor = directory_.find(t.actor_id);
        if (!actor)
            continue;
        if (t.status == TicketStatus::Dispatched && actor->ack_delay && now >= t.dispatched_at + *actor->ack_delay)
            out.acknowledged.push_back(acknowledge(id, actor->actor_id, now));
        if (t.status == TicketStatus::Acknowledged && t.awaits_resolution && actor->resolve_delay &&
            now >= *t.acknowledged_at + *actor->resolve_delay)
            out.resolved.push_back(resolve(id, actor->resolution, actor->actor_id, now));
    }
    return out;
}

std::vector<ActionTicket> Interfacing::tickets() const
{
    std::vector<ActionTicket> out;
    out.reserve(tickets_.size());
    for (const auto& [id, t] : tickets_)
        out.push_back(t);
    return out;
}

const ActionTicket& Interfacing::ticket(const std::string& ticket_id) const
{
    const auto it = tickets_.find(ticket_id);
    if (it == tickets_.end())
        throw NotFoundError("no ticket " + ticket_id);
    return it->second;
}

std::vector<ActorStub> default_actors()
{
    auto stub = [](std::string id, ActorKind kind, std::string name, std::optional<int> ack,
                   std::optional<int> resolve) {
        ActorStub a;
        a.actor_id = std::move(id);
        a.kind = kind;
        a.name = std::move(name);
        a.ack_delay = ack;
        a.resolve_delay = resolve;
        return a;
    };
    std::vector<ActorStub> out{
        stub("maint-hvac", ActorKind::MaintenanceStaff, "HVAC maintenance contractor", 5, 600),
        stub("maint-power", ActorKind::MaintenanceStaff, "Electrical maintenance", 2, 120),
        stub("maint-general", ActorKind::MaintenanceStaff, "General maintenance", 10, 240),
        stub("manager", ActorKind::Manager, "Building manager", 1, 480),
        stub("tenants", ActorKind::Tenant, "Tenant broadcast list", 1, std::nullopt),
        stub("smart-grid", ActorKind::SmartGrid, "Utility smart grid", 1, std::nullopt),
        stub("campus-peer", ActorKind::OtherBuilding, "Neighbouring building AI", 1, std::nullopt),
        stub("ev-fleet", ActorKind::VehicleService, "EV charging service", 1, std::nullopt),
        stub("generator", ActorKind::BackupGenerator, "Backup generator", std::nullopt, std::nullopt),
    };
    out.back().actuator = "generator";
    return out;
}

std::vector<bkr::Rule> default_rules()
{
    auto action = [](std::string actor, std::string verb, int prio, bool awaits) {
        bkr::RuleAction a;
        a.actor_id = std::move(actor);
        a.verb = std::move(verb);
        a.priority = prio;
        a.awaits_resolution = awaits;
        return a;
    };
    std::vector<bkr::Rule> rules;

    bkr::Rule power;
    power.rule_id = "power-outage";
    power.priority = 10;
    power.trigger.event_kind = "Fault";
    power.trigger.system_kind = "PowerSupply";
    power.actions = {action("generator", "Start", 0, false), action("maint-power", "RestoreMains", 1, true),
                     action("smart-grid", "ReportOutage", 2, false), action("tenants", "NotifyOutage", 3, false),
                     action("manager", "NotifyOutage", 4, false)};
    rules.push_back(power);

    bkr::Rule restored;
    restored.rule_id = "power-restored";
    restored.priority = 10;
    restored.trigger.event_kind = "FaultResolved";
    restored.trigger.system_kind = "PowerSupply";
    restored.actions = {action("generator", "Stop", 0, false), action("tenants", "NotifyRestored", 1, false)};
    rules.push_back(restored);

    for (const auto* kind : {"Chiller", "Boiler"}) {
        bkr::Rule r;
        r.rule_id = std::string("hvac-") + (kind[0] == 'C' ? "chiller" : "boiler");
        r.priority = 20;
        r.trigger.event_kind = "Fault";
        r.trigger.system_kind = kind;
        r.actions = {action("maint-hvac", "ScheduleRepair", 0, true)};
        rules.push_back(r);
    }

    bkr::Rule zone;
    zone.rule_id = "zone-sensor";
    zone.priority = 30;
    zone.trigger.event_kind = "Fault";
    zone.trigger.system_kind = "Zone";
    zone.actions = {action("maint-general", "InspectSensor", 0, true), action("tenants", "NotifyComfort", 1, false)};
    rules.push_back(zone);

    bkr::Rule infeasible;
    infeasible.rule_id = "optimizer-infeasible";
    infeasible.priority = 50;
    infeasible.trigger.event_kind = "OptimizationInfeasible";
    infeasible.actions = {action("manager", "ReviewComfortLimits", 0, false)};
    rules.push_back(infeasible);

    bkr::Rule cx;
    cx.rule_id = "commissioning-failure";
    cx.priority = 50;
    cx.trigger.event_kind = "CommissioningFailure";
    cx.actions = {action("manager", "InspectOrWaive", 0, false)};
    rules.push_back(cx);

    bkr::Rule label;
    label.rule_id = "human-label";
    label.priority = 50;
    label.trigger.event_kind = "HumanLabelRequest";
    label.actions = {action("manager", "LabelPoint", 0, false)};
    rules.push_back(label);

    for (const auto* kind : {"DegenerateBaseline", "CommissioningNeeded", "PersistFailure"}) {
        bkr::Rule r;
        r.rule_id = std::string("notice-") + kind;
        r.priority = 60;
        r.trigger.event_kind = kind;
        r.actions = {action("manager", "Review", 0, false)};
        rules.push_back(r);
    }

    bkr::Rule fallback;
    fallback.rule_id = "default-escalation";
    fallback.priority = 1000;
    fallback.is_default = true;
    fallback.trigger.event_kind = "*";
    fallback.actions = {action("manager", "Escalate", 0, true)};
    rules.push_back(fallback);
    return rules;
}

}  // namespace sb::iface
