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

#include "sb/autonomic.hpp"

#include <spdlog/spdlog.h>

namespace sb::autonomic {

std::string to_string(Mode m) { return json(m).get<std::string>(); }
std::string to_string(Stimulus s) { return json(s).get<std::string>(); }

std::optional<Mode> next_mode(Mode current, Stimulus stimulus) noexcept
{
    switch (current) {
    case Mode::Initializing:
        if (stimulus == Stimulus::CommissioningComplete || stimulus == Stimulus::UpgradeComplete)
            return Mode::Optimizing;
        break;
    case Mode::Optimizing:
        if (stimulus == Stimulus::OptimumFound)
            return Mode::DetectingChange;
        break;
    case Mode::DetectingChange:
        if (stimulus == Stimulus::DriftDetected)
            return Mode::Optimizing;
        if (stimulus == Stimulus::FaultDetected)
            return Mode::Interfacing;
        break;
    case Mode::Interfacing:
        if (stimulus == Stimulus::FaultResolvedNoEquipChange)
            return Mode::DetectingChange;
        if (stimulus == Stimulus::EquipmentChanged)
            return Mode::Initializing;
        break;
    }
    return std::nullopt;
}

void to_json(json& j, const BuildingMode& m) { j = json{{"mode", m.mode}, {"since", m.since}, {"cause", m.cause}}; }

void from_json(const json& j, BuildingMode& m)
{
    m.mode = j.at("mode").get<Mode>();
    m.since = j.value("since", Tick{0});
    m.cause = j.value("cause", std::string{});
}

TransitionResult transition(const BuildingMode& current, Stimulus stimulus, Tick tick, const std::string& cause)
{
    TransitionResult r;
    if (const auto next = next_mode(current.mode, stimulus)) {
        r.accepted = true;
        r.mode = BuildingMode{*next, tick, cause};
        r.record = json{{"type", "transition"}, {"tick", tick},         {"from", current.mode},
                        {"to", *next},          {"stimulus", stimulus}, {"cause", cause}};
    } else {
        r.mode = current;
        r.record = json{{"type", "anomaly"},     {"tick", tick},   {"from", current.mode},
                        {"stimulus", stimulus}, {"cause", cause}, {"detail", "illegal transition rejected"}};
    }
    return r;
}

ModeMachine::ModeMachine(BuildingMode initial, Sink sink) : mode_(std::move(initial)), sink_(std::move(sink)) {}

void ModeMachine::post(Stimulus stimulus, std::string cause) { queue_.emplace_back(stimulus, std::move(cause)); }

std::vector<TransitionResult> ModeMachine::drain(Tick tick)
{
    std::vector<TransitionResult> out;
    while (!queue_.empty()) {
        auto [stimulus, cause] = std::move(queue_.front());
        queue_.pop_front();
        auto r = transition(mode_, stimulus, tick, cause);
        if (sink_)
            sink_(r.record);
        if (r.accepted) {
            spdlog::info("mode: {} -> {} on {} ({}) at tick {}", to_string(mode_.mode), to_string(r.mode.mode),
                         to_string(stimulus), cause, tick);
            mode_ = r.mode;
            out.push_back(std::move(r));
        } else {
            ++anomalies_;
            spdlog::warn("mode: rejected {} in {} ({}) at tick {}", to_string(stimulus), to_string(mode_.mode), cause,
                         tick);
        }
    }
    return out;
}

TransitionResult ModeMachine::apply(Stimulus stimulus, const std::string& cause, Tick tick)
{
    auto r = transition(mode_, stimulus, tick, cause);
    if (sink_)
        sink_(r.record);
    if (r.accepted)
        mode_ = r.mode;
    else
        ++anomalies_;
    return r;
}

std::vector<ModeHistoryEntry> replay(const std::vector<json>& journal, Mode initial)
{
    std::vector<ModeHistoryEntry> out;
    BuildingMode cur{initial, 0, {}};
    for (const auto& rec : journal) {
        const auto type = rec.value("type", std::string{});
        if (type != "transition" && type != "anomaly")
            continue;
        const auto tick = rec.at("tick").get<Tick>();
        const auto r = transition(cur, rec.at("stimulus").get<Stimulus>(), tick, rec.value("cause", std::string{}));
        if (rec.at("from").get<Mode>() != cur.mode)
            throw ValidationError("journal out of sequence at tick " + std::to_string(tick));
        if (r.accepted != (type == "transition") || (r.accepted && rec.at("to").get<Mode>() != r.mode.mode))
            throw ValidationError("journal outcome disagrees with the transition relation at tick " +
                                  std::to_string(tick));
        cur = r.mode;
        out.push_back({tick, cur.mode});
    }
    return out;
}

Mode mode_at(const std::vector<ModeHistoryEntry>& history, Tick tick, Mode initial)
{
    Mode m = initial;
    for (const auto& e : history) {
        if (e.tick > tick)
            break;
        m = e.mode;
    }
    return m;
}

}  // namespace sb::autonomic
