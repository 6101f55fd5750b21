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

#include <array>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sb/common.hpp"

/// Building mode state machine and its journal.
namespace sb::autonomic {

enum class Mode { Initializing, Optimizing, DetectingChange, Interfacing };

enum class Stimulus {
    CommissioningComplete,
    OptimumFound,
    DriftDetected,
    FaultDetected,
    FaultResolvedNoEquipChange,
    EquipmentChanged,
    UpgradeComplete,
};

NLOHMANN_JSON_SERIALIZE_ENUM(Mode, {{Mode::Initializing, "Initializing"},
                                    {Mode::Optimizing, "Optimizing"},
                                    {Mode::DetectingChange, "DetectingChange"},
                                    {Mode::Interfacing, "Interfacing"}})

NLOHMANN_JSON_SERIALIZE_ENUM(Stimulus, {{Stimulus::CommissioningComplete, "CommissioningComplete"},
                                        {Stimulus::OptimumFound, "OptimumFound"},
                                        {Stimulus::DriftDetected, "DriftDetected"},
                                        {Stimulus::FaultDetected, "FaultDetected"},
                                        {Stimulus::FaultResolvedNoEquipChange, "FaultResolvedNoEquipChange"},
                                        {Stimulus::EquipmentChanged, "EquipmentChanged"},
                                        {Stimulus::UpgradeComplete, "UpgradeComplete"}})

inline constexpr std::array<Mode, 4> kAllModes{Mode::Initializing, Mode::Optimizing, Mode::DetectingChange,
                                               Mode::Interfacing};
inline constexpr std::array<Stimulus, 7> kAllStimuli{
    Stimulus::CommissioningComplete,      Stimulus::OptimumFound,     Stimulus::DriftDetected,
    Stimulus::FaultDetected,              Stimulus::FaultResolvedNoEquipChange, Stimulus::EquipmentChanged,
    Stimulus::UpgradeComplete};

std::string to_string(Mode m);
std::string to_string(Stimulus s);

/// The transition relation; nullopt for pairs outside it.
std::optional<Mode> next_mode(Mode current, Stimulus stimulus) noexcept;

struct BuildingMode {
    Mode mode = Mode::Initializing;
    Tick since = 0;
    std::string cause;

    bool operator==(const BuildingMode&) const = default;
};

void to_json(json& j, const BuildingMode& m);
void from_json(const json& j, BuildingMode& m);

struct TransitionResult {
    BuildingMode mode;
    bool accepted = false;
    /// Journal record: {"type": "transition" | "anomaly", tick, from, to?,
    /// stimulus, cause}.
    json record;
};

/// Pure transition function. Illegal pairs leave the mode unchanged and
/// produce an anomaly record.
TransitionResult transition(const BuildingMode& current, Stimulus stimulus, Tick tick, const std::string& cause);

/// Mode owner. Stimuli are queued by producers and applied in order by
/// `drain`; every outcome is handed to the journal sink.
class ModeMachine {
public:
    using Sink = std::function<void(const json&)>;

    explicit ModeMachine(BuildingMode initial = {}, Sink sink = {});

    void post(Stimulus stimulus, std::string cause);
    /// Applies queued stimuli at `tick`; returns the accepted results.
    std::vector<TransitionResult> drain(Tick tick);
    /// Posts and drains one stimulus.
    TransitionResult apply(Stimulus stimulus, const std::string& cause, Tick tick);

    [[nodiscard]] const BuildingMode& current() const noexcept { return mode_; }
    [[nodiscard]] Mode mode() const noexcept { return mode_.mode; }
    [[nodiscard]] std::size_t anomalies() const noexcept { return anomalies_; }
    [[nodiscard]] bool pending() const noexcept { return !queue_.empty(); }

private:
    BuildingMode mode_;
    Sink sink_;
    std::deque<std::pair<Stimulus, std::string>> queue_;
    std::size_t anomalies_ = 0;
};

struct ModeHistoryEntry {
    Tick tick = 0;
    Mode mode = Mode::Initializing;

    bool operator==(const ModeHistoryEntry&) const = default;
};

/// Re-applies every journaled stimulus (transitions and anomalies) with
/// `transition` and returns the mode after each one. Throws ValidationError
/// when a journaled outcome disagrees with the relation.
std::vector<ModeHistoryEntry> replay(const std::vector<json>& journal, Mode initial = Mode::Initializing);

/// Mode in force at `tick` according to a replayed history.
Mode mode_at(const std::vector<ModeHistoryEntry>& history, Tick tick, Mode initial = Mode::Initializing);

}  // namespace sb::autonomic
