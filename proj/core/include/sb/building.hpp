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

#include <condition_variable>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sb/autonomic.hpp"
#include "sb/bkr.hpp"
#include "sb/broker.hpp"
#include "sb/cdo.hpp"
#include "sb/dnc.hpp"
#include "sb/interfacing.hpp"
#include "sb/legacy.hpp"
#include "sb/simulator.hpp"
#include "sb/stream_engine.hpp"

namespace sb::autonomic {

/// Everything a building run needs besides the scenario. Every field has a
/// default matching the reference building.
struct RuntimeConfig {
    sim::SimConfig building;
    bkr::BkrConfig bkr;
    cdo::DetectorConfig detector;
    cdo::OptimizerConfig optimizer;
    std::vector<cdo::SearchSpace> search_spaces;
    Tick evaluation_horizon = 1440;
    Tick probe_ticks = 1440;
    Tick baseline_ticks = 1440;
    Tick watchdog_ticks = 720;
    Tick discovery_interval = 60;
    std::vector<iface::ActorStub> actors;
    std::vector<bkr::Rule> rules;
    json classification;
    stream::TransformTable transforms;
    std::optional<iface::LegacyMapping> legacy_mapping;
    std::string legacy_feed;  // CSV path, resolved by the loader
    Range comfort_limits{19.0, 27.0};
    std::string quarantine_topic = "quarantine";

    /// Every problem found, empty when the configuration is usable.
    [[nodiscard]] std::vector<std::string> validation_errors() const;
};

RuntimeConfig default_runtime_config();
/// Layers `doc` over the defaults. Throws ValidationError listing every
/// problem ("; " separated).
RuntimeConfig load_runtime_config(const json& doc);
json to_json(const RuntimeConfig& c);

/// The chiller supply-temperature grid searched on the reference building.
std::vector<cdo::SearchSpace> reference_search_spaces();

/// Meter energy reconstructed from the knowledge repository: exported hours
/// from the hourly aggregates, the rest from real-time vectors.
json energy_summary(const bkr::Bkr& bkr, double tick_hours);

/// Fields kept when comparing journals against a golden file.
json golden_projection(const json& record);

struct StreamItem {
    std::uint64_t seq = 0;
    std::string type;
    json data;
};

/// One simulated building with its full autonomic stack: simulator, broker,
/// stream engine, BKR, D&C, CDO, interfacing and the mode machine. All
/// public members are thread-safe; ticks are driven by one caller.
class Building {
public:
    /// An empty `dir` keeps broker and BKR in memory. With a directory, an
    /// existing broker log and BKR are reopened and the run resumes after
    /// the last persisted tick.
    Building(RuntimeConfig config, sim::ScenarioScript scenario = {}, std::string dir = {});
    ~Building();

    Building(const Building&) = delete;
    Building& operator=(const Building&) = delete;

    void step();
    void run(Tick ticks);

    [[nodiscard]] Tick tick() const;
    [[nodiscard]] Mode mode() const;
    [[nodiscard]] BuildingMode building_mode() const;

    /// Supported names: status, energy, events, tickets, devices, modes,
    /// commissioning, schedules, ocx. Unknown names throw NotFoundError
    /// listing them.
    [[nodiscard]] json describe(const std::string& name) const;
    static const std::vector<std::string>& report_names();
    [[nodiscard]] json summary() const;

    json acknowledge(const std::string& ticket_id, const std::string& actor_id);
    json resolve(const std::string& ticket_id, iface::Resolution resolution, const std::string& actor_id);
    /// Accepts a failed commissioning item; registers it as waived.
    json waive(const std::string& point_id, const std::string& actor_id);
    /// Starts a commissioning probe when Initializing; otherwise returns the
    /// current commissioning report.
    json commission();
    /// Adjusts a zone comfort band within the configured limits.
    json tenant_comfort(const std::string& zone_id, double min, double max, const std::string& actor_id);

    /// Stream items with seq > `after`, waiting up to `timeout` for one.
    std::vector<StreamItem> stream_after(std::uint64_t after, std::chrono::milliseconds timeout) const;

    [[nodiscard]] std::vector<json> journal() const;
    [[nodiscard]] std::vector<cdo::ChangeEvent> events() const;
    [[nodiscard]] std::vector<iface::ActionTicket> tickets() const;
    [[nodiscard]] std::vector<ActuatorCommand> commands() const;
    [[nodiscard]] std::size_t optimizations() const;
    [[nodiscard]] std::size_t ocx_chains_closed() const;

    // Direct access for tests and tools; not synchronized.
    [[nodiscard]] bkr::Bkr& bkr() noexcept { return *bkr_; }
    [[nodiscard]] broker::Broker& broker() noexcept { return *broker_; }
    [[nodiscard]] const sim::SimWorld& world() const noexcept { return sim_; }
    [[nodiscard]] const RuntimeConfig& config() const noexcept { return config_; }

private:
    struct Concern {
        std::string id;
        std::string system;
        std::string system_kind;
        Tick opened_at = 0;
        std::vector<std::string> events;
        std::set<std::string> points;
        std::vector<std::string> tickets;
        std::vector<std::string> escalations;
        std::set<std::string> healed;  // actuators driven by self-healing commands
        bool open = true;
        bool escalated = false;
    };
    struct Chain {
        std::string id;
        std::string system;
        std::string trigger;  // "repair" or "drift"
        std::vector<std::string> events;
        std::vector<std::string> tickets;
        std::string optimization;
        Tick opened_at = 0;
        bool closed = false;
    };
    struct Job {
        std::string id;
        std::string system;
        std::string reason;  // commissioning, fault, drift, repair
        std::string chain;
        Tick submitted = 0;
        std::shared_future<cdo::OptimizeResult> result;
    };
    struct Refresh {
        std::string system;  // empty = building-wide
        Tick from = 0;
        Tick to = 0;  // exclusive
        bkr::BaselineProvenance provenance = bkr::BaselineProvenance::OCx;
        std::string chain;
        std::vector<std::string> drift_events;
        int attempts = 0;
    };
    struct CommissioningItem {
        std::string point_id;
        dnc::CandidatePoint candidate;
        dnc::Classification classification;
        bkr::DeviceRecord record;
        bool range_ok = true;
        std::string status;  // pass, fail, waived
        std::string reason;
    };
    struct Commissioning {
        bool active = false;
        bool upgrade = false;
        Tick probe_from = 0;
        Tick probe_to = 0;  // exclusive
        bool evaluated = false;
        std::string error;
        std::vector<CommissioningItem> items;
    };

    Tick now_locked() const noexcept { return tick_ > 0 ? tick_ - 1 : 0; }
    void record(json rec);
    void push_stream(const std::string& type, json data);
    void apply_dispatch(iface::Dispatch d, Concern* concern);
    void send_command(const ActuatorCommand& cmd);

    void start_probe(Tick from, bool upgrade);
    void run_commissioning(Tick t);
    void finish_commissioning(Tick t);
    std::map<std::string, std::vector<double>> replay_probe(const bkr::Registry& registry, Tick from, Tick to,
                                                            std::optional<StateVector>* last);

    void detect(const StateVector& sv, Tick t);
    void on_fault(const cdo::ChangeEvent& ev, Tick t);
    void on_drift(const cdo::ChangeEvent& ev, Tick t);
    void on_notice(const cdo::Notice& n, Tick t);
    void on_ticket_resolved(const iface::ActionTicket& ticket, Tick t);
    void close_concern(Concern& c, iface::Resolution resolution, Tick t);

    void submit_job(const std::string& system, const std::string& reason, const std::string& chain, Tick t);
    void collect_jobs(Tick t);
    void finish_job(Job& job, const cdo::OptimizeResult& r, Tick t);
    void start_refresh(Refresh r, Tick t);
    void run_refreshes(Tick t);
    void watchdog(Tick t);
    void discovery_pass(Tick t);
    void reconcile(Tick t);
    bool global_jobs_pending() const;
    bool open_faults() const;
    const cdo::SearchSpace* search_space(const std::string& system) const;
    std::shared_ptr<const bkr::Registry> registry() const { return bkr_->registry(); }
    json describe_locked(const std::string& name) const;

    RuntimeConfig config_;
    std::string dir_;
    sim::SimWorld sim_;
    std::unique_ptr<broker::Broker> broker_;
    std::unique_ptr<bkr::Bkr> bkr_;
    broker::CommandChannel commands_;
    std::unique_ptr<stream::Pipeline> pipeline_;
    cdo::ChangeDetector detector_;
    iface::Interfacing iface_;
    dnc::RuleTableClassifier classifier_;
    dnc::Datasheet datasheet_;
    std::map<std::string, std::string> topic_of_;
    std::unique_ptr<iface::LegacyAdapter> legacy_;
    std::vector<iface::LegacyRow> legacy_rows_;
    std::size_t legacy_next_ = 0;
    ModeMachine machine_;

    mutable std::mutex mu_;
    Tick tick_ = 0;
    Commissioning cx_;
    std::map<std::string, Concern> concerns_;  // by id
    std::map<std::string, Chain> chains_;
    std::vector<Job> jobs_;
    std::vector<Refresh> refreshes_;
    std::vector<cdo::ChangeEvent> events_;
    std::set<std::string> resolved_events_;
    std::vector<std::string> drift_unannounced_;
    std::map<std::string, std::vector<ScheduleEntry>> schedules_;
    std::set<std::string> label_requested_;
    std::int64_t dnc_offset_ = 0;
    bool recommission_requested_ = false;
    std::string last_closed_concern_;
    std::string last_global_job_;
    std::uint64_t next_id_ = 1;
    std::size_t optimizations_ = 0;
    std::size_t ocx_closed_ = 0;

    mutable std::mutex stream_mu_;
    mutable std::condition_variable stream_cv_;
    std::vector<StreamItem> stream_;
};

}  // namespace sb::autonomic
