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

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_set>
#include <vector>

#include "sb/common.hpp"
#include "sb/message.hpp"

/// In-process streaming platform. Topics are append-only, ordered and
/// deduplicated on the producer key (device_id, point_id, seq_no); consumer
/// progress is tracked with committed offsets so a restarted consumer
/// resumes where it left off.
namespace sb::broker {

enum class PublishResult { Accepted, Duplicate };

struct Entry {
    std::int64_t offset = 0;
    SensorMessage message;

    bool operator==(const Entry&) const = default;
};

/// One JSON object per line:
/// {offset, device_id, point_id, seq_no, ts, value, unit, quality, source}
std::string encode_entry(const Entry& e);
Entry decode_entry(const std::string& line);

class Broker;

/// Resumable read position on one topic. Never blocks publishers for
/// longer than one batch copy.
class Cursor {
public:
    Cursor(const Broker* broker, std::string topic, std::int64_t position)
        : broker_(broker), topic_(std::move(topic)), position_(position)
    {
    }

    std::optional<Entry> next();
    /// Up to `max` entries from the current position.
    std::vector<Entry> poll(std::size_t max = SIZE_MAX);
    [[nodiscard]] std::int64_t position() const noexcept { return position_; }
    [[nodiscard]] const std::string& topic() const noexcept { return topic_; }

private:
    const Broker* broker_;
    std::string topic_;
    std::int64_t position_;
};

class Broker {
public:
    /// In-memory broker.
    Broker();
    /// File-backed broker: `dir/topics/<name>.jsonl` plus `dir/commits.jsonl`.
    /// Existing logs are reloaded.
    explicit Broker(std::string dir);

    Broker(const Broker&) = delete;
    Broker& operator=(const Broker&) = delete;

    /// Topics are auto-created on first publish.
    PublishResult publish(const std::string& topic, const SensorMessage& msg);
    void create_topic(const std::string& topic);

    /// Unknown topic throws NotFoundError. An offset past the end yields an
    /// empty cursor.
    [[nodiscard]] Cursor subscribe(const std::string& topic, std::int64_t from_offset) const;
    /// Cursor positioned after the consumer's last committed offset (0 for a
    /// fresh consumer).
    [[nodiscard]] Cursor resume(const std::string& topic, const std::string& consumer_id) const;

    /// Records that `consumer_id` has fully processed `offset`. Rejects
    /// offsets that do not exist yet and regressions.
    void commit(const std::string& topic, const std::string& consumer_id, std::int64_t offset);
    [[nodiscard]] std::optional<std::int64_t> committed(const std::string& topic,
                                                        const std::string& consumer_id) const;

    /// Next offset to be assigned on `topic` (== number of entries).
    [[nodiscard]] std::int64_t high_water_mark(const std::string& topic) const;
    [[nodiscard]] bool has_topic(const std::string& topic) const;
    [[nodiscard]] std::vector<std::string> topics() const;
    [[nodiscard]] std::vector<Entry> read(const std::string& topic, std::int64_t from,
                                          std::size_t max = SIZE_MAX) const;

    [[nodiscard]] std::uint64_t duplicates_rejected() const noexcept;

private:
    struct KeyHash {
        std::size_t operator()(const std::string& k) const noexcept { return std::hash<std::string>{}(k); }
    };
    struct Topic {
        std::vector<Entry> entries;
        std::unordered_set<std::string, KeyHash> seen;
        std::unique_ptr<AppendFile> log;
    };

    Topic& topic_locked(const std::string& name);
    void load();

    std::optional<std::string> dir_;
    mutable std::shared_mutex mu_;
    std::map<std::string, Topic> topics_;
    std::map<std::pair<std::string, std::string>, std::int64_t> commits_;
    std::unique_ptr<AppendFile> commit_log_;
    std::uint64_t duplicates_ = 0;
};

/// Ordered, idempotent channel for actuator commands. Commands are keyed by
/// command_id; a re-sent id is ignored.
class CommandChannel {
public:
    PublishResult send(const ActuatorCommand& cmd);
    /// Commands after the consumer's committed position; advances it.
    std::vector<ActuatorCommand> take(const std::string& consumer_id);
    [[nodiscard]] std::vector<ActuatorCommand> history() const;

private:
    mutable std::mutex mu_;
    std::vector<ActuatorCommand> log_;
    std::unordered_set<std::string> ids_;
    std::map<std::string, std::size_t> positions_;
};

}  // namespace sb::broker
