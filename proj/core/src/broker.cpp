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

#include "sb/broker.hpp"

#include <algorithm>
#include <filesystem>

#include <spdlog/spdlog.h>

namespace sb::broker {

namespace {

std::string dedup_key(const SensorMessage& m)
{
    return m.device_id + '\x1f' + m.point_id + '\x1f' + std::to_string(m.seq_no);
}

void check_topic_name(const std::string& name)
{
    if (name.empty())
        throw ValidationError("topic name must not be empty");
    for (char c : name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-'))
            throw ValidationError("topic name '" + name + "' contains invalid characters");
}

}  // namespace

std::string encode_entry(const Entry& e)
{
    json j = e.message;
    j["offset"] = e.offset;
    return to_line(j);
}

Entry decode_entry(const std::string& line)
{
    const auto j = json::parse(line);
    return Entry{j.at("offset").get<std::int64_t>(), j.get<SensorMessage>()};
}

std::optional<Entry> Cursor::next()
{
    auto batch = poll(1);
    if (batch.empty())
        return std::nullopt;
    return batch.front();
}

std::vector<Entry> Cursor::poll(std::size_t max)
{
    auto out = broker_->read(topic_, position_, max);
    if (!out.empty())
        position_ = out.back().offset + 1;
    return out;
}

Broker::Broker() = default;

Broker::Broker(std::string dir) : dir_(std::move(dir))
{
    std::filesystem::create_directories(*dir_ + "/topics");
    load();
    commit_log_ = std::make_unique<AppendFile>(*dir_ + "/commits.jsonl");
}

void Broker::load()
{
    for (const auto& f : std::filesystem::directory_iterator(*dir_ + "/topics")) {
        if (f.path().extension() != ".jsonl")
            continue;
        const auto name = f.path().stem().string();
        Topic& t = topics_[name];
        for (const auto& line : read_lines(f.path().string())) {
            Entry e;
            try {
                e = decode_entry(line);
            } catch (const std::exception&) {
                spdlog::warn("broker: skipping unreadable entry in topic {}", name);
                continue;
            }
            if (e.offset != static_cast<std::int64_t>(t.entries.size()))
                continue;
            t.seen.insert(dedup_key(e.message));
            t.entries.push_back(std::move(e));
        }
        t.log = std::make_unique<AppendFile>(f.path().string());
    }
    for (const auto& line : read_lines(*dir_ + "/commits.jsonl")) {
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            continue;
        auto& slot = commits_[{j.at("topic").get<std::string>(), j.at("consumer").get<std::string>()}];
        slot = std::max(slot, j.at("offset").get<std::int64_t>());
    }
}

Broker::Topic& Broker::topic_locked(const std::string& name)
{
    auto it = topics_.find(name);
    if (it != topics_.end())
        return it->second;
    check_topic_name(name);
    spdlog::info("broker: auto-created topic {}", name);
    Topic& t = topics_[name];
    if (dir_)
        t.log = std::make_unique<AppendFile>(*dir_ + "/topics/" + name + ".jsonl");
    return t;
}

void Broker::create_topic(const std::string& topic)
{
    std::unique_lock lock(mu_);
    if (!topics_.count(topic))
        topic_locked(topic);
}

PublishResult Broker::publish(const std::string& topic, const SensorMessage& msg)
{
    validate(msg);
    auto key = dedup_key(msg);
    std::unique_lock lock(mu_);
    Topic& t = topic_locked(topic);
    if (!t.seen.insert(std::move(key)).second) {
        ++duplicates_;
        return PublishResult::Duplicate;
    }
    Entry e{static_cast<std::int64_t>(t.entries.size()), msg};
    if (t.log)
        t.log->append(encode_entry(e));
    t.entries.push_back(std::move(e));
    return PublishResult::Accepted;
}

Cursor Broker::subscribe(const std::string& topic, std::int64_t from_offset) const
{
    std::shared_lock lock(mu_);
    if (!topics_.count(topic))
        throw NotFoundError("unknown topic " + topic);
    return Cursor(this, topic, std::max<std::int64_t>(0, from_offset));
}

Cursor Broker::resume(const std::string& topic, const std::string& consumer_id) const
{
    const auto c = committed(topic, consumer_id);
    return subscribe(topic, c ? *c + 1 : 0);
}

void Broker::commit(const std::string& topic, const std::string& consumer_id, std::int64_t offset)
{
    std::unique_lock lock(mu_);
    const auto it = topics_.find(topic);
    if (it == topics_.end())
        throw NotFoundError("unknown topic " + topic);
    if (offset < 0 || offset >= static_cast<std::int64_t>(it->second.entries.size()))
        throw ValidationError("commit offset " + std::to_string(offset) + " beyond high-water mark of " + topic);
    auto key = std::make_pair(topic, consumer_id);
    if (const auto c = commits_.find(key); c != commits_.end() && offset < c->second)
        throw RejectedError("commit for " + consumer_id + " on " + topic + " regresses from " +
                            std::to_string(c->second) + " to " + std::to_string(offset));
    commits_[key] = offset;
    if (commit_log_)
        commit_log_->append(to_line(json{{"topic", topic}, {"consumer", consumer_id}, {"offset", offset}}));
}

std::optional<std::int64_t> Broker::committed(const std::string& topic, const std::string& consumer_id) const
{
    std::shared_lock lock(mu_);
    const auto it = commits_.find({topic, consumer_id});
    if (it == commits_.end())
        return std::nullopt;
    return it->second;
}

std::int64_t Broker::high_water_mark(const std::string& topic) const
{
    std::shared_lock lock(mu_);
    const auto it = topics_.find(topic);
    if (it == topics_.end())
        throw NotFoundError("unknown topic " + topic);
    return static_cast<std::int64_t>(it->second.entries.size());
}

bool Broker::has_topic(const std::string& topic) const
{
    std::shared_lock lock(mu_);
    return topics_.count(topic) > 0;
}

std::vector<std::string> Broker::topics() const
{
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    for (const auto& [name, t] : topics_)
        out.push_back(name);
    return out;
}

std::vector<Entry> Broker::read(const std::string& topic, std::int64_t from, std::size_t max) const
{
    std::shared_lock lock(mu_);
    const auto it = topics_.find(topic);
    if (it == topics_.end())
        throw NotFoundError("unknown topic " + topic);
    const auto& entries = it->second.entries;
    std::vector<Entry> out;
    if (from < 0 || from >= static_cast<std::int64_t>(entries.size()))
        return out;
    const auto begin = entries.begin() + from;
    const auto n = std::min<std::size_t>(max, static_cast<std::size_t>(entries.end() - begin));
    out.assign(begin, begin + static_cast<std::ptrdiff_t>(n));
    return out;
}

std::uint64_t Broker::duplicates_rejected() const noexcept
{
    std::shared_lock lock(mu_);
    return duplicates_;
}

PublishResult CommandChannel::send(const ActuatorCommand& cmd)
{
    std::lock_guard lock(mu_);
    if (!cmd.command_id.empty() && !ids_.insert(cmd.command_id).second)
        return PublishResult::Duplicate;
    log_.push_back(cmd);
    return PublishResult::Accepted;
}

std::vector<ActuatorCommand> CommandChannel::take(const std::string& consumer_id)
{
    std::lock_guard lock(mu_);
    auto& pos = positions_[consumer_id];
    std::vector<ActuatorCommand> out(log_.begin() + static_cast<std::ptrdiff_t>(pos), log_.end());
    pos = log_.size();
    return out;
}

std::vector<ActuatorCommand> CommandChannel::history() const
{
    std::lock_guard lock(mu_);
    return log_;
}

}  // namespace sb::broker
