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

// Broker semantics under concurrent publishers, injected duplicates and
// forced restarts.

#include <map>
#include <memory>
#include <set>
#include <thread>

#include "report.hpp"
#include "sb/broker.hpp"

using namespace sb;

namespace {

struct CaseResult {
    bool ordered = true;
    bool gap_free = true;
    bool duplicate_free = true;
    bool offsets_contiguous = true;
    bool resumed_exactly = true;
    std::string detail;
};

SensorMessage msg(int producer, std::int64_t seq)
{
    SensorMessage m;
    m.device_id = "dev" + std::to_string(producer);
    m.point_id = "p" + std::to_string(producer);
    m.seq_no = seq;
    m.timestamp = seq * 1000;
    m.value = static_cast<double>(seq) * 0.5 + producer;
    m.unit = "u";
    return m;
}

CaseResult run_case(std::uint64_t seed, const std::string& dir)
{
    std::mt19937_64 rng(seed);
    const int producers = 1 + static_cast<int>(rng() % 4);
    const int per_producer = 5 + static_cast<int>(rng() % 30);
    const int restarts = static_cast<int>(rng() % 3);
    const std::string topic = "t";
    const std::string consumer = "c";

    std::filesystem::remove_all(dir);
    auto broker = std::make_unique<broker::Broker>(dir);

    // Each producer's plan: its sequence with retries (duplicates) spliced in.
    std::vector<std::vector<std::int64_t>> plans(producers);
    for (int p = 0; p < producers; ++p)
        for (std::int64_t s = 1; s <= per_producer; ++s) {
            plans[p].push_back(s);
            if (rng() % 5 == 0)
                plans[p].push_back(1 + static_cast<std::int64_t>(rng() % s));
        }

    // Split every plan into (restarts + 1) phases.
    std::vector<std::vector<std::size_t>> cuts(producers);
    for (int p = 0; p < producers; ++p) {
        std::set<std::size_t> c;
        for (int r = 0; r < restarts; ++r)
            c.insert(rng() % (plans[p].size() + 1));
        cuts[p].assign(c.begin(), c.end());
        cuts[p].push_back(plans[p].size());
    }

    std::vector<broker::Entry> consumed;
    std::vector<std::size_t> next(producers, 0);
    for (int phase = 0; phase <= restarts; ++phase) {
        std::vector<std::thread> threads;
        for (int p = 0; p < producers; ++p) {
            const auto end = phase < static_cast<int>(cuts[p].size()) ? cuts[p][phase] : plans[p].size();
            const auto begin = next[p];
            next[p] = std::max(begin, end);
            threads.emplace_back([&, p, begin, end] {
                for (auto i = begin; i < end; ++i)
                    broker->publish(topic, msg(p, plans[p][i]));
            });
        }
        // Consume concurrently with publishing, committing as we go.
        auto cursor = broker->has_topic(topic) ? std::optional(broker->resume(topic, consumer)) : std::nullopt;
        for (auto& t : threads)
            t.join();
        if (!cursor && broker->has_topic(topic))
            cursor = broker->resume(topic, consumer);
        if (cursor) {
            const auto take = rng() % 2 == 0 ? SIZE_MAX : static_cast<std::size_t>(rng() % 20);
            for (const auto& e : cursor->poll(take)) {
                consumed.push_back(e);
                broker->commit(topic, consumer, e.offset);
            }
        }
        // Forced restart: drop the broker, then replay the last message of
        // every producer as an at-least-once retry.
        broker = std::make_unique<broker::Broker>(dir);
        for (int p = 0; p < producers; ++p)
            if (next[p] > 0)
                broker->publish(topic, msg(p, plans[p][next[p] - 1]));
    }
    if (broker->has_topic(topic)) {
        auto cursor = broker->resume(topic, consumer);
        for (const auto& e : cursor.poll()) {
            consumed.push_back(e);
            broker->commit(topic, consumer, e.offset);
        }
    }

    CaseResult r;
    const auto hwm = broker->has_topic(topic) ? broker->high_water_mark(topic) : 0;
    r.resumed_exactly = static_cast<std::int64_t>(consumed.size()) == hwm;
    for (std::size_t i = 0; i < consumed.size(); ++i)
        if (consumed[i].offset != static_cast<std::int64_t>(i))
            r.offsets_contiguous = false;
    std::map<int, std::vector<std::int64_t>> seen;
    for (const auto& e : consumed)
        seen[std::stoi(e.message.point_id.substr(1))].push_back(e.message.seq_no);
    for (int p = 0; p < producers; ++p) {
        const auto& s = seen[p];
        std::set<std::int64_t> uniq(s.begin(), s.end());
        if (uniq.size() != s.size())
            r.duplicate_free = false;
        if (!std::is_sorted(s.begin(), s.end()))
            r.ordered = false;
        if (static_cast<int>(uniq.size()) != per_producer || *uniq.begin() != 1 || *uniq.rbegin() != per_producer)
            r.gap_free = false;
    }
    if (!(r.ordered && r.gap_free && r.duplicate_free && r.offsets_contiguous && r.resumed_exactly))
        r.detail = "seed " + std::to_string(seed);
    return r;
}

}  // namespace

int main()
{
    acceptance::Report report("broker");
    acceptance::Stopwatch clock;
    acceptance::TempDir tmp("sb-acc-broker");

    constexpr int kCases = 1000;
    int ordered = 0, gap_free = 0, dup_free = 0, contiguous = 0, resumed = 0;
    std::string first_failure;
    for (int i = 0; i < kCases; ++i) {
        const auto r = run_case(0x5eed0000ULL + static_cast<std::uint64_t>(i), (tmp.path() / "b").string());
        ordered += r.ordered;
        gap_free += r.gap_free;
        dup_free += r.duplicate_free;
        contiguous += r.offsets_contiguous;
        resumed += r.resumed_exactly;
        if (first_failure.empty())
            first_failure = r.detail;
    }
    const auto tally = [&](int n) {
        return std::to_string(n) + "/" + std::to_string(kCases) + (first_failure.empty() ? "" : " first " + first_failure);
    };
    report.check("cases_at_least_1000", kCases >= 1000, std::to_string(kCases) + " randomized cases");
    report.check("per_producer_order", ordered == kCases, tally(ordered));
    report.check("gap_free", gap_free == kCases, tally(gap_free));
    report.check("duplicate_free", dup_free == kCases, tally(dup_free));
    report.check("offsets_contiguous", contiguous == kCases, tally(contiguous));
    report.check("restart_resumes_after_commit", resumed == kCases, tally(resumed));
    const auto elapsed = clock.seconds();
    report.check("runtime_under_30s", elapsed < 30.0, acceptance::fmt_double(elapsed, 2) + " s");
    return report.exit_code();
}
