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

#include <thread>

#include <gtest/gtest.h>

#include "sb/broker.hpp"
#include "tmpdir.hpp"

using namespace sb;
using namespace sb::broker;

namespace {

SensorMessage msg(const std::string& point, std::int64_t seq, double value = 1.0)
{
    SensorMessage m;
    m.device_id = "dev:" + point;
    m.point_id = point;
    m.seq_no = seq;
    m.timestamp = 1767225600000 + seq * 1000;
    m.value = value;
    m.unit = "u";
    return m;
}

}  // namespace

TEST(Broker, AssignsContiguousOffsets)
{
    Broker b;
    for (int i = 1; i <= 5; ++i)
        EXPECT_EQ(b.publish("t", msg("p", i)), PublishResult::Accepted);
    const auto entries = b.read("t", 0);
    ASSERT_EQ(entries.size(), 5u);
    for (std::size_t i = 0; i < entries.size(); ++i)
        EXPECT_EQ(entries[i].offset, static_cast<std::int64_t>(i));
    EXPECT_EQ(b.high_water_mark("t"), 5);
}

TEST(Broker, DeduplicatesOnProducerKey)
{
    Broker b;
    EXPECT_EQ(b.publish("t", msg("p", 1, 1.0)), PublishResult::Accepted);
    EXPECT_EQ(b.publish("t", msg("p", 1, 99.0)), PublishResult::Duplicate);
    EXPECT_EQ(b.publish("t", msg("q", 1)), PublishResult::Accepted);
    EXPECT_EQ(b.high_water_mark("t"), 2);
    EXPECT_EQ(b.duplicates_rejected(), 1u);
    EXPECT_DOUBLE_EQ(b.read("t", 0).front().message.value, 1.0);
}

TEST(Broker, UnknownTopicSubscribeThrows)
{
    Broker b;
    EXPECT_THROW((void)b.subscribe("nope", 0), NotFoundError);
    b.create_topic("empty");
    EXPECT_FALSE(b.subscribe("empty", 0).next().has_value());
}

TEST(Broker, CursorPollsInOrder)
{
    Broker b;
    for (int i = 1; i <= 10; ++i)
        b.publish("t", msg("p", i));
    auto c = b.subscribe("t", 3);
    const auto first = c.poll(4);
    ASSERT_EQ(first.size(), 4u);
    EXPECT_EQ(first.front().offset, 3);
    EXPECT_EQ(c.position(), 7);
    EXPECT_EQ(c.poll().size(), 3u);
    EXPECT_FALSE(c.next().has_value());
}

TEST(Broker, CommitsRejectRegressionAndFutureOffsets)
{
    Broker b;
    for (int i = 1; i <= 3; ++i)
        b.publish("t", msg("p", i));
    b.commit("t", "c1", 1);
    EXPECT_EQ(b.committed("t", "c1"), 1);
    EXPECT_THROW(b.commit("t", "c1", 0), Error);
    EXPECT_THROW(b.commit("t", "c1", 3), Error);
    EXPECT_FALSE(b.committed("t", "c2").has_value());
    EXPECT_EQ(b.resume("t", "c1").position(), 2);
    EXPECT_EQ(b.resume("t", "c2").position(), 0);
}

TEST(Broker, FileBackedReloadKeepsLogCommitsAndDedup)
{
    sbtest::TmpDir dir;
    {
        Broker b(dir.str());
        for (int i = 1; i <= 4; ++i)
            b.publish("t", msg("p", i));
        b.commit("t", "engine", 2);
    }
    Broker b(dir.str());
    EXPECT_EQ(b.high_water_mark("t"), 4);
    EXPECT_EQ(b.committed("t", "engine"), 2);
    EXPECT_EQ(b.publish("t", msg("p", 4)), PublishResult::Duplicate);
    EXPECT_EQ(b.publish("t", msg("p", 5)), PublishResult::Accepted);
    EXPECT_EQ(b.read("t", 4).front().offset, 4);
}

TEST(Broker, EntryLineRoundTrip)
{
    Entry e{12, msg("p", 3, 4.5)};
    EXPECT_EQ(decode_entry(encode_entry(e)), e);
}

TEST(Broker, ConcurrentPublishersLoseNothing)
{
    Broker b;
    std::vector<std::thread> threads;
    for (int w = 0; w < 4; ++w)
        threads.emplace_back([&b, w] {
            for (int i = 1; i <= 250; ++i)
                b.publish("t", msg("p" + std::to_string(w), i));
        });
    for (auto& t : threads)
        t.join();
    EXPECT_EQ(b.high_water_mark("t"), 1000);
    std::map<std::string, std::int64_t> last;
    for (const auto& e : b.read("t", 0)) {
        EXPECT_GT(e.message.seq_no, last[e.message.point_id]);
        last[e.message.point_id] = e.message.seq_no;
    }
}
