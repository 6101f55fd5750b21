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

#include <gtest/gtest.h>

#include "sb/legacy.hpp"

using namespace sb;
using namespace sb::iface;

namespace {

LegacyMapping mapping()
{
    return json{{"points", {{"CH1.CHWST", {{"point_id", "legacy.chwst"}, {"unit", "degF"}}}}}}.get<LegacyMapping>();
}

}  // namespace

TEST(LegacyCsv, ParsesRowsSkippingHeader)
{
    const auto rows = parse_legacy_csv("timestamp,point,value,status\r\n1000,CH1.CHWST,44.5,ok\n\n2000,X,1e2,alarm\n");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].timestamp, 1000);
    EXPECT_DOUBLE_EQ(rows[1].value, 100.0);
    EXPECT_EQ(rows[1].status, "alarm");
}

TEST(LegacyCsv, ErrorsNameTheLine)
{
    try {
        parse_legacy_csv("1000,A,1,ok\n1000,A,1\n");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
    }
    EXPECT_THROW(parse_legacy_csv("abc,A,1,ok\n"), ValidationError);
}

TEST(LegacyAdapter, TranslatesWithLegacySourceAndDefaultDevice)
{
    LegacyAdapter a(mapping(), {});
    const auto m = a.translate(LegacyRow{5000, "CH1.CHWST", 44.0, "ok"});
    ASSERT_TRUE(m);
    EXPECT_EQ(m->point_id, "legacy.chwst");
    EXPECT_EQ(m->device_id, "legacy.chwst");
    EXPECT_EQ(m->unit, "degF");
    EXPECT_EQ(m->source, Source::LegacyBAS);
    EXPECT_EQ(m->seq_no, 5000);
    EXPECT_EQ(a.translate(LegacyRow{5000, "CH1.CHWST", 44.0, "fault"})->quality, Quality::Suspect);
    EXPECT_FALSE(a.translate(LegacyRow{5000, "nope", 1.0, "ok"}).has_value());
}

TEST(LegacyAdapter, RefusesCollisions)
{
    EXPECT_THROW(LegacyAdapter(mapping(), {"legacy.chwst"}), ConflictError);
    auto m = mapping();
    m.points["CH2.CHWST"] = LegacyTarget{"legacy.chwst", "d", "degF"};
    EXPECT_THROW(LegacyAdapter(m, {}), ConflictError);
}

TEST(LegacyAdapter, IngestDedupsAndQuarantines)
{
    LegacyAdapter a(mapping(), {});
    broker::Broker b;
    const std::vector<LegacyRow> rows{{1000, "CH1.CHWST", 44.0, "ok"},
                                      {1000, "CH1.CHWST", 44.0, "ok"},
                                      {2000, "CH1.CHWST", 45.0, "ok"},
                                      {2000, "AHU9.XYZ", 1.0, "ok"}};
    const auto s = a.ingest(rows, b);
    EXPECT_EQ(s.published, 2u);
    EXPECT_EQ(s.duplicates, 1u);
    EXPECT_EQ(s.quarantined, 1u);
    EXPECT_EQ(b.read("quarantine", 0).front().message.point_id, "legacy:AHU9.XYZ");
}

TEST(LegacyMappingJson, RoundTrip)
{
    const json j = mapping();
    EXPECT_EQ(json(j.get<LegacyMapping>()), j);
}
