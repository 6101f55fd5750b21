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

#include "sb/state_vector.hpp"

namespace sb {

void to_json(json& j, const PointValue& v)
{
    j = json{{"v", v.value}, {"p", v.provenance}, {"a", v.age_ticks}, {"q", v.quality}};
    if (v.late)
        j["late"] = true;
}

void from_json(const json& j, PointValue& v)
{
    v.value = j.at("v").get<double>();
    v.provenance = j.at("p").get<ValueProvenance>();
    v.age_ticks = j.at("a").get<std::int64_t>();
    v.quality = j.value("q", Quality::Good);
    v.late = j.value("late", false);
}

void to_json(json& j, const StateVector& sv)
{
    j = json{{"tick", sv.tick}, {"tick_ts", sv.tick_ts}, {"values", sv.values}};
}

void from_json(const json& j, StateVector& sv)
{
    sv.tick = j.at("tick").get<Tick>();
    sv.tick_ts = j.at("tick_ts").get<TimestampMs>();
    sv.values = j.at("values").get<std::map<std::string, PointValue>>();
}

std::string encode(const StateVector& sv) { return json(sv).dump(); }

}  // namespace sb
