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
#include <string>

#include "sb/common.hpp"

namespace sb {

enum class ValueProvenance { Observed, Imputed };

NLOHMANN_JSON_SERIALIZE_ENUM(ValueProvenance,
                             {{ValueProvenance::Observed, "Observed"}, {ValueProvenance::Imputed, "Imputed"}})

struct PointValue {
    double value = 0.0;
    ValueProvenance provenance = ValueProvenance::Imputed;
    std::int64_t age_ticks = 0;
    Quality quality = Quality::Good;
    bool late = false;

    bool operator==(const PointValue&) const = default;
};

/// Coherent snapshot of every registered point at one tick.
struct StateVector {
    Tick tick = 0;
    TimestampMs tick_ts = 0;
    std::map<std::string, PointValue> values;

    bool operator==(const StateVector&) const = default;
};

void to_json(json& j, const PointValue& v);
void from_json(const json& j, PointValue& v);
void to_json(json& j, const StateVector& sv);
void from_json(const json& j, StateVector& sv);

/// Canonical single-line encoding; equal vectors encode to equal bytes.
std::string encode(const StateVector& sv);

}  // namespace sb
