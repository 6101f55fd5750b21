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

#include "sb/simulator.hpp"

namespace sb {

/// The 50-point synthetic office building used by the demo, the tests and
/// the benchmarks: ten zones, a chiller plant with a waterside economizer,
/// an electric boiler, two shading facades, mains supply, a backup
/// generator, an elevator bank and a security panel.
sim::SimConfig reference_building();

}  // namespace sb
