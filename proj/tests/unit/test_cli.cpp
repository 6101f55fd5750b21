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

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include <gtest/gtest.h>

#include "sb/common.hpp"
#include "tmpdir.hpp"

using sb::json;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

/// Runs sbctl through the shell with stderr folded into stdout.
Result sbctl(const std::string& args, const std::string& env = {})
{
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" SBCTL_PATH "' " + args + " 2>&1";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p)
        return r;
    char buf[4096];
    for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;)
        r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string source(const std::string& rel) { return std::string(SB_SOURCE_DIR) + "/" + rel; }

}  // namespace

TEST(Cli, UsageErrorsExitTwo)
{
    EXPECT_EQ(sbctl("").code, 2);
    EXPECT_EQ(sbctl("run --ticks notanumber").code, 2);
    EXPECT_EQ(sbctl("--help").code, 0);
}

TEST(Cli, ValidateAcceptsShippedConfigs)
{
    EXPECT_EQ(sbctl("validate --config '" + source("config/runtime.json") + "' --scenario '" +
                    source("config/scenarios/demo.json") + "'")
                  .code,
              0);
    EXPECT_EQ(sbctl("validate --config '" + source("config/legacy/runtime-legacy.json") + "'").code, 0);
}

TEST(Cli, InvalidConfigListsEveryError)
{
    sbtest::TmpDir dir;
    std::ofstream(dir.sub("bad.json")) << R"({"probe_ticks": -1, "watchdog_ticks": 0, "nonsense": true})";
    const auto r = sbctl("validate --config '" + dir.sub("bad.json") + "'");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.out.find("probe_ticks"), std::string::npos);
    EXPECT_NE(r.out.find("watchdog_ticks"), std::string::npos);
    EXPECT_NE(r.out.find("nonsense"), std::string::npos);
}

TEST(Cli, InvalidScenarioCreatesNoArtifacts)
{
    sbtest::TmpDir dir;
    std::ofstream(dir.sub("s.json"))
        << R"({"events":[{"tick":1,"kind":"FaultInjection","target":"nowhere","parameters":{"mode":"bias"}}]})";
    const auto r = sbctl("run --ticks 5 --scenario '" + dir.sub("s.json") + "' --out '" + dir.sub("out") + "'");
    EXPECT_EQ(r.code, 3);
    EXPECT_FALSE(std::filesystem::exists(dir.sub("out")));
}

TEST(Cli, RunWritesArtifactsAndFlagBeatsEnv)
{
    sbtest::TmpDir dir;
    const auto r = sbctl("run --ticks 30 --out '" + dir.sub("out") + "'", "SB_TICKS=10 SB_LOG_LEVEL=off");
    ASSERT_EQ(r.code, 0) << r.out;
    for (const auto* f : {"summary.json", "journal.jsonl", "events.json", "tickets.json", "commands.json"})
        EXPECT_TRUE(std::filesystem::exists(dir.sub(std::string("out/") + f))) << f;
    EXPECT_TRUE(std::filesystem::is_directory(dir.sub("out/bkr")));
    EXPECT_TRUE(std::filesystem::is_directory(dir.sub("out/broker")));
    const auto summary = json::parse(sb::read_file(dir.sub("out/summary.json")).value());
    EXPECT_EQ(summary.at("ticks"), 30);

    sbtest::TmpDir env_dir;
    ASSERT_EQ(sbctl("run --out '" + env_dir.sub("out") + "'", "SB_TICKS=12 SB_LOG_LEVEL=off").code, 0);
    EXPECT_EQ(json::parse(sb::read_file(env_dir.sub("out/summary.json")).value()).at("ticks"), 12);
}

TEST(Cli, ClientVerbsReportUnreachableAndMissingActor)
{
    const auto r = sbctl("status --api-addr 127.0.0.1:1");
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.out.find("retry"), std::string::npos);
    EXPECT_EQ(sbctl("ack tk-000001 --api-addr 127.0.0.1:1").code, 2);
}
