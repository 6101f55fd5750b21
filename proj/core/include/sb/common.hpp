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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sb {

using json = nlohmann::json;

/// Simulated tick index. Tick k covers the half-open window
/// [epoch + k*dt, epoch + (k+1)*dt).
using Tick = std::int64_t;
using TimestampMs = std::int64_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class RejectedError : public Error {
public:
    using Error::Error;
};

class SimulationFault : public Error {
public:
    using Error::Error;
};

/// Thrown by storage when a (possibly injected) outage prevents a write.
class UnavailableError : public Error {
public:
    using Error::Error;
};

enum class Quality { Good, Suspect };
enum class Source { Native, LegacyBAS };

NLOHMANN_JSON_SERIALIZE_ENUM(Quality, {{Quality::Good, "Good"}, {Quality::Suspect, "Suspect"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Source, {{Source::Native, "Native"}, {Source::LegacyBAS, "LegacyBAS"}})

/// Closed interval in a point's native unit.
struct Range {
    double min = 0.0;
    double max = 0.0;

    [[nodiscard]] bool contains(double v) const noexcept { return v >= min && v <= max; }
    /// Distance outside the interval, 0 when inside.
    [[nodiscard]] double excess(double v) const noexcept
    {
        if (v < min)
            return min - v;
        if (v > max)
            return v - max;
        return 0.0;
    }
    bool operator==(const Range&) const = default;
};

inline void to_json(json& j, const Range& r) { j = json::array({r.min, r.max}); }
inline void from_json(const json& j, Range& r)
{
    r.min = j.at(0).get<double>();
    r.max = j.at(1).get<double>();
}

/// Serializes to a single canonical line (sorted keys, no whitespace).
inline std::string to_line(const json& j) { return j.dump(); }

/// Append-only line file. Each append is one complete line; `sync` forces
/// fsync after the write.
class AppendFile {
public:
    AppendFile() = default;
    explicit AppendFile(std::string path, bool sync = false);
    AppendFile(AppendFile&&) noexcept;
    AppendFile& operator=(AppendFile&&) noexcept;
    AppendFile(const AppendFile&) = delete;
    AppendFile& operator=(const AppendFile&) = delete;
    ~AppendFile();

    void append(const std::string& line);
    void append_all(const std::vector<std::string>& lines);
    [[nodiscard]] const std::string& path() const noexcept { return path_; }
    [[nodiscard]] bool is_open() const noexcept { return fd_ >= 0; }

private:
    std::string path_;
    int fd_ = -1;
    bool sync_ = false;
};

/// Reads every complete line; a trailing partial line (torn write) is ignored.
std::vector<std::string> read_lines(const std::string& path);

/// Writes `content` to `path` atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content, bool sync = false);

std::optional<std::string> read_file(const std::string& path);

}  // namespace sb
