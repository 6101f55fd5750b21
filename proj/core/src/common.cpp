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

#include "sb/common.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

namespace sb {

namespace {

void write_all(int fd, const std::string& data, const std::string& path)
{
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        const ssize_t n = ::write(fd, p, left);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            throw Error("write failed on " + path + ": " + std::strerror(errno));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
}

}  // namespace

AppendFile::AppendFile(std::string path, bool sync) : path_(std::move(path)), sync_(sync)
{
    const auto parent = std::filesystem::path(path_).parent_path();
    if (!parent.empty())
        std::filesystem::create_directories(parent);
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0)
        throw Error("cannot open " + path_ + ": " + std::strerror(errno));
}

AppendFile::AppendFile(AppendFile&& other) noexcept
    : path_(std::move(other.path_)), fd_(std::exchange(other.fd_, -1)), sync_(other.sync_)
{
}

AppendFile& AppendFile::operator=(AppendFile&& other) noexcept
{
    if (this != &other) {
        if (fd_ >= 0)
            ::close(fd_);
        path_ = std::move(other.path_);
        fd_ = std::exchange(other.fd_, -1);
        sync_ = other.sync_;
    }
    return *this;
}

AppendFile::~AppendFile()
{
    if (fd_ >= 0)
        ::close(fd_);
}

void AppendFile::append(const std::string& line)
{
    if (fd_ < 0)
        return;
    std::string buf = line;
    buf.push_back('\n');
    write_all(fd_, buf, path_);
    if (sync_)
        ::fsync(fd_);
}

void AppendFile::append_all(const std::vector<std::string>& lines)
{
    if (fd_ < 0 || lines.empty())
        return;
    std::string buf;
    for (const auto& l : lines) {
        buf += l;
        buf.push_back('\n');
    }
    write_all(fd_, buf, path_);
    if (sync_)
        ::fsync(fd_);
}

std::vector<std::string> read_lines(const std::string& path)
{
    std::vector<std::string> out;
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return out;
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();
    std::size_t start = 0;
    while (true) {
        const auto nl = data.find('\n', start);
        if (nl == std::string::npos)
            break;
        if (nl > start)
            out.emplace_back(data.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content, bool sync)
{
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty())
        std::filesystem::create_directories(parent);
    const std::string tmp = path + ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0)
        throw Error("cannot open " + tmp + ": " + std::strerror(errno));
    try {
        write_all(fd, content, tmp);
    } catch (...) {
        ::close(fd);
        throw;
    }
    if (sync)
        ::fsync(fd);
    ::close(fd);
    std::filesystem::rename(tmp, path);
}

std::optional<std::string> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace sb
