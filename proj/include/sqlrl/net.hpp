/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sqlrl::net {

struct Endpoint {
    std::string host = "127.0.0.1";
    int port = 0;
};

/// Parses "host:port" (host may be empty, meaning loopback).
[[nodiscard]] Endpoint parse_endpoint(std::string_view text);

/// Owning file descriptor for a TCP socket.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) noexcept : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(other.release()) {}
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket();

    [[nodiscard]] int fd() const noexcept { return fd_; }
    [[nodiscard]] bool valid() const noexcept { return fd_ >= 0; }
    int release() noexcept;
    void close() noexcept;
    /// Stops further reads and writes without releasing the descriptor.
    void shutdown() noexcept;

private:
    int fd_ = -1;
};

[[nodiscard]] Socket connect_tcp(const Endpoint& endpoint);
[[nodiscard]] Socket listen_tcp(const Endpoint& endpoint, int backlog = 64);
[[nodiscard]] int local_port(const Socket& socket);

/// Buffered line reader over a socket.
class LineReader {
public:
    explicit LineReader(int fd) : fd_(fd) {}
    /// Next line without its terminator, or nullopt at end of stream.
    std::optional<std::string> next();

private:
    int fd_;
    std::string buffer_;
    bool eof_ = false;
};

/// Writes all bytes; returns false when the peer has gone away.
bool write_all(int fd, std::string_view data);

} // namespace sqlrl::net
