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

#include "sqlrl/net.hpp"

#include <cerrno>
#include <cstring>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "sqlrl/error.hpp"

namespace sqlrl::net {

Endpoint parse_endpoint(std::string_view text)
{
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos) throw Error(ErrorKind::InvalidInput, "expected host:port, got '" + std::string(text) + "'");
    Endpoint ep;
    if (colon > 0) ep.host = std::string(text.substr(0, colon));
    try {
        ep.port = std::stoi(std::string(text.substr(colon + 1)));
    } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidInput, "invalid port in '" + std::string(text) + "'");
    }
    if (ep.port < 0 || ep.port > 65535) throw Error(ErrorKind::InvalidInput, "port out of range");
    return ep;
}

Socket& Socket::operator=(Socket&& other) noexcept
{
    if (this != &other) {
        close();
        fd_ = other.release();
    }
    return *this;
}

Socket::~Socket() { close(); }

int Socket::release() noexcept
{
    const int fd = fd_;
    fd_ = -1;
    return fd;
}

void Socket::close() noexcept
{
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

void Socket::shutdown() noexcept
{
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

namespace {

sockaddr_in resolve(const Endpoint& endpoint)
{
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(endpoint.port));
    const std::string host = endpoint.host == "localhost" ? "127.0.0.1" : endpoint.host;
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        addrinfo hints{};
        hints.ai_family = AF_INET;
        addrinfo* result = nullptr;
        if (::getaddrinfo(host.c_str(), nullptr, &hints, &result) != 0 || !result) {
            throw Error(ErrorKind::InvalidInput, "cannot resolve host '" + endpoint.host + "'");
        }
        addr.sin_addr = reinterpret_cast<sockaddr_in*>(result->ai_addr)->sin_addr;
        ::freeaddrinfo(result);
    }
    return addr;
}

} // namespace

Socket connect_tcp(const Endpoint& endpoint)
{
    const auto addr = resolve(endpoint);
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) throw Error(ErrorKind::ProviderUnavailable, std::string("socket: ") + std::strerror(errno));
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
        throw Error(ErrorKind::ProviderUnavailable, "cannot connect to " + endpoint.host + ":" +
                                                        std::to_string(endpoint.port) + ": " + std::strerror(errno));
    }
    return s;
}

Socket listen_tcp(const Endpoint& endpoint, int backlog)
{
    const auto addr = resolve(endpoint);
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) throw Error(ErrorKind::InvalidInput, std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 || ::listen(s.fd(), backlog) != 0) {
        throw Error(ErrorKind::InvalidInput, "cannot listen on " + endpoint.host + ":" + std::to_string(endpoint.port) +
                                                 ": " + std::strerror(errno));
    }
    return s;
}

int local_port(const Socket& socket)
{
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    ::getsockname(socket.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
}

std::optional<std::string> LineReader::next()
{
    while (true) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        if (eof_) {
            if (buffer_.empty()) return std::nullopt;
            std::string line = std::move(buffer_);
            buffer_.clear();
            return line;
        }
        char chunk[4096];
        const auto n = ::read(fd_, chunk, sizeof chunk);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            eof_ = true;
            continue;
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

bool write_all(int fd, std::string_view data)
{
    while (!data.empty()) {
        const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

} // namespace sqlrl::net
