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

#include "sqlrl/service.hpp"

#include <istream>
#include <ostream>

#include <sys/socket.h>

namespace sqlrl::service {

WorkerPool::WorkerPool(int workers, std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity))
{
    for (int i = 0; i < std::max(1, workers); ++i) threads_.emplace_back([this] { run(); });
}

WorkerPool::~WorkerPool() { shutdown(); }

bool WorkerPool::push(std::function<void()> task)
{
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return closing_ || tasks_.size() < capacity_; });
    if (closing_) return false;
    tasks_.push_back(std::move(task));
    not_empty_.notify_one();
    return true;
}

void WorkerPool::shutdown()
{
    {
        std::lock_guard lock(mutex_);
        if (closing_ && threads_.empty()) return;
        closing_ = true;
    }
    not_empty_.notify_all();
    not_full_.notify_all();
    for (auto& t : threads_) {
        if (t.joinable()) t.join();
    }
    threads_.clear();
}

void WorkerPool::run()
{
    while (true) {
        std::function<void()> task;
        {
            std::unique_lock lock(mutex_);
            not_empty_.wait(lock, [&] { return closing_ || !tasks_.empty(); });
            // Drain what was accepted before closing.
            if (tasks_.empty()) return;
            task = std::move(tasks_.front());
            tasks_.pop_front();
            not_full_.notify_one();
        }
        task();
    }
}

namespace {

RewardOptions reward_defaults(const ServiceOptions& options)
{
    RewardOptions r = options.reward;
    r.timeout_ms = options.default_timeout_ms;
    return r;
}

// Counts tasks still writing to a connection.
class Outstanding {
public:
    void add()
    {
        std::lock_guard lock(mutex_);
        ++count_;
    }
    void done()
    {
        std::lock_guard lock(mutex_);
        if (--count_ == 0) cv_.notify_all();
    }
    void wait()
    {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return count_ == 0; });
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t count_ = 0;
};

} // namespace

struct ScoringService::Connection {
    net::Socket socket;
    std::mutex write_mutex;
    Outstanding outstanding;
};

ScoringService::ScoringService(ServiceOptions options)
    : options_(std::move(options)), pool_(options_.workers, options_.queue_capacity)
{
}

ScoringService::~ScoringService()
{
    stop();
    pool_.shutdown();
}

void ScoringService::serve_stream(std::istream& in, std::ostream& out)
{
    protocol::Session session(reward_defaults(options_));
    std::mutex write_mutex;
    Outstanding outstanding;
    auto emit = [&](const std::string& line) {
        std::lock_guard lock(write_mutex);
        out << line << '\n';
        out.flush();
    };

    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto admitted = session.admit(line);
        if (auto* error = std::get_if<std::string>(&admitted)) {
            emit(*error);
            continue;
        }
        outstanding.add();
        auto request = std::make_shared<protocol::ScoreRequest>(std::get<protocol::ScoreRequest>(std::move(admitted)));
        const bool queued = pool_.push([&, request] {
            emit(session.execute(*request));
            outstanding.done();
        });
        if (!queued) {
            outstanding.done();
            break;
        }
    }
    outstanding.wait();
}

void ScoringService::handle_connection(std::shared_ptr<Connection> conn)
{
    protocol::Session session(reward_defaults(options_));
    auto emit = [conn](const std::string& line) {
        std::lock_guard lock(conn->write_mutex);
        net::write_all(conn->socket.fd(), line + "\n");
    };
    net::LineReader reader(conn->socket.fd());
    while (auto line = reader.next()) {
        if (line->find_first_not_of(" \t\r") == std::string::npos) continue;
        auto admitted = session.admit(*line);
        if (auto* error = std::get_if<std::string>(&admitted)) {
            emit(*error);
            continue;
        }
        conn->outstanding.add();
        auto request = std::make_shared<protocol::ScoreRequest>(std::get<protocol::ScoreRequest>(std::move(admitted)));
        // session outlives the task: outstanding.wait() below blocks until it finishes.
        const bool queued = pool_.push([&session, emit, conn, request] {
            emit(session.execute(*request));
            conn->outstanding.done();
        });
        if (!queued) {
            conn->outstanding.done();
            break;
        }
    }
    conn->outstanding.wait();
    ::shutdown(conn->socket.fd(), SHUT_WR);
    std::lock_guard lock(conn_mutex_);
    connections_.remove(conn);
}

void ScoringService::serve_tcp(const net::Endpoint& endpoint, const std::function<void(int)>& on_ready)
{
    listener_ = net::listen_tcp(endpoint);
    if (on_ready) on_ready(net::local_port(listener_));
    while (!stopping_) {
        const int fd = ::accept(listener_.fd(), nullptr, nullptr);
        if (fd < 0) {
            if (stopping_) break;
            continue;
        }
        auto conn = std::make_shared<Connection>();
        conn->socket = net::Socket(fd);
        {
            std::lock_guard lock(conn_mutex_);
            connections_.push_back(conn);
        }
        readers_.emplace_back([this, conn] { handle_connection(conn); });
    }
    for (auto& t : readers_) {
        if (t.joinable()) t.join();
    }
    readers_.clear();
}

void ScoringService::stop()
{
    if (stopping_.exchange(true)) return;
    listener_.shutdown();
    std::lock_guard lock(conn_mutex_);
    for (auto& c : connections_) ::shutdown(c->socket.fd(), SHUT_RD);
}

} // namespace sqlrl::service
