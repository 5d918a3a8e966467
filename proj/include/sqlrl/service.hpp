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

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <iosfwd>
#include <list>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "sqlrl/net.hpp"
#include "sqlrl/protocol.hpp"

namespace sqlrl::service {

inline constexpr const char* kBindAddressEnv = "SQLRL_BIND_ADDRESS";

struct ServiceOptions {
    int workers = 4;
    int default_timeout_ms = kDefaultTimeoutMs;
    std::size_t queue_capacity = 256;
    RewardOptions reward; // timeout_ms is taken from default_timeout_ms
};

/// Fixed-size thread pool over a bounded FIFO; push() blocks while full.
class WorkerPool {
public:
    WorkerPool(int workers, std::size_t capacity);
    ~WorkerPool();
    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    /// Returns false once the pool is shutting down.
    bool push(std::function<void()> task);
    void shutdown();

private:
    void run();

    std::mutex mutex_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
    std::deque<std::function<void()>> tasks_;
    std::size_t capacity_;
    bool closing_ = false;
    std::vector<std::thread> threads_;
};

/// Batch reward scoring over newline-delimited JSON. One response line per
/// request; responses may be reordered and carry the request_id.
class ScoringService {
public:
    explicit ScoringService(ServiceOptions options);
    ~ScoringService();

    /// Standard-streams mode: returns after EOF once every response is written.
    void serve_stream(std::istream& in, std::ostream& out);

    /// Binds, reports the bound port through `on_ready`, and accepts
    /// connections until stop().
    void serve_tcp(const net::Endpoint& endpoint, const std::function<void(int)>& on_ready = {});

    void stop();

private:
    struct Connection;
    void handle_connection(std::shared_ptr<Connection> conn);

    ServiceOptions options_;
    WorkerPool pool_;
    std::atomic<bool> stopping_{false};
    std::mutex conn_mutex_;
    std::list<std::shared_ptr<Connection>> connections_;
    std::vector<std::thread> readers_;
    net::Socket listener_;
};

} // namespace sqlrl::service
