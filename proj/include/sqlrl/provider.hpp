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

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sqlrl/net.hpp"

namespace sqlrl {

struct CompletionRequest {
    std::string prompt;
    double temperature = 1.0;
    int max_candidates = 1;
};

/// Source of LLM completions for the curation pipelines. Implementations
/// throw Error(ProviderUnavailable) when they cannot answer.
class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;
    virtual std::vector<std::string> complete(const CompletionRequest& request) = 0;
};

/// Replays a fixed transcript, one entry per call, and keeps the prompts it
/// was given. Transcript files hold one JSON object per line, either
/// {"completions": ["...", ...]} or {"error": "..."}.
class ScriptedProvider final : public CompletionProvider {
public:
    struct Entry {
        std::vector<std::string> completions;
        std::optional<std::string> error;
    };

    explicit ScriptedProvider(std::vector<Entry> transcript) : transcript_(std::move(transcript)) {}
    [[nodiscard]] static std::vector<Entry> read_transcript(const std::filesystem::path& path);

    std::vector<std::string> complete(const CompletionRequest& request) override;

    [[nodiscard]] std::size_t calls() const;
    [[nodiscard]] std::vector<CompletionRequest> requests() const;

private:
    mutable std::mutex mutex_;
    std::vector<Entry> transcript_;
    std::size_t cursor_ = 0;
    std::vector<CompletionRequest> seen_;
};

/// Talks to an external completion endpoint over the newline-delimited JSON
/// protocol: sends {"type":"completion","request_id","prompt","temperature","n"}
/// and expects {"request_id","completions":[...]} or {"request_id","error":{...}}.
class LineProtocolProvider final : public CompletionProvider {
public:
    explicit LineProtocolProvider(net::Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

    std::vector<std::string> complete(const CompletionRequest& request) override;

private:
    std::mutex mutex_;
    net::Endpoint endpoint_;
    net::Socket socket_;
    std::unique_ptr<net::LineReader> reader_;
    long next_id_ = 1;
};

} // namespace sqlrl
