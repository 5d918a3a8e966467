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

#include "sqlrl/provider.hpp"

#include <json.hpp>

#include "sqlrl/dataset.hpp"
#include "sqlrl/error.hpp"

namespace sqlrl {

std::vector<ScriptedProvider::Entry> ScriptedProvider::read_transcript(const std::filesystem::path& path)
{
    std::vector<Entry> entries;
    for (const auto& j : read_jsonl(path)) {
        Entry e;
        if (j.contains("error")) {
            e.error = j.at("error").is_string() ? j.at("error").get<std::string>() : j.at("error").dump();
        } else if (j.contains("completions") && j.at("completions").is_array()) {
            e.completions = j.at("completions").get<std::vector<std::string>>();
        } else {
            throw Error(ErrorKind::InvalidInput, "transcript entries need 'completions' or 'error': " + j.dump());
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<std::string> ScriptedProvider::complete(const CompletionRequest& request)
{
    std::lock_guard lock(mutex_);
    seen_.push_back(request);
    if (cursor_ >= transcript_.size()) {
        throw Error(ErrorKind::ProviderUnavailable, "scripted transcript exhausted after " +
                                                        std::to_string(transcript_.size()) + " entries");
    }
    const auto& entry = transcript_[cursor_++];
    if (entry.error) throw Error(ErrorKind::ProviderUnavailable, *entry.error);
    return entry.completions;
}

std::size_t ScriptedProvider::calls() const
{
    std::lock_guard lock(mutex_);
    return seen_.size();
}

std::vector<CompletionRequest> ScriptedProvider::requests() const
{
    std::lock_guard lock(mutex_);
    return seen_;
}

std::vector<std::string> LineProtocolProvider::complete(const CompletionRequest& request)
{
    std::lock_guard lock(mutex_);
    if (!socket_.valid()) {
        socket_ = net::connect_tcp(endpoint_);
        reader_ = std::make_unique<net::LineReader>(socket_.fd());
    }
    const long id = next_id_++;
    nlohmann::json j{{"type", "completion"},
                     {"request_id", id},
                     {"prompt", request.prompt},
                     {"temperature", request.temperature},
                     {"n", request.max_candidates}};
    auto fail = [&](const std::string& why) -> Error {
        socket_.close();
        reader_.reset();
        return Error(ErrorKind::ProviderUnavailable, why);
    };
    if (!net::write_all(socket_.fd(), j.dump() + "\n")) throw fail("completion endpoint closed the connection");
    const auto line = reader_->next();
    if (!line) throw fail("completion endpoint closed the connection");
    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(*line);
    } catch (const nlohmann::json::parse_error&) {
        throw fail("unparsable reply from completion endpoint");
    }
    if (reply.contains("error")) throw fail("completion endpoint error: " + reply.at("error").dump());
    if (!reply.contains("completions") || !reply.at("completions").is_array()) {
        throw fail("completion reply lacks 'completions'");
    }
    return reply.at("completions").get<std::vector<std::string>>();
}

} // namespace sqlrl
