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
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sqlrl/error.hpp"
#include "sqlrl/reward.hpp"

namespace sqlrl::protocol {

struct ScoreRequest {
    nlohmann::json request_id;
    std::string db_path;
    std::string gold_sql;
    std::vector<std::string> candidates;
    std::optional<int> timeout_ms;
};

struct ScoreResponse {
    nlohmann::json request_id;
    std::vector<double> rewards;
    std::vector<std::string> tiers;
    std::vector<std::optional<std::string>> diagnostics;
};

/// Throws Error(MalformedRequest).
[[nodiscard]] ScoreRequest parse_request(const nlohmann::json& j);
[[nodiscard]] nlohmann::json request_to_json(const ScoreRequest& r);

[[nodiscard]] nlohmann::json response_to_json(const ScoreResponse& r);
[[nodiscard]] ScoreResponse response_from_json(const nlohmann::json& j);

/// {"request_id": id-or-null, "error": {"kind": ..., "message": ...}}
[[nodiscard]] nlohmann::json error_json(const nlohmann::json& request_id, ErrorKind kind, const std::string& message);

[[nodiscard]] ScoreResponse score_request(const ScoreRequest& request, const RewardOptions& defaults);

/// Per-connection state: parses lines and enforces request_id uniqueness.
/// admit() runs in arrival order; execute() may run on any thread.
class Session {
public:
    explicit Session(RewardOptions defaults) : defaults_(std::move(defaults)) {}

    /// Either a request ready to score or a finished error line.
    [[nodiscard]] std::variant<ScoreRequest, std::string> admit(const std::string& line);
    [[nodiscard]] std::string execute(const ScoreRequest& request) const;

    /// admit + execute, for sequential callers.
    [[nodiscard]] std::optional<std::string> handle(const std::string& line);

private:
    RewardOptions defaults_;
    std::set<std::string> seen_ids_;
};

} // namespace sqlrl::protocol
