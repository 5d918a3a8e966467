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

#include "sqlrl/protocol.hpp"

namespace sqlrl::protocol {

namespace {

Error malformed(const std::string& why)
{
    return Error(ErrorKind::MalformedRequest, why);
}

bool blank(const std::string& line)
{
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

} // namespace

ScoreRequest parse_request(const nlohmann::json& j)
{
    if (!j.is_object()) throw malformed("request must be a JSON object");
    ScoreRequest r;
    if (!j.contains("request_id") || !(j.at("request_id").is_string() || j.at("request_id").is_number_integer())) {
        throw malformed("request_id must be a string or an integer");
    }
    r.request_id = j.at("request_id");
    if (!j.contains("db_path") || !j.at("db_path").is_string()) throw malformed("db_path must be a string");
    r.db_path = j.at("db_path").get<std::string>();
    if (!j.contains("gold_sql") || !j.at("gold_sql").is_string()) throw malformed("gold_sql must be a string");
    r.gold_sql = j.at("gold_sql").get<std::string>();
    if (!j.contains("candidates") || !j.at("candidates").is_array()) throw malformed("candidates must be an array");
    for (const auto& c : j.at("candidates")) {
        if (!c.is_string()) throw malformed("candidates must be strings");
        r.candidates.push_back(c.get<std::string>());
    }
    if (r.candidates.empty()) throw malformed("candidates must not be empty");
    if (j.contains("timeout_ms") && !j.at("timeout_ms").is_null()) {
        if (!j.at("timeout_ms").is_number_integer() || j.at("timeout_ms").get<long long>() <= 0) {
            throw malformed("timeout_ms must be a positive integer");
        }
        r.timeout_ms = j.at("timeout_ms").get<int>();
    }
    return r;
}

nlohmann::json request_to_json(const ScoreRequest& r)
{
    nlohmann::json j{{"request_id", r.request_id},
                     {"db_path", r.db_path},
                     {"gold_sql", r.gold_sql},
                     {"candidates", r.candidates}};
    if (r.timeout_ms) j["timeout_ms"] = *r.timeout_ms;
    return j;
}

nlohmann::json response_to_json(const ScoreResponse& r)
{
    nlohmann::json diagnostics = nlohmann::json::array();
    for (const auto& d : r.diagnostics) diagnostics.push_back(d ? nlohmann::json(*d) : nlohmann::json(nullptr));
    return {{"request_id", r.request_id}, {"rewards", r.rewards}, {"tiers", r.tiers}, {"diagnostics", diagnostics}};
}

ScoreResponse response_from_json(const nlohmann::json& j)
{
    ScoreResponse r;
    r.request_id = j.at("request_id");
    r.rewards = j.at("rewards").get<std::vector<double>>();
    r.tiers = j.at("tiers").get<std::vector<std::string>>();
    for (const auto& d : j.at("diagnostics")) {
        r.diagnostics.push_back(d.is_null() ? std::nullopt : std::optional<std::string>(d.get<std::string>()));
    }
    return r;
}

nlohmann::json error_json(const nlohmann::json& request_id, ErrorKind kind, const std::string& message)
{
    return {{"request_id", request_id}, {"error", {{"kind", to_string(kind)}, {"message", message}}}};
}

ScoreResponse score_request(const ScoreRequest& request, const RewardOptions& defaults)
{
    RewardOptions options = defaults;
    if (request.timeout_ms) options.timeout_ms = *request.timeout_ms;
    std::vector<ModelOutput> outputs;
    outputs.reserve(request.candidates.size());
    for (const auto& c : request.candidates) outputs.push_back({c});

    const auto rewards = score_group_serial(outputs, request.gold_sql, DatabaseRef(request.db_path), options);
    ScoreResponse response;
    response.request_id = request.request_id;
    for (const auto& r : rewards) {
        response.rewards.push_back(r.value);
        response.tiers.emplace_back(to_string(r.tier));
        response.diagnostics.push_back(r.diagnostics);
    }
    return response;
}

std::variant<ScoreRequest, std::string> Session::admit(const std::string& line)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        return error_json(nullptr, ErrorKind::MalformedRequest, std::string("unparsable line: ") + e.what()).dump();
    }
    nlohmann::json id = nullptr;
    if (j.is_object() && j.contains("request_id")) id = j.at("request_id");
    ScoreRequest request;
    try {
        request = parse_request(j);
    } catch (const Error& e) {
        return error_json(id, e.kind(), e.what()).dump();
    }
    if (!seen_ids_.insert(request.request_id.dump()).second) {
        return error_json(id, ErrorKind::DuplicateRequestId,
                          "request_id " + request.request_id.dump() + " was already used on this connection")
            .dump();
    }
    return request;
}

std::string Session::execute(const ScoreRequest& request) const
{
    try {
        return response_to_json(score_request(request, defaults_)).dump();
    } catch (const Error& e) {
        return error_json(request.request_id, e.kind(), e.what()).dump();
    } catch (const std::exception& e) {
        return error_json(request.request_id, ErrorKind::InvalidInput, e.what()).dump();
    }
}

std::optional<std::string> Session::handle(const std::string& line)
{
    if (blank(line)) return std::nullopt;
    auto admitted = admit(line);
    if (auto* error = std::get_if<std::string>(&admitted)) return *error;
    return execute(std::get<ScoreRequest>(admitted));
}

} // namespace sqlrl::protocol
