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

#include "sqlrl/dataset.hpp"

#include <fstream>
#include <set>

#include "sqlrl/error.hpp"

namespace sqlrl {

namespace {

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

std::string required_string(const nlohmann::json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        throw Error(ErrorKind::InvalidInput, std::string("record is missing string field '") + key + "'");
    }
    return it->get<std::string>();
}

} // namespace

std::string_view to_string(Disposition d) noexcept
{
    return d == Disposition::Kept ? "Kept" : "Dropped";
}

std::string_view to_string(DropReason r) noexcept
{
    switch (r) {
    case DropReason::Passed: return "Passed";
    case DropReason::EmptyGoldResult: return "EmptyGoldResult";
    case DropReason::GoldTimeout: return "GoldTimeout";
    case DropReason::GoldError: return "GoldError";
    case DropReason::TooShort: return "TooShort";
    case DropReason::NoModelSuccess: return "NoModelSuccess";
    }
    return "Unknown";
}

std::string id_string(const nlohmann::json& id)
{
    if (id.is_string()) return id.get<std::string>();
    if (id.is_number_integer() || id.is_number_unsigned()) return id.dump();
    throw Error(ErrorKind::InvalidInput, "id must be a string or an integer");
}

Sample sample_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir)
{
    if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "dataset record must be an object");
    Sample s;
    if (!j.contains("id")) throw Error(ErrorKind::InvalidInput, "record is missing field 'id'");
    s.id = id_string(j.at("id"));
    s.question = required_string(j, "question");
    s.evidence = optional_string(j, "evidence");
    if (s.evidence && s.evidence->empty()) s.evidence.reset();
    std::filesystem::path db_path = required_string(j, "db_path");
    if (db_path.is_relative() && !base_dir.empty()) db_path = base_dir / db_path;
    s.db = DatabaseRef(db_path);
    s.gold_sql = required_string(j, "gold_sql");
    s.domain = optional_string(j, "domain");
    s.schema_sql = optional_string(j, "schema_sql");
    return s;
}

nlohmann::json sample_to_json(const Sample& sample)
{
    nlohmann::json j;
    j["id"] = sample.id;
    j["question"] = sample.question;
    if (sample.evidence) j["evidence"] = *sample.evidence;
    j["db_path"] = sample.db.path().string();
    j["gold_sql"] = sample.gold_sql;
    if (sample.domain) j["domain"] = *sample.domain;
    if (sample.schema_sql) j["schema_sql"] = *sample.schema_sql;
    return j;
}

nlohmann::json record_to_json(const Sample& sample, const CurationRecord& record)
{
    auto j = sample_to_json(sample);
    j["disposition"] = to_string(record.disposition);
    j["reason"] = to_string(record.reason);
    if (!record.detail.empty()) j["detail"] = record.detail;
    return j;
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
    std::vector<nlohmann::json> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::InvalidInput,
                        path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Sample> read_samples(const std::filesystem::path& path)
{
    const auto base = path.parent_path();
    std::vector<Sample> samples;
    std::set<std::string> seen;
    for (const auto& j : read_jsonl(path)) {
        samples.push_back(sample_from_json(j, base));
        if (!seen.insert(samples.back().id).second) {
            throw Error(ErrorKind::InvalidInput, "duplicate sample id '" + samples.back().id + "' in " + path.string());
        }
    }
    return samples;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
    for (const auto& j : lines) out << j.dump() << '\n';
}

std::map<std::string, std::vector<std::string>> read_predictions(const std::filesystem::path& path)
{
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& j : read_jsonl(path)) {
        if (!j.contains("sample_id") || !j.contains("candidates") || !j.at("candidates").is_array()) {
            throw Error(ErrorKind::InvalidInput, "prediction records need sample_id and candidates");
        }
        out[id_string(j.at("sample_id"))] = j.at("candidates").get<std::vector<std::string>>();
    }
    return out;
}

} // namespace sqlrl
