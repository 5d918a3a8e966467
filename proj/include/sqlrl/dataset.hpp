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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqlrl/sql_exec.hpp"

namespace sqlrl {

/// One text-to-SQL task.
struct Sample {
    std::string id;
    std::string question;
    std::optional<std::string> evidence;
    DatabaseRef db;
    std::string gold_sql;
    std::optional<std::string> domain;
    std::optional<std::string> schema_sql;
};

enum class Disposition { Kept, Dropped };

enum class DropReason { Passed, EmptyGoldResult, GoldTimeout, GoldError, TooShort, NoModelSuccess };

[[nodiscard]] std::string_view to_string(Disposition d) noexcept;
[[nodiscard]] std::string_view to_string(DropReason r) noexcept;

struct CurationRecord {
    std::string sample_id;
    Disposition disposition = Disposition::Kept;
    DropReason reason = DropReason::Passed;
    std::string detail;

    static CurationRecord kept(std::string id, std::string detail = {})
    {
        return {std::move(id), Disposition::Kept, DropReason::Passed, std::move(detail)};
    }
    static CurationRecord dropped(std::string id, DropReason reason, std::string detail = {})
    {
        return {std::move(id), Disposition::Dropped, reason, std::move(detail)};
    }
    [[nodiscard]] bool is_kept() const noexcept { return disposition == Disposition::Kept; }
};

/// Relative db_path values resolve against `base_dir`.
[[nodiscard]] Sample sample_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
[[nodiscard]] nlohmann::json sample_to_json(const Sample& sample);
[[nodiscard]] nlohmann::json record_to_json(const Sample& sample, const CurationRecord& record);

/// Reads a newline-delimited dataset. Relative db paths resolve against the
/// file's directory. Duplicate ids are rejected.
[[nodiscard]] std::vector<Sample> read_samples(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines);

/// Predictions file: one {sample_id, candidates: [...]} per line.
[[nodiscard]] std::map<std::string, std::vector<std::string>> read_predictions(const std::filesystem::path& path);

/// Parses every non-blank line; throws Error(InvalidInput) naming the line.
[[nodiscard]] std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// String form of a JSON id (strings as-is, numbers printed).
[[nodiscard]] std::string id_string(const nlohmann::json& id);

} // namespace sqlrl
