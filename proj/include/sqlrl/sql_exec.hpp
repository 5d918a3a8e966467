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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sqlrl {

inline constexpr int kDefaultTimeoutMs = 5000;
inline constexpr std::size_t kDefaultRowLimit = 10000;

struct Null {
    friend bool operator==(Null, Null) = default;
};

struct Blob {
    std::string bytes;
    friend bool operator==(const Blob&, const Blob&) = default;
};

/// One value read from SQLite. The variant index is the storage class the
/// engine reported; nothing is coerced at read time.
using CellValue = std::variant<Null, std::int64_t, double, std::string, Blob>;
using Row = std::vector<CellValue>;

[[nodiscard]] std::string format_cell(const CellValue& value);

/// Immutable handle naming a SQLite file. Cheap to copy and share; every
/// execution opens its own connection.
class DatabaseRef {
public:
    DatabaseRef() = default;
    explicit DatabaseRef(std::filesystem::path path, bool read_only = true)
        : path_(std::move(path)), read_only_(read_only) {}

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    [[nodiscard]] bool read_only() const noexcept { return read_only_; }

    [[nodiscard]] DatabaseRef writable() const { return DatabaseRef(path_, false); }
    [[nodiscard]] DatabaseRef readonly() const { return DatabaseRef(path_, true); }

private:
    std::filesystem::path path_;
    bool read_only_ = true;
};

enum class ExecStatus { Rows, EngineError, Timeout };

[[nodiscard]] std::string_view to_string(ExecStatus status) noexcept;

struct ExecutionOutcome {
    ExecStatus status = ExecStatus::Rows;
    std::vector<Row> rows;
    std::string error_message;
    double elapsed_ms = 0.0;
    bool truncated = false;
    // Text after the first complete statement, when the input held more than
    // one. Only the first statement is ever executed.
    std::string ignored_tail;

    [[nodiscard]] bool ok() const noexcept { return status == ExecStatus::Rows; }
    [[nodiscard]] bool has_rows() const noexcept { return ok() && !rows.empty(); }
};

struct ExecOptions {
    int timeout_ms = kDefaultTimeoutMs;
    std::size_t row_limit = kDefaultRowLimit;
};

/// Runs the first statement of `sql`. Statement-level failures are reported
/// in the outcome; a missing or unreadable file throws Error(DatabaseUnavailable).
[[nodiscard]] ExecutionOutcome execute_query(const DatabaseRef& db, std::string_view sql,
                                             const ExecOptions& options = {});

/// Runs each statement in order on one writable connection and stops after
/// the first EngineError or Timeout.
[[nodiscard]] std::vector<ExecutionOutcome> execute_script(const DatabaseRef& db,
                                                           const std::vector<std::string>& statements,
                                                           const ExecOptions& options = {});

/// Splits a script into complete statements (string literals and comments
/// are respected). Blank statements are dropped.
[[nodiscard]] std::vector<std::string> split_statements(std::string_view script);

/// Creates an empty database file, replacing whatever was at `path`.
DatabaseRef create_database(const std::filesystem::path& path);

} // namespace sqlrl
