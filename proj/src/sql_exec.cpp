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

#include "sqlrl/sql_exec.hpp"

#include <chrono>
#include <cstdio>
#include <memory>
#include <system_error>

#include <sqlite3.h>

#include "sqlrl/error.hpp"
#include "sqlrl/text.hpp"

namespace sqlrl {

namespace {

using Clock = std::chrono::steady_clock;

struct ConnectionCloser {
    void operator()(sqlite3* db) const noexcept { sqlite3_close_v2(db); }
};
struct StatementFinalizer {
    void operator()(sqlite3_stmt* stmt) const noexcept { sqlite3_finalize(stmt); }
};
using Connection = std::unique_ptr<sqlite3, ConnectionCloser>;
using Statement = std::unique_ptr<sqlite3_stmt, StatementFinalizer>;

struct Deadline {
    Clock::time_point at;
    bool fired = false;
};

int progress_callback(void* user) noexcept
{
    auto* deadline = static_cast<Deadline*>(user);
    if (Clock::now() >= deadline->at) {
        deadline->fired = true;
        return 1;
    }
    return 0;
}

double millis_since(Clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Connection open_connection(const DatabaseRef& db)
{
    std::error_code ec;
    if (!std::filesystem::is_regular_file(db.path(), ec)) {
        throw Error(ErrorKind::DatabaseUnavailable, "database file not found: " + db.path().string());
    }
    const int flags = db.read_only() ? SQLITE_OPEN_READONLY : SQLITE_OPEN_READWRITE;
    sqlite3* raw = nullptr;
    const int rc = sqlite3_open_v2(db.path().c_str(), &raw, flags, nullptr);
    Connection conn(raw);
    if (rc != SQLITE_OK) {
        std::string message = raw ? sqlite3_errmsg(raw) : sqlite3_errstr(rc);
        throw Error(ErrorKind::DatabaseUnavailable, "cannot open " + db.path().string() + ": " + message);
    }
    // Touch the schema so a non-database file fails here rather than as a
    // statement-level error.
    char* err = nullptr;
    if (sqlite3_exec(conn.get(), "SELECT count(*) FROM sqlite_master", nullptr, nullptr, &err) != SQLITE_OK) {
        std::string message = err ? err : "unknown error";
        sqlite3_free(err);
        throw Error(ErrorKind::DatabaseUnavailable, "cannot read " + db.path().string() + ": " + message);
    }
    if (db.read_only()) {
        sqlite3_limit(conn.get(), SQLITE_LIMIT_ATTACHED, 0);
    }
    return conn;
}

CellValue read_cell(sqlite3_stmt* stmt, int column)
{
    switch (sqlite3_column_type(stmt, column)) {
    case SQLITE_INTEGER:
        return static_cast<std::int64_t>(sqlite3_column_int64(stmt, column));
    case SQLITE_FLOAT:
        return sqlite3_column_double(stmt, column);
    case SQLITE_TEXT: {
        const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt, column));
        return std::string(text, static_cast<std::size_t>(sqlite3_column_bytes(stmt, column)));
    }
    case SQLITE_BLOB: {
        const auto* data = static_cast<const char*>(sqlite3_column_blob(stmt, column));
        const auto size = static_cast<std::size_t>(sqlite3_column_bytes(stmt, column));
        return Blob{data ? std::string(data, size) : std::string()};
    }
    default:
        return Null{};
    }
}

bool is_blank(std::string_view text)
{
    return text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

// Executes the first statement of `sql` on an open connection.
ExecutionOutcome run_statement(sqlite3* conn, std::string_view sql, const ExecOptions& options)
{
    ExecutionOutcome out;
    const auto start = Clock::now();
    Deadline deadline{start + std::chrono::milliseconds(options.timeout_ms)};
    sqlite3_progress_handler(conn, 1000, progress_callback, &deadline);

    auto finish_error = [&](int rc) {
        if (deadline.fired || rc == SQLITE_INTERRUPT) {
            out.status = ExecStatus::Timeout;
            out.error_message = "statement interrupted after " + std::to_string(options.timeout_ms) + " ms";
        } else {
            out.status = ExecStatus::EngineError;
            out.error_message = sqlite3_errmsg(conn);
        }
        out.rows.clear();
        out.truncated = false;
    };

    sqlite3_stmt* raw = nullptr;
    const char* tail = nullptr;
    const int prepared = sqlite3_prepare_v2(conn, sql.data(), static_cast<int>(sql.size()), &raw, &tail);
    Statement stmt(raw);
    if (prepared != SQLITE_OK) {
        finish_error(prepared);
    } else if (!stmt) {
        out.status = ExecStatus::EngineError;
        out.error_message = "no SQL statement to execute";
    } else {
        if (tail) {
            std::string_view rest(tail, static_cast<std::size_t>(sql.data() + sql.size() - tail));
            if (!is_blank(rest)) out.ignored_tail = trim(rest);
        }
        const int columns = sqlite3_column_count(stmt.get());
        while (true) {
            const int rc = sqlite3_step(stmt.get());
            if (rc == SQLITE_DONE) break;
            if (rc != SQLITE_ROW) {
                finish_error(rc);
                break;
            }
            if (out.rows.size() == options.row_limit) {
                out.truncated = true;
                break;
            }
            Row row;
            row.reserve(static_cast<std::size_t>(columns));
            for (int c = 0; c < columns; ++c) row.push_back(read_cell(stmt.get(), c));
            out.rows.push_back(std::move(row));
        }
    }
    stmt.reset();
    sqlite3_progress_handler(conn, 0, nullptr, nullptr);
    out.elapsed_ms = millis_since(start);
    return out;
}

} // namespace

std::string_view to_string(ExecStatus status) noexcept
{
    switch (status) {
    case ExecStatus::Rows: return "Rows";
    case ExecStatus::EngineError: return "EngineError";
    case ExecStatus::Timeout: return "Timeout";
    }
    return "Unknown";
}

std::string format_cell(const CellValue& value)
{
    struct Visitor {
        std::string operator()(Null) const { return "NULL"; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }
        std::string operator()(const std::string& v) const { return v; }
        std::string operator()(const Blob& v) const
        {
            static constexpr char kHex[] = "0123456789abcdef";
            std::string s = "x'";
            for (unsigned char c : v.bytes) {
                s += kHex[c >> 4];
                s += kHex[c & 0xf];
            }
            return s + "'";
        }
    };
    return std::visit(Visitor{}, value);
}

ExecutionOutcome execute_query(const DatabaseRef& db, std::string_view sql, const ExecOptions& options)
{
    if (options.timeout_ms <= 0 || options.row_limit == 0) {
        throw Error(ErrorKind::InvalidInput, "timeout_ms and row_limit must be positive");
    }
    auto conn = open_connection(db);
    return run_statement(conn.get(), sql, options);
}

std::vector<ExecutionOutcome> execute_script(const DatabaseRef& db, const std::vector<std::string>& statements,
                                             const ExecOptions& options)
{
    std::vector<ExecutionOutcome> outcomes;
    if (statements.empty()) return outcomes;
    auto conn = open_connection(db);
    for (const auto& statement : statements) {
        outcomes.push_back(run_statement(conn.get(), statement, options));
        if (!outcomes.back().ok()) break;
    }
    return outcomes;
}

std::vector<std::string> split_statements(std::string_view script)
{
    std::vector<std::string> out;
    std::string current;
    for (char c : script) {
        current += c;
        if (c == ';' && sqlite3_complete(current.c_str())) {
            if (!is_blank(current.substr(0, current.size() - 1))) out.push_back(current);
            current.clear();
        }
    }
    if (!is_blank(current)) out.push_back(current);
    for (auto& s : out) {
        const auto first = s.find_first_not_of(" \t\r\n");
        const auto last = s.find_last_not_of(" \t\r\n");
        s = s.substr(first, last - first + 1);
    }
    return out;
}

DatabaseRef create_database(const std::filesystem::path& path)
{
    std::error_code ec;
    for (const char* suffix : {"", "-journal", "-wal", "-shm"}) {
        std::filesystem::remove(path.string() + suffix, ec);
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    sqlite3* raw = nullptr;
    const int rc = sqlite3_open_v2(path.c_str(), &raw, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr);
    Connection conn(raw);
    if (rc != SQLITE_OK) {
        throw Error(ErrorKind::DatabaseUnavailable, "cannot create " + path.string() + ": " + sqlite3_errstr(rc));
    }
    // Force the header to disk so the file is a valid database even when empty.
    sqlite3_exec(conn.get(), "PRAGMA user_version = 0; CREATE TABLE IF NOT EXISTS __init(x); DROP TABLE __init;",
                 nullptr, nullptr, nullptr);
    return DatabaseRef(path, false);
}

} // namespace sqlrl
