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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqlrl/dataset.hpp"
#include "sqlrl/eval.hpp"
#include "sqlrl/provider.hpp"
#include "sqlrl/reward.hpp"
#include "sqlrl/rng.hpp"

namespace sqlrl::curation {

/// Prompt templates used by the provider-backed stages. Every field can be
/// overridden from a JSON file with the same keys.
struct CurationPrompts {
    // slots: {question} {sql_query} {sql_context} {error_info}
    std::string insert_generation;
    // slots: {sql} {error}
    std::string self_correct;
    // slots: {sql} {corrected_sql} {sqls}
    std::string similar_error_refine;
    // slots: {table_info} {task_clause}
    std::string augmentation;

    static CurationPrompts standard();
    static CurationPrompts from_file(const std::filesystem::path& path);
};

// ---------------------------------------------------------------------------
// Gold executability

[[nodiscard]] CurationRecord classify_gold(const Sample& sample, int timeout_ms);

/// Serial reference for filter_gold_executable.
[[nodiscard]] std::vector<CurationRecord> filter_gold_executable_serial(const std::vector<Sample>& dataset,
                                                                        int timeout_ms = kDefaultTimeoutMs);

/// Drops samples whose gold query fails, times out or returns no rows.
/// Order-preserving; output independent of `threads`.
[[nodiscard]] std::vector<CurationRecord> filter_gold_executable(const std::vector<Sample>& dataset,
                                                                 int timeout_ms = kDefaultTimeoutMs, int threads = 0);

// ---------------------------------------------------------------------------
// Insert synthesis

struct SynthesisBlocks {
    std::string sql_context;
    std::string sql_query;
    std::string sql_insert;
};

/// Accepts \\sql_context-style markers, <sql_context> tags or ```sql_context
/// fences. Returns nullopt unless all three blocks are found.
[[nodiscard]] std::optional<SynthesisBlocks> parse_synthesis_response(std::string_view response);

struct SynthesisOptions {
    int max_rounds = 8;
    int timeout_ms = kDefaultTimeoutMs;
    double temperature = 1.0;
};

struct SynthesisResult {
    bool success = false;
    Sample sample;           // with provider-revised schema_sql / gold_sql on success
    Sample original;
    int provider_calls = 0;
    std::string error_info;  // accumulated feedback, as last sent or as would be sent next
};

/// Asks the provider for INSERT statements until the gold query returns rows
/// on a freshly built database at sample.db.path(), for at most max_rounds.
[[nodiscard]] SynthesisResult synthesize_inserts(const Sample& sample, CompletionProvider& provider,
                                                 const SynthesisOptions& options = {},
                                                 const CurationPrompts& prompts = CurationPrompts::standard());

// ---------------------------------------------------------------------------
// Distractor tables

struct TableCountDistribution {
    std::map<int, double> histogram;
    int noise_width = 1;

    void validate() const;
    /// Histogram draw plus uniform integer noise in [-noise_width, noise_width], at least 1.
    [[nodiscard]] int draw(SplitMix64& rng) const;
    static TableCountDistribution from_json(const nlohmann::json& j);
};

struct SchemaPoolEntry {
    std::string domain;
    std::string table_schema;
};

[[nodiscard]] std::vector<SchemaPoolEntry> read_schema_pool(const std::filesystem::path& path);

/// Table names declared by CREATE TABLE statements, in order, unquoted.
[[nodiscard]] std::vector<std::string> extract_table_names(std::string_view schema_sql);

struct DistractorResult {
    Sample sample;
    int drawn_tables = 0;
    std::vector<std::string> added_tables;
};

/// Rebuilds the sample's database with same-domain distractor tables created
/// before the sample's own tables. Samples without table names pass through.
[[nodiscard]] DistractorResult add_distractor_tables(const Sample& sample, const std::vector<SchemaPoolEntry>& pool,
                                                     const TableCountDistribution& dist, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Final selection and model-based filtering

inline constexpr std::size_t kMinGoldLength = 160;

/// Kept iff the whitespace-normalised gold is longer than 160 characters and
/// returns rows.
[[nodiscard]] CurationRecord final_selection(const Sample& sample, int timeout_ms = kDefaultTimeoutMs);

struct ModelFilterOptions {
    int k = 10;
    double temperature = 1.0;
    int timeout_ms = kDefaultTimeoutMs;
};

struct ModelFilterResult {
    std::vector<CurationRecord> records;
    bool aborted = false;
    std::string abort_detail;
};

/// Keeps a sample iff at least one of k provider completions scores 1.0.
[[nodiscard]] ModelFilterResult model_filter(const std::vector<Sample>& dataset, CompletionProvider& provider,
                                             const ModelFilterOptions& options = {},
                                             const eval::PromptSpec& spec = eval::PromptSpec::standard());

// ---------------------------------------------------------------------------
// Self-correction

/// SQL following the last "-- Description:" line, or the last ```sql block.
[[nodiscard]] std::optional<std::string> parse_corrected_sql(std::string_view response);
/// One SQL per "-- Description:" section (or per ```sql block).
[[nodiscard]] std::vector<std::string> parse_refined_sqls(std::string_view response);

struct CorrectedQuery {
    std::string sql;
    std::vector<Row> rows;
};

struct SelfCorrectResult {
    std::vector<CorrectedQuery> results;
    int correction_calls = 0;
    int refinement_calls = 0;
};

/// Executes each query; a query that errors or returns no rows gets up to
/// max_try corrections. After a successful correction, the remaining queue
/// is sent once for similar-error refinement and replaced by the reply.
[[nodiscard]] SelfCorrectResult self_correct_workflow(const std::vector<std::string>& sqls, const DatabaseRef& db,
                                                      CompletionProvider& provider, int max_try,
                                                      const CurationPrompts& prompts = CurationPrompts::standard(),
                                                      int timeout_ms = kDefaultTimeoutMs);

// ---------------------------------------------------------------------------
// Query augmentation prompt

struct TableInfo {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::string> column_descriptions;
    std::string sample_rows;
};

[[nodiscard]] std::string render_augmentation_prompt(const std::vector<TableInfo>& tables,
                                                     const std::optional<std::string>& task,
                                                     const std::optional<std::string>& answer,
                                                     const CurationPrompts& prompts = CurationPrompts::standard());

struct AugmentedQuery {
    std::string task;
    std::string sql;
};

/// Splits a "/*Task: ...*/ SELECT ..." listing into (task, sql) pairs.
[[nodiscard]] std::vector<AugmentedQuery> parse_augmentation_response(std::string_view response);

} // namespace sqlrl::curation
