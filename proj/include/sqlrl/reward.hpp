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
#include <string>
#include <string_view>
#include <vector>

#include "sqlrl/equivalence.hpp"
#include "sqlrl/sql_exec.hpp"

namespace sqlrl {

enum class RewardTier { Correct, Executable, Invalid };

[[nodiscard]] std::string_view to_string(RewardTier tier) noexcept;
[[nodiscard]] double tier_value(RewardTier tier) noexcept;

struct RewardValue {
    double value = 0.0;
    RewardTier tier = RewardTier::Invalid;
    std::optional<std::string> diagnostics;

    static RewardValue make(RewardTier tier, std::optional<std::string> diagnostics = std::nullopt)
    {
        return {tier_value(tier), tier, std::move(diagnostics)};
    }
};

struct ModelOutput {
    std::string raw_text;
};

struct RewardOptions {
    int timeout_ms = kDefaultTimeoutMs;
    std::size_t row_limit = kDefaultRowLimit;
    // Only look inside <answer>...</answer>; no fallback to other blocks.
    bool strict_answer_tags = false;
    // Ablation knob: when false, an executable prediction that returns zero
    // rows gets the Invalid tier instead of Executable.
    bool reward_empty_executable = true;

    [[nodiscard]] ExecOptions exec() const { return {timeout_ms, row_limit}; }
};

/// SQL inside the last ```sql fence of the last <answer> region, falling back
/// to the last ```sql fence anywhere (unless strict). Trimmed.
[[nodiscard]] std::optional<std::string> extract_sql(std::string_view output, bool strict_answer_tags = false);

/// Executes the gold query and checks it is usable as a reference.
/// Throws GoldNotExecutable on engine error, timeout or empty rows.
[[nodiscard]] CanonicalResult gold_result(const DatabaseRef& db, std::string_view gold_sql,
                                          const RewardOptions& options = {});

/// Scores one output against a precomputed gold result.
[[nodiscard]] RewardValue score_against(const ModelOutput& output, const CanonicalResult& gold,
                                        const DatabaseRef& db, const RewardOptions& options = {});

[[nodiscard]] RewardValue score(const ModelOutput& output, std::string_view gold_sql, const DatabaseRef& db,
                                const RewardOptions& options = {});

/// Serial reference for score_group.
[[nodiscard]] std::vector<RewardValue> score_group_serial(const std::vector<ModelOutput>& outputs,
                                                          std::string_view gold_sql, const DatabaseRef& db,
                                                          const RewardOptions& options = {});

/// OpenMP-parallel group scoring; `threads` <= 0 uses the runtime default.
/// Element-wise identical to score_group_serial for any thread count.
[[nodiscard]] std::vector<RewardValue> score_group(const std::vector<ModelOutput>& outputs, std::string_view gold_sql,
                                                   const DatabaseRef& db, const RewardOptions& options = {},
                                                   int threads = 0);

} // namespace sqlrl
