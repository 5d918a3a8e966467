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

#include "sqlrl/reward.hpp"

#include <exception>

#include <omp.h>

#include "sqlrl/error.hpp"
#include "sqlrl/text.hpp"

namespace sqlrl {

namespace {

bool is_sql_fence(const Fence& f)
{
    return f.lang == "sql" || f.lang == "sqlite";
}

std::exception_ptr first_error(const std::vector<std::exception_ptr>& errors)
{
    for (const auto& e : errors) {
        if (e) return e;
    }
    return nullptr;
}

} // namespace

std::string_view to_string(RewardTier tier) noexcept
{
    switch (tier) {
    case RewardTier::Correct: return "Correct";
    case RewardTier::Executable: return "Executable";
    case RewardTier::Invalid: return "Invalid";
    }
    return "Unknown";
}

double tier_value(RewardTier tier) noexcept
{
    switch (tier) {
    case RewardTier::Correct: return 1.0;
    case RewardTier::Executable: return 0.1;
    case RewardTier::Invalid: return 0.0;
    }
    return 0.0;
}

std::optional<std::string> extract_sql(std::string_view output, bool strict_answer_tags)
{
    std::vector<Fence> blocks;
    for (auto& f : fenced_blocks(output)) {
        if (is_sql_fence(f)) blocks.push_back(std::move(f));
    }

    const auto answer_open = output.rfind("<answer>");
    if (answer_open != std::string_view::npos) {
        auto answer_close = output.find("</answer>", answer_open);
        if (answer_close == std::string_view::npos) answer_close = output.size();
        for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
            if (it->begin >= answer_open && it->end <= answer_close) {
                if (it->body.empty()) return std::nullopt;
                return it->body;
            }
        }
    }
    if (strict_answer_tags || blocks.empty() || blocks.back().body.empty()) return std::nullopt;
    return blocks.back().body;
}

CanonicalResult gold_result(const DatabaseRef& db, std::string_view gold_sql, const RewardOptions& options)
{
    const auto outcome = execute_query(db.readonly(), gold_sql, options.exec());
    switch (outcome.status) {
    case ExecStatus::EngineError:
        throw Error(ErrorKind::GoldNotExecutable, "gold query failed: " + outcome.error_message);
    case ExecStatus::Timeout:
        throw Error(ErrorKind::GoldNotExecutable, "gold query timed out: " + outcome.error_message);
    case ExecStatus::Rows:
        break;
    }
    if (outcome.rows.empty()) throw Error(ErrorKind::GoldNotExecutable, "gold query returned no rows");
    return canonicalize(outcome);
}

RewardValue score_against(const ModelOutput& output, const CanonicalResult& gold, const DatabaseRef& db,
                          const RewardOptions& options)
{
    const auto sql = extract_sql(output.raw_text, options.strict_answer_tags);
    if (!sql) return RewardValue::make(RewardTier::Invalid, "no SQL code block found");

    const auto outcome = execute_query(db.readonly(), *sql, options.exec());
    if (outcome.status == ExecStatus::EngineError) {
        return RewardValue::make(RewardTier::Invalid, "engine error: " + outcome.error_message);
    }
    if (outcome.status == ExecStatus::Timeout) {
        return RewardValue::make(RewardTier::Invalid, "timeout: " + outcome.error_message);
    }

    const bool multi = !outcome.ignored_tail.empty();
    auto annotate = [multi](std::string text) -> std::optional<std::string> {
        if (!multi) return text.empty() ? std::nullopt : std::optional<std::string>(std::move(text));
        std::string note = "only the first statement was executed";
        return text.empty() ? note : note + "; " + text;
    };
    if (outcome.rows.empty() && !options.reward_empty_executable) {
        return RewardValue::make(RewardTier::Invalid, annotate("prediction returned no rows"));
    }
    const auto verdict = compare_results(canonicalize(outcome), gold);
    if (verdict.matched) return RewardValue::make(RewardTier::Correct, annotate({}));
    return RewardValue::make(RewardTier::Executable, annotate(verdict.diagnostic));
}

RewardValue score(const ModelOutput& output, std::string_view gold_sql, const DatabaseRef& db,
                  const RewardOptions& options)
{
    return score_against(output, gold_result(db, gold_sql, options), db, options);
}

std::vector<RewardValue> score_group_serial(const std::vector<ModelOutput>& outputs, std::string_view gold_sql,
                                            const DatabaseRef& db, const RewardOptions& options)
{
    std::vector<RewardValue> rewards;
    if (outputs.empty()) return rewards;
    const auto gold = gold_result(db, gold_sql, options);
    rewards.reserve(outputs.size());
    for (const auto& output : outputs) rewards.push_back(score_against(output, gold, db, options));
    return rewards;
}

std::vector<RewardValue> score_group(const std::vector<ModelOutput>& outputs, std::string_view gold_sql,
                                     const DatabaseRef& db, const RewardOptions& options, int threads)
{
    std::vector<RewardValue> rewards(outputs.size());
    if (outputs.empty()) return rewards;
    const auto gold = gold_result(db, gold_sql, options);
    std::vector<std::exception_ptr> errors(outputs.size());
    const int team = threads > 0 ? threads : omp_get_max_threads();
    const auto n = static_cast<std::ptrdiff_t>(outputs.size());

#pragma omp parallel for num_threads(team) schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            rewards[static_cast<std::size_t>(i)] = score_against(outputs[static_cast<std::size_t>(i)], gold, db, options);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    if (auto e = first_error(errors)) std::rethrow_exception(e);
    return rewards;
}

} // namespace sqlrl
