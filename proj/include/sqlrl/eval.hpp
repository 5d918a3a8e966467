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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqlrl/dataset.hpp"
#include "sqlrl/reward.hpp"

namespace sqlrl::eval {

/// Chat-style prompt template. The user template must contain the slots
/// {database_schema} and {evidence_plus_question}.
struct PromptSpec {
    std::string system_text;
    std::string user_template;
    std::string assistant_prefix;

    static PromptSpec standard();
};

/// Version tag of the schema serialisation written into report metadata.
inline constexpr const char* kSchemaFormat = "create-statements-v1";

/// CREATE statements in declaration order, optionally followed by up to
/// `sample_rows` (max 3) rows per table rendered as SQL comments.
[[nodiscard]] std::string schema_text(const DatabaseRef& db, int sample_rows = 0);

/// Evidence (when present) on the line before the question.
[[nodiscard]] std::string question_text(const Sample& sample);

[[nodiscard]] std::string render_prompt(const Sample& sample, const PromptSpec& spec, const std::string& schema);

struct BenchmarkScore {
    std::size_t n = 0;
    std::size_t correct = 0;
    double ex_percent = 0.0;
    std::size_t gold_failures = 0;
};

/// 100 * correct / n rounded half-up to one decimal, computed in integers.
[[nodiscard]] double ex_percent(std::size_t correct, std::size_t n);

struct EvalReport {
    std::map<std::string, BenchmarkScore> per_benchmark;
    nlohmann::json metadata = nlohmann::json::object();

    /// Unweighted mean of the per-benchmark percentages.
    [[nodiscard]] double average() const;
    [[nodiscard]] nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
    /// Fixed-width table for terminals.
    [[nodiscard]] std::string table() const;
    /// Adds every benchmark of `other`; later entries replace earlier ones.
    void merge(const EvalReport& other);
};

/// Serial reference for execution_accuracy.
[[nodiscard]] BenchmarkScore execution_accuracy_serial(const std::vector<Sample>& samples,
                                                       const std::vector<ModelOutput>& predictions,
                                                       const RewardOptions& options = {});

/// Counts predictions scored Correct. Samples are processed in parallel;
/// the result does not depend on `threads`. Throws LengthMismatch.
[[nodiscard]] BenchmarkScore execution_accuracy(const std::vector<Sample>& samples,
                                                const std::vector<ModelOutput>& predictions,
                                                const RewardOptions& options = {}, int threads = 0);

/// Index of the earliest member of the largest group of candidates whose
/// executions are result-equivalent; ties go to the group that starts first.
/// Failed, timed-out or truncated executions do not vote. Falls back to the
/// first extractable candidate when nothing executes.
[[nodiscard]] std::optional<std::size_t> majority_vote_index(const std::vector<ModelOutput>& candidates,
                                                             const DatabaseRef& db,
                                                             const RewardOptions& options = {});

/// SQL of the candidate chosen by majority_vote_index.
[[nodiscard]] std::optional<std::string> majority_vote(const std::vector<ModelOutput>& candidates,
                                                       const DatabaseRef& db, const RewardOptions& options = {});

/// Plug-in point for value retrieval; implementations return snippets such
/// as "city = 'Alameda'" to append to the sample's evidence.
class ValueRetriever {
public:
    virtual ~ValueRetriever() = default;
    virtual std::vector<std::string> retrieve(const Sample& sample) = 0;
};

class IdentityRetriever final : public ValueRetriever {
public:
    std::vector<std::string> retrieve(const Sample&) override { return {}; }
};

struct RetrievalResult {
    Sample sample;
    std::optional<std::string> warning;
};

/// Fails open: a throwing retriever leaves the sample unchanged and the
/// failure is reported as a RetrieverFailure warning.
[[nodiscard]] RetrievalResult value_retrieval_hook(const Sample& sample, ValueRetriever& retriever);

} // namespace sqlrl::eval
