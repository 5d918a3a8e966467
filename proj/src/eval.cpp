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

#include "sqlrl/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <sstream>

#include <omp.h>

#include "sqlrl/error.hpp"
#include "sqlrl/text.hpp"

namespace sqlrl::eval {

namespace {

constexpr const char* kSystemText =
    "You are a data science expert. Below, you are provided with a database schema and a natural language "
    "question. Your task is to understand the schema and generate a valid SQL query to answer the question.";

constexpr const char* kUserTemplate = R"(Database Engine:
SQLite

Database Schema:
{database_schema}
This schema describes the database's structure, including tables, columns, primary keys, foreign keys, and any relevant relationships or constraints.

Question:
{evidence_plus_question}

Instructions:
- Make sure you only output the information that is asked in the question. If the question asks for a specific column, make sure to only include that column in the SELECT clause, nothing more.
- The generated query should return all of the information asked in the question without any missing or extra information.
- Before generating the final SQL query, please think through the steps of how to write the query.

Output Format:
Please provide a detailed chain-of-thought reasoning process and include your thought process within `<think>` tags. Your final answer should be enclosed within `<answer>` tags.

Ensure that your SQL query follows the correct syntax and is formatted as follows:

```sql
-- Your SQL query here
```

Example format:
<think> Step-by-step reasoning, including self-reflection and corrections if necessary. [Limited by 4K tokens] </think>
<answer> Summary of the thought process leading to the final SQL query. [Limited by 1K tokens]

```sql
Correct SQL query here
```
</answer>)";

constexpr const char* kAssistantPrefix = "Let me solve this step by step.\n<think>";

std::string quote_identifier(const std::string& name)
{
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_percent(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

struct SampleOutcome {
    bool correct = false;
    bool gold_failed = false;
};

SampleOutcome evaluate_one(const Sample& sample, const ModelOutput& prediction, const RewardOptions& options)
{
    try {
        return {score(prediction, sample.gold_sql, sample.db, options).tier == RewardTier::Correct, false};
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::GoldNotExecutable) return {false, true};
        throw;
    }
}

BenchmarkScore summarize(const std::vector<SampleOutcome>& outcomes)
{
    BenchmarkScore s;
    s.n = outcomes.size();
    for (const auto& o : outcomes) {
        s.correct += o.correct ? 1 : 0;
        s.gold_failures += o.gold_failed ? 1 : 0;
    }
    s.ex_percent = ex_percent(s.correct, s.n);
    return s;
}

void check_lengths(const std::vector<Sample>& samples, const std::vector<ModelOutput>& predictions)
{
    if (samples.size() != predictions.size()) {
        throw Error(ErrorKind::LengthMismatch, std::to_string(samples.size()) + " samples but " +
                                                   std::to_string(predictions.size()) + " predictions");
    }
}

} // namespace

PromptSpec PromptSpec::standard()
{
    return {kSystemText, kUserTemplate, kAssistantPrefix};
}

std::string schema_text(const DatabaseRef& db, int sample_rows)
{
    sample_rows = std::clamp(sample_rows, 0, 3);
    const auto tables = execute_query(
        db.readonly(), "SELECT name, sql FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY rowid");
    if (!tables.ok()) throw Error(ErrorKind::DatabaseUnavailable, "cannot read schema: " + tables.error_message);

    std::ostringstream out;
    bool first = true;
    for (const auto& row : tables.rows) {
        const auto* name = std::get_if<std::string>(&row[0]);
        const auto* sql = std::get_if<std::string>(&row[1]);
        if (!name || !sql) continue;
        if (!first) out << "\n\n";
        first = false;
        out << *sql << ';';
        if (sample_rows == 0) continue;
        const auto rows = execute_query(db.readonly(), "SELECT * FROM " + quote_identifier(*name) + " LIMIT " +
                                                           std::to_string(sample_rows));
        if (!rows.ok() || rows.rows.empty()) continue;
        out << "\n/* sample rows:";
        for (const auto& r : rows.rows) {
            out << "\n";
            for (std::size_t c = 0; c < r.size(); ++c) out << (c ? " | " : "") << format_cell(r[c]);
        }
        out << "\n*/";
    }
    return out.str();
}

std::string question_text(const Sample& sample)
{
    if (sample.evidence && !sample.evidence->empty()) return *sample.evidence + "\n" + sample.question;
    return sample.question;
}

std::string render_prompt(const Sample& sample, const PromptSpec& spec, const std::string& schema)
{
    if (trim(schema).empty()) throw Error(ErrorKind::InvalidInput, "schema text is empty");
    const auto user = fill_template(spec.user_template, {{"database_schema", schema},
                                                         {"evidence_plus_question", question_text(sample)}});
    return spec.system_text + "\n\n" + user + "\n\n" + spec.assistant_prefix;
}

double ex_percent(std::size_t correct, std::size_t n)
{
    if (n == 0) return 0.0;
    // tenths = round_half_up(1000 * correct / n)
    const auto tenths = (2000 * correct + n) / (2 * n);
    return static_cast<double>(tenths) / 10.0;
}

double EvalReport::average() const
{
    if (per_benchmark.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [name, s] : per_benchmark) sum += s.ex_percent;
    return sum / static_cast<double>(per_benchmark.size());
}

nlohmann::json EvalReport::to_json() const
{
    nlohmann::json j;
    j["per_benchmark"] = nlohmann::json::object();
    for (const auto& [name, s] : per_benchmark) {
        j["per_benchmark"][name] = {{"n", s.n},
                                    {"correct", s.correct},
                                    {"ex_percent", s.ex_percent},
                                    {"gold_failures", s.gold_failures}};
    }
    j["average"] = average();
    j["metadata"] = metadata;
    return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j)
{
    EvalReport r;
    for (const auto& [name, s] : j.at("per_benchmark").items()) {
        BenchmarkScore b;
        b.n = s.at("n").get<std::size_t>();
        b.correct = s.at("correct").get<std::size_t>();
        b.ex_percent = s.at("ex_percent").get<double>();
        b.gold_failures = s.value("gold_failures", std::size_t{0});
        r.per_benchmark[name] = b;
    }
    if (j.contains("metadata")) r.metadata = j.at("metadata");
    return r;
}

std::string EvalReport::table() const
{
    std::size_t width = 9;
    for (const auto& [name, s] : per_benchmark) width = std::max(width, name.size());
    std::ostringstream out;
    auto pad = [&](const std::string& s) { return s + std::string(width - std::min(width, s.size()), ' '); };
    out << pad("benchmark") << "  " << "       n  correct     EX\n";
    for (const auto& [name, s] : per_benchmark) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "  %8zu %8zu %6s\n", s.n, s.correct, format_percent(s.ex_percent).c_str());
        out << pad(name) << buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %8s %8s %6s\n", "", "", format_percent(average()).c_str());
    out << pad("Average") << buf;
    return out.str();
}

void EvalReport::merge(const EvalReport& other)
{
    for (const auto& [name, s] : other.per_benchmark) per_benchmark[name] = s;
    for (const auto& [key, value] : other.metadata.items()) metadata[key] = value;
}

BenchmarkScore execution_accuracy_serial(const std::vector<Sample>& samples, const std::vector<ModelOutput>& predictions,
                                         const RewardOptions& options)
{
    check_lengths(samples, predictions);
    std::vector<SampleOutcome> outcomes;
    outcomes.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) outcomes.push_back(evaluate_one(samples[i], predictions[i], options));
    return summarize(outcomes);
}

BenchmarkScore execution_accuracy(const std::vector<Sample>& samples, const std::vector<ModelOutput>& predictions,
                                  const RewardOptions& options, int threads)
{
    check_lengths(samples, predictions);
    std::vector<SampleOutcome> outcomes(samples.size());
    std::vector<std::exception_ptr> errors(samples.size());
    const int team = threads > 0 ? threads : omp_get_max_threads();
    const auto n = static_cast<std::ptrdiff_t>(samples.size());

#pragma omp parallel for num_threads(team) schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        try {
            outcomes[i] = evaluate_one(samples[i], predictions[i], options);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return summarize(outcomes);
}

std::optional<std::size_t> majority_vote_index(const std::vector<ModelOutput>& candidates, const DatabaseRef& db,
                                               const RewardOptions& options)
{
    struct Group {
        CanonicalResult result;
        std::size_t first = 0;
        std::size_t size = 0;
    };
    std::vector<Group> groups;
    std::optional<std::size_t> first_extractable;

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto sql = extract_sql(candidates[i].raw_text, options.strict_answer_tags);
        if (!sql) continue;
        if (!first_extractable) first_extractable = i;
        const auto outcome = execute_query(db.readonly(), *sql, options.exec());
        if (!outcome.ok() || outcome.truncated) continue;
        auto canon = canonicalize(outcome);
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const Group& g) { return results_match(g.result, canon); });
        if (it == groups.end()) {
            groups.push_back({std::move(canon), i, 1});
        } else {
            ++it->size;
        }
    }
    if (groups.empty()) return first_extractable;
    // Groups are created in order of their first member, so the first
    // maximum is also the tie-break winner.
    const auto best = std::max_element(groups.begin(), groups.end(),
                                       [](const Group& a, const Group& b) { return a.size < b.size; });
    return best->first;
}

std::optional<std::string> majority_vote(const std::vector<ModelOutput>& candidates, const DatabaseRef& db,
                                         const RewardOptions& options)
{
    const auto index = majority_vote_index(candidates, db, options);
    if (!index) return std::nullopt;
    return extract_sql(candidates[*index].raw_text, options.strict_answer_tags);
}

RetrievalResult value_retrieval_hook(const Sample& sample, ValueRetriever& retriever)
{
    std::vector<std::string> values;
    try {
        values = retriever.retrieve(sample);
    } catch (const std::exception& e) {
        return {sample, std::string(to_string(ErrorKind::RetrieverFailure)) + ": " + e.what()};
    }
    if (values.empty()) return {sample, std::nullopt};
    Sample out = sample;
    std::string appended;
    for (const auto& v : values) appended += (appended.empty() ? "" : "\n") + v;
    out.evidence = out.evidence && !out.evidence->empty() ? *out.evidence + "\n" + appended : appended;
    return {std::move(out), std::nullopt};
}

} // namespace sqlrl::eval
