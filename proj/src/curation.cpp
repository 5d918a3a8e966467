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

#include "sqlrl/curation.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <fstream>
#include <regex>
#include <set>

#include <omp.h>

#include "sqlrl/error.hpp"
#include "sqlrl/text.hpp"

namespace sqlrl::curation {

namespace {

constexpr const char* kInsertGeneration = R"(You are an expert in SQL data modeling. Your task is to analyze the given SQL schema and, if necessary, generate realistic and logically consistent sample data to ensure:
For a given <SQL Prompt>, both <SQL Query> and <SQL Context> can meet its requirements, and <SQL Query> can query the corresponding data from the TABLE created by <SQL Context>.

Given a -- **<SQL Prompt>**:
{question}

I have generated the <SQL Query> and <SQL Context>:
-- **<SQL Query>**:
{sql_query}

-- **<SQL Context>**:
{sql_context}

{error_info}

I need data samples to validate the correctness of the <SQL Query>.
Therefore, please help me add one INSERT statement for each table in the <SQL Context>, with 5 sample rows per table.
The inserted data should ensure that the <SQL Query> can retrieve results from the tables.
Please ensure that it does not cause errors when using sqlite3.
Please do not include any additional explanations or instructions.

Please help me fix this **<SQL Context>** and ensure that it contains at most five records.
Please also help me modify **<SQL Query>** to ensure that it does not cause errors when using sqlite3.

Please give your expanded **<SQL Context>** in:
\\sql_context
your fixed **<SQL Query>** in:
\\sql_query
and the **INSERT statements** in:
\\sql_insert)";

constexpr const char* kSelfCorrect = R"(Input SQL: {sql}
The error information is: {error}
Please correct the SQL based on the previous context. Output your reasoning process followed by only one corrected SQL query in the following format:
-- Description: ...
<Corrected SQL here>
Do not output multiple SQLs or only an analysis without a final SQL.)";

constexpr const char* kSimilarErrorRefine = R"(The following SQL has been corrected:
Original SQL: {sql}
Corrected SQL: {corrected_sql}
Please correct the remaining SQL statements if they contain similar errors. The list of SQLs to be refined is: {sqls}
For each corrected SQL, respond in the following format:
-- Description: ...
<Corrected SQL here>)";

constexpr const char* kAugmentation = R"({table_info}

{task_clause}Based on this, write 10 more complex nested SQLite SQL queries or SQLs with CTEs in sql code block format. You can use any information in the database information provided. Each query should be different. You can write SELECT query only. For each query, just write one sentence to describe the task. Format like:

/*Task: {task description in one sentence}*/
SELECT ...

Don't output other contents.)";

std::string lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool valid_result(const ExecutionOutcome& outcome)
{
    return outcome.ok() && !outcome.rows.empty();
}

std::string outcome_error(const ExecutionOutcome& outcome)
{
    switch (outcome.status) {
    case ExecStatus::EngineError: return outcome.error_message;
    case ExecStatus::Timeout: return "execution timed out (" + outcome.error_message + ")";
    case ExecStatus::Rows: break;
    }
    return outcome.rows.empty() ? "the query executed but returned no rows" : "";
}

std::string sql_literal(const std::string& s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

std::string quote_identifier(const std::string& name)
{
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// Everything after `marker` up to the next \sql_ marker (or the end).
std::optional<std::string> marker_block(std::string_view text, std::string_view key)
{
    const std::string marker = "\\" + std::string(key);
    auto pos = text.find(marker);
    while (pos != std::string_view::npos) {
        const auto after = pos + marker.size();
        // Reject prefixes of longer names such as \sql_query_v2.
        if (after >= text.size() || !(std::isalnum(static_cast<unsigned char>(text[after])) || text[after] == '_')) {
            auto end = text.find("\\sql_", after);
            if (end == std::string_view::npos) end = text.size();
            while (end > after && text[end - 1] == '\\') --end;
            auto body = std::string(text.substr(after, end - after));
            const auto fences = fenced_blocks(body);
            if (!fences.empty()) return fences.front().body;
            body = trim(body);
            if (!body.empty() && body.front() == ':') body = trim(body.substr(1));
            return body;
        }
        pos = text.find(marker, after);
    }
    return std::nullopt;
}

std::optional<std::string> tagged_block(std::string_view text, std::string_view key)
{
    const std::string open = "<" + std::string(key) + ">";
    const std::string close = "</" + std::string(key) + ">";
    const auto a = text.find(open);
    if (a == std::string_view::npos) return std::nullopt;
    const auto b = text.find(close, a + open.size());
    if (b == std::string_view::npos) return std::nullopt;
    auto body = std::string(text.substr(a + open.size(), b - a - open.size()));
    const auto fences = fenced_blocks(body);
    return fences.empty() ? trim(body) : fences.front().body;
}

std::optional<std::string> find_block(std::string_view text, std::string_view key)
{
    if (auto b = tagged_block(text, key)) return b;
    for (const auto& f : fenced_blocks(text)) {
        if (f.lang == key) return f.body;
    }
    return marker_block(text, key);
}

std::string describe_round(int round, const std::string& what)
{
    return "Round " + std::to_string(round) + ": " + what;
}

std::string error_info_text(const std::vector<std::string>& errors)
{
    if (errors.empty()) return {};
    std::string out = "The previous attempts failed with the following error information:";
    for (const auto& e : errors) out += "\n" + e;
    return out;
}

// Rebuild `db` as: distractor tables, then the original objects with data.
void materialize_with_distractors(const DatabaseRef& db, const std::vector<std::string>& distractor_schemas,
                                  int timeout_ms)
{
    const auto objects = execute_query(db.readonly(),
                                       "SELECT type, name, sql FROM sqlite_master WHERE sql IS NOT NULL AND name NOT "
                                       "LIKE 'sqlite_%' ORDER BY CASE type WHEN 'table' THEN 0 ELSE 1 END, rowid",
                                       {timeout_ms, kDefaultRowLimit});
    if (!objects.ok()) throw Error(ErrorKind::DatabaseUnavailable, "cannot read schema: " + objects.error_message);

    const auto tmp_path = std::filesystem::path(db.path().string() + ".rebuild");
    const auto tmp = create_database(tmp_path);
    std::vector<std::string> script;
    for (const auto& schema : distractor_schemas) {
        for (auto& s : split_statements(schema)) script.push_back(std::move(s));
    }
    script.push_back("ATTACH DATABASE " + sql_literal(db.path().string()) + " AS src");
    for (const auto& row : objects.rows) {
        const auto& type = std::get<std::string>(row[0]);
        const auto& name = std::get<std::string>(row[1]);
        const auto& sql = std::get<std::string>(row[2]);
        if (type == "table") {
            script.push_back("DROP TABLE IF EXISTS main." + quote_identifier(name));
            script.push_back(sql);
            script.push_back("INSERT INTO main." + quote_identifier(name) + " SELECT * FROM src." + quote_identifier(name));
        } else {
            script.push_back(sql);
        }
    }
    script.push_back("DETACH DATABASE src");
    const auto outcomes = execute_script(tmp, script, {timeout_ms, kDefaultRowLimit});
    if (outcomes.size() != script.size() || !outcomes.back().ok()) {
        const auto& bad = outcomes.back();
        std::error_code ec;
        std::filesystem::remove(tmp_path, ec);
        throw Error(ErrorKind::InvalidInput, "cannot build distractor database: " + bad.error_message);
    }
    std::filesystem::rename(tmp_path, db.path());
}

} // namespace

CurationPrompts CurationPrompts::standard()
{
    return {kInsertGeneration, kSelfCorrect, kSimilarErrorRefine, kAugmentation};
}

CurationPrompts CurationPrompts::from_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
    const auto j = nlohmann::json::parse(in);
    auto p = standard();
    if (j.contains("insert_generation")) p.insert_generation = j.at("insert_generation").get<std::string>();
    if (j.contains("self_correct")) p.self_correct = j.at("self_correct").get<std::string>();
    if (j.contains("similar_error_refine")) p.similar_error_refine = j.at("similar_error_refine").get<std::string>();
    if (j.contains("augmentation")) p.augmentation = j.at("augmentation").get<std::string>();
    // Fail at load time rather than halfway through a run.
    (void)fill_template(p.insert_generation,
                        {{"question", ""}, {"sql_query", ""}, {"sql_context", ""}, {"error_info", ""}});
    (void)fill_template(p.self_correct, {{"sql", ""}, {"error", ""}});
    (void)fill_template(p.similar_error_refine, {{"sql", ""}, {"corrected_sql", ""}, {"sqls", ""}});
    (void)fill_template(p.augmentation, {{"table_info", ""}, {"task_clause", ""}});
    return p;
}

CurationRecord classify_gold(const Sample& sample, int timeout_ms)
{
    ExecutionOutcome outcome;
    try {
        outcome = execute_query(sample.db.readonly(), sample.gold_sql, {timeout_ms, kDefaultRowLimit});
    } catch (const Error& e) {
        return CurationRecord::dropped(sample.id, DropReason::GoldError, std::string(to_string(e.kind())) + ": " + e.what());
    }
    if (outcome.status == ExecStatus::EngineError) {
        return CurationRecord::dropped(sample.id, DropReason::GoldError, outcome.error_message);
    }
    if (outcome.status == ExecStatus::Timeout || outcome.elapsed_ms > timeout_ms) {
        return CurationRecord::dropped(sample.id, DropReason::GoldTimeout,
                                       "gold took longer than " + std::to_string(timeout_ms) + " ms");
    }
    if (outcome.rows.empty()) {
        return CurationRecord::dropped(sample.id, DropReason::EmptyGoldResult, "gold query returned no rows");
    }
    return CurationRecord::kept(sample.id);
}

std::vector<CurationRecord> filter_gold_executable_serial(const std::vector<Sample>& dataset, int timeout_ms)
{
    std::vector<CurationRecord> records;
    records.reserve(dataset.size());
    for (const auto& s : dataset) records.push_back(classify_gold(s, timeout_ms));
    return records;
}

std::vector<CurationRecord> filter_gold_executable(const std::vector<Sample>& dataset, int timeout_ms, int threads)
{
    std::vector<CurationRecord> records(dataset.size());
    const int team = threads > 0 ? threads : omp_get_max_threads();
    const auto n = static_cast<std::ptrdiff_t>(dataset.size());
    // classify_gold does not throw.
#pragma omp parallel for num_threads(team) schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        records[static_cast<std::size_t>(i)] = classify_gold(dataset[static_cast<std::size_t>(i)], timeout_ms);
    }
    return records;
}

std::optional<SynthesisBlocks> parse_synthesis_response(std::string_view response)
{
    auto context = find_block(response, "sql_context");
    auto query = find_block(response, "sql_query");
    auto insert = find_block(response, "sql_insert");
    if (!context || !query || !insert) return std::nullopt;
    return SynthesisBlocks{std::move(*context), std::move(*query), std::move(*insert)};
}

SynthesisResult synthesize_inserts(const Sample& sample, CompletionProvider& provider, const SynthesisOptions& options,
                                   const CurationPrompts& prompts)
{
    if (!sample.schema_sql || trim(*sample.schema_sql).empty()) {
        throw Error(ErrorKind::InvalidInput, "sample '" + sample.id + "' has no schema_sql");
    }
    SynthesisResult result;
    result.original = sample;
    result.sample = sample;
    std::vector<std::string> errors;
    const ExecOptions exec{options.timeout_ms, kDefaultRowLimit};

    for (int round = 1; round <= options.max_rounds; ++round) {
        const auto prompt = fill_template(prompts.insert_generation, {{"question", sample.question},
                                                                      {"sql_query", sample.gold_sql},
                                                                      {"sql_context", *sample.schema_sql},
                                                                      {"error_info", error_info_text(errors)}});
        const auto completions = provider.complete({prompt, options.temperature, 1});
        ++result.provider_calls;

        const auto blocks = completions.empty() ? std::nullopt : parse_synthesis_response(completions.front());
        if (!blocks) {
            errors.push_back(describe_round(round, "MalformedProviderResponse: the reply must contain the "
                                                   "sql_context, sql_query and sql_insert blocks"));
            continue;
        }
        const auto context = blocks->sql_context.empty() ? *sample.schema_sql : blocks->sql_context;
        const auto query = blocks->sql_query.empty() ? sample.gold_sql : blocks->sql_query;

        const auto db = create_database(sample.db.path());
        auto run = [&](const std::string& script, const char* what) {
            const auto statements = split_statements(script);
            const auto outcomes = execute_script(db, statements, exec);
            if (!outcomes.empty() && !outcomes.back().ok()) {
                errors.push_back(describe_round(round, std::string(what) + " failed: " + outcomes.back().error_message));
                return false;
            }
            return true;
        };
        if (!run(context, "executing sql_context") || !run(blocks->sql_insert, "executing INSERT statements")) continue;

        const auto gold = execute_query(db.readonly(), query, exec);
        if (!valid_result(gold)) {
            errors.push_back(describe_round(round, "executing sql_query: " + outcome_error(gold)));
            continue;
        }
        result.success = true;
        result.sample.schema_sql = context;
        result.sample.gold_sql = query;
        result.sample.db = db.readonly();
        break;
    }
    result.error_info = error_info_text(errors);
    return result;
}

void TableCountDistribution::validate() const
{
    if (noise_width < 0) throw Error(ErrorKind::InvalidInput, "noise_width must be non-negative");
    bool positive = false;
    for (const auto& [count, freq] : histogram) {
        if (freq < 0.0) throw Error(ErrorKind::InvalidInput, "histogram frequencies must be non-negative");
        positive = positive || freq > 0.0;
    }
    if (!positive) throw Error(ErrorKind::InvalidInput, "histogram needs at least one positive bin");
}

int TableCountDistribution::draw(SplitMix64& rng) const
{
    validate();
    std::vector<int> counts;
    std::vector<double> weights;
    for (const auto& [count, freq] : histogram) {
        counts.push_back(count);
        weights.push_back(freq);
    }
    const int base = counts[rng.categorical(weights)];
    const int noise = static_cast<int>(rng.uniform_int(-noise_width, noise_width));
    return std::max(1, base + noise);
}

TableCountDistribution TableCountDistribution::from_json(const nlohmann::json& j)
{
    TableCountDistribution d;
    const auto& h = j.contains("histogram") ? j.at("histogram") : j;
    for (const auto& [key, value] : h.items()) d.histogram[std::stoi(key)] = value.get<double>();
    d.noise_width = j.value("noise_width", 1);
    d.validate();
    return d;
}

std::vector<SchemaPoolEntry> read_schema_pool(const std::filesystem::path& path)
{
    std::vector<SchemaPoolEntry> pool;
    for (const auto& j : read_jsonl(path)) {
        pool.push_back({j.value("domain", std::string()), j.at("table_schema").get<std::string>()});
    }
    return pool;
}

std::vector<std::string> extract_table_names(std::string_view schema_sql)
{
    static const std::regex kCreate(
        R"re(CREATE\s+(?:TEMP\s+|TEMPORARY\s+)?TABLE\s+(?:IF\s+NOT\s+EXISTS\s+)?(?:(?:\w+|"[^"]+"|`[^`]+`|\[[^\]]+\])\s*\.\s*)?("([^"]+)"|`([^`]+)`|\[([^\]]+)\]|(\w+)))re",
        std::regex::icase | std::regex::ECMAScript);
    std::vector<std::string> names;
    const std::string text(schema_sql);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kCreate); it != std::sregex_iterator(); ++it) {
        for (int g = 2; g <= 5; ++g) {
            if ((*it)[g].matched) {
                names.push_back((*it)[g].str());
                break;
            }
        }
    }
    return names;
}

DistractorResult add_distractor_tables(const Sample& sample, const std::vector<SchemaPoolEntry>& pool,
                                       const TableCountDistribution& dist, std::uint64_t seed)
{
    DistractorResult result{sample, 0, {}};
    const auto existing = sample.schema_sql ? extract_table_names(*sample.schema_sql) : std::vector<std::string>{};
    if (existing.empty()) return result;

    SplitMix64 rng(seed);
    result.drawn_tables = dist.draw(rng);
    const auto wanted = static_cast<std::size_t>(result.drawn_tables - 1);

    std::set<std::string> taken;
    for (const auto& name : existing) taken.insert(lower(name));

    const std::string domain = sample.domain.value_or("");
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].domain == domain) order.push_back(i);
    }
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
        std::swap(order[i - 1], order[j]);
    }

    std::vector<std::string> chosen;
    for (std::size_t idx : order) {
        if (chosen.size() == wanted) break;
        const auto names = extract_table_names(pool[idx].table_schema);
        if (names.empty()) continue;
        const bool conflict = std::any_of(names.begin(), names.end(),
                                          [&](const std::string& n) { return taken.count(lower(n)) > 0; });
        if (conflict) continue;
        for (const auto& n : names) {
            taken.insert(lower(n));
            result.added_tables.push_back(n);
        }
        chosen.push_back(pool[idx].table_schema);
    }
    if (chosen.empty()) return result;

    materialize_with_distractors(sample.db, chosen, kDefaultTimeoutMs);
    std::string schema;
    for (const auto& c : chosen) schema += trim(c) + "\n";
    result.sample.schema_sql = schema + *sample.schema_sql;
    return result;
}

CurationRecord final_selection(const Sample& sample, int timeout_ms)
{
    const auto length = normalize_whitespace(sample.gold_sql).size();
    if (length <= kMinGoldLength) {
        return CurationRecord::dropped(sample.id, DropReason::TooShort,
                                       "gold is " + std::to_string(length) + " characters (needs > 160)");
    }
    return classify_gold(sample, timeout_ms);
}

ModelFilterResult model_filter(const std::vector<Sample>& dataset, CompletionProvider& provider,
                               const ModelFilterOptions& options, const eval::PromptSpec& spec)
{
    ModelFilterResult result;
    RewardOptions reward;
    reward.timeout_ms = options.timeout_ms;
    for (const auto& sample : dataset) {
        CanonicalResult gold;
        try {
            gold = gold_result(sample.db, sample.gold_sql, reward);
        } catch (const Error& e) {
            result.records.push_back(CurationRecord::dropped(sample.id, DropReason::GoldError, e.what()));
            continue;
        }
        const auto prompt = eval::render_prompt(sample, spec, eval::schema_text(sample.db));

        std::vector<std::string> completions;
        try {
            while (completions.size() < static_cast<std::size_t>(options.k)) {
                const auto batch = provider.complete(
                    {prompt, options.temperature, options.k - static_cast<int>(completions.size())});
                if (batch.empty()) break;
                for (const auto& c : batch) {
                    if (completions.size() < static_cast<std::size_t>(options.k)) completions.push_back(c);
                }
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ProviderUnavailable) throw;
            result.aborted = true;
            result.abort_detail = "sample '" + sample.id + "': " + e.what();
            return result;
        }

        std::optional<std::size_t> hit;
        for (std::size_t i = 0; i < completions.size() && !hit; ++i) {
            if (score_against({completions[i]}, gold, sample.db, reward).tier == RewardTier::Correct) hit = i;
        }
        if (hit) {
            result.records.push_back(CurationRecord::kept(
                sample.id, "first correct generation: " + std::to_string(*hit + 1) + " of " +
                               std::to_string(completions.size())));
        } else {
            result.records.push_back(CurationRecord::dropped(
                sample.id, DropReason::NoModelSuccess,
                "0 of " + std::to_string(completions.size()) + " generations correct"));
        }
    }
    return result;
}

std::optional<std::string> parse_corrected_sql(std::string_view response)
{
    std::optional<std::string> fenced;
    for (const auto& f : fenced_blocks(response)) {
        if ((f.lang == "sql" || f.lang == "sqlite" || f.lang.empty()) && !f.body.empty()) fenced = f.body;
    }
    if (fenced) return fenced;

    static constexpr std::string_view kDescription = "-- Description:";
    const auto pos = response.rfind(kDescription);
    if (pos != std::string_view::npos) {
        const auto eol = response.find('\n', pos);
        if (eol == std::string_view::npos) return std::nullopt;
        auto sql = trim(response.substr(eol + 1));
        if (sql.empty()) return std::nullopt;
        return sql;
    }
    const auto body = trim(response);
    const auto head = lower(body.substr(0, 6));
    if (head.starts_with("select") || head.starts_with("with")) return body;
    return std::nullopt;
}

std::vector<std::string> parse_refined_sqls(std::string_view response)
{
    static constexpr std::string_view kDescription = "-- Description:";
    std::vector<std::string> out;
    // Drop fence lines so "-- Description:" sections inside fences still split.
    std::string cleaned;
    std::size_t start = 0;
    while (start < response.size()) {
        auto nl = response.find('\n', start);
        if (nl == std::string_view::npos) nl = response.size();
        const auto line = response.substr(start, nl - start);
        if (!trim(line).starts_with("```")) {
            cleaned.append(line);
            cleaned += '\n';
        }
        start = nl + 1;
    }
    std::size_t pos = cleaned.find(kDescription);
    if (pos == std::string::npos) {
        for (const auto& f : fenced_blocks(response)) {
            if ((f.lang == "sql" || f.lang == "sqlite") && !f.body.empty()) out.push_back(f.body);
        }
        return out;
    }
    while (pos != std::string::npos) {
        const auto next = cleaned.find(kDescription, pos + kDescription.size());
        const auto eol = cleaned.find('\n', pos);
        if (eol != std::string::npos && (next == std::string::npos || eol < next)) {
            auto sql = trim(std::string_view(cleaned).substr(eol + 1, (next == std::string::npos ? cleaned.size() : next) - eol - 1));
            if (!sql.empty()) out.push_back(std::move(sql));
        }
        pos = next;
    }
    return out;
}

SelfCorrectResult self_correct_workflow(const std::vector<std::string>& sqls, const DatabaseRef& db,
                                        CompletionProvider& provider, int max_try, const CurationPrompts& prompts,
                                        int timeout_ms)
{
    SelfCorrectResult result;
    const ExecOptions exec{timeout_ms, kDefaultRowLimit};
    std::vector<std::string> queue(sqls.begin(), sqls.end());

    while (!queue.empty()) {
        const std::string sql = queue.front();
        queue.erase(queue.begin());
        auto outcome = execute_query(db.readonly(), sql, exec);
        if (valid_result(outcome)) {
            result.results.push_back({sql, std::move(outcome.rows)});
            continue;
        }

        std::optional<std::string> corrected;
        std::string attempt = sql;
        for (int tries = max_try; tries > 0 && !valid_result(outcome); --tries) {
            const auto prompt = fill_template(prompts.self_correct, {{"sql", attempt}, {"error", outcome_error(outcome)}});
            const auto reply = provider.complete({prompt, 0.0, 1});
            ++result.correction_calls;
            const auto parsed = reply.empty() ? std::nullopt : parse_corrected_sql(reply.front());
            if (!parsed) continue;
            attempt = *parsed;
            outcome = execute_query(db.readonly(), attempt, exec);
            if (valid_result(outcome)) corrected = attempt;
        }
        if (!corrected) continue;

        if (!queue.empty()) {
            const nlohmann::json listing = queue;
            const auto prompt = fill_template(prompts.similar_error_refine,
                                              {{"sql", sql}, {"corrected_sql", *corrected}, {"sqls", listing.dump()}});
            const auto reply = provider.complete({prompt, 0.0, 1});
            ++result.refinement_calls;
            if (!reply.empty()) {
                auto refined = parse_refined_sqls(reply.front());
                if (!refined.empty()) queue = std::move(refined);
            }
        }
        result.results.push_back({*corrected, std::move(outcome.rows)});
    }
    return result;
}

std::string render_augmentation_prompt(const std::vector<TableInfo>& tables, const std::optional<std::string>& task,
                                       const std::optional<std::string>& answer, const CurationPrompts& prompts)
{
    std::string info = "Table information:";
    for (const auto& t : tables) {
        std::string columns;
        for (const auto& c : t.columns) columns += (columns.empty() ? "" : ", ") + c;
        std::string descriptions;
        for (const auto& d : t.column_descriptions) descriptions += (descriptions.empty() ? "" : ", ") + d;
        info += "\nTable name: " + t.name + "\nColumn name: " + columns + "\nColumn description: " + descriptions +
                "\nSample rows: " + t.sample_rows;
    }
    std::string clause;
    if (task) {
        clause = "Task: " + *task + ".";
        if (answer) clause += " The answer to the task is: " + *answer + ".";
        clause += "\n\n";
    }
    return fill_template(prompts.augmentation, {{"table_info", info}, {"task_clause", clause}});
}

std::vector<AugmentedQuery> parse_augmentation_response(std::string_view response)
{
    std::string text;
    const auto fences = fenced_blocks(response);
    if (fences.empty()) {
        text = std::string(response);
    } else {
        for (const auto& f : fences) text += f.body + "\n";
    }
    static constexpr std::string_view kTask = "/*Task:";
    std::vector<AugmentedQuery> out;
    auto pos = text.find(kTask);
    while (pos != std::string::npos) {
        const auto close = text.find("*/", pos);
        if (close == std::string::npos) break;
        const auto next = text.find(kTask, close);
        AugmentedQuery q;
        q.task = trim(std::string_view(text).substr(pos + kTask.size(), close - pos - kTask.size()));
        q.sql = trim(std::string_view(text).substr(close + 2, (next == std::string::npos ? text.size() : next) - close - 2));
        if (!q.sql.empty()) out.push_back(std::move(q));
        pos = next;
    }
    return out;
}

} // namespace sqlrl::curation
